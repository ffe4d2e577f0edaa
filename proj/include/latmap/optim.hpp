#pragma once

#include <functional>
#include <vector>

namespace latmap {

struct NelderMeadOptions {
  int max_evals = 200;
  double initial_step = 0.25;
  double x_tol = 1e-6;  // simplex diameter stop
  double f_tol = 1e-12; // spread of simplex values stop
};

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  int evaluations = 0;
};

// Standard derivative-free simplex search; dimension taken from x0.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0, const NelderMeadOptions& opts);

}  // namespace latmap
