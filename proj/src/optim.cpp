#include "latmap/optim.hpp"

#include <algorithm>
#include <cmath>

namespace latmap {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0, const NelderMeadOptions& opts) {
  const size_t n = x0.size();
  NelderMeadResult res;
  res.x = x0;
  if (n == 0) {
    res.fx = f(x0);
    res.evaluations = 1;
    return res;
  }

  struct Pt {
    std::vector<double> x;
    double fx;
  };
  std::vector<Pt> s;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    return f(x);
  };
  s.push_back({x0, eval(x0)});
  for (size_t i = 0; i < n; ++i) {
    auto x = x0;
    x[i] += opts.initial_step;
    s.push_back({x, eval(x)});
  }
  auto by_value = [](const Pt& a, const Pt& b) { return a.fx < b.fx; };
  std::sort(s.begin(), s.end(), by_value);

  while (res.evaluations < opts.max_evals) {
    double diam = 0.0;
    for (size_t i = 1; i <= n; ++i)
      for (size_t d = 0; d < n; ++d)
        diam = std::max(diam, std::fabs(s[i].x[d] - s[0].x[d]));
    if (diam <= opts.x_tol && std::fabs(s[n].fx - s[0].fx) <= opts.f_tol) break;

    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t d = 0; d < n; ++d) centroid[d] += s[i].x[d] / double(n);

    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (size_t d = 0; d < n; ++d)
        x[d] = centroid[d] + coef * (s[n].x[d] - centroid[d]);
      return x;
    };

    auto xr = blend(-1.0);
    double fr = eval(xr);
    if (fr < s[0].fx) {
      auto xe = blend(-2.0);
      double fe = eval(xe);
      if (fe < fr) s[n] = {xe, fe};
      else s[n] = {xr, fr};
    } else if (fr < s[n - 1].fx) {
      s[n] = {xr, fr};
    } else {
      auto xc = blend(fr < s[n].fx ? -0.5 : 0.5);
      double fc = eval(xc);
      if (fc < std::min(fr, s[n].fx)) {
        s[n] = {xc, fc};
      } else {
        for (size_t i = 1; i <= n; ++i) {
          for (size_t d = 0; d < n; ++d) s[i].x[d] = 0.5 * (s[i].x[d] + s[0].x[d]);
          s[i].fx = eval(s[i].x);
        }
      }
    }
    std::sort(s.begin(), s.end(), by_value);
  }

  res.x = s[0].x;
  res.fx = s[0].fx;
  return res;
}

}  // namespace latmap
