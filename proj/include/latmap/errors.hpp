#pragma once

#include <stdexcept>
#include <string>

namespace latmap {

// Failure categories; the CLI maps each to a distinct process exit code.
enum class errc {
  io = 1,
  parse,
  validation,
  degenerate,
  disconnected,
  solver,
  config,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

}  // namespace latmap
