#pragma once

#include <stdexcept>
#include <string>

namespace relpick {

/// Failure category. The numeric values double as process exit codes.
enum class ErrorKind : int {
  config = 2,      // bad flags, invalid configuration, bad arguments
  data = 3,        // malformed files, shape mismatches, out-of-range values
  size_guard = 4,  // instance too large for exhaustive evaluation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_config(const std::string& msg) { throw Error(ErrorKind::config, msg); }
[[noreturn]] inline void fail_data(const std::string& msg) { throw Error(ErrorKind::data, msg); }
[[noreturn]] inline void fail_size_guard(const std::string& msg) { throw Error(ErrorKind::size_guard, msg); }

}  // namespace relpick
