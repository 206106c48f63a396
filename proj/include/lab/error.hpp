#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lab {

/// Machine-readable failure classes. The CLI maps them onto exit codes.
enum class ErrorCode {
  invalid_argument,
  empty_domain,
  regime,
  schema,
  solver,
  size_limit,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by iterative solvers; carries the last relative residual.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(ErrorCode::solver, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace lab
