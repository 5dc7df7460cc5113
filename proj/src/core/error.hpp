#pragma once

#include <stdexcept>
#include <string>

namespace flowsentry {

enum class ErrorCode {
  invalid_argument,
  io,
  parse,
  infeasible,
  numerical,
  undefined,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Requested class ratio cannot be met by subsampling without replacement.
class InfeasibleRatio : public Error {
 public:
  InfeasibleRatio(const std::string& what, double nearest_benign_ratio)
      : Error(ErrorCode::infeasible, what), nearest_(nearest_benign_ratio) {}

  double nearest_benign_ratio() const noexcept { return nearest_; }

 private:
  double nearest_;
};

}  // namespace flowsentry
