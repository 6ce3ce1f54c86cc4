#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace truckloc {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kParse,
  kDegenerate,
  kNotConverged,
  kReflectorNotFound,
  kWorldFrameInvalid,
  kEmptyCrop,
  kInsufficientEdges,
  kDegenerateGeometry,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when the calibration problem does not constrain some parameters.
class DegeneracyError : public Error {
 public:
  DegeneracyError(const std::string& message, std::vector<std::string> unconstrained)
      : Error(ErrorCode::kDegenerate, message), unconstrained_(std::move(unconstrained)) {}

  const std::vector<std::string>& unconstrained() const noexcept { return unconstrained_; }

 private:
  std::vector<std::string> unconstrained_;
};

}  // namespace truckloc
