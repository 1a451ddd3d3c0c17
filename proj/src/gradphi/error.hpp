#pragma once

#include <stdexcept>
#include <string>

namespace gradphi {

enum class ErrorCode {
  kInvalidArgument = 1,
  kInvalidPotential,
  kQuadratureFailure,
  kBracketNotFound,
  kOrderViolation,
  kInsufficientData,
  kConfig,
  kIo,
  kEstimator,
};

// Every failure in the core surfaces as gradphi::Error; the C layer maps the
// code onto gp_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace gradphi
