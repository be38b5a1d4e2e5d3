#pragma once

#include <stdexcept>
#include <string>

namespace flagcurv {

// Numeric values are part of the C API contract (fc_status).
enum class ErrorCode : int {
  ok = 0,
  parameter = 1,
  structure = 2,
  decomposition = 3,
  convexity = 4,
  domain = 5,
  precondition = 6,
  numerical = 7,
  io = 8,
  internal = 9,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define FLAGCURV_DEFINE_ERROR(Name, Code)                         \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(Code, what) {} \
  };

FLAGCURV_DEFINE_ERROR(ParameterError, ErrorCode::parameter)
FLAGCURV_DEFINE_ERROR(StructureError, ErrorCode::structure)
FLAGCURV_DEFINE_ERROR(DecompositionError, ErrorCode::decomposition)
FLAGCURV_DEFINE_ERROR(ConvexityError, ErrorCode::convexity)
FLAGCURV_DEFINE_ERROR(DomainError, ErrorCode::domain)
FLAGCURV_DEFINE_ERROR(PreconditionError, ErrorCode::precondition)
FLAGCURV_DEFINE_ERROR(NumericalError, ErrorCode::numerical)
FLAGCURV_DEFINE_ERROR(IoError, ErrorCode::io)

#undef FLAGCURV_DEFINE_ERROR

}  // namespace flagcurv
