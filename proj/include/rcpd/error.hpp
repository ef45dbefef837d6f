#pragma once

#include <stdexcept>
#include <string>

namespace rcpd {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  Singular,
  NonFinite,
  Io,
  Parse,
};

// All library failures are reported by throwing rcpd::Error. The C API maps
// the code onto rcpd_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) fail(code, what);
}

}  // namespace rcpd
