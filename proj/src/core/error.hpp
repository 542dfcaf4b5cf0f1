#pragma once

#include <stdexcept>
#include <string>

namespace fgai {

enum class ErrorCode {
  InvalidArgument = 1,
  Io = 2,
  Parse = 3,
  MissingTextureMapping = 4,
  DegenerateGeometry = 5,
  ResampleFailed = 6,
  Numerical = 7,
  Internal = 8,
  Pipeline = 9,
};

/// Exception type thrown by every fgai component. The code survives the trip
/// through the C API as an fgai_status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace fgai
