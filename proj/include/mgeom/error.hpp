#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mgeom {

enum class ErrorCode {
  InvalidInput,
  NotPsd,
  InsufficientPoints,
  UndefinedCorrelation,
  DegenerateManifold,
  DegenerateNeighborhood,
  FitFailure,
  UnreliableEstimate,
  InvalidCurvature,
  InvalidSchedule,
  EmptyPool,
  IncompletePool,
  InvalidState,
  TrainingDiverged,
  Io,
  Parse,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace mgeom
