#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vidial {

enum class ErrorCode {
  Usage,
  Io,
  BadMagic,
  ZeroDim,
  Truncated,
  TrailingData,
  NonFinite,
  EmptyObjectSet,
  IndexOutOfRange,
  EpisodeTooShort,
  MalformedRecord,
  SpecInvalid,
  ContextEmpty,
  DimMismatch,
  EmptyTarget,
  EmptyDataset,
  VersionMismatch,
  CorruptCheckpoint,
  EmptyUtterance,
  NoNegativesAvailable,
  EmptyNBest,
  ModeMismatch,
  InvalidWeights,
  LengthMismatch,
  InvalidOrder,
  SplitOverlap,
  Unbalanced,
  NumericFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace vidial
