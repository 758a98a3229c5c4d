#include "common/error.hpp"

namespace vidial {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::ZeroDim: return "ZeroDim";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyObjectSet: return "EmptyObjectSet";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EpisodeTooShort: return "EpisodeTooShort";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::ContextEmpty: return "ContextEmpty";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::EmptyTarget: return "EmptyTarget";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::EmptyUtterance: return "EmptyUtterance";
    case ErrorCode::NoNegativesAvailable: return "NoNegativesAvailable";
    case ErrorCode::EmptyNBest: return "EmptyNBest";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::SplitOverlap: return "SplitOverlap";
    case ErrorCode::Unbalanced: return "Unbalanced";
    case ErrorCode::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace vidial
