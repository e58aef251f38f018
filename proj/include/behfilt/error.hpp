#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace behfilt {

enum class ErrorCode {
  MalformedHeader,
  MalformedRow,
  UnsortedTimestamps,
  TimestampJitter,
  EmptyFile,
  Io,
  UnknownBehaviorName,
  OverlappingIntervals,
  InvalidInterval,
  InvalidParameter,
  SeriesTooShort,
  AllMissing,
  MissingValues,
  EvenWindow,
  CutoffOutOfRange,
  InvalidWindowOrder,
  BadFilterSpec,
  RecordingShorterThanWindow,
  WindowTooShort,
  TooFewFeatures,
  SingleClass,
  EmptyMatrix,
  ShapeMismatch,
  NonFiniteFeature,
  Unsupported,
  ClassTooSmall,
  LengthMismatch,
  InvalidConfig,
  UnknownModel,
  BadModelFile,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnsortedTimestamps: return "UnsortedTimestamps";
    case ErrorCode::TimestampJitter: return "TimestampJitter";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::Io: return "Io";
    case ErrorCode::UnknownBehaviorName: return "UnknownBehaviorName";
    case ErrorCode::OverlappingIntervals: return "OverlappingIntervals";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::MissingValues: return "MissingValues";
    case ErrorCode::EvenWindow: return "EvenWindow";
    case ErrorCode::CutoffOutOfRange: return "CutoffOutOfRange";
    case ErrorCode::InvalidWindowOrder: return "InvalidWindowOrder";
    case ErrorCode::BadFilterSpec: return "BadFilterSpec";
    case ErrorCode::RecordingShorterThanWindow: return "RecordingShorterThanWindow";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::TooFewFeatures: return "TooFewFeatures";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::BadModelFile: return "BadModelFile";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as this exception. what() is
/// prefixed with the code name so CLI diagnostics stay greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace behfilt
