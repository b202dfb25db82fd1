#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hivead {

enum class ErrorCode {
  FileUnreadable,
  MalformedHeader,
  NonMonotonicTimestamps,
  EmptyTrace,
  UnknownSensor,
  InsufficientData,
  DegenerateStd,
  NoNormalDays,
  InvalidArgument,
  InvalidHyperparameter,
  LengthMismatch,
  ShapeMismatch,
  EmptyDataset,
  EmptyValidation,
  InvalidSchedule,
  MalformedFile,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileUnreadable: return "FileUnreadable";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::UnknownSensor: return "UnknownSensor";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateStd: return "DegenerateStd";
    case ErrorCode::NoNormalDays: return "NoNormalDays";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidHyperparameter: return "InvalidHyperparameter";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyValidation: return "EmptyValidation";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::MalformedFile: return "MalformedFile";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hivead
