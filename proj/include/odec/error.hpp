#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace odec {

enum class ErrorCode {
  InvalidTeam,
  UnknownAgent,
  UnknownTeam,
  MalformedRecord,
  EmptyTrajectory,
  UnsupportedModel,
  InvalidAction,
  ExpertStall,
  ShapeError,
  CacheMismatch,
  NonFiniteGradient,
  NonFiniteLogits,
  MalformedBuffer,
  NonFiniteLoss,
  NonFiniteInput,
  EmptyBatch,
  ParseError,
  SchemaError,
  IncompatibleReports,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidTeam: return "InvalidTeam";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::UnknownTeam: return "UnknownTeam";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::UnsupportedModel: return "UnsupportedModel";
    case ErrorCode::InvalidAction: return "InvalidAction";
    case ErrorCode::ExpertStall: return "ExpertStall";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::CacheMismatch: return "CacheMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::NonFiniteLogits: return "NonFiniteLogits";
    case ErrorCode::MalformedBuffer: return "MalformedBuffer";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IncompatibleReports: return "IncompatibleReports";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace odec
