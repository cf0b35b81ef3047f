#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ckframe {

enum class ErrorCode {
  NotHermitian,
  NotPSD,
  RankAmbiguous,
  DimMismatch,
  NonFinite,
  EmptySpace,
  LengthMismatch,
  NonPositiveWeight,
  SpaceMismatch,
  RangeNotIncluded,
  NotInvertibleOnRange,
  DegenerateOperator,
  CanonicalDualFailed,
  NotADualPair,
  ParseError,
  ValidationError,
  UnknownKind,
  BadParams,
  UnknownCommand,
};

constexpr std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::RankAmbiguous: return "RankAmbiguous";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptySpace: return "EmptySpace";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::RangeNotIncluded: return "RangeNotIncluded";
    case ErrorCode::NotInvertibleOnRange: return "NotInvertibleOnRange";
    case ErrorCode::DegenerateOperator: return "DegenerateOperator";
    case ErrorCode::CanonicalDualFailed: return "CanonicalDualFailed";
    case ErrorCode::NotADualPair: return "NotADualPair";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can report the originating error by name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace ckframe
