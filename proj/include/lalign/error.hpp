#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lalign {

enum class ErrorCode {
  // geometry
  NotPositiveDefinite,
  NonFinite,
  DimMismatch,
  EigFailure,
  EmptyInput,
  // signal / features
  InvalidBand,
  WindowOutOfRange,
  DegenerateCovariance,
  SingularCovariance,
  // alignment / selection
  CardinalityMismatch,
  MissingClass,
  UnknownLabel,
  KTooLarge,
  // file formats
  BadMagic,
  UnsupportedVersion,
  TruncatedHeader,
  TruncatedPayload,
  TrailingBytes,
  NonFinitePayload,
  BadLabelFile,
  BadManifest,
  BadReport,
  Io,
  // statistics
  TooFewPoints,
  ZeroVariance,
  // configuration
  InvalidConfig,
};

/// Errors caused by the caller's configuration (exit code 2) versus by the
/// data itself (exit code 3).
enum class ErrorCategory { Config, Data };

std::string_view error_code_name(ErrorCode code);
ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> byte_offset = std::nullopt)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message),
        byte_offset_(byte_offset) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return error_category(code_); }
  /// The message without the code-name prefix.
  const std::string& detail() const noexcept { return detail_; }
  /// Position of the problem in a binary file, when there is one.
  std::optional<std::size_t> byte_offset() const noexcept { return byte_offset_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> byte_offset_;
};

}  // namespace lalign
