#include "lalign/error.hpp"

namespace lalign {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::EigFailure: return "EigFailure";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidBand: return "InvalidBand";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::CardinalityMismatch: return "CardinalityMismatch";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedHeader: return "TruncatedHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::TrailingBytes: return "TrailingBytes";
    case ErrorCode::NonFinitePayload: return "NonFinitePayload";
    case ErrorCode::BadLabelFile: return "BadLabelFile";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::BadReport: return "BadReport";
    case ErrorCode::Io: return "Io";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidBand:
    case ErrorCode::CardinalityMismatch:
    case ErrorCode::KTooLarge:
    case ErrorCode::BadManifest:
    case ErrorCode::TooFewPoints:
    case ErrorCode::InvalidConfig:
      return ErrorCategory::Config;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace lalign
