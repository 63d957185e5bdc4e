#include "reenact/error.hpp"

namespace reenact {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::BlobSizeMismatch: return "BlobSizeMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::TooFewVertices: return "TooFewVertices";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::EmptyClip: return "EmptyClip";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::InvalidStats: return "InvalidStats";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace reenact
