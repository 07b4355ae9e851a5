#include "skillproof/error.hpp"

namespace skillproof {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingManifest: return "MissingManifest";
    case ErrorCode::kMalformedManifest: return "MalformedManifest";
    case ErrorCode::kUnknownKind: return "UnknownKind";
    case ErrorCode::kMalformedPattern: return "MalformedPattern";
    case ErrorCode::kMalformedEnvelope: return "MalformedEnvelope";
    case ErrorCode::kMalformedPack: return "MalformedPack";
    case ErrorCode::kNonCanonicalizable: return "NonCanonicalizable";
    case ErrorCode::kBoundTooLarge: return "BoundTooLarge";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kLayerFailed: return "LayerFailed";
    case ErrorCode::kMissingBundleFile: return "MissingBundleFile";
    case ErrorCode::kKeyError: return "KeyError";
    case ErrorCode::kEntropyUnavailable: return "EntropyUnavailable";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace skillproof
