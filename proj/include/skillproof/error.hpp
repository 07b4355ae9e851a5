#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skillproof {

enum class ErrorCode {
  kMissingManifest,
  kMalformedManifest,
  kUnknownKind,
  kMalformedPattern,
  kMalformedEnvelope,
  kMalformedPack,
  kNonCanonicalizable,
  kBoundTooLarge,
  kInvalidArgument,
  kLayerFailed,
  kMissingBundleFile,
  kKeyError,
  kEntropyUnavailable,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; the code carries the taxonomy.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace skillproof
