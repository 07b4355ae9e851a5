#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillproof/canonical_json.hpp"
#include "skillproof/capability.hpp"

namespace skillproof {

enum class VerificationLevel { kUnverified = 0, kDeclared = 1, kTested = 2, kFormal = 3 };

std::string_view to_string(VerificationLevel level);
std::optional<VerificationLevel> parse_verification_level(std::string_view text);

struct SecurityLabel {
  std::string rank;
  std::vector<std::string> compartments;
  std::vector<std::string> releasability;
  bool operator==(const SecurityLabel&) const = default;
};

struct Manifest {
  std::string id;
  SecurityLabel label;
  std::vector<CapabilityToken> caps;  // D; sorted, duplicate-free
  VerificationLevel verification = VerificationLevel::kUnverified;
  std::uint64_t version = 0;
  std::string signer;

  std::vector<CapabilityKind> kinds() const { return kinds_of(caps); }
  bool operator==(const Manifest&) const = default;
};

/// Resolves the manifest in `source_dir`: skill.json wins over the `caps:`
/// front-matter of SKILL.md. Throws Error(kMissingManifest) or
/// Error(kMalformedManifest).
Manifest parse_manifest(const std::filesystem::path& source_dir,
                        const Vocabulary& vocab = Vocabulary::standard());

/// Strict skill.json parser: exactly the six top-level fields, no duplicates
/// in caps.
Manifest manifest_from_json(const Json& json, const Vocabulary& vocab = Vocabulary::standard());
Manifest manifest_from_json_text(std::string_view text,
                                 const Vocabulary& vocab = Vocabulary::standard());

/// Reads SKILL.md front-matter. `fallback_id` is used when no `name`/`id`
/// key is present.
Manifest manifest_from_skill_md(std::string_view text, const std::string& fallback_id,
                                const Vocabulary& vocab = Vocabulary::standard());

Json to_json(const Manifest& manifest);

/// SHA-256 of canonicalize(to_json(manifest)).
std::string manifest_hash(const Manifest& manifest);

}  // namespace skillproof
