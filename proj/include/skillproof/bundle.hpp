#pragma once

// The proof-carrying evidence bundle: four canonical JSON files under
// evidence/, the last one an Ed25519-signed attestation binding the manifest
// hash to the three evidence hashes.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skillproof/bmc.hpp"
#include "skillproof/canonical_json.hpp"
#include "skillproof/crypto.hpp"
#include "skillproof/dispatch.hpp"
#include "skillproof/error.hpp"
#include "skillproof/manifest.hpp"
#include "skillproof/rule_pack.hpp"
#include "skillproof/static_analysis.hpp"

namespace skillproof {

inline constexpr std::string_view kAttestationSchema = "skillproof/attest@1";
inline constexpr std::string_view kEvidenceDir = "evidence";
inline constexpr std::string_view kStaticFile = "static.json";
inline constexpr std::string_view kTypesFile = "types.proof";
inline constexpr std::string_view kSmtFile = "smt.unsat";
inline constexpr std::string_view kAttestFile = "manifest.attest.json";

struct Bundle {
  std::string static_json;
  std::string types_proof;
  std::string smt_unsat;
  std::string attestation;
};

struct TrustEntry {
  std::string signer_id;
  crypto::Ed25519PublicKey public_key{};
  VerificationLevel max_level = VerificationLevel::kUnverified;
};

struct TrustRoot {
  std::vector<TrustEntry> entries;
  const TrustEntry* find(std::string_view signer_id) const;
};

/// {"entries":[{"signer_id","public_key"(base64),"max_level"}]}. Throws
/// Error(kInvalidArgument) on bad shape or duplicate signer ids.
TrustRoot parse_trust_root(const Json& doc);
/// Throws Error(kIoError) when the file cannot be read.
TrustRoot load_trust_root(const std::filesystem::path& path);
Json to_json(const TrustRoot& root);

// Thrown when a method does not pass during production; `verdict` is that
// method's report.
class LayerFailed : public Error {
 public:
  LayerFailed(std::string layer, Json verdict);
  const std::string& layer() const noexcept { return layer_; }
  const Json& verdict() const noexcept { return verdict_; }

 private:
  std::string layer_;
  Json verdict_;
};

/// Runs the three methods and, if all pass, returns the signed bundle.
/// Throws LayerFailed, or Error(kBoundTooLarge) from Method C.
Bundle build_formal_bundle(const SkillSnapshot& skill, const crypto::Ed25519PrivateKey& key,
                           const std::string& signer_id, int k_max,
                           const std::vector<RulePack>& packs);

void write_bundle(const std::filesystem::path& root, const Bundle& bundle);
/// Throws Error(kMissingBundleFile) naming the first missing slot.
Bundle read_bundle(const std::filesystem::path& root);

/// Reads the skill, builds the bundle and writes it under `out_dir`
/// (normally the skill directory itself).
Bundle produce_formal_bundle(const std::filesystem::path& skill_dir, const Manifest& manifest,
                             const crypto::Ed25519PrivateKey& key, const std::string& signer_id,
                             int k_max, const std::vector<RulePack>& packs,
                             const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct VerifyOutcome {
  VerificationLevel accepted_level = VerificationLevel::kDeclared;
  std::vector<std::string> reasons;
};

/// Re-derives every piece of evidence from the live skill and compares.
VerifyOutcome verify_formal_bundle(const SkillSnapshot& skill, const Bundle& bundle,
                                   const TrustRoot& trust_root, const std::vector<RulePack>& packs);
VerifyOutcome verify_formal_bundle(const std::filesystem::path& skill_dir, const TrustRoot& trust_root,
                                   const std::vector<RulePack>& packs);

Json to_json(const VerifyOutcome& outcome);

}  // namespace skillproof
