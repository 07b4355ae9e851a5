#include "skillproof/bundle.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#ifndef SKILLPROOF_VERSION
#define SKILLPROOF_VERSION "0.0.0"
#endif

namespace skillproof {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << bytes;
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

Json toolchain() {
  Json arr = Json::array();
  for (auto name : {std::string_view("skillproof"), kStaticAnalyzerName, kDispatchCheckerName,
                    kBmcCheckerName}) {
    arr.push_back({{"name", name}, {"version", SKILLPROOF_VERSION}});
  }
  return arr;
}

// Method outputs as canonical bytes, shared by producer and verifier so both
// sides derive evidence the same way.
std::string static_evidence(const StaticReport& r) { return canonicalize(to_json(r)); }
std::string types_evidence(const TypedDispatchVerdict& v) { return canonicalize(to_json(v)); }
std::string smt_evidence(const BmcVerdict& v) { return canonicalize(to_json(v)); }

BmcVerdict run_method_c(const Manifest& m, int k_max) {
  return method_c(*faithful_runtime(), m.kinds(), k_max);
}

// Parsed attestation; nullopt fields mean the document was unusable.
struct AttestView {
  Json body;  // without "signature"
  std::string signer_id;
  std::string manifest_hash;
  std::map<std::string, std::string> evidence;
  std::optional<std::vector<std::uint8_t>> signature;
};

std::optional<AttestView> parse_attestation(const std::string& bytes) {
  Json doc;
  try {
    doc = parse_json(bytes);
    if (canonicalize(doc) != bytes) return std::nullopt;  // bytes must be canonical
  } catch (const Error&) {
    return std::nullopt;
  }
  static const std::set<std::string> kKeys = {"schema",     "manifest_hash", "verification_level",
                                              "evidence_hashes", "toolchain", "signer_id",
                                              "signature"};
  if (!doc.is_object() || doc.size() != kKeys.size()) return std::nullopt;
  for (const auto& k : kKeys) {
    if (!doc.contains(k)) return std::nullopt;
  }
  if (doc["schema"] != kAttestationSchema || doc["verification_level"] != "formal") return std::nullopt;
  if (!doc["signature"].is_string() || !doc["signer_id"].is_string() ||
      !doc["manifest_hash"].is_string() || !doc["evidence_hashes"].is_object()) {
    return std::nullopt;
  }
  AttestView v;
  v.signature = crypto::base64_decode(doc["signature"].get<std::string>());
  v.signer_id = doc["signer_id"].get<std::string>();
  v.manifest_hash = doc["manifest_hash"].get<std::string>();
  for (const auto& [slot, h] : doc["evidence_hashes"].items()) {
    if (!h.is_string()) return std::nullopt;
    v.evidence[slot] = h.get<std::string>();
  }
  doc.erase("signature");
  v.body = std::move(doc);
  return v;
}

std::string evidence_hash(const AttestView& a, const std::string& slot) {
  auto it = a.evidence.find(slot);
  return it == a.evidence.end() ? std::string() : it->second;
}

}  // namespace

const TrustEntry* TrustRoot::find(std::string_view signer_id) const {
  for (const auto& e : entries) {
    if (e.signer_id == signer_id) return &e;
  }
  return nullptr;
}

TrustRoot parse_trust_root(const Json& doc) {
  auto bad = [](const std::string& what) {
    return Error(ErrorCode::kInvalidArgument, "trust root: " + what);
  };
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw bad("expected {\"entries\": [...]}");
  }
  TrustRoot root;
  std::set<std::string> ids;
  for (const auto& e : doc["entries"]) {
    if (!e.is_object() || !e.contains("signer_id") || !e["signer_id"].is_string() ||
        !e.contains("public_key") || !e["public_key"].is_string() || !e.contains("max_level") ||
        !e["max_level"].is_string()) {
      throw bad("entry needs signer_id, public_key and max_level strings");
    }
    TrustEntry entry;
    entry.signer_id = e["signer_id"].get<std::string>();
    auto key = crypto::base64_decode(e["public_key"].get<std::string>());
    if (!key || key->size() != entry.public_key.size()) {
      throw bad("public key for '" + entry.signer_id + "' is not 32 base64 bytes");
    }
    std::copy(key->begin(), key->end(), entry.public_key.begin());
    auto level = parse_verification_level(e["max_level"].get<std::string>());
    if (!level) throw bad("unknown max_level for '" + entry.signer_id + "'");
    entry.max_level = *level;
    if (!ids.insert(entry.signer_id).second) throw bad("duplicate signer '" + entry.signer_id + "'");
    root.entries.push_back(std::move(entry));
  }
  return root;
}

TrustRoot load_trust_root(const fs::path& path) {
  std::string text = read_file(path);
  try {
    return parse_trust_root(parse_json(text));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonCanonicalizable) {
      throw Error(ErrorCode::kInvalidArgument, "trust root: " + std::string(e.what()));
    }
    throw;
  }
}

Json to_json(const TrustRoot& root) {
  Json entries = Json::array();
  for (const auto& e : root.entries) {
    entries.push_back({{"signer_id", e.signer_id},
                       {"public_key", crypto::base64_encode(e.public_key)},
                       {"max_level", to_string(e.max_level)}});
  }
  return Json{{"entries", entries}};
}

LayerFailed::LayerFailed(std::string layer, Json verdict)
    : Error(ErrorCode::kLayerFailed, layer + " did not pass"),
      layer_(std::move(layer)),
      verdict_(std::move(verdict)) {}

Bundle build_formal_bundle(const SkillSnapshot& skill, const crypto::Ed25519PrivateKey& key,
                           const std::string& signer_id, int k_max,
                           const std::vector<RulePack>& packs) {
  StaticReport a = method_a(skill, packs);
  if (!a.verdict.contained) throw LayerFailed("methodA", to_json(a));
  TypedDispatchVerdict b = method_b(skill.manifest);
  if (!b.pass) throw LayerFailed("methodB", to_json(b));
  BmcVerdict c = run_method_c(skill.manifest, k_max);
  if (!c.unsat) throw LayerFailed("methodC", to_json(c));

  Bundle bundle;
  bundle.static_json = static_evidence(a);
  bundle.types_proof = types_evidence(b);
  bundle.smt_unsat = smt_evidence(c);
  Json body{{"schema", kAttestationSchema},
            {"manifest_hash", manifest_hash(skill.manifest)},
            {"verification_level", "formal"},
            {"evidence_hashes",
             {{"static", crypto::sha256_hex(bundle.static_json)},
              {"types", crypto::sha256_hex(bundle.types_proof)},
              {"smt", crypto::sha256_hex(bundle.smt_unsat)}}},
            {"toolchain", toolchain()},
            {"signer_id", signer_id}};
  auto signature = key.sign(canonicalize(body));
  body["signature"] = crypto::base64_encode(signature);
  bundle.attestation = canonicalize(body);
  return bundle;
}

void write_bundle(const fs::path& root, const Bundle& bundle) {
  fs::path dir = root / kEvidenceDir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / kStaticFile, bundle.static_json);
  write_file(dir / kTypesFile, bundle.types_proof);
  write_file(dir / kSmtFile, bundle.smt_unsat);
  write_file(dir / kAttestFile, bundle.attestation);
}

Bundle read_bundle(const fs::path& root) {
  fs::path dir = root / kEvidenceDir;
  auto slot = [&](std::string_view name) {
    fs::path p = dir / name;
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) {
      throw Error(ErrorCode::kMissingBundleFile, "missing bundle file " + (fs::path(kEvidenceDir) / name).generic_string());
    }
    return read_file(p);
  };
  return Bundle{slot(kStaticFile), slot(kTypesFile), slot(kSmtFile), slot(kAttestFile)};
}

Bundle produce_formal_bundle(const fs::path& skill_dir, const Manifest& manifest,
                             const crypto::Ed25519PrivateKey& key, const std::string& signer_id,
                             int k_max, const std::vector<RulePack>& packs,
                             const std::optional<fs::path>& out_dir) {
  SkillSnapshot skill{manifest, discover_skill_files(skill_dir)};
  Bundle bundle = build_formal_bundle(skill, key, signer_id, k_max, packs);
  write_bundle(out_dir.value_or(skill_dir), bundle);
  return bundle;
}

VerifyOutcome verify_formal_bundle(const SkillSnapshot& skill, const Bundle& bundle,
                                   const TrustRoot& trust_root, const std::vector<RulePack>& packs) {
  VerifyOutcome out;
  auto reason = [&](std::string r) {
    if (std::find(out.reasons.begin(), out.reasons.end(), r) == out.reasons.end()) {
      out.reasons.push_back(std::move(r));
    }
  };

  // (a) manifest and (b) attestation signature + signer authority
  auto attest = parse_attestation(bundle.attestation);
  if (!attest) {
    reason("sig-invalid");
  } else {
    if (attest->manifest_hash != manifest_hash(skill.manifest)) reason("hash-mismatch:manifest");
    const TrustEntry* signer = trust_root.find(attest->signer_id);
    if (signer == nullptr || signer->max_level < VerificationLevel::kFormal) {
      reason("signer-not-authorised");
    } else if (!attest->signature ||
               !crypto::ed25519_verify(signer->public_key, canonicalize(attest->body), *attest->signature)) {
      reason("sig-invalid");
    }
  }
  auto attested = [&](const char* slot) { return attest ? evidence_hash(*attest, slot) : std::string(); };

  // (c) Method A
  if (attest && crypto::sha256_hex(bundle.static_json) != attested("static")) reason("hash-mismatch:static");
  StaticReport a = method_a(skill, packs);
  if (!a.verdict.contained || crypto::sha256_hex(static_evidence(a)) != attested("static")) {
    reason("method-A-cache-miss");
  }

  // (d) Method B
  if (attest && crypto::sha256_hex(bundle.types_proof) != attested("types")) reason("hash-mismatch:types");
  TypedDispatchVerdict b = method_b(skill.manifest);
  if (!b.pass || crypto::sha256_hex(types_evidence(b)) != attested("types")) reason("method-B-fail");

  // (e) Method C at the recorded bound
  if (attest && crypto::sha256_hex(bundle.smt_unsat) != attested("smt")) reason("hash-mismatch:smt");
  std::optional<int> k_max;
  std::string recorded_instance;
  try {
    Json smt = parse_json(bundle.smt_unsat);
    if (smt.is_object() && smt.contains("k_max") && smt["k_max"].is_number_integer()) {
      k_max = smt["k_max"].get<int>();
    }
    if (smt.is_object() && smt.contains("instance_hash") && smt["instance_hash"].is_string()) {
      recorded_instance = smt["instance_hash"].get<std::string>();
    }
  } catch (const std::exception&) {
  }
  if (!k_max) {
    reason("method-C-fail");
  } else {
    if (recorded_instance != bmc_instance_hash(skill.manifest.kinds(), *k_max)) reason("bound-mismatch");
    try {
      BmcVerdict c = run_method_c(skill.manifest, *k_max);
      if (!c.unsat || crypto::sha256_hex(smt_evidence(c)) != attested("smt")) reason("method-C-fail");
    } catch (const Error&) {
      reason("method-C-fail");
    }
  }

  out.accepted_level = out.reasons.empty() ? VerificationLevel::kFormal : VerificationLevel::kDeclared;
  return out;
}

VerifyOutcome verify_formal_bundle(const fs::path& skill_dir, const TrustRoot& trust_root,
                                   const std::vector<RulePack>& packs) {
  Bundle bundle = read_bundle(skill_dir);
  SkillSnapshot skill{parse_manifest(skill_dir), discover_skill_files(skill_dir)};
  return verify_formal_bundle(skill, bundle, trust_root, packs);
}

Json to_json(const VerifyOutcome& outcome) {
  return Json{{"accepted_level", to_string(outcome.accepted_level)}, {"reasons", outcome.reasons}};
}

}  // namespace skillproof
