#include "skillproof/manifest.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "skillproof/crypto.hpp"
#include "skillproof/error.hpp"

namespace skillproof {

namespace fs = std::filesystem;

std::string_view to_string(VerificationLevel level) {
  switch (level) {
    case VerificationLevel::kUnverified: return "unverified";
    case VerificationLevel::kDeclared: return "declared";
    case VerificationLevel::kTested: return "tested";
    case VerificationLevel::kFormal: return "formal";
  }
  return "unverified";
}

std::optional<VerificationLevel> parse_verification_level(std::string_view text) {
  if (text == "unverified") return VerificationLevel::kUnverified;
  if (text == "declared") return VerificationLevel::kDeclared;
  if (text == "tested") return VerificationLevel::kTested;
  if (text == "formal") return VerificationLevel::kFormal;
  return std::nullopt;
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedManifest, what);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Parses token strings into a sorted set, rejecting duplicates under the
// canonical form.
std::vector<CapabilityToken> parse_caps(const std::vector<std::string>& texts,
                                        const Vocabulary& vocab) {
  std::vector<CapabilityToken> caps;
  std::set<std::string> seen;
  for (const auto& text : texts) {
    CapabilityToken tok = [&] {
      try {
        return parse_capability_token(text, vocab);
      } catch (const Error& e) {
        malformed("bad capability token '" + text + "': " + e.what());
      }
    }();
    if (!seen.insert(tok.to_string()).second) {
      malformed("duplicate capability '" + tok.to_string() + "'");
    }
    caps.push_back(std::move(tok));
  }
  std::sort(caps.begin(), caps.end(),
            [](const CapabilityToken& a, const CapabilityToken& b) {
              return a.to_string() < b.to_string();
            });
  return caps;
}

const Json& require(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(std::string("missing required field '") + key + "'");
  return *it;
}

std::vector<std::string> string_list(const Json& j, const char* what) {
  if (!j.is_array()) malformed(std::string(what) + " must be an array");
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) malformed(std::string(what) + " entries must be strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

void require_exact_keys(const Json& obj, std::initializer_list<const char*> keys,
                        const char* where) {
  if (!obj.is_object()) malformed(std::string(where) + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* allowed) { return k == allowed; })) {
      malformed(std::string("unexpected field '") + k + "' in " + where);
    }
  }
}

}  // namespace

Manifest manifest_from_json(const Json& json, const Vocabulary& vocab) {
  require_exact_keys(json, {"id", "label", "caps", "verification", "version", "signer"},
                     "manifest");
  Manifest m;

  const auto& id = require(json, "id");
  if (!id.is_string() || id.get<std::string>().empty()) malformed("id must be a non-empty string");
  m.id = id.get<std::string>();

  const auto& label = require(json, "label");
  require_exact_keys(label, {"rank", "compartments", "releasability"}, "label");
  const auto& rank = require(label, "rank");
  if (!rank.is_string()) malformed("label.rank must be a string");
  m.label.rank = rank.get<std::string>();
  m.label.compartments = string_list(require(label, "compartments"), "label.compartments");
  m.label.releasability = string_list(require(label, "releasability"), "label.releasability");

  m.caps = parse_caps(string_list(require(json, "caps"), "caps"), vocab);

  const auto& verification = require(json, "verification");
  if (!verification.is_string()) malformed("verification must be a string");
  auto level = parse_verification_level(verification.get<std::string>());
  if (!level) malformed("unknown verification level '" + verification.get<std::string>() + "'");
  m.verification = *level;

  const auto& version = require(json, "version");
  if (version.is_number_unsigned()) {
    m.version = version.get<std::uint64_t>();
  } else if (version.is_number_integer() && version.get<std::int64_t>() >= 0) {
    m.version = static_cast<std::uint64_t>(version.get<std::int64_t>());
  } else {
    malformed("version must be a non-negative integer");
  }

  const auto& signer = require(json, "signer");
  if (!signer.is_string()) malformed("signer must be a string");
  m.signer = signer.get<std::string>();
  return m;
}

Manifest manifest_from_json_text(std::string_view text, const Vocabulary& vocab) {
  Json json;
  try {
    json = Json::parse(text.begin(), text.end());
  } catch (const Json::exception& e) {
    malformed(std::string("skill.json is not valid JSON: ") + e.what());
  }
  return manifest_from_json(json, vocab);
}

Manifest manifest_from_skill_md(std::string_view text, const std::string& fallback_id,
                                const Vocabulary& vocab) {
  // Front-matter is the block between a leading "---" line and the next one.
  auto first_line_end = text.find('\n');
  auto strip_cr = [](std::string_view s) {
    if (s.ends_with('\r')) s.remove_suffix(1);
    return s;
  };
  if (first_line_end == std::string_view::npos || strip_cr(text.substr(0, first_line_end)) != "---") {
    malformed("SKILL.md has no YAML front-matter");
  }
  std::size_t pos = first_line_end + 1;
  std::size_t end = std::string_view::npos;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = strip_cr(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (line == "---") {
      end = pos;
      break;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (end == std::string_view::npos) malformed("unterminated YAML front-matter in SKILL.md");
  auto yaml_text = std::string(text.substr(first_line_end + 1, end - first_line_end - 1));

  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    malformed(std::string("bad YAML front-matter: ") + e.what());
  }
  if (!root.IsMap()) malformed("front-matter must be a mapping");
  auto caps_node = root["caps"];
  if (!caps_node) malformed("front-matter has no caps field");
  if (!caps_node.IsSequence()) malformed("caps must be a list");

  std::vector<std::string> texts;
  for (const auto& item : caps_node) {
    if (!item.IsScalar()) malformed("caps entries must be scalars");
    texts.push_back(item.as<std::string>());
  }

  Manifest m;
  m.id = fallback_id;
  for (const char* key : {"id", "name"}) {
    if (auto n = root[key]; n && n.IsScalar() && !n.as<std::string>().empty()) {
      m.id = n.as<std::string>();
      break;
    }
  }
  if (m.id.empty()) malformed("manifest id is empty");
  m.label.rank = "public";
  m.caps = parse_caps(texts, vocab);
  return m;
}

Manifest parse_manifest(const fs::path& source_dir, const Vocabulary& vocab) {
  const auto json_path = source_dir / "skill.json";
  if (fs::is_regular_file(json_path)) return manifest_from_json_text(read_file(json_path), vocab);
  const auto md_path = source_dir / "SKILL.md";
  if (fs::is_regular_file(md_path)) {
    auto dir_name = fs::weakly_canonical(source_dir).filename().string();
    return manifest_from_skill_md(read_file(md_path), dir_name, vocab);
  }
  throw Error(ErrorCode::kMissingManifest,
              "no skill.json or SKILL.md in " + source_dir.string());
}

Json to_json(const Manifest& m) {
  Json caps = Json::array();
  for (const auto& c : m.caps) caps.push_back(c.to_string());
  return Json{{"id", m.id},
              {"label",
               {{"rank", m.label.rank},
                {"compartments", m.label.compartments},
                {"releasability", m.label.releasability}}},
              {"caps", caps},
              {"verification", std::string(to_string(m.verification))},
              {"version", m.version},
              {"signer", m.signer}};
}

std::string manifest_hash(const Manifest& manifest) { return canonical_hash(to_json(manifest)); }

}  // namespace skillproof
