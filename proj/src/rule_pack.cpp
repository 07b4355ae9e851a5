#include "skillproof/rule_pack.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "skillproof/error.hpp"

namespace skillproof {

// Defined in the generated builtin_packs.cpp.
extern const char* const kBuiltinPackSources[];
extern const std::size_t kBuiltinPackCount;

namespace {

[[noreturn]] void bad_pack(const std::string& what) {
  throw Error(ErrorCode::kMalformedPack, "rule pack: " + what);
}

const Json& field(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) bad_pack(std::string("missing field '") + key + "'");
  return *it;
}

std::string string_field(const Json& obj, const char* key) {
  const Json& v = field(obj, key);
  if (!v.is_string()) bad_pack(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> string_list(const Json& obj, const char* key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end()) return out;
  if (!it->is_array()) bad_pack(std::string("field '") + key + "' must be a list");
  for (const auto& v : *it) {
    if (!v.is_string()) bad_pack(std::string("field '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

ExtractFrom parse_from(const std::string& s) {
  static const std::map<std::string, ExtractFrom> kNames = {
      {"none", ExtractFrom::kNone},
      {"call_arg", ExtractFrom::kCallArg},
      {"shell_url", ExtractFrom::kShellUrl},
      {"shell_next_word", ExtractFrom::kShellNextWord},
      {"shell_path_args", ExtractFrom::kShellPathArgs},
      {"shell_command", ExtractFrom::kShellCommand},
      {"group", ExtractFrom::kGroup},
  };
  auto it = kNames.find(s);
  if (it == kNames.end()) bad_pack("unknown extract source '" + s + "'");
  return it->second;
}

ArgSpec parse_arg_spec(const Json& j) {
  if (!j.is_object()) bad_pack("argument spec must be an object");
  ArgSpec spec;
  spec.from = j.contains("from") ? parse_from(string_field(j, "from")) : ExtractFrom::kCallArg;
  if (j.contains("index")) {
    if (!j["index"].is_number_integer() || j["index"].get<int>() < 0) bad_pack("bad index");
    spec.index = j["index"].get<int>();
  }
  if (j.contains("keyword")) spec.keyword = string_field(j, "keyword");
  return spec;
}

std::string expand_macros(std::string pattern, const std::map<std::string, std::string>& macros) {
  for (int round = 0; round < 4; ++round) {
    bool changed = false;
    for (const auto& [name, body] : macros) {
      std::string needle = "{{" + name + "}}";
      for (auto pos = pattern.find(needle); pos != std::string::npos;
           pos = pattern.find(needle, pos + body.size())) {
        pattern.replace(pos, needle.size(), body);
        changed = true;
      }
    }
    if (!changed) break;
  }
  if (pattern.find("{{") != std::string::npos && pattern.find("}}") != std::string::npos) {
    bad_pack("unknown macro in pattern '" + pattern + "'");
  }
  return pattern;
}

std::shared_ptr<const std::regex> compile(const std::string& pattern, const std::string& rule_id) {
  try {
    return std::make_shared<const std::regex>(
        pattern, std::regex::ECMAScript | std::regex::multiline | std::regex::optimize);
  } catch (const std::regex_error& e) {
    bad_pack("rule '" + rule_id + "': bad pattern: " + e.what());
  }
}

Rule parse_rule(const Json& j, const std::map<std::string, std::string>& macros,
                const Vocabulary& vocab) {
  if (!j.is_object()) bad_pack("rule must be an object");
  Rule r;
  r.id = string_field(j, "id");
  if (r.id.empty()) bad_pack("empty rule id");
  r.pattern = expand_macros(string_field(j, "pattern"), macros);
  r.regex = compile(r.pattern, r.id);
  if (j.contains("requires")) {
    r.requires_regex = compile(expand_macros(string_field(j, "requires"), macros), r.id);
  }
  if (j.contains("view")) {
    auto view = string_field(j, "view");
    if (view != "masked" && view != "stripped") bad_pack("rule '" + r.id + "': bad view");
    r.stripped_view = view == "stripped";
  }
  const Json& emits = field(j, "emits");
  if (emits.is_string()) {
    if (emits.get<std::string>() != "taint") bad_pack("rule '" + r.id + "': bad emits");
    r.emit = Emit::kTaint;
    return r;
  }
  if (!emits.is_object()) bad_pack("rule '" + r.id + "': bad emits");
  std::string kind = string_field(emits, "kind");
  if (kind == "fs.write") {
    r.emit = Emit::kFsWrite;
  } else if (kind == "fs.open") {
    r.emit = Emit::kFsOpen;
  } else if (kind == "spawn") {
    r.emit = Emit::kSpawn;
  } else if (kind == "include") {
    r.emit = Emit::kInclude;
  } else {
    if (!vocab.contains(kind)) bad_pack("rule '" + r.id + "': unknown kind '" + kind + "'");
    r.emit = Emit::kCapability;
    r.kind = vocab.kind(kind);
  }
  if (emits.contains("extract")) r.extract = parse_arg_spec(emits["extract"]);
  if (emits.contains("reversible")) r.reversible = emits["reversible"].get<bool>();
  if (emits.contains("mode")) {
    r.mode = parse_arg_spec(emits["mode"]);
    if (emits["mode"].contains("default")) r.mode_default = string_field(emits["mode"], "default");
  }
  if (emits.contains("implicit_interpreter")) {
    r.implicit_interpreter = emits["implicit_interpreter"].get<bool>();
  }
  if (emits.contains("list_arg")) r.list_arg = emits["list_arg"].get<int>();
  if (emits.contains("external")) {
    auto ext = string_field(emits, "external");
    if (ext != "taint" && ext != "ignore") bad_pack("rule '" + r.id + "': bad external policy");
    r.external_ignored = ext == "ignore";
  }
  if (r.extract.from == ExtractFrom::kGroup &&
      r.regex->mark_count() < static_cast<unsigned>(r.extract.index)) {
    bad_pack("rule '" + r.id + "': capture group out of range");
  }
  if (r.emit == Emit::kSpawn && r.extract.from == ExtractFrom::kShellCommand &&
      r.regex->mark_count() < 1) {
    bad_pack("rule '" + r.id + "': shell_command needs a capture group");
  }
  return r;
}

}  // namespace

RulePack load_rule_pack(const Json& doc, const Vocabulary& vocab) {
  if (!doc.is_object()) bad_pack("document must be an object");
  if (string_field(doc, "schema") != kRulePackSchema) bad_pack("unsupported schema");
  RulePack pack;
  auto lang = parse_language(string_field(doc, "language"));
  if (!lang) bad_pack("unknown language");
  pack.language = *lang;
  pack.version = string_field(doc, "version");
  pack.reversible_prefixes = string_list(doc, "reversible_prefixes");
  pack.ignore_paths = string_list(doc, "ignore_paths");
  pack.interpreters = string_list(doc, "interpreters");

  std::map<std::string, std::string> macros;
  if (doc.contains("macros")) {
    if (!doc["macros"].is_object()) bad_pack("macros must be an object");
    for (const auto& [k, v] : doc["macros"].items()) {
      if (!v.is_string()) bad_pack("macro '" + k + "' must be a string");
      macros[k] = v.get<std::string>();
    }
  }
  const Json& rules = field(doc, "rules");
  if (!rules.is_array()) bad_pack("rules must be a list");
  std::set<std::string> ids;
  for (const auto& j : rules) {
    Rule r;
    try {
      r = parse_rule(j, macros, vocab);
    } catch (const Json::exception& e) {
      bad_pack(e.what());
    }
    if (!ids.insert(r.id).second) bad_pack("duplicate rule id '" + r.id + "'");
    pack.rules.push_back(std::move(r));
  }
  try {
    pack.pack_hash = canonical_hash(doc);
  } catch (const Error& e) {
    bad_pack(e.what());
  }
  return pack;
}

RulePack load_rule_pack_file(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read rule pack " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Json doc;
  try {
    doc = parse_json(ss.str());
  } catch (const Error& e) {
    bad_pack(path.string() + ": " + e.what());
  }
  return load_rule_pack(doc, vocab);
}

std::vector<RulePack> load_rule_pack_dir(const std::filesystem::path& dir,
                                         const Vocabulary& vocab) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, "rule pack directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RulePack> packs;
  for (const auto& f : files) {
    RulePack p = load_rule_pack_file(f, vocab);
    if (find_pack(packs, p.language)) {
      bad_pack("two packs for language " + std::string(to_string(p.language)));
    }
    packs.push_back(std::move(p));
  }
  return packs;
}

const std::vector<RulePack>& builtin_rule_packs() {
  static const std::vector<RulePack> packs = [] {
    std::vector<RulePack> out;
    for (std::size_t i = 0; i < kBuiltinPackCount; ++i) {
      out.push_back(load_rule_pack(parse_json(kBuiltinPackSources[i])));
    }
    return out;
  }();
  return packs;
}

std::vector<RulePack> default_rule_packs() {
  if (const char* dir = std::getenv("SKILLPROOF_PACKS"); dir != nullptr && *dir != '\0') {
    return load_rule_pack_dir(dir);
  }
  return builtin_rule_packs();
}

const RulePack* find_pack(const std::vector<RulePack>& packs, Language lang) {
  for (const auto& p : packs) {
    if (p.language == lang) return &p;
  }
  return nullptr;
}

}  // namespace skillproof
