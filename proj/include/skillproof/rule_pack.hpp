#pragma once

// Language rule packs for the static scanner. A pack is a JSON document
// (schema "skillproof/rule-pack@1"); its identity is the SHA-256 of its
// canonical form.

#include <filesystem>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "skillproof/canonical_json.hpp"
#include "skillproof/capability.hpp"
#include "skillproof/source_lexer.hpp"

namespace skillproof {

inline constexpr std::string_view kRulePackSchema = "skillproof/rule-pack@1";

enum class ExtractFrom {
  kNone,            // argument is Top
  kCallArg,         // call arguments after a match ending in '('
  kShellUrl,        // URL-looking words of the shell command
  kShellNextWord,   // the first word after the match
  kShellPathArgs,   // every non-option word after the match
  kShellCommand,    // the simple command starting at capture group 1
  kGroup,           // the text of capture group `index`
};

struct ArgSpec {
  ExtractFrom from = ExtractFrom::kNone;
  int index = 0;
  std::string keyword;
};

enum class Emit {
  kTaint,       // whole-program Top
  kCapability,  // a fixed vocabulary kind
  kFsWrite,     // fs.write.rev or fs.write.irrev by reversibility
  kFsOpen,      // read and/or write depending on the mode argument
  kSpawn,       // process spawn; may resolve to another script
  kInclude,     // shell `source`; may resolve to another script
};

struct Rule {
  std::string id;
  std::string pattern;  // after macro expansion
  std::shared_ptr<const std::regex> regex;
  std::shared_ptr<const std::regex> requires_regex;  // rule is inert unless this matches
  bool stripped_view = false;  // match against stripped instead of masked text
  Emit emit = Emit::kTaint;
  std::optional<CapabilityKind> kind;
  ArgSpec extract;
  bool reversible = false;
  std::optional<ArgSpec> mode;
  std::string mode_default = "r";
  bool implicit_interpreter = false;  // Node fork(): the runtime itself runs arg 0
  int list_arg = -1;                  // argv list follows the program argument
  bool external_ignored = false;      // include: unresolved targets are library code
};

struct RulePack {
  Language language = Language::kPython;
  std::string version;
  std::vector<std::string> reversible_prefixes;
  std::vector<std::string> ignore_paths;
  std::vector<std::string> interpreters;
  std::vector<Rule> rules;
  std::string pack_hash;
};

/// Validates and compiles a pack. Throws Error(kMalformedPack).
RulePack load_rule_pack(const Json& doc, const Vocabulary& vocab = Vocabulary::standard());
RulePack load_rule_pack_file(const std::filesystem::path& path,
                             const Vocabulary& vocab = Vocabulary::standard());
/// Every *.json file in `dir`, in filename order. Throws Error(kIoError) if
/// the directory is missing, Error(kMalformedPack) on duplicate languages.
std::vector<RulePack> load_rule_pack_dir(const std::filesystem::path& dir,
                                         const Vocabulary& vocab = Vocabulary::standard());

/// The packs compiled into the binary.
const std::vector<RulePack>& builtin_rule_packs();

/// Packs from $SKILLPROOF_PACKS when set, else the builtin ones.
std::vector<RulePack> default_rule_packs();

const RulePack* find_pack(const std::vector<RulePack>& packs, Language lang);

}  // namespace skillproof
