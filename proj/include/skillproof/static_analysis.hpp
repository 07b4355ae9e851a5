#pragma once

// Method A: flow-insensitive rule-pack scanning of a skill's scripts, spawn
// closure, and containment against the declared capability set.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "skillproof/lattice.hpp"
#include "skillproof/manifest.hpp"
#include "skillproof/rule_pack.hpp"
#include "skillproof/source_lexer.hpp"

namespace skillproof {

inline constexpr std::string_view kStaticAnalyzerName = "skillproof-static";
inline constexpr std::string_view kStaticReportSchema = "skillproof/static@1";

struct Script {
  std::string id;  // path relative to the skill root, '/'-separated
  Language language = Language::kPython;
  std::string source;
};

/// A file that looks executable but no pack can read: a binary, or a script
/// in a language without a rule pack.
struct UnanalyzableFile {
  std::string id;
  std::string reason;
};

struct SkillFiles {
  std::vector<Script> scripts;
  std::vector<UnanalyzableFile> unanalyzable;
};

/// Walks `skill_dir`, skipping the top-level evidence/ directory, .git, and
/// the manifest files. Sorted by id. Throws Error(kIoError).
SkillFiles discover_skill_files(const std::filesystem::path& skill_dir);

/// Analyzable scripts only.
std::vector<Script> discover_scripts(const std::filesystem::path& skill_dir);

struct ScriptAnalysis {
  EffectSet effects;
  std::set<std::string> spawn_edges;  // ids of other scripts this one runs or includes
};

/// Scans one script. `known_scripts` are the ids a spawn or include may
/// resolve to; anything else that is executed taints to Top.
ScriptAnalysis analyze_script(const Script& script, const RulePack& pack,
                              const std::set<std::string>& known_scripts = {});

/// Joins every script's effects with those of everything it transitively
/// spawns.
std::map<std::string, EffectSet> spawn_closure(
    const std::map<std::string, EffectSet>& reports,
    const std::map<std::string, std::set<std::string>>& spawn_edges);

struct ScriptReport {
  std::string language;  // "python", "shell", "node" or "unanalyzable"
  EffectSet effects;     // after spawn closure
};

struct StaticReport {
  std::map<std::string, ScriptReport> per_script;
  EffectSet combined;
  ContainmentVerdict verdict;
  std::string analyzer_version;
  std::vector<std::string> pack_hashes;  // sorted
};

/// Everything Method A needs, already read from disk.
struct SkillSnapshot {
  Manifest manifest;
  SkillFiles files;
};

StaticReport method_a(const SkillSnapshot& skill, const std::vector<RulePack>& packs);
StaticReport method_a(const std::filesystem::path& skill_dir, const Manifest& manifest,
                      const std::vector<RulePack>& packs);

Json to_json(const StaticReport& report);

}  // namespace skillproof
