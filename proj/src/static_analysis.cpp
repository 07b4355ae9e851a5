#include "skillproof/static_analysis.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "skillproof/arg_extract.hpp"
#include "skillproof/error.hpp"

#ifndef SKILLPROOF_VERSION
#define SKILLPROOF_VERSION "0.0.0"
#endif

namespace skillproof {

namespace fs = std::filesystem;

namespace {

// Extensions that are definitely code we cannot read.
constexpr std::string_view kOpaqueExtensions[] = {
    ".bat", ".bin", ".c", ".cc", ".class", ".cmd", ".cpp", ".dll", ".dylib", ".exe", ".go",
    ".jar", ".java", ".jl", ".kt", ".lua", ".o", ".php", ".pl", ".ps1", ".pyc", ".r", ".rb",
    ".rs", ".scala", ".so", ".swift", ".wasm",
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_executable(const fs::path& p) {
  std::error_code ec;
  auto perms = fs::status(p, ec).permissions();
  if (ec) return false;
  return (perms & (fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec)) !=
         fs::perms::none;
}

// -------------------------------------------------------------- analysis

class ScriptScanner {
 public:
  ScriptScanner(const Script& script, const RulePack& pack, const std::set<std::string>& known)
      : script_(script), pack_(pack), known_(known), lex_(lex_source(script.source, script.language)) {
    line_starts_.push_back(0);
    for (std::size_t i = 0; i < script.source.size(); ++i) {
      if (script.source[i] == '\n') line_starts_.push_back(i + 1);
    }
    script_dir_ = fs::path(script.id).parent_path().generic_string();
  }

  ScriptAnalysis run() {
    for (const auto& rule : pack_.rules) {
      if (rule.requires_regex && !std::regex_search(lex_.stripped, *rule.requires_regex)) continue;
      const std::string& text = rule.stripped_view ? lex_.stripped : lex_.masked;
      for (std::sregex_iterator it(text.begin(), text.end(), *rule.regex), end; it != end; ++it) {
        apply(rule, *it);
      }
    }
    return std::move(out_);
  }

 private:
  using Words = std::vector<std::optional<StrTemplate>>;

  int line_of(std::size_t pos) const {
    auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), pos);
    return static_cast<int>(it - line_starts_.begin());
  }

  std::size_t anchor(const std::smatch& m) const {
    if (m.size() > 1 && m[1].matched) return static_cast<std::size_t>(m.position(1));
    std::size_t pos = static_cast<std::size_t>(m.position(0));
    std::size_t end = pos + static_cast<std::size_t>(m.length(0));
    const std::string& s = lex_.stripped;
    while (pos + 1 < end && std::string_view(" \t\n;|&(").find(s[pos]) != std::string_view::npos) ++pos;
    return pos;
  }

  void apply(const Rule& rule, const std::smatch& m) {
    Provenance prov{script_.id, line_of(anchor(m)), rule.id};
    std::size_t end = static_cast<std::size_t>(m.position(0) + m.length(0));
    switch (rule.emit) {
      case Emit::kTaint:
        out_.effects.taint(prov);
        return;
      case Emit::kCapability: {
        const auto& vocab = Vocabulary::standard();
        ArgDomain domain = vocab.entry(*rule.kind).domain;
        for (const auto& v : values(rule, m, end, domain)) out_.effects.add({*rule.kind, v, prov});
        return;
      }
      case Emit::kFsWrite:
        for (const auto& v : values(rule, m, end, ArgDomain::kPath)) add_write(rule, v, prov);
        return;
      case Emit::kFsOpen:
        open_effects(rule, m, end, prov);
        return;
      case Emit::kSpawn:
        spawn(rule, m, end, prov);
        return;
      case Emit::kInclude:
        include(rule, m, end, prov);
        return;
    }
  }

  std::vector<CallArg> call_args(std::size_t end) const {
    return split_call_args(lex_.stripped, lex_.masked, end, script_.language);
  }

  // Templates for the rule's argument; nullopt entries are unknown values.
  Words templates(const ArgSpec& spec, const std::smatch& m, std::size_t end) const {
    switch (spec.from) {
      case ExtractFrom::kNone:
        return {std::nullopt};
      case ExtractFrom::kCallArg: {
        auto text = select_arg(call_args(end), spec.index, spec.keyword);
        if (!text) return {std::nullopt};
        return {string_expression(*text, script_.language)};
      }
      case ExtractFrom::kShellUrl: {
        Words out;
        bool unknown = false;
        for (auto& w : shell_words(lex_.stripped, end)) {
          if (w.literal().find("://") != std::string::npos) {
            out.push_back(std::move(w));
          } else if (!w.segments.empty() && w.segments.front().hole) {
            unknown = true;  // a variable could hold the URL
          }
        }
        if (unknown || out.empty()) out.push_back(std::nullopt);
        return out;
      }
      case ExtractFrom::kShellNextWord: {
        auto words = shell_words(lex_.stripped, end);
        if (words.empty()) return {std::nullopt};
        return {std::move(words.front())};
      }
      case ExtractFrom::kShellPathArgs: {
        Words out;
        bool options_done = false;
        for (auto& w : shell_words(lex_.stripped, end)) {
          std::string prefix = w.literal_prefix();
          if (!options_done && w.segments.size() == 1 && prefix == "--") {
            options_done = true;
            continue;
          }
          if (!options_done && prefix.starts_with('-')) continue;
          out.push_back(std::move(w));
        }
        return out;
      }
      case ExtractFrom::kShellCommand: {
        Words out;
        for (auto& w : shell_words(lex_.stripped, anchor(m))) out.push_back(std::move(w));
        return out;
      }
      case ExtractFrom::kGroup: {
        auto g = static_cast<std::size_t>(spec.index);
        if (g >= m.size() || !m[g].matched) return {std::nullopt};
        StrTemplate t;
        t.append_literal(std::string_view(lex_.stripped)
                             .substr(static_cast<std::size_t>(m.position(g)),
                                     static_cast<std::size_t>(m.length(g))));
        return {t};
      }
    }
    return {std::nullopt};
  }

  bool ignored_path(const StrTemplate& t) const {
    if (t.has_holes()) return false;
    auto lit = t.literal();
    return std::find(pack_.ignore_paths.begin(), pack_.ignore_paths.end(), lit) !=
           pack_.ignore_paths.end();
  }

  std::vector<AbstractValue> values(const Rule& rule, const std::smatch& m, std::size_t end,
                                    ArgDomain domain) const {
    std::vector<AbstractValue> out;
    for (const auto& t : templates(rule.extract, m, end)) {
      if (!t) {
        out.push_back(AbstractValue::top());
        continue;
      }
      switch (domain) {
        case ArgDomain::kHost:
          out.push_back(template_to_host(*t));
          break;
        case ArgDomain::kPath:
          if (!ignored_path(*t)) out.push_back(template_to_path(*t));
          break;
        case ArgDomain::kOpaque:
          out.push_back(template_to_opaque(*t));
          break;
      }
    }
    return out;
  }

  void add_write(const Rule& rule, const AbstractValue& path, const Provenance& prov) {
    const auto& vocab = Vocabulary::standard();
    bool reversible = rule.reversible;
    if (!reversible && path.get_if<PathPrefix>() != nullptr) {
      for (const auto& p : pack_.reversible_prefixes) {
        if (value_leq(path, AbstractValue::path(p))) reversible = true;
      }
    }
    out_.effects.add({vocab.kind(reversible ? "fs.write.rev" : "fs.write.irrev"), path, prov});
  }

  void open_effects(const Rule& rule, const std::smatch& m, std::size_t end,
                    const Provenance& prov) {
    bool read = true;
    bool write = true;
    std::string mode = rule.mode_default;
    bool known = true;
    if (rule.mode) {
      auto text = select_arg(call_args(end), rule.mode->index, rule.mode->keyword);
      if (text) {
        auto t = string_expression(*text, script_.language);
        if (t && !t->has_holes()) {
          mode = t->literal();
        } else {
          known = false;
        }
      }
    }
    if (known && !mode.empty() && mode.find_first_not_of("rwxabtsU+") == std::string::npos) {
      write = mode.find_first_of("wxa+") != std::string::npos;
      read = mode.find_first_of("r+") != std::string::npos || !write;
    }
    const auto& vocab = Vocabulary::standard();
    for (const auto& v : values(rule, m, end, ArgDomain::kPath)) {
      if (read) out_.effects.add({vocab.kind("fs.read"), v, prov});
      if (write) add_write(rule, v, prov);
    }
  }

  // Maps a path as written in the script to a known script id.
  std::optional<std::string> resolve(std::string_view target, bool relative_to_script_only) const {
    if (target.empty() || target.starts_with('/') || target.starts_with('~')) return std::nullopt;
    std::vector<std::string> bases;
    if (!script_dir_.empty()) bases.push_back(script_dir_);
    if (!relative_to_script_only || script_dir_.empty()) bases.push_back("");
    for (const auto& base : bases) {
      fs::path joined = base.empty() ? fs::path(std::string(target)) : fs::path(base) / std::string(target);
      std::string id = joined.lexically_normal().generic_string();
      if (id.starts_with("./")) id.erase(0, 2);
      if (id.starts_with("..")) continue;
      if (known_.contains(id)) return id;
    }
    return std::nullopt;
  }

  bool is_interpreter(const std::string& base) const {
    for (const auto& i : pack_.interpreters) {
      if (base == i) return true;
      // versioned names such as python3.11
      if (base.starts_with(i) && base.find_first_not_of("0123456789.", i.size()) == std::string::npos &&
          std::isdigit(static_cast<unsigned char>(i.back()))) {
        return true;
      }
    }
    return false;
  }

  static bool inline_code_option(const std::string& opt) {
    static constexpr std::string_view kInline[] = {"-",      "-c",        "-m",        "-e",
                                                   "-p",     "-r",        "--eval",    "--print",
                                                   "--require", "--import", "--command", "-i"};
    for (auto o : kInline) {
      if (opt == o) return true;
    }
    // clustered short options for sh-style interpreters: "-ec", "-xc"
    return !opt.starts_with("--") && opt.size() > 2 && opt.find('c') != std::string::npos;
  }

  void spawn_words(const Words& words, const Provenance& prov) {
    if (words.empty() || !words.front() || words.front()->has_holes()) {
      out_.effects.taint(prov);
      return;
    }
    std::string program = words.front()->literal();
    std::string base = fs::path(program).filename().string();
    std::string target;
    if (is_interpreter(base)) {
      bool found = false;
      for (std::size_t i = 1; i < words.size(); ++i) {
        if (!words[i] || words[i]->has_holes()) break;
        std::string w = words[i]->literal();
        if (w.starts_with('-')) {
          if (inline_code_option(w)) break;
          continue;
        }
        target = w;
        found = true;
        break;
      }
      if (!found) {
        out_.effects.taint(prov);
        return;
      }
    } else {
      target = program;
    }
    auto id = resolve(target, false);
    if (!id) {
      out_.effects.taint(prov);  // external program
      return;
    }
    out_.spawn_edges.insert(*id);
    out_.effects.add({Vocabulary::standard().kind("spawn.proc"), AbstractValue::opaque(*id), prov});
  }

  void spawn(const Rule& rule, const std::smatch& m, std::size_t end, const Provenance& prov) {
    Words words;
    if (rule.extract.from == ExtractFrom::kShellCommand) {
      words = templates(rule.extract, m, end);
    } else {
      auto args = call_args(end);
      auto text = select_arg(args, rule.extract.index, rule.extract.keyword);
      if (!text) {
        out_.effects.taint(prov);
        return;
      }
      if (rule.implicit_interpreter) words.push_back(literal_word("node"));
      if (rule.list_arg >= 0) {
        words.push_back(string_expression(*text, script_.language));
        if (auto list_text = select_arg(args, rule.list_arg, "")) {
          auto list = list_expression(*list_text, script_.language);
          if (!list) {
            words.push_back(std::nullopt);
          } else {
            words.insert(words.end(), list->begin(), list->end());
          }
        }
      } else if (auto list = list_expression(*text, script_.language)) {
        words = std::move(*list);
      } else {
        auto command = string_expression(*text, script_.language);
        if (!command || has_shell_syntax(*command)) {
          out_.effects.taint(prov);
          return;
        }
        for (auto& w : split_command_line(*command)) words.push_back(std::move(w));
      }
    }
    for (const auto& w : words) {
      if (w && has_shell_syntax(*w)) {
        out_.effects.taint(prov);
        return;
      }
    }
    spawn_words(words, prov);
  }

  static std::optional<StrTemplate> literal_word(std::string_view s) {
    StrTemplate t;
    t.append_literal(s);
    return t;
  }

  static bool has_shell_syntax(const StrTemplate& t) {
    for (const auto& seg : t.segments) {
      if (!seg.hole && seg.text.find_first_of(";|&$`<>()\n*?{}\\") != std::string::npos) return true;
    }
    return false;
  }

  void include(const Rule& rule, const std::smatch& m, std::size_t end, const Provenance& prov) {
    auto words = templates(rule.extract, m, end);
    if (words.empty() || !words.front()) {
      out_.effects.taint(prov);
      return;
    }
    const StrTemplate& t = *words.front();
    switch (script_.language) {
      case Language::kPython:
        include_python(t.literal(), rule.id == "py-from-dot-import", prov, rule);
        return;
      case Language::kNode: {
        auto spec = string_expression(t.literal(), Language::kNode);
        if (!spec || spec->has_holes()) {
          out_.effects.taint(prov);
          return;
        }
        std::string s = spec->literal();
        if (!s.starts_with("./") && !s.starts_with("../")) return;  // package or builtin
        for (const char* ext : {"", ".js", ".mjs", ".cjs", ".ts", "/index.js"}) {
          if (auto id = resolve(s + ext, true)) {
            out_.spawn_edges.insert(*id);
            return;
          }
        }
        return;  // data file such as a JSON document
      }
      case Language::kShell: {
        if (t.has_holes()) {
          out_.effects.taint(prov);
          return;
        }
        if (auto id = resolve(t.literal(), false)) {
          out_.spawn_edges.insert(*id);
        } else if (!rule.external_ignored) {
          out_.effects.taint(prov);
        }
        return;
      }
    }
  }

  void include_python(const std::string& text, bool names_are_modules, const Provenance& prov,
                      const Rule& rule) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::stringstream is(item);
      std::string module;
      is >> module;  // drops "as alias"
      if (module.empty()) continue;
      std::size_t dots = 0;
      while (dots < module.size() && module[dots] == '.') ++dots;
      std::string rest = module.substr(dots);
      std::replace(rest.begin(), rest.end(), '.', '/');
      std::string up;
      for (std::size_t i = 1; i < dots; ++i) up += "../";
      bool relative = dots > 0 || names_are_modules;
      std::optional<std::string> id;
      for (const char* ext : {".py", "/__init__.py"}) {
        if (rest.empty()) break;
        if ((id = resolve(up + rest + ext, relative))) break;
      }
      if (id) {
        out_.spawn_edges.insert(*id);
      } else if (!rule.external_ignored) {
        out_.effects.taint(prov);
      }
    }
  }

  const Script& script_;
  const RulePack& pack_;
  const std::set<std::string>& known_;
  LexedSource lex_;
  std::vector<std::size_t> line_starts_;
  std::string script_dir_;
  ScriptAnalysis out_;
};

}  // namespace

SkillFiles discover_skill_files(const fs::path& skill_dir) {
  std::error_code ec;
  if (!fs::is_directory(skill_dir, ec)) {
    throw Error(ErrorCode::kIoError, "skill directory not found: " + skill_dir.string());
  }
  SkillFiles out;
  try {
    fs::recursive_directory_iterator it(skill_dir), end;
    for (; it != end; ++it) {
      const auto& entry = *it;
      fs::path rel = entry.path().lexically_relative(skill_dir);
      std::string id = rel.generic_string();
      std::string first = rel.begin()->string();
      if (entry.is_directory()) {
        if ((it.depth() == 0 && first == "evidence") || rel.filename() == ".git") {
          it.disable_recursion_pending();
        }
        continue;
      }
      if (!entry.is_regular_file()) continue;
      if (it.depth() == 0 && (first == "SKILL.md" || first == "skill.json")) continue;

      std::string ext = lower(rel.extension().string());
      std::optional<Language> lang = language_for_extension(ext);
      bool opaque = std::find(std::begin(kOpaqueExtensions), std::end(kOpaqueExtensions), ext) !=
                    std::end(kOpaqueExtensions);
      bool exec = is_executable(entry.path());
      if (lang || opaque || exec || ext.empty()) {
        std::string source = read_file(entry.path());
        if (!lang && !opaque) {
          auto nl = source.find('\n');
          std::string_view first_line = std::string_view(source).substr(0, nl);
          lang = language_for_shebang(first_line);
          if (!lang && !exec && !first_line.starts_with("#!")) continue;  // plain data file
        }
        if (lang && is_valid_utf8(source)) {
          out.scripts.push_back({id, *lang, std::move(source)});
        } else {
          out.unanalyzable.push_back({id, "unanalyzable-language"});
        }
      }
    }
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::kIoError, e.what());
  }
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(out.scripts.begin(), out.scripts.end(), by_id);
  std::sort(out.unanalyzable.begin(), out.unanalyzable.end(), by_id);
  return out;
}

std::vector<Script> discover_scripts(const fs::path& skill_dir) {
  return discover_skill_files(skill_dir).scripts;
}

ScriptAnalysis analyze_script(const Script& script, const RulePack& pack,
                              const std::set<std::string>& known_scripts) {
  return ScriptScanner(script, pack, known_scripts).run();
}

std::map<std::string, EffectSet> spawn_closure(
    const std::map<std::string, EffectSet>& reports,
    const std::map<std::string, std::set<std::string>>& spawn_edges) {
  std::map<std::string, EffectSet> out;
  for (const auto& [id, effects] : reports) {
    std::set<std::string> seen{id};
    std::vector<std::string> stack{id};
    EffectSet joined = effects;
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      auto edges = spawn_edges.find(cur);
      if (edges == spawn_edges.end()) continue;
      for (const auto& child : edges->second) {
        if (!seen.insert(child).second) continue;
        if (auto r = reports.find(child); r != reports.end()) joined = effects_join(joined, r->second);
        stack.push_back(child);
      }
    }
    out.emplace(id, std::move(joined));
  }
  return out;
}

StaticReport method_a(const SkillSnapshot& skill, const std::vector<RulePack>& packs) {
  StaticReport report;
  report.analyzer_version = SKILLPROOF_VERSION;
  for (const auto& p : packs) report.pack_hashes.push_back(p.pack_hash);
  std::sort(report.pack_hashes.begin(), report.pack_hashes.end());

  std::set<std::string> known;
  for (const auto& s : skill.files.scripts) known.insert(s.id);

  std::map<std::string, EffectSet> raw;
  std::map<std::string, std::set<std::string>> edges;
  std::map<std::string, std::string> languages;
  for (const auto& s : skill.files.scripts) {
    languages[s.id] = std::string(to_string(s.language));
    const RulePack* pack = find_pack(packs, s.language);
    if (pack == nullptr) {
      raw[s.id] = EffectSet::top({s.id, 1, "missing-rule-pack"});
      continue;
    }
    auto analysis = analyze_script(s, *pack, known);
    raw[s.id] = std::move(analysis.effects);
    if (!analysis.spawn_edges.empty()) edges[s.id] = std::move(analysis.spawn_edges);
  }
  for (const auto& u : skill.files.unanalyzable) {
    languages[u.id] = "unanalyzable";
    raw[u.id] = EffectSet::top({u.id, 1, u.reason});
  }
  for (auto& [id, effects] : spawn_closure(raw, edges)) {
    report.combined = effects_join(report.combined, effects);
    report.per_script.emplace(id, ScriptReport{languages[id], std::move(effects)});
  }
  report.verdict = containment_check(report.combined, skill.manifest.caps);
  return report;
}

StaticReport method_a(const fs::path& skill_dir, const Manifest& manifest,
                      const std::vector<RulePack>& packs) {
  return method_a(SkillSnapshot{manifest, discover_skill_files(skill_dir)}, packs);
}

Json to_json(const StaticReport& report) {
  Json per_script = Json::object();
  for (const auto& [id, r] : report.per_script) {
    Json entry = to_json(r.effects);
    entry["language"] = r.language;
    per_script[id] = std::move(entry);
  }
  return Json{{"schema", kStaticReportSchema},
              {"analyzer",
               {{"name", kStaticAnalyzerName},
                {"version", report.analyzer_version},
                {"pack_hashes", report.pack_hashes}}},
              {"per_script", per_script},
              {"verdict", to_json(report.verdict)}};
}

}  // namespace skillproof
