#include <doctest.h>

#include <random>
#include <set>

#include "skillproof/static_analysis.hpp"
#include "test_util.hpp"

using namespace skillproof;
using skillproof::testing::TempDir;
using skillproof::testing::write_file;

namespace {

struct Scan {
  std::set<std::string> effects;
  bool tainted = false;
  std::set<std::string> edges;
};

Scan scan(Language lang, const std::string& src, std::set<std::string> known = {},
          const std::string& id = "") {
  const RulePack* pack = find_pack(builtin_rule_packs(), lang);
  REQUIRE(pack != nullptr);
  std::string sid = id.empty() ? (lang == Language::kPython ? "s.py" : lang == Language::kShell ? "s.sh" : "s.js") : id;
  auto a = analyze_script(Script{sid, lang, src}, *pack, known);
  Scan out;
  for (const auto& t : a.effects.effects()) out.effects.insert(t.display());
  out.tainted = a.effects.tainted_top();
  out.edges = a.spawn_edges;
  return out;
}

struct Case {
  Language lang;
  std::string src;
  std::set<std::string> effects;
  bool tainted = false;
};

std::string lang_name(Language l) { return std::string(to_string(l)); }

}  // namespace

TEST_CASE("rule-pack pattern matches") {
  const auto py = Language::kPython;
  const auto sh = Language::kShell;
  const auto js = Language::kNode;
  std::vector<Case> cases = {
      // python network
      {py, "import requests\nrequests.get(u)\n", {"net.egress(*)"}},
      {py, "import requests\nrequests.post('https://api.example.com/v1', json=x)\n", {"net.egress(api.example.com)"}},
      {py, "import requests\nrequests.get(f\"https://{s}.example.com/a\")\n", {"net.egress(*.example.com)"}},
      {py, "import requests\nrequests.request('GET', 'http://a.org/x')\n", {"net.egress(a.org)"}},
      {py, "from urllib.request import urlopen\nurlopen('https://x.org')\n", {"net.egress(x.org)"}},
      {py, "import httpx\nhttpx.get(url=\"https://h.io/\")\n", {"net.egress(h.io)"}},
      {py, "import socket\nsocket.create_connection((h, 80))\n", {"net.egress(*)"}},
      // python filesystem
      {py, "open(p, 'w')\n", {"fs.write.irrev(*)"}},
      {py, "open('./out/r.txt', 'w')\n", {"fs.write.irrev(./out/r.txt)"}},
      {py, "open('./.cache/r.txt', 'wb')\n", {"fs.write.rev(./.cache/r.txt)"}},
      {py, "open('./data/in.csv')\n", {"fs.read(./data/in.csv)"}},
      {py, "open('./d/x', mode='r+')\n", {"fs.read(./d/x)", "fs.write.irrev(./d/x)"}},
      {py, "open('./d/x', m)\n", {"fs.read(./d/x)", "fs.write.irrev(./d/x)"}},
      {py, "with open(f\"./.cache/{slug}.html\", encoding=\"utf-8\") as fh:\n    pass\n", {"fs.read(./.cache/)"}},
      {py, "import os\nos.remove('./old.txt')\n", {"fs.write.irrev(./old.txt)"}},
      {py, "import os\nos.listdir('./data/')\n", {"fs.read(./data/)"}},
      {py, "import shutil\nshutil.copy('./a', './b')\n", {"fs.read(./a)", "fs.write.irrev(./b)"}},
      {py, "import tempfile\ntempfile.mkstemp()\n", {"fs.write.rev(*)"}},
      {py, "from pathlib import Path\nPath(p).write_text(s)\n", {"fs.write.irrev(*)"}},
      // python processes and reflection
      {py, "import subprocess\nsubprocess.run(['ls', '-l'])\n", {}, true},
      {py, "import os\nos.system('rm -rf /')\n", {}, true},
      {py, "eval(x)\n", {}, true},
      {py, "exec(code)\n", {}, true},
      {py, "f = getattr(os, name)\n", {}, true},
      {py, "import importlib\n", {}, true},
      {py, "import subprocess as sp\n", {}, true},
      {py, "import pickle\npickle.loads(b)\n", {}, true},
      // python non-matches
      {py, "# requests.get(u)\nx = 'open(p, \"w\")'\n", {}},
      // reflection rules also read string contents, so a quoted mention taints
      {py, "\"\"\"eval(x) in a docstring\"\"\"\n", {}, true},
      {py, "\"\"\"requests.get(u) in a docstring\"\"\"\n", {}},
      {py, "d.get('k')\nevaluate(x)\nreopen(x)\n", {}},
      {py, "", {}},
      // shell network
      {sh, "curl -s https://api.example.com/v1\n", {"net.egress(api.example.com)"}},
      {sh, "curl \"https://$SECTION.example.com/x\"\n", {"net.egress(*.example.com)"}},
      {sh, "curl \"$URL\"\n", {"net.egress(*)"}},
      {sh, "wget -q -O - https://a.org/f\n", {"net.egress(a.org)"}},
      {sh, "ssh host ls\n", {"net.egress(*)"}},
      {sh, "exec 3<>/dev/tcp/a.org/80\n", {"net.egress(*)"}, true},
      // shell filesystem
      {sh, "echo hi > ./out.txt\n", {"fs.write.irrev(./out.txt)"}},
      {sh, "echo hi >> ./.cache/log\n", {"fs.write.rev(./.cache/log)"}},
      {sh, "echo hi >/dev/null 2>&1\n", {}},
      {sh, "sort < ./in.txt\n", {"fs.read(./in.txt)"}},
      {sh, "cat ./a.txt ./b.txt\n", {"fs.read(./a.txt)", "fs.read(./b.txt)"}},
      {sh, "rm -f ./tmp/x\n", {"fs.write.rev(./tmp/x)"}},
      {sh, "mkdir -p ./out/\n", {"fs.write.irrev(./out/)"}},
      {sh, "curl -o ./.cache/p.html https://a.org/\n", {"net.egress(a.org)", "fs.write.rev(./.cache/p.html)"}},
      // shell processes and taint
      {sh, "eval \"$CMD\"\n", {}, true},
      {sh, "$CMD --flag\n", {}, true},
      {sh, "pip install requests\n", {}, true},
      {sh, "find . -name '*.tmp' -exec rm {} \;\n", {}, true},
      {sh, "/usr/bin/curl https://a.org\n", {}, true},
      {sh, "python3 -c 'print(1)'\n", {}, true},
      {sh, "source \"$HOME/.env\"\n", {}, true},
      // shell non-matches
      {sh, "# curl https://a.org\necho 'curl https://b.org'\n", {}},
      {sh, "echo curling\nx=1\n", {}},
      // node network
      {js, "fetch('https://api.example.com/x')\n", {"net.egress(api.example.com)"}},
      {js, "await fetch(`https://${s}.example.com/a`)\n", {"net.egress(*.example.com)"}},
      {js, "const https = require('https');\nhttps.get(u, cb)\n", {"net.egress(*)"}},
      {js, "const axios = require('axios');\naxios.get('https://a.org')\n", {"net.egress(a.org)"}},
      // node filesystem
      {js, "const fs = require('fs');\nfs.readFileSync('./d/in.json')\n", {"fs.read(./d/in.json)"}},
      {js, "const fs = require('fs');\nfs.writeFileSync('./.cache/o.json', s)\n", {"fs.write.rev(./.cache/o.json)"}},
      {js, "import { writeFile } from 'fs/promises';\nawait writeFile(p, s)\n", {"fs.write.irrev(*)"}},
      {js, "const fs = require('fs');\nfs.openSync('./x', 'a')\n", {"fs.write.irrev(./x)"}},
      // node processes and reflection
      {js, "const cp = require('child_process');\ncp.exec(cmd)\n", {}, true},
      {js, "const { spawn } = require('child_process');\nspawn('ls', ['-l'])\n", {}, true},
      {js, "eval(s)\n", {}, true},
      {js, "new Function('return 1')\n", {}, true},
      {js, "await import(name)\n", {}, true},
      {js, "require(name)\n", {}, true},
      // node non-matches
      {js, "// fetch('https://a.org')\nconst s = 'fetch(x)';\n", {}},
      {js, "const s = 'eval(x)';\n", {}, true},
      {js, "obj.fetchAll()\nprefetch(x)\n", {}},
      {js, "const re = /fetch\\(/;\n", {}},
  };
  for (const auto& c : cases) {
    INFO(lang_name(c.lang) << ": " << c.src);
    Scan s = scan(c.lang, c.src);
    CHECK(s.tainted == c.tainted);
    // under taint the explicit tuples are diagnostics only
    if (!c.tainted) CHECK(s.effects == c.effects);
  }
}

TEST_CASE("provenance points at the matching line and rule") {
  const RulePack* pack = find_pack(builtin_rule_packs(), Language::kPython);
  auto a = analyze_script(Script{"s.py", Language::kPython, "x = 1\n\nimport requests\nrequests.get(u)\n"}, *pack);
  auto effects = a.effects.effects();
  REQUIRE(effects.size() == 1);
  CHECK(effects[0].provenance.file == "s.py");
  CHECK(effects[0].provenance.line == 4);
  CHECK(effects[0].provenance.rule_id == "py-requests-verb");

  auto t = analyze_script(Script{"s.py", Language::kPython, "\n\neval(x)\n"}, *pack);
  REQUIRE(t.effects.taint_sources().size() == 1);
  CHECK(t.effects.taint_sources().begin()->line == 3);
  CHECK(t.effects.taint_sources().begin()->rule_id == "py-eval");
}

TEST_CASE("reflective constructs taint wherever they are inserted") {
  std::mt19937_64 rng(17);
  const std::vector<std::string> base_lines = {
      "import json", "x = 1", "def f(a):", "    return a + 1", "print(f(x))", "y = [i for i in range(3)]",
  };
  const std::vector<std::string> py_taints = {"eval(data)", "exec(code)", "getattr(mod, name)()",
                                              "__import__(name)", "import importlib"};
  for (int i = 0; i < 300; ++i) {
    auto lines = base_lines;
    auto at = rng() % (lines.size() + 1);
    std::string indent = at > 0 && lines[at - 1].ends_with(":") ? "    " : "";
    lines.insert(lines.begin() + static_cast<long>(at), indent + py_taints[rng() % py_taints.size()]);
    std::string src;
    for (const auto& l : lines) src += l + "\n";
    INFO(src);
    CHECK(scan(Language::kPython, src).tainted);
  }
  const std::vector<std::string> js_taints = {"eval(s)", "new Function(s)", "require(n)", "import(n)"};
  for (int i = 0; i < 200; ++i) {
    std::string src = "const a = 1;\n";
    src += (rng() % 2 ? "function g() { " : "") + js_taints[rng() % js_taints.size()] + ";\n";
    INFO(src);
    CHECK(scan(Language::kNode, src).tainted);
  }
}

TEST_CASE("script discovery") {
  TempDir dir;
  CHECK(discover_scripts(dir.path()).empty());

  write_file(dir / "b.sh", "echo hi\n");
  write_file(dir / "a.py", "x = 1\n");
  write_file(dir / "evidence/x.py", "eval(x)\n");
  write_file(dir / "SKILL.md", "---\ncaps: []\n---\n");
  write_file(dir / "notes.txt", "curl https://a.org\n");
  auto scripts = discover_scripts(dir.path());
  REQUIRE(scripts.size() == 2);
  CHECK(scripts[0].id == "a.py");
  CHECK(scripts[0].language == Language::kPython);
  CHECK(scripts[1].id == "b.sh");
  CHECK(scripts[1].language == Language::kShell);

  write_file(dir / "lib/tool", "#!/usr/bin/env node\nfetch(u)\n");
  write_file(dir / "lib/run.rb", "puts 1\n");
  auto files = discover_skill_files(dir.path());
  REQUIRE(files.scripts.size() == 3);
  CHECK(files.scripts[2].id == "lib/tool");
  CHECK(files.scripts[2].language == Language::kNode);
  REQUIRE(files.unanalyzable.size() == 1);
  CHECK(files.unanalyzable[0].id == "lib/run.rb");

  auto worked = discover_scripts(testing::skills_dir() / "summarise-fetched-html");
  REQUIRE(worked.size() == 1);
  CHECK(worked[0].id == "summarise.py");
  CHECK(worked[0].language == Language::kPython);
}

TEST_CASE("spawn closure") {
  auto k = [](std::string_view t) { return Vocabulary::standard().kind(t); };
  std::map<std::string, EffectSet> reports;
  reports["parent.py"].add(EffectTuple{k("net.egress"), AbstractValue::host("a.org"), {"parent.py", 1, "r"}});
  reports["child.sh"].add(EffectTuple{k("fs.read"), AbstractValue::path("./data/"), {"child.sh", 2, "r"}});
  reports["leaf.sh"].add(EffectTuple{k("pay"), AbstractValue::top(), {"leaf.sh", 1, "r"}});

  CHECK(spawn_closure(reports, {}) == reports);

  std::map<std::string, std::set<std::string>> edges = {{"parent.py", {"child.sh"}}, {"child.sh", {"leaf.sh"}}};
  auto closed = spawn_closure(reports, edges);
  // hand-computed: parent gains child's and leaf's tuples
  std::set<EffectSet::Key> want_parent = reports["parent.py"].keys();
  for (const auto& key : reports["child.sh"].keys()) want_parent.insert(key);
  for (const auto& key : reports["leaf.sh"].keys()) want_parent.insert(key);
  CHECK(closed["parent.py"].keys() == want_parent);
  CHECK(closed["child.sh"].keys().size() == 2);
  CHECK(closed["leaf.sh"] == reports["leaf.sh"]);

  // cycles terminate
  edges["leaf.sh"] = {"parent.py"};
  auto cyc = spawn_closure(reports, edges);
  CHECK(cyc["leaf.sh"].keys() == want_parent);
}

TEST_CASE("spawning another script of the skill joins its effects") {
  TempDir dir;
  write_file(dir / "SKILL.md", "---\ncaps: [\"fs.read(./data/)\", \"spawn.proc\"]\n---\n");
  write_file(dir / "parent.py", "import subprocess\nsubprocess.run(['bash', 'child.sh'])\n");
  write_file(dir / "child.sh", "cat ./data/in.csv\n");
  auto report = method_a(dir.path(), parse_manifest(dir.path()), builtin_rule_packs());
  std::set<std::string> parent;
  for (const auto& t : report.per_script.at("parent.py").effects.effects()) parent.insert(t.display());
  CHECK(parent == std::set<std::string>{"fs.read(./data/in.csv)", "spawn.proc(child.sh)"});
  CHECK_FALSE(report.per_script.at("parent.py").effects.tainted_top());
  CHECK(report.verdict.contained);
}

TEST_CASE("spawning an external binary taints the parent") {
  Scan s = scan(Language::kPython, "import subprocess\nsubprocess.run(['/usr/bin/curl', u])\n");
  CHECK(s.tainted);
  Scan sh = scan(Language::kShell, "bash ./helper.sh\n");
  CHECK(sh.tainted);
  Scan known = scan(Language::kShell, "bash ./helper.sh\n", {"helper.sh"});
  CHECK_FALSE(known.tainted);
  CHECK(known.edges == std::set<std::string>{"helper.sh"});
}

TEST_CASE("python imports of sibling modules are followed") {
  TempDir dir;
  write_file(dir / "SKILL.md", "---\ncaps: []\n---\n");
  write_file(dir / "main.py", "import helpers\n");
  write_file(dir / "helpers.py", "import requests\nrequests.get('https://a.org')\n");
  auto report = method_a(dir.path(), parse_manifest(dir.path()), builtin_rule_packs());
  CHECK_FALSE(report.verdict.contained);
  std::set<std::string> main;
  for (const auto& t : report.per_script.at("main.py").effects.effects()) main.insert(t.display());
  CHECK(main == std::set<std::string>{"net.egress(a.org)"});
}

TEST_CASE("worked example, before and after extending D") {
  auto dir = testing::skills_dir() / "summarise-fetched-html";
  auto report = method_a(dir, testing::worked_example_manifest(), builtin_rule_packs());
  std::set<std::string> combined;
  for (const auto& t : report.combined.effects()) combined.insert(t.display());
  CHECK(combined ==
        std::set<std::string>{"net.egress(*.example.com)", "fs.read(./.cache/)", "fs.write.rev(./.cache/)"});
  CHECK_FALSE(report.verdict.contained);
  REQUIRE(report.verdict.violations.size() == 1);
  CHECK(report.verdict.violations[0].display() == "fs.write.rev(./.cache/)");
  CHECK(report.verdict.violations[0].provenance.line == 17);

  auto fixed = method_a(dir, testing::extended_manifest(), builtin_rule_packs());
  CHECK(fixed.verdict.contained);
  CHECK(fixed.verdict.violations.empty());
}

TEST_CASE("prose-only skill is contained") {
  TempDir dir;
  write_file(dir / "SKILL.md", "---\ncaps: []\n---\nWords only.\n");
  auto report = method_a(dir.path(), parse_manifest(dir.path()), builtin_rule_packs());
  CHECK(report.verdict.contained);
  CHECK(report.per_script.empty());
}

TEST_CASE("unanalyzable files and missing packs taint") {
  TempDir dir;
  write_file(dir / "SKILL.md", "---\ncaps: []\n---\n");
  write_file(dir / "tool.rb", "puts 1\n");
  auto report = method_a(dir.path(), parse_manifest(dir.path()), builtin_rule_packs());
  CHECK_FALSE(report.verdict.contained);
  CHECK(report.verdict.tainted_top);
  CHECK(report.per_script.at("tool.rb").language == "unanalyzable");

  TempDir dir2;
  write_file(dir2 / "SKILL.md", "---\ncaps: []\n---\n");
  write_file(dir2 / "a.sh", "echo hi\n");
  std::vector<RulePack> python_only = {*find_pack(builtin_rule_packs(), Language::kPython)};
  auto r2 = method_a(dir2.path(), parse_manifest(dir2.path()), python_only);
  CHECK(r2.verdict.tainted_top);
}

TEST_CASE("static report JSON is canonical and records the analyzer") {
  auto dir = testing::skills_dir() / "summarise-fetched-html";
  auto report = method_a(dir, testing::extended_manifest(), builtin_rule_packs());
  Json j = to_json(report);
  CHECK(j["schema"] == "skillproof/static@1");
  CHECK(j["analyzer"]["name"] == "skillproof-static");
  CHECK(j["analyzer"]["pack_hashes"].size() == 3);
  CHECK(j["verdict"]["contained"] == true);
  CHECK(j["per_script"].contains("summarise.py"));
  auto again = method_a(dir, testing::extended_manifest(), builtin_rule_packs());
  CHECK(canonicalize(to_json(again)) == canonicalize(j));
}
