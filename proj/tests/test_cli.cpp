#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <string>

#include "skillproof/canonical_json.hpp"
#include "skillproof/crypto.hpp"
#include "test_util.hpp"

using namespace skillproof;
using skillproof::testing::TempDir;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run run(const std::string& args) {
  std::string cmd = quote(SKILLPROOF_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = ::pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// stdout is always one canonical JSON document
Json json_of(const Run& r) {
  REQUIRE_FALSE(r.out.empty());
  REQUIRE(r.out.back() == '\n');
  std::string body = r.out.substr(0, r.out.size() - 1);
  Json j = parse_json(body);
  CHECK(canonicalize(j) == body);
  return j;
}

}  // namespace

TEST_CASE("analyze") {
  TempDir dir;
  testing::copy_skill("summarise-fetched-html", dir / "we");
  auto pre = run("analyze " + quote((dir / "we").string()));
  CHECK(pre.exit_code == 1);
  Json j = json_of(pre);
  CHECK(j["verdict"]["violations"][0]["effect"] == "fs.write.rev(./.cache/)");
  CHECK(j["verdict"]["violations"][0]["provenance"]["line"] == 17);

  testing::write_file(dir / "prose/SKILL.md", "---\ncaps: []\n---\nWords.\n");
  CHECK(run("analyze " + quote((dir / "prose").string())).exit_code == 0);

  auto missing = run("analyze " + quote((dir / "nope").string()));
  CHECK(missing.exit_code == 2);
  CHECK(json_of(missing).contains("error"));
  CHECK(run("analyze " + quote((dir / "we").string()) + " --packs " + quote((dir / "nopacks").string()))
            .exit_code == 2);
  CHECK(run("analyze " + quote((dir / "we").string()) + " --packs " +
            quote((testing::source_dir() / "packs").string()))
            .exit_code == 1);
}

TEST_CASE("probe and bmc") {
  auto demo = quote((testing::skills_dir() / "formal-demo").string());
  auto probe = run("probe " + demo);
  CHECK(probe.exit_code == 0);
  CHECK(json_of(probe)["capacity_bits"] == "2");

  auto bmc = run("bmc " + demo + " --kmax 4");
  CHECK(bmc.exit_code == 0);
  CHECK(json_of(bmc)["traces_explored"] == 340);

  for (std::string model : {"execute-on-deny", "skip-audit-on-admit", "execute-without-envelope"}) {
    auto sat = run("bmc " + demo + " --kmax 3 --model " + model);
    CHECK(sat.exit_code == 1);
    CHECK(json_of(sat)["result"] == "sat");
  }
  CHECK(run("bmc " + demo + " --model nonsense").exit_code == 2);
  CHECK(run("bmc " + demo + " --kmax 12").exit_code == 2);
  auto stoch = run("bmc " + demo + " --kmax 50 --stochastic 200");
  CHECK(stoch.exit_code == 0);
  CHECK(json_of(stoch)["proof"] == false);
}

TEST_CASE("produce and verify") {
  TempDir dir;
  testing::copy_skill("formal-demo", dir / "demo");
  auto demo = quote((dir / "demo").string());

  auto produced = run("produce " + demo + " --signer-id ops");
  CHECK(produced.exit_code == 0);
  Json p = json_of(produced);
  auto attest = testing::read_file(dir / "demo/evidence/manifest.attest.json");
  CHECK(p["attestation_hash"] == crypto::sha256_hex(attest));
  CHECK(p["public_key"].get<std::string>().size() == 44);

  Json root = {{"entries", Json::array({Json{{"signer_id", "ops"},
                                              {"public_key", p["public_key"]},
                                              {"max_level", "formal"}}})}};
  testing::write_file(dir / "roots.json", canonicalize(root));
  testing::write_file(dir / "empty.json", R"({"entries":[]})");
  auto roots = quote((dir / "roots.json").string());

  auto ok = run("verify " + demo + " --trust-roots " + roots);
  CHECK(ok.exit_code == 0);
  CHECK(json_of(ok)["accepted_level"] == "formal");

  auto empty = run("verify " + demo + " --trust-roots " + quote((dir / "empty.json").string()));
  CHECK(empty.exit_code == 1);
  CHECK(json_of(empty)["reasons"] == Json::array({"signer-not-authorised"}));

  CHECK(run("verify " + demo + " --trust-roots " + quote((dir / "absent.json").string())).exit_code == 2);
  CHECK(run("verify " + demo).exit_code == 2);

  auto types = dir / "demo/evidence/types.proof";
  auto bytes = testing::read_file(types);
  bytes[bytes.size() / 2] ^= 0x20;
  testing::write_file(types, bytes);
  auto tampered = run("verify " + demo + " --trust-roots " + roots);
  CHECK(tampered.exit_code == 1);
  CHECK(json_of(tampered)["reasons"] == Json::array({"hash-mismatch:types"}));

  std::filesystem::remove(types);
  CHECK(run("verify " + demo + " --trust-roots " + roots).exit_code == 1);

  CHECK(run("produce " + demo + " --kmax 12").exit_code == 2);
  CHECK(run("produce " + demo + " --key " + quote((dir / "no.pem").string())).exit_code == 2);
}

TEST_CASE("produce refuses a non-contained skill") {
  TempDir dir;
  testing::copy_skill("summarise-fetched-html", dir / "we");
  auto r = run("produce " + quote((dir / "we").string()));
  CHECK(r.exit_code == 1);
  CHECK(json_of(r)["layer_failed"] == "methodA");
  CHECK_FALSE(std::filesystem::exists(dir / "we/evidence"));
}

TEST_CASE("keygen and a PEM signing key") {
  TempDir dir;
  testing::copy_skill("formal-demo", dir / "demo");
  auto pem = quote((dir / "k.pem").string());
  auto kg = run("keygen --out " + pem);
  CHECK(kg.exit_code == 0);
  auto pub = json_of(kg)["public_key"];
  auto a = run("produce " + quote((dir / "demo").string()) + " --key " + pem);
  CHECK(a.exit_code == 0);
  CHECK(json_of(a)["public_key"] == pub);
  auto b = run("produce " + quote((dir / "demo").string()) + " --key " + pem);
  CHECK(json_of(b)["attestation_hash"] == json_of(a)["attestation_hash"]);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("").exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("analyze").exit_code == 2);
  CHECK(run("bmc x --kmax notanumber").exit_code == 2);
}
