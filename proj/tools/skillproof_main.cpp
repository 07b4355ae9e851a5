// skillproof: analyze / probe / bmc / produce / verify / keygen.
//
// Machine output is canonical JSON on stdout, diagnostics go to stderr.
// Exit codes: 0 pass or formal, 1 verification failure, 2 usage/IO/config.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "skillproof/bmc.hpp"
#include "skillproof/bundle.hpp"
#include "skillproof/crypto.hpp"
#include "skillproof/dispatch.hpp"
#include "skillproof/manifest.hpp"
#include "skillproof/rule_pack.hpp"
#include "skillproof/static_analysis.hpp"

namespace fs = std::filesystem;
using namespace skillproof;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

void emit(const Json& doc) { std::cout << canonicalize(doc) << "\n"; }

int emit_error(int exit_code, std::string_view code, const std::string& message) {
  std::cerr << "skillproof: " << message << "\n";
  emit(Json{{"error", {{"code", code}, {"message", message}}}});
  return exit_code;
}

void require_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, "not a directory: " + dir.string());
  }
}

std::vector<RulePack> packs_from(const std::string& dir) {
  if (dir.empty()) return default_rule_packs();
  require_dir(dir);
  return load_rule_pack_dir(dir);
}

void print_violations(const StaticReport& report) {
  for (const auto& v : report.verdict.violations) {
    std::cerr << "violation: " << v.display() << " at " << v.provenance.file << ":"
              << v.provenance.line << " (" << v.provenance.rule_id << ")\n";
  }
  for (const auto& p : report.verdict.taint_sources) {
    std::cerr << "taint: " << p.file << ":" << p.line << " (" << p.rule_id << ")\n";
  }
}

struct Options {
  std::string skill_dir;
  std::string packs;
  std::string model = "faithful";
  int k_max = kDefaultKMax;
  std::uint64_t stochastic = 0;
  std::uint64_t seed = 1;
  std::string key = "ephemeral";
  std::string signer_id = "local";
  std::string out;
  std::string trust_roots;
  bool json = true;
};

int cmd_analyze(const Options& o) {
  require_dir(o.skill_dir);
  auto packs = packs_from(o.packs);
  Manifest m = parse_manifest(o.skill_dir);
  StaticReport report = method_a(o.skill_dir, m, packs);
  emit(to_json(report));
  print_violations(report);
  return report.verdict.contained ? kPass : kFail;
}

int cmd_probe(const Options& o) {
  require_dir(o.skill_dir);
  TypedDispatchVerdict v = method_b(parse_manifest(o.skill_dir));
  emit(to_json(v));
  return v.pass ? kPass : kFail;
}

int cmd_bmc(const Options& o) {
  require_dir(o.skill_dir);
  auto model = runtime_model_by_name(o.model);
  if (!model) {
    std::string known;
    for (const auto& n : runtime_model_names()) known += " " + n;
    throw Error(ErrorCode::kInvalidArgument, "unknown model '" + o.model + "'; known:" + known);
  }
  Manifest m = parse_manifest(o.skill_dir);
  if (o.stochastic > 0) {
    if (o.k_max < 1) throw Error(ErrorCode::kInvalidArgument, "--kmax must be at least 1");
    auto r = stochastic_search(*model, m.kinds().size(), o.k_max, o.stochastic, o.seed);
    emit(to_json(r, m.kinds(), model->name()));
    return r.counter_example ? kFail : kPass;
  }
  BmcVerdict v = method_c(*model, m.kinds(), o.k_max);
  emit(to_json(v));
  if (v.counter_example) {
    std::cerr << "counter-example: " << to_string(v.counter_example->violation) << " at step "
              << v.counter_example->violation_index << "\n";
  }
  return v.unsat ? kPass : kFail;
}

int cmd_produce(const Options& o) {
  require_dir(o.skill_dir);
  auto packs = packs_from(o.packs);
  std::optional<crypto::Ed25519PrivateKey> key;
  if (o.key == "ephemeral") {
    key = crypto::mint_ephemeral_key().private_key;
  } else {
    key = crypto::Ed25519PrivateKey::from_pem_file(o.key);
  }
  Manifest m = parse_manifest(o.skill_dir);
  std::optional<fs::path> out;
  if (!o.out.empty()) out = fs::path(o.out);
  try {
    Bundle b = produce_formal_bundle(o.skill_dir, m, *key, o.signer_id, o.k_max, packs, out);
    emit(Json{{"attestation_hash", crypto::sha256_hex(b.attestation)},
              {"out", (out.value_or(fs::path(o.skill_dir)) / kEvidenceDir).string()},
              {"public_key", crypto::base64_encode(key->public_key())},
              {"signer_id", o.signer_id}});
    return kPass;
  } catch (const LayerFailed& e) {
    std::cerr << "skillproof: " << e.layer() << " failed; no bundle written\n";
    emit(Json{{"layer_failed", e.layer()}, {"verdict", e.verdict()}});
    return kFail;
  }
}

int cmd_verify(const Options& o) {
  require_dir(o.skill_dir);
  auto packs = packs_from(o.packs);
  TrustRoot root = load_trust_root(o.trust_roots);
  VerifyOutcome outcome = verify_formal_bundle(o.skill_dir, root, packs);
  emit(to_json(outcome));
  for (const auto& r : outcome.reasons) std::cerr << "reason: " << r << "\n";
  return outcome.accepted_level == VerificationLevel::kFormal ? kPass : kFail;
}

int cmd_keygen(const Options& o) {
  auto pair = crypto::mint_ephemeral_key();
  std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + o.out);
  file << pair.private_key.to_pem();
  file.close();
  if (!file) throw Error(ErrorCode::kIoError, "short write to " + o.out);
  fs::permissions(o.out, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
  emit(Json{{"private_key", o.out}, {"public_key", crypto::base64_encode(pair.public_key)}});
  return kPass;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingBundleFile:
      return kFail;
    default:
      return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capability containment checks for agent skills"};
  app.set_version_flag("--version", SKILLPROOF_VERSION_STRING);
  app.require_subcommand(1);
  Options o;

  auto add_dir = [&](CLI::App* sub) {
    sub->add_option("skill_dir", o.skill_dir, "Skill directory")->required();
  };
  auto add_packs = [&](CLI::App* sub) {
    sub->add_option("--packs", o.packs, "Rule-pack directory (default: $SKILLPROOF_PACKS or built-in)");
  };
  auto add_kmax = [&](CLI::App* sub) {
    sub->add_option("--kmax", o.k_max, "Trace-length bound")->capture_default_str();
  };

  auto* analyze = app.add_subcommand("analyze", "Static effect analysis against the manifest");
  add_dir(analyze);
  add_packs(analyze);
  analyze->add_flag("--json", o.json, "Emit JSON (always on)");

  auto* probe = app.add_subcommand("probe", "Check the refined dispatch interface");
  add_dir(probe);

  auto* bmc = app.add_subcommand("bmc", "Bounded check of the audit biconditional");
  add_dir(bmc);
  add_kmax(bmc);
  bmc->add_option("--model", o.model, "Runtime model")->capture_default_str();
  bmc->add_option("--stochastic", o.stochastic, "Random traces instead of exhaustive search (not a proof)");
  bmc->add_option("--seed", o.seed, "Seed for --stochastic")->capture_default_str();

  auto* produce = app.add_subcommand("produce", "Run all three methods and write a signed bundle");
  add_dir(produce);
  add_packs(produce);
  add_kmax(produce);
  produce->add_option("--key", o.key, "PKCS#8 PEM private key, or 'ephemeral'")->capture_default_str();
  produce->add_option("--signer-id", o.signer_id, "Signer id recorded in the attestation")
      ->capture_default_str();
  produce->add_option("--out", o.out, "Bundle root (default: the skill directory)");

  auto* verify = app.add_subcommand("verify", "Re-check a bundle against a trust root");
  add_dir(verify);
  add_packs(verify);
  verify->add_option("--trust-roots", o.trust_roots, "Trust-root JSON file")->required();
  verify->add_flag("--json", o.json, "Emit JSON (always on)");

  auto* keygen = app.add_subcommand("keygen", "Write a fresh Ed25519 private key as PEM");
  keygen->add_option("--out", o.out, "Output PEM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error(kUsage, "usage", e.what());
  }

  try {
    if (*analyze) return cmd_analyze(o);
    if (*probe) return cmd_probe(o);
    if (*bmc) return cmd_bmc(o);
    if (*produce) return cmd_produce(o);
    if (*verify) return cmd_verify(o);
    if (*keygen) return cmd_keygen(o);
  } catch (const Error& e) {
    return emit_error(exit_code_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return emit_error(kUsage, "internal", e.what());
  }
  return kUsage;
}
