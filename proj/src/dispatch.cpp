#include "skillproof/dispatch.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "skillproof/error.hpp"

#ifndef SKILLPROOF_VERSION
#define SKILLPROOF_VERSION "0.0.0"
#endif

namespace skillproof {

Envelope Envelope::make(std::string_view op, std::map<std::string, std::string> args,
                        std::string reasoning, const Vocabulary& vocab) {
  if (!vocab.contains(op)) {
    throw Error(ErrorCode::kMalformedEnvelope, "envelope op '" + std::string(op) + "' is not in the vocabulary");
  }
  for (const auto& [k, v] : args) {
    if (k.empty()) throw Error(ErrorCode::kMalformedEnvelope, "envelope has an empty args key");
  }
  return Envelope{vocab.kind(op), std::move(args), std::move(reasoning)};
}

namespace {

std::string hash_tokens(std::span<const CapabilityToken> tokens) {
  Json arr = Json::array();
  for (const auto& t : tokens) arr.push_back(t.to_string());
  return canonical_hash(arr);
}

}  // namespace

RefinedDispatcher::RefinedDispatcher(const Manifest& m, bool log_admits, const Vocabulary& vocab)
    : declared_(std::make_shared<const std::vector<CapabilityToken>>(m.caps)),
      declared_hash_(hash_tokens(m.caps)),
      vocab_(&vocab),
      log_admits_(log_admits),
      log_mutex_(std::make_shared<std::mutex>()),
      log_(std::make_shared<std::vector<Envelope>>()) {}

DispatchResult RefinedDispatcher::dispatch(const Envelope& e) const {
  const auto& key = vocab_->entry(e.op).envelope_key;
  for (const auto& token : *declared_) {
    if (token.kind != e.op) continue;
    bool covered = token.arg.is_top();
    if (!covered) {
      auto it = e.args.find(key);
      if (it == e.args.end()) continue;
      try {
        covered = value_leq(parse_arg_value(e.op, it->second, *vocab_), token.arg);
      } catch (const Error&) {
        covered = false;  // unparsable argument
      }
    }
    if (covered) {
      if (log_admits_) {
        std::lock_guard lock(*log_mutex_);
        log_->push_back(e);
      }
      return Admit{e.op};
    }
  }
  return RefinementRejection{e.op, declared_hash_};
}

std::vector<Envelope> RefinedDispatcher::admit_log() const {
  std::lock_guard lock(*log_mutex_);
  return *log_;
}

RefinedDispatcher build_refined_dispatch(const Manifest& m) { return RefinedDispatcher(m); }

RefinementError::RefinementError(RefinementRejection rejection)
    : std::runtime_error("envelope '" + rejection.op.token() + "' is outside the declared capability set"),
      rejection_(std::move(rejection)) {}

double capacity_bits(std::size_t kinds) { return std::log2(static_cast<double>(kinds) + 1.0); }

std::string format_bits(double bits) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, bits);
  return std::string(buf, end);
}

std::string probe_witness(const AbstractValue& pattern, ArgDomain domain) {
  if (const auto* h = pattern.get_if<HostGlob>()) {
    return h->is_wildcard() ? "probe" + h->pattern.substr(1) : h->pattern;
  }
  if (const auto* p = pattern.get_if<PathPrefix>()) {
    return p->is_directory() ? p->prefix + "probe" : p->prefix;
  }
  if (const auto* o = pattern.get_if<Opaque>()) return o->literal;
  if (const auto* i = pattern.get_if<IntInterval>()) {
    return "[" + std::to_string(i->lo) + "," + std::to_string(i->lo) + "]";
  }
  switch (domain) {
    case ArgDomain::kHost: return "probe.invalid";
    case ArgDomain::kPath: return "./probe";
    case ArgDomain::kOpaque: return "probe";
  }
  return "probe";
}

TypedDispatchVerdict method_b(const Manifest& m, const Vocabulary& vocab) {
  RefinedDispatcher dispatcher(m, false, vocab);
  TypedDispatchVerdict v;
  v.declared_kinds = kinds_of(m.caps);
  v.declared_hash = dispatcher.declared_hash();
  for (const auto& kind : vocab.kinds()) {
    const auto& entry = vocab.entry(kind);
    AbstractValue pattern = AbstractValue::top();
    for (const auto& t : m.caps) {
      if (t.kind == kind) {
        pattern = t.arg;
        break;
      }
    }
    Envelope e{kind, {{entry.envelope_key, probe_witness(pattern, entry.domain)}}, "probe"};
    bool admitted = std::holds_alternative<Admit>(dispatcher.dispatch(e));
    (admitted ? v.admitted : v.rejected).push_back(kind);
    v.probes.push_back({std::move(e), admitted});
  }
  v.capacity_bits = capacity_bits(v.declared_kinds.size());
  v.pass = v.admitted == v.declared_kinds;
  return v;
}

Json to_json(const TypedDispatchVerdict& v) {
  auto tokens = [](const std::vector<CapabilityKind>& kinds) {
    Json arr = Json::array();
    for (const auto& k : kinds) arr.push_back(k.token());
    return arr;
  };
  Json probes = Json::array();
  for (const auto& row : v.probes) {
    probes.push_back({{"kind", row.envelope.op.token()},
                      {"args", row.envelope.args},
                      {"decision", row.admitted ? "admit" : "reject"}});
  }
  return Json{{"schema", kTypesProofSchema},
              {"checker", {{"name", kDispatchCheckerName}, {"version", SKILLPROOF_VERSION}}},
              {"declared_kinds", tokens(v.declared_kinds)},
              {"declared_hash", v.declared_hash},
              {"probed", v.probed()},
              {"probes", probes},
              {"admitted", tokens(v.admitted)},
              {"rejected", tokens(v.rejected)},
              {"capacity_bits", format_bits(v.capacity_bits)},
              {"assumes", Json::array({"no-bypass"})},
              {"pass", v.pass}};
}

}  // namespace skillproof
