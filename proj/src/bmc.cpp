#include "skillproof/bmc.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "skillproof/error.hpp"

#ifndef SKILLPROOF_VERSION
#define SKILLPROOF_VERSION "0.0.0"
#endif

namespace skillproof {

namespace {

bool declared(Symbol s, std::size_t alphabet_size) {
  return static_cast<std::size_t>(s) + 1 < alphabet_size;
}

Decision gate(Symbol s, std::size_t alphabet_size) {
  return declared(s, alphabet_size) ? Decision::kAdmit : Decision::kDeny;
}

class FaithfulRuntime : public RuntimeModel {
 public:
  std::string_view name() const override { return "faithful"; }
  bool memoryless() const override { return true; }
  StepOutcome step(Symbol s, std::size_t a, WorldState& after, std::size_t index) const override {
    Decision d = gate(s, a);
    if (d == Decision::kAdmit) after.apply(s);
    return {d, AuditRecord{index, s, d}};
  }
};

class ExecuteOnDeny : public RuntimeModel {
 public:
  std::string_view name() const override { return "execute-on-deny"; }
  bool memoryless() const override { return true; }
  StepOutcome step(Symbol s, std::size_t a, WorldState& after, std::size_t index) const override {
    Decision d = gate(s, a);
    after.apply(s);
    return {d, AuditRecord{index, s, d}};
  }
};

class SkipAuditOnAdmit : public RuntimeModel {
 public:
  std::string_view name() const override { return "skip-audit-on-admit"; }
  bool memoryless() const override { return true; }
  StepOutcome step(Symbol s, std::size_t a, WorldState& after, std::size_t index) const override {
    Decision d = gate(s, a);
    if (d == Decision::kAdmit) {
      after.apply(s);
      return {d, std::nullopt};
    }
    return {d, AuditRecord{index, s, d}};
  }
};

class ExecuteWithoutEnvelope : public RuntimeModel {
 public:
  std::string_view name() const override { return "execute-without-envelope"; }
  bool memoryless() const override { return false; }
  StepOutcome step(Symbol s, std::size_t a, WorldState& after, std::size_t index) const override {
    if (after.executed_count > 0) {
      for (std::size_t i = 0; i < after.executed.size(); ++i) {
        if (after.executed[i] > 0) {
          after.apply(static_cast<Symbol>(i));
          break;
        }
      }
    }
    Decision d = gate(s, a);
    if (d == Decision::kAdmit) after.apply(s);
    return {d, AuditRecord{index, s, d}};
  }
};

const AuditRecord* record_for(const AuditLog& audit, std::size_t index) {
  if (!audit.empty() && audit.back().step == index) return &audit.back();
  return nullptr;
}

std::optional<std::uint64_t> checked_pow(std::uint64_t base, int exp, std::uint64_t limit) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > limit / base) return std::nullopt;
    r *= base;
  }
  return r;
}

class Enumerator {
 public:
  Enumerator(const RuntimeModel& model, std::size_t alphabet_size, std::vector<Symbol> symbols, int k_max)
      : model_(model),
        a_(alphabet_size),
        symbols_(std::move(symbols)),
        k_max_(k_max),
        worlds_(static_cast<std::size_t>(k_max) + 1, WorldState(alphabet_size)),
        trace_(static_cast<std::size_t>(k_max), 0) {}

  void run() { dfs(0); }

  std::uint64_t stepped() const { return stepped_; }
  const std::optional<std::vector<Symbol>>& witness() const { return witness_; }

 private:
  void dfs(std::size_t depth) {
    for (Symbol s : symbols_) {
      if (static_cast<int>(depth) + 1 > limit()) return;
      WorldState& after = worlds_[depth + 1];
      after = worlds_[depth];
      StepOutcome out = model_.step(s, a_, after, depth);
      std::size_t audit_size = audit_.size();
      if (out.record) audit_.push_back(*out.record);
      ++stepped_;
      trace_[depth] = s;
      auto v = violation_predicate({worlds_[depth], after, s, out.decision, audit_, depth});
      if (v) {
        best_depth_ = static_cast<int>(depth) + 1;
        witness_ = std::vector<Symbol>(trace_.begin(), trace_.begin() + static_cast<long>(depth) + 1);
      } else if (static_cast<int>(depth) + 1 < limit()) {
        dfs(depth + 1);
      }
      audit_.resize(audit_size);
    }
  }

  // Once a witness of length L is known only shorter ones can improve it.
  int limit() const { return witness_ ? best_depth_ - 1 : k_max_; }

  const RuntimeModel& model_;
  std::size_t a_;
  std::vector<Symbol> symbols_;
  int k_max_;
  std::vector<WorldState> worlds_;
  std::vector<Symbol> trace_;
  AuditLog audit_;
  std::uint64_t stepped_ = 0;
  int best_depth_ = 0;
  std::optional<std::vector<Symbol>> witness_;
};

std::string symbol_name(Symbol s, const std::vector<std::string>& alphabet) {
  return alphabet.at(static_cast<std::size_t>(s));
}

std::vector<std::string> alphabet_of(const std::vector<CapabilityKind>& d_kinds) {
  std::vector<std::string> out;
  for (const auto& k : d_kinds) out.push_back(k.token());
  std::sort(out.begin(), out.end());
  out.push_back("OUT");
  return out;
}

Json counter_example_json(const CounterExample& ce, const std::vector<std::string>& alphabet) {
  Json trace = Json::array();
  Json steps = Json::array();
  for (const auto& st : ce.steps) {
    trace.push_back(symbol_name(st.symbol, alphabet));
    steps.push_back({{"symbol", symbol_name(st.symbol, alphabet)},
                     {"decision", st.decision == Decision::kAdmit ? "admit" : "deny"},
                     {"executed_count", st.world_after.executed_count},
                     {"audit_records", st.audit.size()}});
  }
  return Json{{"trace", trace},
              {"steps", steps},
              {"violation", to_string(ce.violation)},
              {"violation_index", ce.violation_index}};
}

}  // namespace

std::unique_ptr<RuntimeModel> faithful_runtime() { return std::make_unique<FaithfulRuntime>(); }
std::unique_ptr<RuntimeModel> execute_on_deny_mutant() { return std::make_unique<ExecuteOnDeny>(); }
std::unique_ptr<RuntimeModel> skip_audit_on_admit_mutant() { return std::make_unique<SkipAuditOnAdmit>(); }
std::unique_ptr<RuntimeModel> execute_without_envelope_mutant() {
  return std::make_unique<ExecuteWithoutEnvelope>();
}

std::vector<std::string> runtime_model_names() {
  return {"faithful", "execute-on-deny", "skip-audit-on-admit", "execute-without-envelope"};
}

std::unique_ptr<RuntimeModel> runtime_model_by_name(std::string_view name) {
  if (name == "faithful") return faithful_runtime();
  if (name == "execute-on-deny") return execute_on_deny_mutant();
  if (name == "skip-audit-on-admit") return skip_audit_on_admit_mutant();
  if (name == "execute-without-envelope") return execute_without_envelope_mutant();
  throw Error(ErrorCode::kInvalidArgument, "unknown runtime model '" + std::string(name) + "'");
}

std::string_view to_string(ViolationClass v) {
  switch (v) {
    case ViolationClass::kExecutedWithoutAudit: return "executed-without-audit";
    case ViolationClass::kExecutedButDeny: return "executed-but-deny";
    case ViolationClass::kAdmittedWithoutAudit: return "admitted-without-audit";
  }
  return "executed-without-audit";
}

std::optional<ViolationClass> violation_predicate(const StepView& step) {
  const AuditRecord* rec = record_for(step.audit, step.index);
  if (step.after != step.before) {
    if (rec == nullptr) return ViolationClass::kExecutedWithoutAudit;
    if (rec->decision == Decision::kDeny) return ViolationClass::kExecutedButDeny;
    auto s = static_cast<std::size_t>(step.symbol);
    bool exactly_this = rec->symbol == step.symbol &&
                        step.after.executed_count == step.before.executed_count + 1 &&
                        s < step.after.executed.size() &&
                        step.after.executed[s] == step.before.executed[s] + 1;
    if (!exactly_this) return ViolationClass::kExecutedWithoutAudit;
  }
  if (step.decision == Decision::kAdmit && (rec == nullptr || rec->decision != Decision::kAdmit)) {
    return ViolationClass::kAdmittedWithoutAudit;
  }
  return std::nullopt;
}

std::vector<Symbol> CounterExample::trace() const {
  std::vector<Symbol> out;
  for (const auto& s : steps) out.push_back(s.symbol);
  return out;
}

std::optional<CounterExample> replay(const RuntimeModel& model, std::size_t alphabet_size,
                                     const std::vector<Symbol>& trace) {
  CounterExample ce;
  WorldState world(alphabet_size);
  AuditLog audit;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    WorldState after = world;
    StepOutcome out = model.step(trace[i], alphabet_size, after, i);
    if (out.record) audit.push_back(*out.record);
    ce.steps.push_back({trace[i], out.decision, after, audit});
    if (auto v = violation_predicate({world, after, trace[i], out.decision, audit, i})) {
      ce.violation_index = i;
      ce.violation = *v;
      return ce;
    }
    world = std::move(after);
  }
  return std::nullopt;
}

std::string bmc_instance_hash(const std::vector<CapabilityKind>& d_kinds, int k_max) {
  Json caps = Json::array();
  for (const auto& k : d_kinds) caps.push_back(k.token());
  std::vector<std::string> sorted = caps.get<std::vector<std::string>>();
  std::sort(sorted.begin(), sorted.end());
  return canonical_hash(Json{{"caps", sorted}, {"kmax", k_max}});
}

std::uint64_t geometric_trace_count(std::uint64_t alphabet_size, int k_max) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 0;
  std::uint64_t term = 1;
  for (int n = 1; n <= k_max; ++n) {
    if (alphabet_size != 0 && term > kMax / alphabet_size) return kMax;
    term *= alphabet_size;
    if (total > kMax - term) return kMax;
    total += term;
  }
  return total;
}

BmcVerdict method_c(const RuntimeModel& model, const std::vector<CapabilityKind>& d_kinds,
                    int k_max, const BmcOptions& options) {
  if (k_max < 1) throw Error(ErrorCode::kInvalidArgument, "k_max must be at least 1");
  const std::size_t a = d_kinds.size() + 1;
  if (k_max > kMaxExhaustiveKMax) {
    throw Error(ErrorCode::kBoundTooLarge,
                "k_max " + std::to_string(k_max) + " is beyond exhaustive reach (limit " +
                    std::to_string(kMaxExhaustiveKMax) + "); use the stochastic search, which is not a proof");
  }
  if (!checked_pow(a, k_max, options.budget)) {
    throw Error(ErrorCode::kBoundTooLarge,
                std::to_string(a) + "^" + std::to_string(k_max) + " traces exceed the enumeration budget of " +
                    std::to_string(options.budget));
  }

  BmcVerdict v;
  v.k_max = k_max;
  v.alphabet = alphabet_of(d_kinds);
  v.model = std::string(model.name());
  v.instance_hash = bmc_instance_hash(d_kinds, k_max);

  std::vector<Symbol> symbols;
  v.pruned = options.allow_pruning && model.memoryless() && a > 2;
  if (v.pruned) {
    symbols = {0, static_cast<Symbol>(a - 1)};  // one declared representative, then OUT
  } else {
    for (std::size_t s = 0; s < a; ++s) symbols.push_back(static_cast<Symbol>(s));
  }
  Enumerator e(model, a, symbols, k_max);
  e.run();
  v.reduced_traces = e.stepped();
  if (e.witness()) {
    v.unsat = false;
    v.counter_example = replay(model, a, *e.witness());
    v.traces_explored = e.stepped();
  } else {
    v.traces_explored = v.pruned ? geometric_trace_count(a, k_max) : e.stepped();
  }
  return v;
}

StochasticResult stochastic_search(const RuntimeModel& model, std::size_t declared_kinds,
                                   int max_length, std::uint64_t traces, std::uint64_t seed) {
  if (max_length < 1) throw Error(ErrorCode::kInvalidArgument, "max_length must be at least 1");
  StochasticResult r;
  r.max_length = max_length;
  r.seed = seed;
  const std::size_t a = declared_kinds + 1;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> length(1, max_length);
  std::uniform_int_distribution<Symbol> symbol(0, static_cast<Symbol>(a - 1));
  std::vector<Symbol> trace;
  for (; r.traces < traces; ++r.traces) {
    trace.resize(static_cast<std::size_t>(length(rng)));
    for (auto& s : trace) s = symbol(rng);
    if (auto ce = replay(model, a, trace)) {
      ++r.traces;
      r.counter_example = std::move(ce);
      break;
    }
  }
  return r;
}

Json to_json(const BmcVerdict& v) {
  Json j{{"schema", kBmcSchema},
         {"result", v.unsat ? "unsat" : "sat"},
         {"k_max", v.k_max},
         {"alphabet", v.alphabet},
         {"alphabet_size", v.alphabet_size()},
         {"traces_explored", v.traces_explored},
         {"reduced_traces", v.reduced_traces},
         {"pruned", v.pruned},
         {"model", v.model},
         {"instance_hash", v.instance_hash},
         {"checker", {{"name", kBmcCheckerName}, {"version", SKILLPROOF_VERSION}}}};
  if (v.counter_example) j["counter_example"] = counter_example_json(*v.counter_example, v.alphabet);
  return j;
}

Json to_json(const StochasticResult& r, const std::vector<CapabilityKind>& d_kinds,
             std::string_view model) {
  auto alphabet = alphabet_of(d_kinds);
  Json j{{"schema", kBmcSchema},
         {"result", r.counter_example ? "sat" : "no-counterexample-found"},
         {"proof", false},
         {"mode", "stochastic"},
         {"max_length", r.max_length},
         {"traces", r.traces},
         {"seed", r.seed},
         {"alphabet", alphabet},
         {"model", model},
         {"checker", {{"name", kBmcCheckerName}, {"version", SKILLPROOF_VERSION}}}};
  if (r.counter_example) j["counter_example"] = counter_example_json(*r.counter_example, alphabet);
  return j;
}

}  // namespace skillproof
