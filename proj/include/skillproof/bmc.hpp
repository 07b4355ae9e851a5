#pragma once

// Method C: explicit-state bounded model checking of the audit biconditional
// (a world change happens at a step iff the audit log records that step's
// envelope as admitted) over every envelope trace up to k_max.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillproof/canonical_json.hpp"
#include "skillproof/capability.hpp"

namespace skillproof {

inline constexpr std::string_view kBmcCheckerName = "skillproof-bmc";
inline constexpr std::string_view kBmcSchema = "skillproof/bmc@1";
inline constexpr int kDefaultKMax = 8;
inline constexpr int kMaxExhaustiveKMax = 8;
inline constexpr std::uint64_t kDefaultBudget = 250'000'000;

enum class Decision : std::uint8_t { kDeny = 0, kAdmit = 1 };

// Symbols are indices: 0..n-1 name the sorted declared kinds, n is OUT.
using Symbol = int;

struct WorldState {
  std::uint64_t executed_count = 0;
  std::vector<std::uint32_t> executed;  // multiset: count per symbol

  explicit WorldState(std::size_t alphabet_size = 0) : executed(alphabet_size, 0) {}
  void apply(Symbol s) {
    ++executed[static_cast<std::size_t>(s)];
    ++executed_count;
  }
  bool operator==(const WorldState&) const = default;
};

struct AuditRecord {
  std::size_t step = 0;
  Symbol symbol = 0;
  Decision decision = Decision::kDeny;
  bool operator==(const AuditRecord&) const = default;
};

using AuditLog = std::vector<AuditRecord>;

struct StepOutcome {
  Decision decision = Decision::kDeny;
  std::optional<AuditRecord> record;
};

// A runtime under test. `step` receives `after` as a copy of the pre-state
// and mutates it; it must be deterministic.
class RuntimeModel {
 public:
  virtual ~RuntimeModel() = default;
  virtual std::string_view name() const = 0;
  /// True when the gate and executor depend only on whether the symbol is
  /// declared or OUT, which lets the checker enumerate symbol classes.
  virtual bool memoryless() const = 0;
  virtual StepOutcome step(Symbol symbol, std::size_t alphabet_size, WorldState& after,
                           std::size_t index) const = 0;
};

/// Admits declared symbols, denies OUT, executes exactly on admit, logs every
/// step.
std::unique_ptr<RuntimeModel> faithful_runtime();
/// Executes the envelope even when the gate denies it.
std::unique_ptr<RuntimeModel> execute_on_deny_mutant();
/// Executes admitted envelopes without writing the audit record.
std::unique_ptr<RuntimeModel> skip_audit_on_admit_mutant();
/// Once anything has executed, replays the first executed symbol on every
/// later step with no envelope behind it.
std::unique_ptr<RuntimeModel> execute_without_envelope_mutant();
/// "faithful", "execute-on-deny", "skip-audit-on-admit",
/// "execute-without-envelope". Throws Error(kInvalidArgument).
std::unique_ptr<RuntimeModel> runtime_model_by_name(std::string_view name);
std::vector<std::string> runtime_model_names();

enum class ViolationClass { kExecutedWithoutAudit, kExecutedButDeny, kAdmittedWithoutAudit };
std::string_view to_string(ViolationClass v);

struct StepView {
  const WorldState& before;
  const WorldState& after;
  Symbol symbol;
  Decision decision;
  const AuditLog& audit;  // every record through this step
  std::size_t index;
};

std::optional<ViolationClass> violation_predicate(const StepView& step);

struct CounterExampleStep {
  Symbol symbol = 0;
  Decision decision = Decision::kDeny;
  WorldState world_after;
  AuditLog audit;  // log after the step
};

struct CounterExample {
  std::vector<CounterExampleStep> steps;
  std::size_t violation_index = 0;  // 0-based step index
  ViolationClass violation = ViolationClass::kExecutedWithoutAudit;

  std::vector<Symbol> trace() const;
};

struct BmcOptions {
  std::uint64_t budget = kDefaultBudget;
  bool allow_pruning = true;
};

struct BmcVerdict {
  bool unsat = true;
  std::optional<CounterExample> counter_example;
  int k_max = 0;
  std::vector<std::string> alphabet;  // declared kind tokens, then "OUT"
  std::uint64_t traces_explored = 0;   // full-alphabet trace count
  std::uint64_t reduced_traces = 0;    // traces actually stepped
  bool pruned = false;
  std::string model;
  std::string instance_hash;

  std::size_t alphabet_size() const { return alphabet.size(); }
};

/// sha256 of canonical {"caps": [sorted kind tokens], "kmax": k}.
std::string bmc_instance_hash(const std::vector<CapabilityKind>& d_kinds, int k_max);

/// Σ_{n=1..k} a^n, saturating at UINT64_MAX.
std::uint64_t geometric_trace_count(std::uint64_t alphabet_size, int k_max);

/// Exhaustive search. Throws Error(kInvalidArgument) when k_max < 1 and
/// Error(kBoundTooLarge) when k_max exceeds 8 or |Σ|^k_max exceeds the budget.
BmcVerdict method_c(const RuntimeModel& model, const std::vector<CapabilityKind>& d_kinds,
                    int k_max, const BmcOptions& options = {});

/// Replays `trace` through `model` and returns the first violating step, if
/// any.
std::optional<CounterExample> replay(const RuntimeModel& model, std::size_t alphabet_size,
                                     const std::vector<Symbol>& trace);

struct StochasticResult {
  std::uint64_t traces = 0;
  int max_length = 0;
  std::uint64_t seed = 0;
  std::optional<CounterExample> counter_example;
};

/// Random-trace search for bounds beyond exhaustive reach. Not a proof.
StochasticResult stochastic_search(const RuntimeModel& model, std::size_t declared_kinds,
                                   int max_length, std::uint64_t traces, std::uint64_t seed);

Json to_json(const BmcVerdict& verdict);
Json to_json(const StochasticResult& result, const std::vector<CapabilityKind>& d_kinds,
             std::string_view model);

}  // namespace skillproof
