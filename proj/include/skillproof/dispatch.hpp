#pragma once

// Method B: the refinement dispatcher. An envelope reaches a host API only
// through RefinedDispatcher::dispatch, which admits it iff its capability is
// covered by the frozen declared set.

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "skillproof/canonical_json.hpp"
#include "skillproof/capability.hpp"
#include "skillproof/manifest.hpp"

namespace skillproof {

inline constexpr std::string_view kDispatchCheckerName = "skillproof-dispatch";
inline constexpr std::string_view kTypesProofSchema = "skillproof/types@1";

struct Envelope {
  CapabilityKind op;
  std::map<std::string, std::string> args;
  std::string reasoning;  // model-authored text; never read by dispatch

  /// Throws Error(kMalformedEnvelope) for an op outside `vocab` or an empty
  /// args key.
  static Envelope make(std::string_view op, std::map<std::string, std::string> args = {},
                       std::string reasoning = {},
                       const Vocabulary& vocab = Vocabulary::standard());
};

struct Admit {
  CapabilityKind op;
  bool operator==(const Admit&) const = default;
};

struct RefinementRejection {
  CapabilityKind op;
  std::string declared_hash;
  bool operator==(const RefinementRejection&) const = default;
};

using DispatchResult = std::variant<Admit, RefinementRejection>;

class RefinedDispatcher {
 public:
  /// Deep-copies m.caps; later changes to `m` are not observed.
  explicit RefinedDispatcher(const Manifest& m, bool log_admits = false,
                             const Vocabulary& vocab = Vocabulary::standard());

  DispatchResult dispatch(const Envelope& e) const;

  std::span<const CapabilityToken> declared() const { return *declared_; }
  const std::string& declared_hash() const { return declared_hash_; }
  /// Snapshot of admitted envelopes, in admission order (empty unless logging).
  std::vector<Envelope> admit_log() const;

 private:
  std::shared_ptr<const std::vector<CapabilityToken>> declared_;
  std::string declared_hash_;
  const Vocabulary* vocab_;
  bool log_admits_;
  std::shared_ptr<std::mutex> log_mutex_;
  std::shared_ptr<std::vector<Envelope>> log_;
};

RefinedDispatcher build_refined_dispatch(const Manifest& m);

/// Raised by the host shim when an envelope is rejected.
class RefinementError : public std::runtime_error {
 public:
  explicit RefinementError(RefinementRejection rejection);
  const RefinementRejection& rejection() const noexcept { return rejection_; }

 private:
  RefinementRejection rejection_;
};

// Outermost shim in front of host APIs: forwards admitted envelopes to the
// host callback and throws RefinementError for everything else.
class GuardedHost {
 public:
  explicit GuardedHost(const RefinedDispatcher& dispatcher) : dispatcher_(dispatcher) {}

  template <typename HostApi>
  decltype(auto) invoke(const Envelope& e, HostApi&& host_api) const {
    auto result = dispatcher_.dispatch(e);
    if (auto* rejected = std::get_if<RefinementRejection>(&result)) {
      throw RefinementError(std::move(*rejected));
    }
    return std::forward<HostApi>(host_api)(e);
  }

 private:
  const RefinedDispatcher& dispatcher_;
};

struct ProbeRow {
  Envelope envelope;
  bool admitted = false;
};

struct TypedDispatchVerdict {
  std::vector<CapabilityKind> declared_kinds;
  std::vector<ProbeRow> probes;  // one per vocabulary kind, sorted by kind
  std::vector<CapabilityKind> admitted;
  std::vector<CapabilityKind> rejected;
  double capacity_bits = 0.0;
  std::string declared_hash;
  bool pass = false;

  std::size_t probed() const { return probes.size(); }
};

/// log2(kinds + 1).
double capacity_bits(std::size_t kinds);
/// Shortest decimal string that round-trips `bits`.
std::string format_bits(double bits);

/// A value inside `pattern` (or an arbitrary one for Top), as envelope text.
std::string probe_witness(const AbstractValue& pattern, ArgDomain domain);

TypedDispatchVerdict method_b(const Manifest& m, const Vocabulary& vocab = Vocabulary::standard());

Json to_json(const TypedDispatchVerdict& verdict);

}  // namespace skillproof
