#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skillproof/abstract_value.hpp"
#include "skillproof/canonical_json.hpp"
#include "skillproof/capability.hpp"

namespace skillproof {

struct Provenance {
  std::string file;
  int line = 0;
  std::string rule_id;
  auto operator<=>(const Provenance&) const = default;
  bool operator==(const Provenance&) const = default;
};

struct EffectTuple {
  CapabilityKind kind;
  AbstractValue arg;
  Provenance provenance;

  /// "kind(arg)" with "*" for Top.
  std::string display() const;
  bool operator==(const EffectTuple&) const = default;
};

/// Element of the effect lattice. Tuples are deduplicated on (kind, arg);
/// the smallest provenance is kept so join stays commutative.
class EffectSet {
 public:
  using Key = std::pair<CapabilityKind, AbstractValue>;

  EffectSet() = default;

  static EffectSet top(Provenance source);

  void add(EffectTuple tuple);
  void taint(Provenance source);

  bool tainted_top() const { return tainted_top_; }
  bool empty() const { return effects_.empty() && !tainted_top_; }
  std::size_t size() const { return effects_.size(); }
  std::vector<EffectTuple> effects() const;
  const std::set<Provenance>& taint_sources() const { return taint_sources_; }
  /// (kind, arg) pairs without provenance.
  std::set<Key> keys() const;

  bool operator==(const EffectSet&) const = default;

 private:
  std::map<Key, Provenance> effects_;
  bool tainted_top_ = false;
  std::set<Provenance> taint_sources_;
};

EffectSet effects_join(const EffectSet& a, const EffectSet& b);

/// Tuple-wise coverage: every effect of `a` is below some effect of `b` of
/// the same kind, or `b` is tainted.
bool effects_leq(const EffectSet& a, const EffectSet& b);

struct ContainmentVerdict {
  bool contained = true;
  bool tainted_top = false;
  std::vector<EffectTuple> violations;
  std::vector<Provenance> taint_sources;
};

ContainmentVerdict containment_check(const EffectSet& effects,
                                     std::span<const CapabilityToken> declared);

/// True iff some declared token of the same kind covers `arg`.
bool token_covers(std::span<const CapabilityToken> declared, const CapabilityKind& kind,
                  const AbstractValue& arg);

Json to_json(const AbstractValue& value);
Json to_json(const Provenance& provenance);
Json to_json(const EffectTuple& tuple);
Json to_json(const EffectSet& set);
Json to_json(const ContainmentVerdict& verdict);

}  // namespace skillproof
