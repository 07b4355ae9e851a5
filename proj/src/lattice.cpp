#include "skillproof/lattice.hpp"

#include <algorithm>

namespace skillproof {

std::string EffectTuple::display() const { return kind.token() + "(" + arg.to_string() + ")"; }

EffectSet EffectSet::top(Provenance source) {
  EffectSet s;
  s.taint(std::move(source));
  return s;
}

void EffectSet::add(EffectTuple tuple) {
  Key key{std::move(tuple.kind), std::move(tuple.arg)};
  auto it = effects_.find(key);
  if (it == effects_.end()) {
    effects_.emplace(std::move(key), std::move(tuple.provenance));
  } else if (tuple.provenance < it->second) {
    it->second = std::move(tuple.provenance);
  }
}

void EffectSet::taint(Provenance source) {
  tainted_top_ = true;
  taint_sources_.insert(std::move(source));
}

std::vector<EffectTuple> EffectSet::effects() const {
  std::vector<EffectTuple> out;
  out.reserve(effects_.size());
  for (const auto& [key, prov] : effects_) out.push_back(EffectTuple{key.first, key.second, prov});
  return out;
}

std::set<EffectSet::Key> EffectSet::keys() const {
  std::set<Key> out;
  for (const auto& [key, prov] : effects_) out.insert(key);
  return out;
}

EffectSet effects_join(const EffectSet& a, const EffectSet& b) {
  EffectSet out = a;
  for (auto& t : b.effects()) out.add(std::move(t));
  for (const auto& src : b.taint_sources()) out.taint(src);
  return out;
}

bool effects_leq(const EffectSet& a, const EffectSet& b) {
  if (b.tainted_top()) return true;
  if (a.tainted_top()) return false;
  const auto bs = b.effects();
  for (const auto& t : a.effects()) {
    bool covered = std::any_of(bs.begin(), bs.end(), [&](const EffectTuple& u) {
      return u.kind == t.kind && value_leq(t.arg, u.arg);
    });
    if (!covered) return false;
  }
  return true;
}

bool token_covers(std::span<const CapabilityToken> declared, const CapabilityKind& kind,
                  const AbstractValue& arg) {
  return std::any_of(declared.begin(), declared.end(), [&](const CapabilityToken& tok) {
    return tok.kind == kind && value_leq(arg, tok.arg);
  });
}

ContainmentVerdict containment_check(const EffectSet& effects,
                                     std::span<const CapabilityToken> declared) {
  ContainmentVerdict v;
  v.tainted_top = effects.tainted_top();
  v.taint_sources.assign(effects.taint_sources().begin(), effects.taint_sources().end());
  for (auto& t : effects.effects()) {
    if (!token_covers(declared, t.kind, t.arg)) v.violations.push_back(std::move(t));
  }
  v.contained = !v.tainted_top && v.violations.empty();
  return v;
}

Json to_json(const AbstractValue& value) {
  Json j = Json::object();
  j["type"] = std::string(value.type_name());
  if (auto i = value.get_if<IntInterval>()) {
    j["lo"] = i->lo;
    j["hi"] = i->hi;
  } else if (!value.is_top() && !value.is_bottom()) {
    j["value"] = value.to_string();
  }
  return j;
}

Json to_json(const Provenance& p) {
  return Json{{"file", p.file}, {"line", p.line}, {"rule_id", p.rule_id}};
}

Json to_json(const EffectTuple& t) {
  return Json{{"kind", t.kind.token()},
              {"arg", to_json(t.arg)},
              {"effect", t.display()},
              {"provenance", to_json(t.provenance)}};
}

Json to_json(const EffectSet& set) {
  Json effects = Json::array();
  for (const auto& t : set.effects()) effects.push_back(to_json(t));
  Json taints = Json::array();
  for (const auto& p : set.taint_sources()) taints.push_back(to_json(p));
  return Json{{"effects", effects}, {"tainted_top", set.tainted_top()}, {"taint_sources", taints}};
}

Json to_json(const ContainmentVerdict& verdict) {
  Json violations = Json::array();
  for (const auto& t : verdict.violations) violations.push_back(to_json(t));
  Json taints = Json::array();
  for (const auto& p : verdict.taint_sources) taints.push_back(to_json(p));
  return Json{{"contained", verdict.contained},
              {"tainted_top", verdict.tainted_top},
              {"violations", violations},
              {"taint_sources", taints}};
}

}  // namespace skillproof
