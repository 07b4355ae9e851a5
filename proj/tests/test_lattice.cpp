#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "skillproof/lattice.hpp"

using namespace skillproof;

namespace {

CapabilityKind kind(std::string_view t) { return Vocabulary::standard().kind(t); }

EffectTuple tuple(std::string_view k, AbstractValue v, int line = 1) {
  return EffectTuple{kind(k), std::move(v), Provenance{"s.py", line, "r"}};
}

// Reference containment: every tuple needs a same-kind token above it.
bool oracle_contained(const EffectSet& e, const std::vector<CapabilityToken>& d) {
  if (e.tainted_top()) return false;
  for (const auto& t : e.effects()) {
    bool covered = false;
    for (const auto& c : d) covered = covered || (c.kind == t.kind && value_leq(t.arg, c.arg));
    if (!covered) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("join examples") {
  EffectSet empty;
  CHECK(effects_join(empty, empty).empty());

  EffectSet net;
  net.add(tuple("net.egress", AbstractValue::top()));
  auto joined = effects_join(net, EffectSet::top(Provenance{"x.py", 3, "py-eval"}));
  CHECK(joined.tainted_top());

  EffectSet a, b;
  a.add(tuple("fs.read", AbstractValue::path("./.cache/")));
  b.add(tuple("net.egress", AbstractValue::host("*.example.com")));
  auto ab = effects_join(a, b);
  CHECK(ab.size() == 2);
  CHECK_FALSE(ab.tainted_top());
}

TEST_CASE("duplicate tuples keep the smallest provenance") {
  EffectSet a, b;
  a.add(tuple("fs.read", AbstractValue::path("./x/"), 9));
  b.add(tuple("fs.read", AbstractValue::path("./x/"), 4));
  auto ab = effects_join(a, b);
  REQUIRE(ab.size() == 1);
  CHECK(ab.effects()[0].provenance.line == 4);
  CHECK(effects_join(b, a) == ab);
}

TEST_CASE("join matches the set-union oracle") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    auto a = testing::random_effects(rng);
    auto b = testing::random_effects(rng);
    auto j = effects_join(a, b);
    auto want = a.keys();
    auto bk = b.keys();
    want.insert(bk.begin(), bk.end());
    CHECK(j.keys() == want);
    CHECK(j.tainted_top() == (a.tainted_top() || b.tainted_top()));
  }
}

TEST_CASE("join semilattice laws") {
  std::mt19937_64 rng(5);
  EffectSet bottom;
  for (int i = 0; i < 2000; ++i) {
    auto a = testing::random_effects(rng);
    auto b = testing::random_effects(rng);
    auto c = testing::random_effects(rng);
    CHECK(effects_join(a, b) == effects_join(b, a));
    CHECK(effects_join(effects_join(a, b), c) == effects_join(a, effects_join(b, c)));
    CHECK(effects_join(a, a) == a);
    CHECK(effects_join(a, bottom) == a);
    CHECK(effects_leq(a, effects_join(a, b)));
  }
}

TEST_CASE("worked-example containment") {
  EffectSet e;
  e.add(tuple("net.egress", AbstractValue::host("*.example.com"), 15));
  e.add(tuple("fs.read", AbstractValue::path("./.cache/"), 22));
  e.add(tuple("fs.write.rev", AbstractValue::path("./.cache/"), 17));
  std::vector<CapabilityToken> d = {parse_capability_token("net.egress(*.example.com)"),
                                    parse_capability_token("fs.read(./.cache/)")};
  auto v = containment_check(e, d);
  CHECK_FALSE(v.contained);
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0].display() == "fs.write.rev(./.cache/)");
  CHECK(v.violations[0].provenance.line == 17);

  d.push_back(parse_capability_token("fs.write.rev(./.cache/)"));
  CHECK(containment_check(e, d).contained);
}

TEST_CASE("empty effects are contained in any D") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) CHECK(containment_check(EffectSet{}, testing::random_caps(rng)).contained);
  CHECK(containment_check(EffectSet{}, {}).contained);
}

TEST_CASE("tainted top is never contained, even by the full vocabulary at top") {
  std::vector<CapabilityToken> all;
  for (const auto& k : Vocabulary::standard().kinds()) all.push_back(CapabilityToken{k, AbstractValue::top()});
  auto top = EffectSet::top(Provenance{"s.py", 1, "py-eval"});
  auto v = containment_check(top, all);
  CHECK_FALSE(v.contained);
  CHECK(v.tainted_top);
  REQUIRE(v.taint_sources.size() == 1);
  CHECK(v.taint_sources[0].rule_id == "py-eval");
  // every individual kind at Top is covered, so only the taint blocks it
  for (const auto& k : Vocabulary::standard().kinds()) {
    EffectSet one;
    one.add(EffectTuple{k, AbstractValue::top(), Provenance{"s.py", 1, "r"}});
    CHECK(containment_check(one, all).contained);
  }
}

TEST_CASE("containment agrees with the reference and is monotone") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 3000; ++i) {
    auto e1 = testing::random_effects(rng);
    auto e2 = testing::random_effects(rng);
    auto d = testing::random_caps(rng, 6);
    auto v = containment_check(e1, d);
    CHECK(v.contained == oracle_contained(e1, d));
    CHECK(v.contained == (v.violations.empty() && !v.tainted_top));
    if (effects_leq(e1, e2) && containment_check(e2, d).contained) CHECK(v.contained);
    if (v.contained) {
      auto more = d;
      more.push_back(CapabilityToken{testing::random_kind(rng), AbstractValue::top()});
      std::sort(more.begin(), more.end());
      CHECK(containment_check(e1, more).contained);
    }
  }
}

TEST_CASE("effect set JSON") {
  EffectSet e;
  e.add(tuple("fs.read", AbstractValue::path("./.cache/"), 22));
  CHECK(canonicalize(to_json(e)) ==
        R"j({"effects":[{"arg":{"type":"path","value":"./.cache/"},"effect":"fs.read(./.cache/)","kind":"fs.read",)j"
        R"j("provenance":{"file":"s.py","line":22,"rule_id":"r"}}],"taint_sources":[],"tainted_top":false})j");
}
