#include <gtest/gtest.h>

#include "rebac/io.hpp"
#include "support.hpp"

using namespace rebac;
using namespace testing_support;

namespace {

SynthConfig small(std::uint64_t seed, int n_sub = 3, int n_r = 8) {
  SynthConfig sc;
  sc.seed = seed;
  sc.n_sub = n_sub;
  sc.n_r = n_r;
  return sc;
}

std::set<std::string> feature_keys(const ObjectModel& om, const Rule& r) {
  const auto& cm = om.class_model();
  std::set<std::string> out;
  for (const auto& f : enumerate_features(om, FeatureLimits{}, cm.require(r.subject_type), cm.require(r.resource_type)))
    out.insert(f.key);
  return out;
}

std::vector<std::string> atom_keys(const Rule& r) {
  std::vector<std::string> out;
  for (const auto& c : r.subject_condition) out.push_back(make_feature(FeatureKind::kSubjectCondition, c).key);
  for (const auto& c : r.resource_condition) out.push_back(make_feature(FeatureKind::kResourceCondition, c).key);
  for (const auto& c : r.constraint) out.push_back(make_feature(c).key);
  return out;
}

}  // namespace

TEST(ClassModel, FourteenClassesThatValidate) {
  const auto cm = gen_class_model();
  EXPECT_EQ(cm->size(), 14u);
  for (const char* name : {"Sub_1", "Sub_5", "Res_1", "Res_5", "DirectSingle", "Mul2", "MulSingle_1", "MulSingle_2"})
    EXPECT_NO_THROW(cm->require(name)) << name;
  EXPECT_THROW(cm->require("Sub_6"), LookupError);
}

TEST(ObjectModel, InstanceCounts) {
  const auto om = gen_object_model(gen_class_model(), small(1, 10));
  const auto& cm = om->class_model();
  EXPECT_EQ(om->instances(cm.require("Sub_2")).size(), 10u);
  EXPECT_EQ(om->instances(cm.require("Res_4")).size(), 50u);
  for (const char* h : {"DirectSingle", "Mul2", "MulSingle_1", "MulSingle_2"})
    EXPECT_EQ(om->instances(cm.require(h)).size(), 3u) << h;
  EXPECT_EQ(om->size(), 312u);
}

TEST(ObjectModel, ManyFieldSizes) {
  const auto om = gen_object_model(gen_class_model(), small(4, 4));
  const auto& cm = om->class_model();
  std::set<std::size_t> seen;
  for (const auto& o : om->to_raw())
    for (const auto& [name, v] : o.fields) {
      const auto* many = std::get_if<std::vector<std::string>>(&v);
      if (!many) continue;
      const auto& decl = cm.decls().at(static_cast<std::size_t>(cm.require(o.type)));
      const auto it = std::find_if(decl.fields.begin(), decl.fields.end(), [&](const FieldDecl& f) { return f.name == name; });
      ASSERT_NE(it, decl.fields.end());
      const auto pool = om->instances(cm.require(it->type)).size();
      EXPECT_TRUE(many->size() == 1 || many->size() == pool - 1 || many->size() == pool) << o.id << "." << name;
      seen.insert(many->size());
    }
  EXPECT_EQ(seen, (std::set<std::size_t>{1, 2, 3, 4}));
}

TEST(Rules, ExactlyNrWellFormedSatisfiable) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto b = generate_bundle(small(seed, 10, 20));
    ASSERT_EQ(b.rules.size(), 20u);
    EXPECT_EQ(std::set<Rule>(b.rules.begin(), b.rules.end()).size(), 20u);
    for (const auto& r : b.rules) {
      EXPECT_NO_THROW(validate_rule(*b.object_model, r)) << to_string(r);
      EXPECT_FALSE(rule_meaning(*b.object_model, r).empty()) << to_string(r);
      ASSERT_EQ(r.actions.size(), 1u);
      EXPECT_EQ(r.subject_type.rfind("Sub_", 0), 0u);
      EXPECT_EQ(r.resource_type.rfind("Res_", 0), 0u);
    }
    std::size_t planned = 0;
    for (const auto& s : b.shapes) planned += s.atom_counts.size();
    EXPECT_EQ(planned, 20u);
  }
}

TEST(Rules, EveryAtomTypeRealizableAndEnumerable) {
  for (std::size_t t = 0; t < kAtomTypeCount; ++t) {
    SynthConfig sc = small(t + 1, 3, 6);
    sc.type_frequencies.fill(0);
    sc.type_frequencies[t] = 1;
    const auto b = generate_bundle(sc);
    ASSERT_EQ(b.rules.size(), 6u) << atom_type_names()[t];
    for (const auto& r : b.rules) {
      const auto keys = feature_keys(*b.object_model, r);
      for (const auto& k : atom_keys(r)) EXPECT_TRUE(keys.count(k)) << atom_type_names()[t] << ": " << k;
    }
  }
}

TEST(Rules, AtomTypeNamesRoundTrip) {
  for (std::size_t t = 0; t < kAtomTypeCount; ++t)
    EXPECT_EQ(parse_atom_type(atom_type_names()[t]), static_cast<AtomType>(t));
  EXPECT_FALSE(parse_atom_type("constraint-equal-9-9").has_value());
}

TEST(Distributions, MatchConfiguredWithinTwoPoints) {
  const SynthConfig sc;
  std::array<double, 4> nr{};
  std::array<double, 3> na{};
  double groups = 0, rules = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Rng rng = make_rng(seed, "synthetic/rules");
    for (const auto& s : sample_rule_shapes(sc, rng)) {
      nr[s.n_r - 1] += 1;
      groups += 1;
      for (int a : s.atom_counts) {
        na[a - 1] += 1;
        rules += 1;
      }
    }
  }
  for (std::size_t k = 0; k < nr.size(); ++k) EXPECT_NEAR(nr[k] / groups, sc.rules_per_pair_dist[k], 0.02) << k;
  for (std::size_t k = 0; k < na.size(); ++k) EXPECT_NEAR(na[k] / rules, sc.atoms_per_rule_dist[k], 0.02) << k;
}

TEST(Authorizations, EmptyRulesGiveEmptyAu) {
  const auto om = gen_object_model(gen_class_model(), small(2));
  const auto acl = compute_au(om, {}, synth_actions(5));
  EXPECT_TRUE(acl.authorizations.empty());
  EXPECT_EQ(acl.actions.size(), 5u);
}

TEST(Authorizations, BundleIsConsistentWithItsRules) {
  const auto b = generate_bundle(small(6, 3, 10));
  EXPECT_EQ(oracle_for(*b.object_model).meaning(b.rules), as_strings(*b.object_model, b.acl.authorizations));
  EXPECT_TRUE(check_consistency(b.policy(), b.acl).consistent);
}

TEST(Authorizations, GrowWithSubjects) {
  double small_total = 0, large_total = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    small_total += static_cast<double>(generate_bundle(small(seed, 2, 10)).acl.authorizations.size());
    large_total += static_cast<double>(generate_bundle(small(seed, 6, 10)).acl.authorizations.size());
  }
  EXPECT_GT(large_total, small_total);
}

TEST(Determinism, SameSeedByteIdentical) {
  const auto x = generate_bundle(small(11, 4, 12));
  const auto y = generate_bundle(small(11, 4, 12));
  EXPECT_EQ(dump(to_json(*x.object_model)), dump(to_json(*y.object_model)));
  EXPECT_EQ(dump(rules_to_json(x.rules)), dump(rules_to_json(y.rules)));
  EXPECT_EQ(dump(to_json(x.acl)), dump(to_json(y.acl)));
  const auto z = generate_bundle(small(12, 4, 12));
  EXPECT_NE(dump(rules_to_json(x.rules)), dump(rules_to_json(z.rules)));
}

TEST(Config, RejectsBadValues) {
  SynthConfig sc;
  sc.n_sub = 0;
  EXPECT_THROW(generate_bundle(sc), std::invalid_argument);
  sc = SynthConfig{};
  sc.type_frequencies.fill(0);
  EXPECT_THROW(generate_bundle(sc), std::invalid_argument);
  sc = SynthConfig{};
  sc.type_frequencies[0] = -1;
  EXPECT_THROW(generate_bundle(sc), std::invalid_argument);
}
