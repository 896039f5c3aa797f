#include <gtest/gtest.h>

#include "support.hpp"

using namespace rebac;
using namespace testing_support;

namespace {

struct Ctx {
  std::shared_ptr<const ObjectModel> om;
  AuthorizationSet au;
  std::shared_ptr<const PairContext> ctx;
  Grammar grammar;

  Ctx(std::shared_ptr<const ObjectModel> o, const std::vector<Rule>& rules, const std::string& cs = "Physician",
      const std::string& cr = "Consultation")
      : om(std::move(o)),
        au(policy_meaning(*om, rules)),
        ctx(make_pair_context(om, au, om->class_model().require(cs), om->class_model().require(cr), FeatureLimits{})),
        grammar(specialize_grammar(ctx)) {}

  std::size_t pair(const std::string& s, const std::string& r) const {
    return ctx->table->pair_of(om->require(s), om->require(r)).value();
  }

  AuthorizationSet meaning(const std::vector<MinedRule>& rules) const {
    std::vector<Rule> rs;
    for (const auto& m : rules) rs.push_back(m.rule);
    return policy_meaning(*om, rs);
  }
};

Rule with_actions(Rule r, std::vector<std::string> actions) {
  r.actions = std::move(actions);
  return canonicalize(r);
}

Rule physician_rule(std::vector<AtomicCondition> sc, std::vector<AtomicConstraint> con, std::vector<std::string> acts) {
  Rule r;
  r.subject_type = "Physician";
  r.resource_type = "Consultation";
  r.subject_condition = std::move(sc);
  r.constraint = std::move(con);
  r.actions = std::move(acts);
  return canonicalize(r);
}

const AtomicConstraint kTreats{{}, ConstraintOp::kEqual, {"physician"}};

// Two indistinguishable objects per class: only ids separate tuples.
std::shared_ptr<const ObjectModel> blank_model() {
  auto cm = std::make_shared<const ClassModel>(std::vector<ClassDecl>{{"A", {}}, {"B", {}}});
  return std::make_shared<const ObjectModel>(
      cm, std::vector<RawObject>{{"a1", "A", {}}, {"a2", "A", {}}, {"b1", "B", {}}, {"b2", "B", {}}});
}

std::vector<std::size_t> multiset(const std::vector<std::int64_t>& v) {
  std::vector<std::size_t> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Seeds, OneRulePerSatisfiedConstraintPlusAtomFree) {
  Ctx c(emr_object_model(), {emr_rule()});
  const auto& table = *c.ctx->table;
  Evaluator ev(c.grammar, c.ctx->au);
  SearchConfig cfg;
  Rng rng = make_rng(1, "test/seeds");
  for (const auto& [s, r] : {std::pair{"doc1", "consultation1-1"}, std::pair{"doc5", "consultation5-1"}}) {
    const auto p = c.pair(s, r);
    Search search(c.grammar, ev, p, 0, cfg, rng);
    std::size_t satisfied = 0;
    for (std::size_t k = 0; k < table.size(); ++k)
      if (table.feature(k).kind == FeatureKind::kConstraint && evaluate_feature(*c.om, table.feature(k),
                                                                                  c.om->require(s), c.om->require(r)))
        ++satisfied;
    const auto seeds = search.seed_rules();
    EXPECT_EQ(seeds.size(), satisfied + 1);
    for (const auto& tree : seeds) {
      const auto rule = yield(c.grammar, tree);
      EXPECT_TRUE(rule.subject_condition.empty());
      EXPECT_TRUE(rule.resource_condition.empty());
      EXPECT_LE(rule.constraint.size(), 1u);
      EXPECT_EQ(rule.actions, std::vector<std::string>{"createMedicalRecord"});
      EXPECT_TRUE(rule_meaning(*c.om, rule).count({c.om->require(s), c.om->require(r), "createMedicalRecord"}));
    }
    EXPECT_EQ(search.seed_population().size(), static_cast<std::size_t>(cfg.population));
  }
}

TEST(Seeds, NoSatisfiedConstraintStillNonEmpty) {
  Rule r;
  r.subject_type = "A";
  r.resource_type = "B";
  r.actions = {"x"};
  Ctx c(blank_model(), {r}, "A", "B");
  Evaluator ev(c.grammar, c.ctx->au);
  SearchConfig cfg;
  Rng rng = make_rng(1, "test/seeds");
  Search s(c.grammar, ev, 0, 0, cfg, rng);
  ASSERT_EQ(s.seed_rules().size(), 1u);
  EXPECT_EQ(s.seed_population().size(), static_cast<std::size_t>(cfg.population));
}

TEST(Operators, FuzzedApplicationsStayWellFormed) {
  Ctx c(emr_object_model(), {emr_rule(), with_actions(emr_rule(), {"read"})});
  Evaluator ev(c.grammar, c.ctx->au);
  SearchConfig cfg;
  Rng rng = make_rng(2, "test/ops");
  const auto pairs = c.ctx->table->pair_count();
  std::vector<DerivationNode> pool;
  Search s0(c.grammar, ev, 0, 0, cfg, rng);
  for (int i = 0; i < 20; ++i) pool.push_back(s0.random_genome());
  for (int i = 0; i < 10000; ++i) {
    Search s(c.grammar, ev, uniform_index(rng, pairs), uniform_index(rng, 2), cfg, rng);
    const auto op = static_cast<Operator>(uniform_index(rng, 5));
    const auto& x = pool[uniform_index(rng, pool.size())];
    const auto& m = pool[uniform_index(rng, pool.size())];
    auto y = s.apply(op, x, m);
    ASSERT_TRUE(well_formed(c.grammar, y)) << static_cast<int>(op);
    for (std::size_t p = 0; p < 3; ++p) ASSERT_LE(list_items(y.children[p]).size(), static_cast<std::size_t>(cfg.max_list));
    ASSERT_NO_THROW(validate_rule(*c.om, yield(c.grammar, y)));
    pool[uniform_index(rng, pool.size())] = std::move(y);
  }
}

TEST(Operators, SimplifyOnSingleAtomGivesEmptyBody) {
  Ctx c(emr_object_model(), {emr_rule()});
  Evaluator ev(c.grammar, c.ctx->au);
  SearchConfig cfg;
  Rng rng = make_rng(3, "test/ops");
  Search s(c.grammar, ev, 0, 0, cfg, rng);
  const auto one = *parse(c.grammar, physician_rule({}, {kTreats}, {"createMedicalRecord"}));
  const auto out = yield(c.grammar, s.simplify_mutation(one));
  EXPECT_EQ(atom_count(out), 0);
  EXPECT_EQ(out.actions, std::vector<std::string>{"createMedicalRecord"});
  // no atoms: unchanged
  const auto empty = s.simplify_mutation(s.simplify_mutation(one));
  EXPECT_EQ(decode(empty), decode(s.simplify_mutation(one)));
}

TEST(Operators, ActionMutationKeepsSeedAction) {
  const auto read = with_actions(emr_rule(), {"read"});
  const auto write = with_actions(emr_rule(), {"write"});
  Ctx c(emr_object_model(), {emr_rule(), read, write});
  Evaluator ev(c.grammar, c.ctx->au);
  SearchConfig cfg;
  Rng rng = make_rng(4, "test/ops");
  const auto seed_action = *c.ctx->action_index("read");
  Search s(c.grammar, ev, c.pair("doc1", "consultation1-1"), seed_action, cfg, rng);
  auto tree = *parse(c.grammar, read);
  std::set<std::vector<std::string>> seen;
  for (int i = 0; i < 200; ++i) {
    tree = s.action_mutation(tree);
    const auto r = yield(c.grammar, tree);
    EXPECT_NE(std::find(r.actions.begin(), r.actions.end(), "read"), r.actions.end());
    seen.insert(r.actions);
  }
  EXPECT_GT(seen.size(), 1u);
  // the seed pair only allows the seed action: nothing to add or remove
  Ctx single(emr_object_model(), {read});
  Evaluator ev1(single.grammar, single.ctx->au);
  Search s1(single.grammar, ev1, single.pair("doc1", "consultation1-1"), 0, cfg, rng);
  const auto t1 = *parse(single.grammar, read);
  EXPECT_EQ(decode(s1.action_mutation(t1)), decode(t1));
}

TEST(Operators, CrossoverConservesAtomsPerPart) {
  Ctx c(emr_object_model(), {emr_rule()});
  Evaluator ev(c.grammar, c.ctx->au);
  SearchConfig cfg;
  Rng rng = make_rng(5, "test/ops");
  Search s(c.grammar, ev, 0, 0, cfg, rng);
  const auto a = *parse(c.grammar, physician_rule({}, {kTreats, {{"affiliation"}, ConstraintOp::kIn, {"patient", "registrations"}}},
                                                  {"createMedicalRecord"}));
  const auto b = *parse(c.grammar, physician_rule({}, {{{"consultations"}, ConstraintOp::kContains, {}}},
                                                  {"createMedicalRecord"}));
  bool exchanged = false;
  for (int i = 0; i < 200; ++i) {
    auto [x, y] = s.crossover(a, b);
    ASSERT_TRUE(well_formed(c.grammar, x));
    ASSERT_TRUE(well_formed(c.grammar, y));
    for (std::size_t p = 0; p < 3; ++p) {
      auto before = multiset(list_items(a.children[p]));
      auto more = multiset(list_items(b.children[p]));
      before.insert(before.end(), more.begin(), more.end());
      auto after = multiset(list_items(x.children[p]));
      more = multiset(list_items(y.children[p]));
      after.insert(after.end(), more.begin(), more.end());
      std::sort(before.begin(), before.end());
      std::sort(after.begin(), after.end());
      EXPECT_EQ(before, after);
    }
    EXPECT_EQ(list_items(x.children[3]), list_items(a.children[3]));
    if (yield(c.grammar, x).constraint == yield(c.grammar, b).constraint &&
        yield(c.grammar, y).constraint == yield(c.grammar, a).constraint)
      exchanged = true;
  }
  EXPECT_TRUE(exchanged);
}

TEST(Evolve, TargetInInitialPopulationIsKept) {
  Ctx c(emr_object_model(), {emr_rule()});
  Evaluator ev(c.grammar, c.ctx->au);
  SearchConfig cfg;
  cfg.population = 20;
  const auto target = *parse(c.grammar, emr_rule());
  const auto target_fitness = ev.fitness(decode(target));
  ASSERT_EQ(target_fitness.far, 0u);
  ASSERT_EQ(target_fitness.frr, 0u);
  for (int gens : {0, 10}) {
    Rng rng = make_rng(6, "test/evolve");
    Search s(c.grammar, ev, c.pair("doc1", "consultation1-1"), 0, cfg, rng);
    const auto res = s.evolve({target}, gens);
    EXPECT_TRUE(res.valid);
    EXPECT_LE(res.fitness, target_fitness);
    EXPECT_EQ(rule_meaning(*c.om, res.rule), c.au);
    if (gens == 0) {
      EXPECT_EQ(res.rule, emr_rule());
    }
  }
}

TEST(Evolve, FindsSingleFeatureTarget) {
  const auto target = physician_rule({{{"isTrainee"}, ConditionOp::kIn, {Constant{false}}}}, {}, {"view"});
  Ctx c(emr_object_model(), {target});
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng = make_rng(seed, "test/evolve");
    const auto seed_pair = c.pair("doc1", "consultation1-1");
    const auto res = search_rule(c.grammar, c.ctx->au, seed_pair, 0, SearchConfig{}, rng);
    EXPECT_TRUE(res.valid);
    EXPECT_EQ(rule_meaning(*c.om, res.rule), c.au) << to_string(res.rule);
    EXPECT_EQ(res.rule, target);
  }
}

TEST(Evolve, BestFitnessNeverWorsens) {
  Ctx c(emr_object_model(), {emr_rule(), with_actions(emr_rule(), {"read"})});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng = make_rng(seed, "test/trace");
    SearchConfig cfg;
    cfg.generations = 40;
    const auto res = search_rule(c.grammar, c.ctx->au, c.pair("doc2", "consultation2-2"), seed % 2, cfg, rng);
    ASSERT_EQ(res.trace.size(), 40u);
    for (std::size_t g = 1; g < res.trace.size(); ++g) EXPECT_LE(res.trace[g], res.trace[g - 1]);
    EXPECT_EQ(res.trace.back(), res.fitness);
  }
}

TEST(Evolve, DeterministicGivenRng) {
  Ctx c(emr_object_model(), {emr_rule()});
  auto run = [&] {
    Rng rng = make_rng(42, "test/det");
    return search_rule(c.grammar, c.ctx->au, 0, 0, SearchConfig{}, rng);
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.rule, b.rule);
  EXPECT_EQ(a.trace, b.trace);
}

TEST(Phase1, SingleRuleAuNeedsOneSearch) {
  Ctx c(emr_object_model(), {emr_rule()});
  const auto out = phase1(*c.ctx, [&](std::size_t) -> const Grammar& { return c.grammar; }, c.ctx->au, SearchConfig{},
                          1, "test/phase1");
  EXPECT_EQ(out.searches, 1);
  EXPECT_EQ(out.fallbacks, 0);
  ASSERT_EQ(out.rules.size(), 1u);
  EXPECT_EQ(c.meaning(out.rules), c.au);
  EXPECT_EQ(oracle_for(*c.om).meaning({out.rules[0].rule}), as_strings(*c.om, c.au));
}

TEST(Phase1, LoneTupleGetsIdRule) {
  Rule r;
  r.subject_type = "A";
  r.resource_type = "B";
  r.subject_condition = {{{"id"}, ConditionOp::kIn, {Constant{std::string("a1")}}}};
  r.resource_condition = {{{"id"}, ConditionOp::kIn, {Constant{std::string("b2")}}}};
  r.actions = {"x"};
  Ctx c(blank_model(), {canonicalize(r)}, "A", "B");
  ASSERT_EQ(c.au.size(), 1u);
  for (int gens : {0, 100}) {
    SearchConfig cfg;
    cfg.generations = gens;
    const auto out =
        phase1(*c.ctx, [&](std::size_t) -> const Grammar& { return c.grammar; }, c.ctx->au, cfg, 1, "test/lone");
    ASSERT_EQ(out.rules.size(), 1u);
    EXPECT_EQ(out.rules[0].rule, canonicalize(r));
    EXPECT_EQ(id_usage(out.rules[0].rule), 2);
    EXPECT_EQ(c.meaning(out.rules), c.au);
  }
  // a grammar that cannot cover the seed forces the id-based fallback
  const std::vector<Feature> wrong{
      c.ctx->table->feature(*c.ctx->table->find("subject.id in {a2}"))};
  const auto g = specialize_grammar(c.ctx, &wrong);
  const auto out = phase1(*c.ctx, [&](std::size_t) -> const Grammar& { return g; }, c.ctx->au, SearchConfig{}, 1, "x");
  EXPECT_EQ(out.fallbacks, 1);
  ASSERT_EQ(out.rules.size(), 1u);
  EXPECT_EQ(out.rules[0].rule, id_rule(*c.ctx, c.pair("a1", "b2"), 0));
}

TEST(Phase1, CoversAuExactlyOnFuzzedPolicies) {
  Rng rng = make_rng(13, "test/phase1-fuzz");
  for (int round = 0; round < 8; ++round) {
    auto om = fuzz_object_model(rng, 5);
    const auto& cm = om->class_model();
    const auto rule = fuzz_rule(*om, rng, {"p", "q"});
    const auto au = rule_meaning(*om, rule);
    if (au.empty()) continue;
    auto ctx = make_pair_context(om, au, cm.require(rule.subject_type), cm.require(rule.resource_type), FeatureLimits{});
    const auto g = specialize_grammar(ctx);
    SearchConfig cfg;
    cfg.generations = 20;
    cfg.population = 30;
    const auto out = phase1(*ctx, [&](std::size_t) -> const Grammar& { return g; }, ctx->au, cfg, round, "fuzz");
    std::vector<Rule> rs;
    for (const auto& m : out.rules) rs.push_back(m.rule);
    EXPECT_EQ(oracle_for(*om).meaning(rs), as_strings(*om, au)) << to_string(rule);
  }
}

TEST(Simplify, SupSubPairBecomesSeteq) {
  Ctx c(emr_object_model(), {emr_rule()});
  const AtomicConstraint sup{{"consultations", "records"}, ConstraintOp::kSupseteq, {"records"}};
  const AtomicConstraint sub{{"consultations", "records"}, ConstraintOp::kSubseteq, {"records"}};
  const auto before = physician_rule({}, {sup, sub}, {"createMedicalRecord"});
  const auto after = simplify_rule(*c.ctx, before);
  ASSERT_EQ(after.constraint.size(), 1u);
  EXPECT_EQ(after.constraint[0].op, ConstraintOp::kSeteq);
  EXPECT_EQ(wsc(before) - wsc(after), 3);
  EXPECT_EQ(rule_meaning(*c.om, after), rule_meaning(*c.om, before));
}

TEST(Simplify, ImpliedAtomRemoved) {
  Ctx c(emr_object_model(), {emr_rule()});
  const AtomicConstraint listed{{"consultations"}, ConstraintOp::kContains, {}};
  const auto before = physician_rule({}, {kTreats, listed}, {"createMedicalRecord"});
  const auto after = simplify_rule(*c.ctx, before);
  EXPECT_EQ(after.constraint.size(), 1u);
  EXPECT_LT(wsc(after), wsc(before));
  EXPECT_EQ(rule_meaning(*c.om, after), rule_meaning(*c.om, before));
}

TEST(Simplify, MinimalRuleUnchanged) {
  Ctx c(emr_object_model(), {emr_rule()});
  EXPECT_EQ(simplify_rule(*c.ctx, emr_rule()), emr_rule());
}

TEST(Simplify, FuzzedRulesKeepMeaning) {
  Rng rng = make_rng(17, "test/simplify");
  for (int round = 0; round < 30; ++round) {
    auto om = fuzz_object_model(rng, 5);
    const auto& cm = om->class_model();
    const auto rule = fuzz_rule(*om, rng, {"p"});
    auto ctx = make_pair_context(om, {}, cm.require(rule.subject_type), cm.require(rule.resource_type), FeatureLimits{});
    const auto out = simplify_rule(*ctx, rule);
    EXPECT_EQ(rule_meaning(*om, out), rule_meaning(*om, rule)) << to_string(rule);
    EXPECT_LE(wsc(out), wsc(rule));
  }
}

TEST(Merge, DifferentActionsUnion) {
  const auto read = with_actions(emr_rule(), {"read"});
  const auto write = with_actions(emr_rule(), {"write"});
  Ctx c(emr_object_model(), {read, write});
  const auto m = merge_rules(*c.ctx, read, write);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->actions, (std::vector<std::string>{"read", "write"}));
  EXPECT_EQ(policy_meaning(*c.om, {*m}), c.au);
}

TEST(Merge, InConditionsUnion) {
  auto doc = [](const char* id) {
    return physician_rule({{{"id"}, ConditionOp::kIn, {Constant{std::string(id)}}}}, {kTreats}, {"read"});
  };
  Ctx c(emr_object_model(), {doc("doc1"), doc("doc2")});
  const auto m = merge_rules(*c.ctx, doc("doc1"), doc("doc2"));
  ASSERT_TRUE(m.has_value());
  ASSERT_EQ(m->subject_condition.size(), 1u);
  EXPECT_EQ(m->subject_condition[0].values.size(), 2u);
  EXPECT_EQ(policy_meaning(*c.om, {*m}), c.au);
}

TEST(Merge, OverGrantRejected) {
  auto doc = [](const char* id, bool narrow) {
    std::vector<AtomicConstraint> con{kTreats};
    if (narrow) con.push_back({{"affiliation"}, ConstraintOp::kIn, {"patient", "registrations"}});
    return physician_rule({{{"id"}, ConditionOp::kIn, {Constant{std::string(id)}}}}, con, {"read"});
  };
  Ctx c(emr_object_model(), {doc("doc1", false), doc("doc2", true)});
  ASSERT_LT(rule_meaning(*c.om, doc("doc2", true)).size(), rule_meaning(*c.om, doc("doc2", false)).size());
  EXPECT_FALSE(merge_rules(*c.ctx, doc("doc1", false), doc("doc2", false)).has_value());
  // different types never merge
  auto other = doc("doc1", false);
  other.resource_type = "Patient";
  EXPECT_FALSE(merge_rules(*c.ctx, doc("doc1", false), other).has_value());
}

TEST(Improvement, RedundantAtomDropped) {
  Ctx c(emr_object_model(), {emr_rule()});
  auto padded = emr_rule();
  padded.constraint.push_back({{"consultations"}, ConstraintOp::kContains, {}});
  padded = canonicalize(padded);
  ASSERT_EQ(rule_meaning(*c.om, padded), c.au);
  ImprovementStats stats;
  const auto out = improvement_phase(*c.ctx, {mined_rule(*c.ctx, padded)}, c.grammar, SearchConfig{}, 1, "imp", &stats);
  EXPECT_EQ(c.meaning(out), c.au);
  int w = 0;
  for (const auto& m : out) w += wsc(m.rule);
  EXPECT_LT(w, wsc(padded));
  EXPECT_FALSE(stats.notes.empty());
}

TEST(Improvement, MinimalPolicyUnchanged) {
  Ctx c(emr_object_model(), {emr_rule()});
  const auto out = improvement_phase(*c.ctx, {mined_rule(*c.ctx, emr_rule())}, c.grammar, SearchConfig{}, 1, "imp");
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].rule, emr_rule());
}

TEST(Improvement, IdRulesCollapseAndStayConsistent) {
  Ctx c(emr_object_model(), {emr_rule(), with_actions(emr_rule(), {"read"})});
  SearchConfig cfg;
  cfg.generations = 0;  // phase 1 falls back to one id rule per tuple
  const auto p1 = phase1(*c.ctx, [&](std::size_t) -> const Grammar& { return c.grammar; }, c.ctx->au, cfg, 1, "p1");
  ASSERT_EQ(c.meaning(p1.rules), c.au);
  int before = 0;
  for (const auto& m : p1.rules) before += wsc(m.rule);
  const auto out = improvement_phase(*c.ctx, p1.rules, c.grammar, SearchConfig{}, 1, "imp");
  EXPECT_EQ(c.meaning(out), c.au);
  std::vector<Rule> rs;
  for (const auto& m : out) rs.push_back(m.rule);
  EXPECT_EQ(oracle_for(*c.om).meaning(rs), as_strings(*c.om, c.au));
  int after = 0;
  for (const auto& m : out) after += wsc(m.rule);
  EXPECT_LT(after, before);
}
