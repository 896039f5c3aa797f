#pragma once

// Grammar-based genetic search for rules of one type pair: genetic
// operators, seeded populations, the generational loop, the covering phase,
// and the improvement phase with rule simplification and merging.

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rebac/grammar.hpp"
#include "rebac/random.hpp"

namespace rebac {

struct SearchConfig {
  int population = 100;
  int generations = 100;              // covering phase
  int improvement_generations = 50;   // improvement phase
  int tournament = 2;
  // single, double, action, simplify mutation, crossover
  std::array<double, 5> operator_weights{3, 2, 1, 2, 2};
  double random_fraction = 0.2;       // share of fully random rules in a seeded population
  double seed_atom_bias = 0.75;       // chance a regenerated atom is drawn from atoms the seed pair satisfies
  int max_list = 6;                   // atoms per condition/constraint list
  int stall_generations = 0;          // stop after this many generations without improvement (0 = never)

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

enum class Operator : std::uint8_t { kSingle, kDouble, kAction, kSimplify, kCrossover };

struct MinedRule {
  Rule rule;
  PairSet pairs;  // body coverage within the context
};

inline MinedRule mined_rule(const PairContext& ctx, Rule rule) {
  rule = canonicalize(std::move(rule));
  auto pairs = body_pairs(ctx, rule);
  return {std::move(rule), std::move(pairs)};
}

struct EvolveResult {
  DerivationNode genome;
  GenomeView view;
  Rule rule;
  PairSet pairs;
  Fitness fitness;
  bool valid = false;
  int generations = 0;
  std::vector<Fitness> trace;  // best fitness after each generation
};

// One seeded search over a grammar.
class Search {
 public:
  Search(const Grammar& g, const Evaluator& ev, std::size_t seed_pair, std::size_t seed_action,
         const SearchConfig& cfg, Rng& rng)
      : g_(g), ev_(ev), seed_pair_(seed_pair), seed_action_(seed_action), cfg_(cfg), rng_(rng) {
    const auto& table = g_.table();
    for (std::size_t p = 0; p < 3; ++p)
      for (auto k : g_.atoms[p])
        if (table.value(k, seed_pair_)) seed_atoms_[p].push_back(k);
    for (std::size_t a = 0; a < g_.action_count(); ++a)
      if (g_.ctx->au[a].test(seed_pair_)) allowed_actions_.push_back(a);
  }

  std::size_t seed_pair() const { return seed_pair_; }
  std::size_t seed_action() const { return seed_action_; }

  // --- generation ---------------------------------------------------------

  std::optional<std::size_t> random_atom(Part part) {
    const auto p = static_cast<std::size_t>(part);
    const auto& all = g_.atoms[p];
    if (all.empty()) return std::nullopt;
    if (!seed_atoms_[p].empty() && coin(rng_, cfg_.seed_atom_bias))
      return seed_atoms_[p][uniform_index(rng_, seed_atoms_[p].size())];
    return all[uniform_index(rng_, all.size())];
  }

  DerivationNode random_list(Part part) {
    std::vector<std::int64_t> items;
    while (items.size() < 3 && coin(rng_)) {
      auto a = random_atom(part);
      if (!a) break;
      items.push_back(static_cast<std::int64_t>(*a));
    }
    return make_list(list_symbol(part), atom_symbol(part), items);
  }

  DerivationNode random_genome() {
    DerivationNode root{Symbol::kRule, 0, {}};
    for (auto p : kParts) root.children.push_back(random_list(p));
    root.children.push_back(make_list(Symbol::kActions, Symbol::kAction, {static_cast<std::int64_t>(seed_action_)}));
    return root;
  }

  // Candidate rules built from the seed tuple: one per satisfied constraint
  // terminal and one without atoms, all granting the seed action.
  std::vector<DerivationNode> seed_rules() const {
    std::vector<DerivationNode> out;
    GenomeView v;
    v.actions = {seed_action_};
    out.push_back(make_genome(v));
    for (auto k : seed_atoms_[2]) {
      GenomeView c = v;
      c.atoms[2] = {k};
      out.push_back(make_genome(c));
    }
    return out;
  }

  // Seed rules, random variants of them, and fully random rules.
  std::vector<DerivationNode> seed_population(std::vector<DerivationNode> extra = {}) {
    std::vector<DerivationNode> pop = std::move(extra);
    auto seeds = seed_rules();
    const auto n = static_cast<std::size_t>(std::max(cfg_.population, 2));
    for (auto& s : seeds) pop.push_back(s);
    const auto n_random = static_cast<std::size_t>(cfg_.random_fraction * static_cast<double>(n));
    while (pop.size() + n_random < n) {
      const auto& base = seeds[uniform_index(rng_, seeds.size())];
      pop.push_back(coin(rng_) ? single_mutation(base) : double_mutation(base));
    }
    while (pop.size() < n) pop.push_back(random_genome());
    return pop;
  }

  // --- operators ----------------------------------------------------------

  DerivationNode single_mutation(DerivationNode root) {
    mutate_part(root, kParts[uniform_index(rng_, 3)]);
    return root;
  }

  DerivationNode double_mutation(DerivationNode root) {
    const auto skip = uniform_index(rng_, 3);
    for (std::size_t p = 0; p < 3; ++p)
      if (p != skip) mutate_part(root, kParts[p]);
    return root;
  }

  // Adds or removes an action the seed subject may perform on the seed
  // resource; the seed action is never removed.
  DerivationNode action_mutation(DerivationNode root) {
    auto acts = list_items(root.children[3]);
    std::vector<std::int64_t> removable, addable;
    for (auto a : acts)
      if (static_cast<std::size_t>(a) != seed_action_) removable.push_back(a);
    for (auto a : allowed_actions_)
      if (std::find(acts.begin(), acts.end(), static_cast<std::int64_t>(a)) == acts.end())
        addable.push_back(static_cast<std::int64_t>(a));
    if (removable.empty() && addable.empty()) return root;
    const bool remove = addable.empty() || (!removable.empty() && coin(rng_));
    if (remove) {
      const auto victim = removable[uniform_index(rng_, removable.size())];
      acts.erase(std::find(acts.begin(), acts.end(), victim));
    } else {
      acts.push_back(addable[uniform_index(rng_, addable.size())]);
    }
    if (std::find(acts.begin(), acts.end(), static_cast<std::int64_t>(seed_action_)) == acts.end())
      acts.push_back(static_cast<std::int64_t>(seed_action_));
    root.children[3] = make_list(Symbol::kActions, Symbol::kAction, acts);
    return root;
  }

  // Removes one randomly chosen atom.
  DerivationNode simplify_mutation(DerivationNode root) {
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    std::array<std::vector<std::int64_t>, 3> items;
    for (std::size_t p = 0; p < 3; ++p) {
      items[p] = list_items(root.children[p]);
      for (std::size_t i = 0; i < items[p].size(); ++i) slots.emplace_back(p, i);
    }
    if (slots.empty()) return root;
    auto [p, i] = slots[uniform_index(rng_, slots.size())];
    items[p].erase(items[p].begin() + static_cast<std::ptrdiff_t>(i));
    root.children[p] = make_list(list_symbol(kParts[p]), atom_symbol(kParts[p]), items[p]);
    return root;
  }

  // Swaps subtrees rooted at the same non-terminal in both parents.
  std::pair<DerivationNode, DerivationNode> crossover(DerivationNode a, DerivationNode b) {
    std::vector<DerivationNode*> na;
    for (std::size_t p = 0; p < 3; ++p) collect(a.children[p], na);
    shuffle(rng_, na);
    for (auto* n : na) {
      std::vector<DerivationNode*> nb;
      for (std::size_t p = 0; p < 3; ++p) collect(b.children[p], nb);
      std::vector<DerivationNode*> same;
      for (auto* m : nb)
        if (m->symbol == n->symbol) same.push_back(m);
      if (same.empty()) continue;
      std::swap(*n, *same[uniform_index(rng_, same.size())]);
      cap(a);
      cap(b);
      return {std::move(a), std::move(b)};
    }
    return {std::move(a), std::move(b)};
  }

  DerivationNode apply(Operator op, const DerivationNode& x, const DerivationNode& mate) {
    switch (op) {
      case Operator::kSingle: return single_mutation(x);
      case Operator::kDouble: return double_mutation(x);
      case Operator::kAction: return action_mutation(x);
      case Operator::kSimplify: return simplify_mutation(x);
      case Operator::kCrossover: return crossover(x, mate).first;
    }
    return x;
  }

  // --- evolution ----------------------------------------------------------

  struct Individual {
    DerivationNode genome;
    GenomeView view;
    PairSet pairs;
    Fitness fitness;
  };

  Individual evaluate(DerivationNode genome) const {
    Individual ind;
    ind.view = decode(genome);
    ind.genome = std::move(genome);
    ind.pairs = ev_.pairs(ind.view);
    ind.fitness = ev_.fitness(ind.view, ind.pairs);
    return ind;
  }

  EvolveResult evolve(std::vector<DerivationNode> initial, int generations) {
    if (initial.empty()) initial.push_back(random_genome());
    std::vector<Individual> pop;
    pop.reserve(initial.size());
    for (auto& g : initial) pop.push_back(evaluate(std::move(g)));
    const auto size = std::max<std::size_t>(static_cast<std::size_t>(std::max(cfg_.population, 2)), 2);
    auto best_of = [](const std::vector<Individual>& v) {
      std::size_t b = 0;
      for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i].fitness < v[b].fitness) b = i;
      return b;
    };
    Individual best = pop[best_of(pop)];
    EvolveResult res;
    const std::vector<double> weights(cfg_.operator_weights.begin(), cfg_.operator_weights.end());
    int stall = 0;
    for (int gen = 0; gen < generations; ++gen) {
      std::vector<Individual> next;
      next.reserve(size + 1);
      next.push_back(best);
      while (next.size() < size) {
        const auto op = static_cast<Operator>(weighted_index(rng_, weights));
        const auto& p1 = pop[tournament(pop)];
        if (op == Operator::kCrossover) {
          const auto& p2 = pop[tournament(pop)];
          auto [c1, c2] = crossover(p1.genome, p2.genome);
          next.push_back(evaluate(std::move(c1)));
          if (next.size() < size) next.push_back(evaluate(std::move(c2)));
        } else {
          next.push_back(evaluate(apply(op, p1.genome, p1.genome)));
        }
      }
      pop = std::move(next);
      const auto b = best_of(pop);
      if (pop[b].fitness < best.fitness) {
        best = pop[b];
        stall = 0;
      } else {
        ++stall;
      }
      res.trace.push_back(best.fitness);
      res.generations = gen + 1;
      if (cfg_.stall_generations > 0 && stall >= cfg_.stall_generations) break;
    }
    res.view = best.view;
    res.genome = std::move(best.genome);
    res.rule = rule_of(g_, res.view);
    res.pairs = std::move(best.pairs);
    res.fitness = best.fitness;
    res.valid = best.fitness.valid();
    return res;
  }

 private:
  static void collect(DerivationNode& n, std::vector<DerivationNode*>& out) {
    out.push_back(&n);
    for (auto& c : n.children) collect(c, out);
  }

  void cap(DerivationNode& root) const {
    const auto max = static_cast<std::size_t>(std::max(cfg_.max_list, 1));
    for (std::size_t p = 0; p < 3; ++p) {
      auto items = list_items(root.children[p]);
      if (items.size() <= max) continue;
      items.resize(max);
      root.children[p] = make_list(list_symbol(kParts[p]), atom_symbol(kParts[p]), items);
    }
  }

  // Picks a non-terminal in the part's subtree and regenerates it.
  void mutate_part(DerivationNode& root, Part part) {
    std::vector<DerivationNode*> nodes;
    collect(root.children[static_cast<std::size_t>(part)], nodes);
    auto* n = nodes[uniform_index(rng_, nodes.size())];
    if (n->symbol == atom_symbol(part)) {
      if (auto a = random_atom(part)) n->choice = static_cast<std::int64_t>(*a);
    } else {
      *n = random_list(part);
    }
    cap(root);
  }

  std::size_t tournament(const std::vector<Individual>& pop) {
    std::size_t best = uniform_index(rng_, pop.size());
    for (int t = 1; t < cfg_.tournament; ++t) {
      const auto c = uniform_index(rng_, pop.size());
      if (pop[c].fitness < pop[best].fitness || (pop[c].fitness == pop[best].fitness && c < best)) best = c;
    }
    return best;
  }

  const Grammar& g_;
  const Evaluator& ev_;
  std::size_t seed_pair_;
  std::size_t seed_action_;
  const SearchConfig& cfg_;
  Rng& rng_;
  std::array<std::vector<std::size_t>, 3> seed_atoms_;
  std::vector<std::size_t> allowed_actions_;
};

// Seeded search for one rule covering tuples of `uncov` (per context action).
inline EvolveResult search_rule(const Grammar& g, const std::vector<PairSet>& uncov, std::size_t seed_pair,
                                std::size_t seed_action, const SearchConfig& cfg, Rng& rng,
                                std::vector<DerivationNode> extra = {}, int generations = -1) {
  Evaluator ev(g, uncov);
  Search s(g, ev, seed_pair, seed_action, cfg, rng);
  auto pop = s.seed_population(std::move(extra));
  return s.evolve(std::move(pop), generations < 0 ? cfg.generations : generations);
}

// <type(s), subject.id in {s}, type(r), resource.id in {r}, true, {a}>
inline Rule id_rule(const PairContext& ctx, std::size_t pair, std::size_t action) {
  const auto& table = *ctx.table;
  const auto& om = table.object_model();
  const auto& cm = om.class_model();
  Rule r;
  r.subject_type = cm.name(table.subject_type());
  r.resource_type = cm.name(table.resource_type());
  r.subject_condition = {AtomicCondition{{"id"}, ConditionOp::kIn, {Constant{om.id(table.pair_subject(pair))}}}};
  r.resource_condition = {AtomicCondition{{"id"}, ConditionOp::kIn, {Constant{om.id(table.pair_resource(pair))}}}};
  r.actions = {ctx.actions.at(action)};
  return r;
}

// Lexicographically first uncovered (action, pair).
inline std::optional<std::pair<std::size_t, std::size_t>> first_uncovered(const std::vector<PairSet>& uncov) {
  for (std::size_t a = 0; a < uncov.size(); ++a) {
    std::optional<std::size_t> first;
    uncov[a].for_each([&](std::size_t p) {
      if (!first) first = p;
    });
    if (first) return std::make_pair(a, *first);
  }
  return std::nullopt;
}

inline void cover(const PairContext& ctx, const MinedRule& r, std::vector<PairSet>& uncov) {
  for (const auto& a : r.rule.actions)
    if (auto ai = ctx.action_index(a)) uncov[*ai].subtract(r.pairs);
}

inline std::size_t covered_count(const PairContext& ctx, const MinedRule& r, const std::vector<PairSet>& uncov) {
  std::size_t n = 0;
  for (const auto& a : r.rule.actions)
    if (auto ai = ctx.action_index(a)) n += r.pairs.count_and(uncov[*ai]);
  return n;
}

struct Phase1Result {
  std::vector<MinedRule> rules;
  std::vector<Fitness> fitnesses;
  int searches = 0;
  int fallbacks = 0;
};

// Covering phase for one context: seeds are taken in (action, subject,
// resource) order; each search adds one valid rule, or the id-based rule for
// the seed when the search finds no valid rule covering an uncovered tuple.
// `grammar_for(a)` gives the grammar used for seeds with action a.
inline Phase1Result phase1(const PairContext& ctx, const std::function<const Grammar&(std::size_t)>& grammar_for,
                           std::vector<PairSet> uncov, const SearchConfig& cfg, std::uint64_t seed,
                           const std::string& stream) {
  Phase1Result out;
  while (auto next = first_uncovered(uncov)) {
    auto [a, p] = *next;
    Rng rng = make_rng(seed, stream, static_cast<std::uint64_t>(out.searches));
    ++out.searches;
    auto res = search_rule(grammar_for(a), uncov, p, a, cfg, rng);
    MinedRule mr{res.rule, res.pairs};
    if (!res.valid || covered_count(ctx, mr, uncov) == 0) {
      mr = mined_rule(ctx, id_rule(ctx, p, a));
      ++out.fallbacks;
    }
    cover(ctx, mr, uncov);
    out.fitnesses.push_back(res.fitness);
    out.rules.push_back(std::move(mr));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simplification and merging.

// Meaning-preserving rewrites of a single rule, to a fixpoint: duplicate
// removal, supseteq + subseteq on the same paths -> seteq (when the
// language has seteq), and removal of atoms that do not change the rule's
// meaning.
inline Rule simplify_rule(const PairContext& ctx, Rule rule) {
  rule = canonicalize(std::move(rule));
  if (ctx.language.seteq) {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < rule.constraint.size() && !changed; ++i) {
        const auto& x = rule.constraint[i];
        if (x.op != ConstraintOp::kSupseteq) continue;
        for (std::size_t j = 0; j < rule.constraint.size(); ++j) {
          const auto& y = rule.constraint[j];
          if (y.op != ConstraintOp::kSubseteq || y.subject_path != x.subject_path ||
              y.resource_path != x.resource_path)
            continue;
          AtomicConstraint eq{x.subject_path, ConstraintOp::kSeteq, x.resource_path};
          rule.constraint.erase(rule.constraint.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
          rule.constraint.erase(rule.constraint.begin() + static_cast<std::ptrdiff_t>(std::min(i, j)));
          rule.constraint.push_back(eq);
          rule = canonicalize(std::move(rule));
          changed = true;
          break;
        }
      }
    }
  }
  const auto target = body_pairs(ctx, rule);
  for (bool changed = true; changed;) {
    changed = false;
    // Try the most complex atoms first.
    std::vector<std::pair<int, int>> order;  // (wsc, slot)
    const int ns = static_cast<int>(rule.subject_condition.size());
    const int nr = static_cast<int>(rule.resource_condition.size());
    const int nc = static_cast<int>(rule.constraint.size());
    for (int i = 0; i < ns; ++i) order.emplace_back(wsc(rule.subject_condition[i]), i);
    for (int i = 0; i < nr; ++i) order.emplace_back(wsc(rule.resource_condition[i]), ns + i);
    for (int i = 0; i < nc; ++i) order.emplace_back(wsc(rule.constraint[i]), ns + nr + i);
    std::stable_sort(order.begin(), order.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (auto [w, slot] : order) {
      Rule cand = rule;
      if (slot < ns) cand.subject_condition.erase(cand.subject_condition.begin() + slot);
      else if (slot < ns + nr) cand.resource_condition.erase(cand.resource_condition.begin() + (slot - ns));
      else cand.constraint.erase(cand.constraint.begin() + (slot - ns - nr));
      if (body_pairs(ctx, cand) == target) {
        rule = std::move(cand);
        changed = true;
        break;
      }
    }
  }
  return rule;
}

// Merges two rules of the context's type pair: (a) identical bodies ->
// union of actions; (b) same actions and constraint, conditions identical
// except one `in` atom on the same path in each -> union of the constant
// sets (at most MCSE). Accepted only if the result grants nothing outside AU
// and its WSC is below the pair's combined WSC.
inline std::optional<Rule> merge_rules(const PairContext& ctx, const Rule& a, const Rule& b) {
  if (a.subject_type != b.subject_type || a.resource_type != b.resource_type) return std::nullopt;
  std::optional<Rule> merged;
  const bool same_body = a.subject_condition == b.subject_condition &&
                         a.resource_condition == b.resource_condition && a.constraint == b.constraint;
  if (same_body) {
    Rule m = a;
    m.actions.insert(m.actions.end(), b.actions.begin(), b.actions.end());
    merged = canonicalize(std::move(m));
  } else if (a.actions == b.actions && a.constraint == b.constraint) {
    auto upper_bound = [&](const std::vector<AtomicCondition>& x,
                           const std::vector<AtomicCondition>& y) -> std::optional<std::vector<AtomicCondition>> {
      std::vector<AtomicCondition> only_x, only_y, common;
      std::set_difference(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(only_x));
      std::set_difference(y.begin(), y.end(), x.begin(), x.end(), std::back_inserter(only_y));
      std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
      if (only_x.size() != 1 || only_y.size() != 1) return std::nullopt;
      const auto& cx = only_x.front();
      const auto& cy = only_y.front();
      if (cx.path != cy.path || cx.op != ConditionOp::kIn || cy.op != ConditionOp::kIn) return std::nullopt;
      AtomicCondition u{cx.path, ConditionOp::kIn, cx.values};
      u.values.insert(u.values.end(), cy.values.begin(), cy.values.end());
      u = canonicalize(std::move(u));
      if (static_cast<int>(u.values.size()) > ctx.limits.mcse) return std::nullopt;
      common.push_back(std::move(u));
      return common;
    };
    if (a.resource_condition == b.resource_condition) {
      if (auto sc = upper_bound(a.subject_condition, b.subject_condition)) {
        Rule m = a;
        m.subject_condition = std::move(*sc);
        merged = canonicalize(std::move(m));
      }
    } else if (a.subject_condition == b.subject_condition) {
      if (auto rc = upper_bound(a.resource_condition, b.resource_condition)) {
        Rule m = a;
        m.resource_condition = std::move(*rc);
        merged = canonicalize(std::move(m));
      }
    }
  }
  if (!merged) return std::nullopt;
  if (wsc(*merged) >= wsc(a) + wsc(b)) return std::nullopt;
  if (!grants_within_au(ctx, body_pairs(ctx, *merged), merged->actions)) return std::nullopt;
  return merged;
}

// ---------------------------------------------------------------------------
// Improvement phase.

struct ImprovementStats {
  int rounds = 0;
  int replaced = 0;
  int atoms_dropped = 0;
  int actions_dropped = 0;
  int merged = 0;
  int redundant_removed = 0;
  std::vector<std::string> notes;
};

namespace detail {

// Per action, the union of the coverage of all rules except `skip`.
inline std::vector<PairSet> coverage_without(const PairContext& ctx, const std::vector<MinedRule>& rules,
                                             std::size_t skip) {
  std::vector<PairSet> cov(ctx.actions.size(), PairSet(ctx.table->pair_count()));
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (i == skip) continue;
    for (const auto& a : rules[i].rule.actions)
      if (auto ai = ctx.action_index(a)) cov[*ai] |= rules[i].pairs;
  }
  return cov;
}

inline bool redundant(const PairContext& ctx, const std::vector<MinedRule>& rules, std::size_t i) {
  const auto cov = coverage_without(ctx, rules, i);
  for (const auto& a : rules[i].rule.actions) {
    auto ai = ctx.action_index(a);
    if (ai && !rules[i].pairs.subset_of(cov[*ai])) return false;
  }
  return true;
}

inline int remove_redundant(const PairContext& ctx, std::vector<MinedRule>& rules) {
  int removed = 0;
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::size_t> order(rules.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return wsc(rules[x].rule) > wsc(rules[y].rule); });
    for (auto i : order) {
      if (redundant(ctx, rules, i)) {
        rules.erase(rules.begin() + static_cast<std::ptrdiff_t>(i));
        ++removed;
        changed = true;
        break;
      }
    }
  }
  return removed;
}

inline std::vector<std::size_t> table_atoms(const PairContext& ctx, const Rule& r, bool& complete) {
  std::vector<std::size_t> out;
  complete = true;
  const auto& t = *ctx.table;
  auto add = [&](const std::string& key) {
    if (auto k = t.find(key)) out.push_back(*k);
    else complete = false;
  };
  for (const auto& c : r.subject_condition) add(make_feature(FeatureKind::kSubjectCondition, c).key);
  for (const auto& c : r.resource_condition) add(make_feature(FeatureKind::kResourceCondition, c).key);
  for (const auto& c : r.constraint) add(make_feature(c).key);
  return out;
}

}  // namespace detail

// Rewrites rules of one context so that the overall meaning stays equal to
// AU while WSC decreases: redundant-rule removal, per-rule searches for
// cheaper replacements covering what only that rule covers, policy-level
// atom/action dropping, simplification and merging.
inline std::vector<MinedRule> improvement_phase(const PairContext& ctx, std::vector<MinedRule> rules,
                                                const Grammar& grammar, const SearchConfig& cfg, std::uint64_t seed,
                                                const std::string& stream, ImprovementStats* stats = nullptr) {
  ImprovementStats local;
  auto& st = stats ? *stats : local;
  st.notes.push_back("type mutations skipped: class model has no inheritance");
  std::uint64_t counter = 0;
  for (int round = 0; round < 4; ++round) {
    const int before = [&] {
      int w = 0;
      for (const auto& r : rules) w += wsc(r.rule);
      return w;
    }();
    ++st.rounds;
    st.redundant_removed += detail::remove_redundant(ctx, rules);

    // Cheaper replacement for each rule's unique coverage.
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const auto others = detail::coverage_without(ctx, rules, i);
      std::vector<PairSet> need(ctx.actions.size(), PairSet(ctx.table->pair_count()));
      bool any = false;
      for (const auto& a : rules[i].rule.actions) {
        if (auto ai = ctx.action_index(a)) {
          need[*ai] = rules[i].pairs;
          need[*ai].subtract(others[*ai]);
          any |= !need[*ai].none();
        }
      }
      if (!any) continue;
      bool complete = false;
      const auto atoms = detail::table_atoms(ctx, rules[i].rule, complete);
      if (!complete) continue;
      const Grammar g = extend_grammar(grammar, atoms);
      auto start = parse(g, rules[i].rule);
      if (!start) continue;
      auto [a, p] = *first_uncovered(need);
      Rng rng = make_rng(seed, stream + "/improve", counter++);
      auto res = search_rule(g, need, p, a, cfg, rng, {*start}, cfg.improvement_generations);
      const int old_wsc = wsc(rules[i].rule);
      if (res.valid && res.fitness.frr == 0 && res.fitness.id <= id_usage(rules[i].rule) &&
          res.fitness.wsc < old_wsc) {
        rules[i] = MinedRule{res.rule, res.pairs};
        ++st.replaced;
      }
    }
    st.redundant_removed += detail::remove_redundant(ctx, rules);

    // Drop atoms that can be removed without granting anything outside AU,
    // and actions whose tuples other rules already grant.
    for (std::size_t i = 0; i < rules.size(); ++i) {
      for (bool changed = true; changed;) {
        changed = false;
        auto& r = rules[i].rule;
        std::vector<std::pair<int, int>> order;
        const int ns = static_cast<int>(r.subject_condition.size());
        const int nr = static_cast<int>(r.resource_condition.size());
        const int nc = static_cast<int>(r.constraint.size());
        for (int k = 0; k < ns; ++k) order.emplace_back(wsc(r.subject_condition[k]), k);
        for (int k = 0; k < nr; ++k) order.emplace_back(wsc(r.resource_condition[k]), ns + k);
        for (int k = 0; k < nc; ++k) order.emplace_back(wsc(r.constraint[k]), ns + nr + k);
        std::stable_sort(order.begin(), order.end(), [](auto& x, auto& y) { return x.first > y.first; });
        for (auto [w, slot] : order) {
          Rule cand = r;
          if (slot < ns) cand.subject_condition.erase(cand.subject_condition.begin() + slot);
          else if (slot < ns + nr) cand.resource_condition.erase(cand.resource_condition.begin() + (slot - ns));
          else cand.constraint.erase(cand.constraint.begin() + (slot - ns - nr));
          auto pairs = body_pairs(ctx, cand);
          if (id_usage(cand) <= id_usage(r) && grants_within_au(ctx, pairs, cand.actions)) {
            rules[i] = MinedRule{std::move(cand), std::move(pairs)};
            ++st.atoms_dropped;
            changed = true;
            break;
          }
        }
      }
      if (rules[i].rule.actions.size() > 1) {
        auto others = detail::coverage_without(ctx, rules, i);
        auto& acts = rules[i].rule.actions;
        for (std::size_t k = 0; k < acts.size() && acts.size() > 1;) {
          auto ai = ctx.action_index(acts[k]);
          if (ai && rules[i].pairs.subset_of(others[*ai])) {
            acts.erase(acts.begin() + static_cast<std::ptrdiff_t>(k));
            ++st.actions_dropped;
          } else {
            ++k;
          }
        }
      }
    }

    for (auto& r : rules) r = mined_rule(ctx, simplify_rule(ctx, r.rule));

    // Merge to a fixpoint.
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < rules.size() && !changed; ++i) {
        for (std::size_t j = i + 1; j < rules.size() && !changed; ++j) {
          if (auto m = merge_rules(ctx, rules[i].rule, rules[j].rule)) {
            rules[i] = mined_rule(ctx, std::move(*m));
            rules.erase(rules.begin() + static_cast<std::ptrdiff_t>(j));
            ++st.merged;
            changed = true;
          }
        }
      }
    }
    st.redundant_removed += detail::remove_redundant(ctx, rules);

    int after = 0;
    for (const auto& r : rules) after += wsc(r.rule);
    if (after >= before) break;
  }
  std::sort(rules.begin(), rules.end(), [](const MinedRule& x, const MinedRule& y) { return x.rule < y.rule; });
  return rules;
}

}  // namespace rebac
