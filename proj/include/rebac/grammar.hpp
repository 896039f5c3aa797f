#pragma once

// Per-type-pair mining context, the specialized rule grammar, derivation
// trees over it, and the fitness function.

#include <algorithm>
#include <array>
#include <compare>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rebac/features.hpp"
#include "rebac/pair_set.hpp"
#include "rebac/policy.hpp"

namespace rebac {

// Everything the search needs about one (subject type, resource type) pair:
// the full feature table and, per action occurring in AU for the pair, the
// authorized pairs.
struct PairContext {
  std::shared_ptr<const FeatureTable> table;
  std::vector<std::string> actions;  // sorted
  std::vector<PairSet> au;           // au[a] for actions[a]
  LanguageOptions language;
  FeatureLimits limits;

  const ObjectModel& object_model() const { return table->object_model(); }
  ClassId subject_type() const { return table->subject_type(); }
  ClassId resource_type() const { return table->resource_type(); }

  std::optional<std::size_t> action_index(const std::string& a) const {
    auto it = std::lower_bound(actions.begin(), actions.end(), a);
    if (it == actions.end() || *it != a) return std::nullopt;
    return static_cast<std::size_t>(it - actions.begin());
  }

  std::size_t au_size() const {
    std::size_t n = 0;
    for (const auto& s : au) n += s.count();
    return n;
  }
};

inline std::shared_ptr<const PairContext> make_pair_context(std::shared_ptr<const ObjectModel> om,
                                                            const AuthorizationSet& au, ClassId cs, ClassId cr,
                                                            const FeatureLimits& limits,
                                                            const LanguageOptions& lang = {}) {
  auto ctx = std::make_shared<PairContext>();
  auto features = enumerate_features(*om, limits, cs, cr, lang);
  ctx->table = std::make_shared<FeatureTable>(std::move(om), cs, cr, std::move(features));
  ctx->language = lang;
  ctx->limits = limits;
  const auto& tom = ctx->table->object_model();
  std::set<std::string> acts;
  for (const auto& t : au)
    if (tom.type(t.subject) == cs && tom.type(t.resource) == cr) acts.insert(t.action);
  ctx->actions.assign(acts.begin(), acts.end());
  for (const auto& a : ctx->actions) ctx->au.push_back(authorized_pairs(*ctx->table, au, a));
  return ctx;
}

// ---------------------------------------------------------------------------
// Pairs covered by an arbitrary rule body of the context's type pair.

namespace detail {

inline PairSet condition_pairs(const PairContext& ctx, const AtomicCondition& c, bool subject_side) {
  const auto& table = *ctx.table;
  const auto kind = subject_side ? FeatureKind::kSubjectCondition : FeatureKind::kResourceCondition;
  if (auto k = table.find(make_feature(kind, c).key)) return table.column(*k);
  // p in {c1, ..., cn} is the union of the singleton conditions.
  if (c.op == ConditionOp::kIn && c.values.size() > 1) {
    PairSet out(table.pair_count());
    bool all = true;
    for (const auto& v : c.values) {
      auto k = table.find(make_feature(kind, AtomicCondition{c.path, c.op, {v}}).key);
      if (!k) {
        all = false;
        break;
      }
      out |= table.column(*k);
    }
    if (all) return out;
  }
  const auto& om = table.object_model();
  const auto compiled = compile_condition(om, subject_side ? table.subject_type() : table.resource_type(), c);
  PairSet out(table.pair_count());
  const auto& objs = subject_side ? table.subjects() : table.resources();
  for (std::size_t i = 0; i < objs.size(); ++i) {
    if (!satisfies(om, objs[i], compiled)) continue;
    if (subject_side) {
      for (std::size_t j = 0; j < table.resources().size(); ++j) out.set(table.pair_index(i, j));
    } else {
      for (std::size_t s = 0; s < table.subjects().size(); ++s) out.set(table.pair_index(s, i));
    }
  }
  return out;
}

inline PairSet constraint_pairs(const PairContext& ctx, const AtomicConstraint& c) {
  const auto& table = *ctx.table;
  if (auto k = table.find(make_feature(c).key)) return table.column(*k);
  const auto& om = table.object_model();
  const auto compiled = compile_constraint(om, table.subject_type(), table.resource_type(), c);
  PairSet out(table.pair_count());
  for (std::size_t p = 0; p < table.pair_count(); ++p)
    if (satisfies(om, table.pair_subject(p), table.pair_resource(p), compiled)) out.set(p);
  return out;
}

}  // namespace detail

inline PairSet body_pairs(const PairContext& ctx, const Rule& rule) {
  PairSet out(ctx.table->pair_count(), true);
  for (const auto& c : rule.subject_condition) out &= detail::condition_pairs(ctx, c, true);
  for (const auto& c : rule.resource_condition) out &= detail::condition_pairs(ctx, c, false);
  for (const auto& c : rule.constraint) out &= detail::constraint_pairs(ctx, c);
  return out;
}

// True iff every (pair, action) the rule grants is in AU.
inline bool grants_within_au(const PairContext& ctx, const PairSet& pairs, const std::vector<std::string>& actions) {
  for (const auto& a : actions) {
    auto ai = ctx.action_index(a);
    if (!ai) {
      if (!pairs.none()) return false;
      continue;
    }
    if (!pairs.subset_of(ctx.au[*ai])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Fitness.

struct Fitness {
  std::size_t far = 0;
  std::size_t frr = 0;
  int id = 0;
  int wsc = 0;

  bool valid() const { return far == 0; }
  friend auto operator<=>(const Fitness&, const Fitness&) = default;
};

inline std::string to_string(const Fitness& f) {
  return "<" + std::to_string(f.far) + ", " + std::to_string(f.frr) + ", " + std::to_string(f.id) + ", " +
         std::to_string(f.wsc) + ">";
}

// Reference fitness over explicit tuple sets. FAR counts granted tuples
// outside AU (validity is always judged against all of AU); FRR counts
// uncovered tuples the rule misses.
inline Fitness fitness(const ObjectModel& om, const Rule& rule, const AuthorizationSet& au,
                       const AuthorizationSet& uncov) {
  const auto meaning = rule_meaning(om, rule);
  Fitness f;
  for (const auto& t : meaning)
    if (!au.count(t)) ++f.far;
  for (const auto& t : uncov)
    if (!meaning.count(t)) ++f.frr;
  f.id = id_usage(rule);
  f.wsc = wsc(rule);
  return f;
}

// ---------------------------------------------------------------------------
// Grammar. Rule types are fixed by the context; the atom terminals are table
// feature indices, split by part.

enum class Part : std::uint8_t { kSubject = 0, kResource = 1, kConstraint = 2 };
inline constexpr std::array<Part, 3> kParts{Part::kSubject, Part::kResource, Part::kConstraint};

inline Part part_of(FeatureKind k) {
  switch (k) {
    case FeatureKind::kSubjectCondition: return Part::kSubject;
    case FeatureKind::kResourceCondition: return Part::kResource;
    case FeatureKind::kConstraint: return Part::kConstraint;
  }
  return Part::kConstraint;
}

struct Grammar {
  std::shared_ptr<const PairContext> ctx;
  std::array<std::vector<std::size_t>, 3> atoms;  // sorted table indices
  std::vector<std::uint8_t> member;               // member[k]: feature k is a terminal

  const FeatureTable& table() const { return *ctx->table; }
  const std::vector<std::size_t>& part_atoms(Part p) const { return atoms[static_cast<std::size_t>(p)]; }
  std::size_t atom_count() const { return atoms[0].size() + atoms[1].size() + atoms[2].size(); }
  bool has(std::size_t k) const { return k < member.size() && member[k]; }
  std::size_t action_count() const { return ctx->actions.size(); }
};

// Terminals are all table features, or exactly `restrict_to` (matched by
// key) when given. Throws if no atom terminal remains.
inline Grammar specialize_grammar(std::shared_ptr<const PairContext> ctx,
                                  const std::vector<Feature>* restrict_to = nullptr) {
  Grammar g;
  g.ctx = std::move(ctx);
  const auto& table = g.table();
  g.member.assign(table.size(), 0);
  if (restrict_to) {
    for (const auto& f : *restrict_to) {
      auto k = table.find(f.key);
      if (!k) throw LookupError("specialize_grammar: feature not in table: " + f.key);
      g.member[*k] = 1;
    }
  } else {
    std::fill(g.member.begin(), g.member.end(), 1);
  }
  for (std::size_t k = 0; k < table.size(); ++k)
    if (g.member[k]) g.atoms[static_cast<std::size_t>(part_of(table.feature(k).kind))].push_back(k);
  if (g.atom_count() == 0) throw ModelError("specialize_grammar: no atomic conditions or constraints to mine with");
  return g;
}

inline Grammar extend_grammar(Grammar g, const std::vector<std::size_t>& extra) {
  for (auto k : extra) {
    if (g.member.at(k)) continue;
    g.member[k] = 1;
    auto& v = g.atoms[static_cast<std::size_t>(part_of(g.table().feature(k).kind))];
    v.insert(std::lower_bound(v.begin(), v.end(), k), k);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Derivation trees.
//
//   Rule             -> SubjectCondition ResourceCondition Constraint Actions
//   SubjectCondition -> ε | SubjectAtom SubjectCondition      (same for the
//   ResourceCondition and Constraint lists)
//   Actions          -> Action | Action Actions
//   SubjectAtom      -> <atom terminal>   ResourceAtom, ConstraintAtom alike
//   Action           -> <action terminal>
//
// `choice` selects the production; for atom and action nodes it is the
// terminal (table feature index or action index).

enum class Symbol : std::uint8_t {
  kRule,
  kSubjectCondition,
  kResourceCondition,
  kConstraint,
  kActions,
  kSubjectAtom,
  kResourceAtom,
  kConstraintAtom,
  kAction,
};

inline Symbol list_symbol(Part p) { return static_cast<Symbol>(1 + static_cast<int>(p)); }
inline Symbol atom_symbol(Part p) { return static_cast<Symbol>(5 + static_cast<int>(p)); }

struct DerivationNode {
  Symbol symbol = Symbol::kRule;
  std::int64_t choice = 0;
  std::vector<DerivationNode> children;

  friend bool operator==(const DerivationNode&, const DerivationNode&) = default;
};

inline DerivationNode make_list(Symbol list, Symbol item, const std::vector<std::int64_t>& items,
                                std::size_t from = 0) {
  DerivationNode n{list, 0, {}};
  if (list == Symbol::kActions) {
    n.children.push_back({item, items.at(from), {}});
    if (from + 1 < items.size()) {
      n.choice = 1;
      n.children.push_back(make_list(list, item, items, from + 1));
    }
    return n;
  }
  if (from < items.size()) {
    n.choice = 1;
    n.children.push_back({item, items[from], {}});
    n.children.push_back(make_list(list, item, items, from + 1));
  }
  return n;
}

inline std::vector<std::int64_t> list_items(const DerivationNode& list) {
  std::vector<std::int64_t> out;
  const DerivationNode* n = &list;
  for (;;) {
    if (n->children.empty()) break;
    out.push_back(n->children[0].choice);
    if (n->children.size() < 2) break;
    n = &n->children[1];
  }
  return out;
}

// Decoded genome: sorted unique atoms per part and action indices.
struct GenomeView {
  std::array<std::vector<std::size_t>, 3> atoms;
  std::vector<std::size_t> actions;

  friend auto operator<=>(const GenomeView&, const GenomeView&) = default;
};

inline DerivationNode make_genome(const GenomeView& v) {
  DerivationNode root{Symbol::kRule, 0, {}};
  for (auto p : kParts) {
    const auto& a = v.atoms[static_cast<std::size_t>(p)];
    root.children.push_back(make_list(list_symbol(p), atom_symbol(p), {a.begin(), a.end()}));
  }
  root.children.push_back(make_list(Symbol::kActions, Symbol::kAction, {v.actions.begin(), v.actions.end()}));
  return root;
}

inline GenomeView decode(const DerivationNode& root) {
  GenomeView v;
  for (std::size_t p = 0; p < 3; ++p) {
    for (auto x : list_items(root.children[p])) v.atoms[p].push_back(static_cast<std::size_t>(x));
    sort_unique(v.atoms[p]);
  }
  for (auto x : list_items(root.children[3])) v.actions.push_back(static_cast<std::size_t>(x));
  sort_unique(v.actions);
  return v;
}

inline Rule rule_of(const Grammar& g, const GenomeView& v) {
  const auto& table = g.table();
  const auto& cm = table.object_model().class_model();
  Rule r;
  r.subject_type = cm.name(table.subject_type());
  r.resource_type = cm.name(table.resource_type());
  for (auto k : v.atoms[0]) r.subject_condition.push_back(table.feature(k).condition());
  for (auto k : v.atoms[1]) r.resource_condition.push_back(table.feature(k).condition());
  for (auto k : v.atoms[2]) r.constraint.push_back(table.feature(k).constraint());
  for (auto a : v.actions) r.actions.push_back(g.ctx->actions.at(a));
  return canonicalize(std::move(r));
}

// The rule a derivation tree yields.
inline Rule yield(const Grammar& g, const DerivationNode& root) { return rule_of(g, decode(root)); }

// Structural check: productions match symbols and every terminal belongs to
// the grammar.
inline bool well_formed(const Grammar& g, const DerivationNode& root) {
  if (root.symbol != Symbol::kRule || root.children.size() != 4) return false;
  auto check_list = [&](auto&& self, const DerivationNode& n, Symbol list, Symbol item) -> bool {
    if (n.symbol != list) return false;
    const bool actions = list == Symbol::kActions;
    if (n.choice == 0 && !actions) return n.children.empty();
    const std::size_t want = n.choice == 0 ? 1 : 2;
    if (n.children.size() != want || n.children[0].symbol != item || !n.children[0].children.empty()) return false;
    const auto t = n.children[0].choice;
    if (actions) {
      if (t < 0 || static_cast<std::size_t>(t) >= g.action_count()) return false;
    } else {
      if (t < 0 || !g.has(static_cast<std::size_t>(t))) return false;
      if (list_symbol(part_of(g.table().feature(static_cast<std::size_t>(t)).kind)) != list) return false;
    }
    return want == 1 || self(self, n.children[1], list, item);
  };
  for (auto p : kParts)
    if (!check_list(check_list, root.children[static_cast<std::size_t>(p)], list_symbol(p), atom_symbol(p)))
      return false;
  return check_list(check_list, root.children[3], Symbol::kActions, Symbol::kAction);
}

// Derivation tree for `rule`, if every atom and action is a terminal of g.
inline std::optional<DerivationNode> parse(const Grammar& g, const Rule& rule) {
  const auto& table = g.table();
  const auto& cm = table.object_model().class_model();
  if (rule.subject_type != cm.name(table.subject_type()) || rule.resource_type != cm.name(table.resource_type()))
    return std::nullopt;
  if (rule.actions.empty()) return std::nullopt;
  GenomeView v;
  auto add = [&](const std::string& key, std::size_t part) {
    auto k = table.find(key);
    if (!k || !g.has(*k)) return false;
    v.atoms[part].push_back(*k);
    return true;
  };
  for (const auto& c : rule.subject_condition)
    if (!add(make_feature(FeatureKind::kSubjectCondition, c).key, 0)) return std::nullopt;
  for (const auto& c : rule.resource_condition)
    if (!add(make_feature(FeatureKind::kResourceCondition, c).key, 1)) return std::nullopt;
  for (const auto& c : rule.constraint)
    if (!add(make_feature(c).key, 2)) return std::nullopt;
  for (const auto& a : rule.actions) {
    auto ai = g.ctx->action_index(a);
    if (!ai) return std::nullopt;
    v.actions.push_back(*ai);
  }
  for (auto& a : v.atoms) sort_unique(a);
  sort_unique(v.actions);
  return make_genome(v);
}

// ---------------------------------------------------------------------------
// Bitset fitness for genomes of one context. FRR is relative to the
// context's uncovered tuples; tuples of other type pairs add the same
// constant to every candidate and are left out.

class Evaluator {
 public:
  Evaluator(const Grammar& g, std::vector<PairSet> uncov) : g_(&g), uncov_(std::move(uncov)) {
    for (const auto& u : uncov_) uncov_total_ += u.count();
  }

  const Grammar& grammar() const { return *g_; }
  const std::vector<PairSet>& uncovered() const { return uncov_; }
  std::size_t uncovered_total() const { return uncov_total_; }

  PairSet pairs(const GenomeView& v) const {
    const auto& table = g_->table();
    PairSet out(table.pair_count(), true);
    for (const auto& part : v.atoms)
      for (auto k : part) out &= table.column(k);
    return out;
  }

  Fitness fitness(const GenomeView& v, const PairSet& pairs) const {
    const auto& table = g_->table();
    Fitness f;
    std::size_t hit = 0;
    for (auto a : v.actions) {
      f.far += pairs.count_minus(g_->ctx->au[a]);
      hit += pairs.count_and(uncov_[a]);
    }
    f.frr = uncov_total_ - hit;
    bool sid = false, rid = false;
    f.wsc = static_cast<int>(v.actions.size());
    for (std::size_t p = 0; p < 3; ++p) {
      for (auto k : v.atoms[p]) {
        const auto& feat = table.feature(k);
        f.wsc += feat.wsc;
        if (p == 0 && feat.is_id_condition()) sid = true;
        if (p == 1 && feat.is_id_condition()) rid = true;
      }
    }
    f.id = (sid ? 1 : 0) + (rid ? 1 : 0);
    return f;
  }

  Fitness fitness(const GenomeView& v) const { return fitness(v, pairs(v)); }

 private:
  const Grammar* g_;
  std::vector<PairSet> uncov_;
  std::size_t uncov_total_ = 0;
};

}  // namespace rebac
