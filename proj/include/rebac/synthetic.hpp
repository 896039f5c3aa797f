#pragma once

// Synthetic benchmark: a fixed class model with five subject and five
// resource classes, pseudorandom object models, pseudorandom rules built
// from 13 condition/constraint types, and the induced authorizations.

#include <array>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rebac/grammar.hpp"
#include "rebac/model.hpp"
#include "rebac/policy.hpp"
#include "rebac/random.hpp"
#include "rebac/search.hpp"

namespace rebac {

inline constexpr int kSynthSubjectClasses = 5;
inline constexpr int kSynthResourceClasses = 5;
inline constexpr int kSynthHelperInstances = 3;

// Condition/constraint types. Constraint types are named by operator and
// (subject path length, resource path length), condition types by operator
// and path length.
enum class AtomType : std::uint8_t {
  kEqual01,      // subject = resource.subOne_i
  kIn01,         // subject in resource.subMany_i
  kEqual12,      // subject.directSingle = resource.subOne_i.directSingle
  kIn12,         // subject.directSingle in resource.subMany_i.directSingle
  kEqual11,      // subject.directSingle = resource.directSingle
  kContains21,   // subject.mul2.mulSingle_k contains resource.mulSingle_k
  kContains31,   // subject.directSingle.mul2.mulSingle_k contains resource.mulSingle_k
  kSupseteq11,   // subject.mul2 supseteq resource.mul2
  kSubseteq11,   // subject.mul2 subseteq resource.mul2
  kSeteq11,      // subject.mul2 seteq resource.mul2
  kCondIn1,      // x.b in {true|false}
  kCondIn2,      // x.directSingle.id in {d}
  kCondContains2 // x.mul2.id contains m
};

inline constexpr std::size_t kAtomTypeCount = 13;

inline const std::array<const char*, kAtomTypeCount>& atom_type_names() {
  static const std::array<const char*, kAtomTypeCount> names{
      "constraint-equal-0-1",   "constraint-in-0-1",       "constraint-equal-1-2",  "constraint-in-1-2",
      "constraint-equal-1-1",   "constraint-contains-2-1", "constraint-contains-3-1",
      "constraint-supseteq-1-1", "constraint-subseteq-1-1", "constraint-seteq-1-1", "condition-in-1",
      "condition-in-2",         "condition-contains-2"};
  return names;
}

inline std::optional<AtomType> parse_atom_type(const std::string& s) {
  const auto& n = atom_type_names();
  for (std::size_t i = 0; i < n.size(); ++i)
    if (s == n[i]) return static_cast<AtomType>(i);
  return std::nullopt;
}

using TypeFrequencies = std::array<double, kAtomTypeCount>;

inline TypeFrequencies uniform_type_frequencies() {
  TypeFrequencies f;
  f.fill(1.0);
  return f;
}

struct SynthConfig {
  int n_sub = 10;
  std::uint64_t seed = 0;
  int n_r = 20;
  int n_actions = 5;
  TypeFrequencies type_frequencies = uniform_type_frequencies();
  // Rules per (subject type, resource type) and atoms per rule.
  std::array<double, 4> rules_per_pair_dist{0.82, 0.12, 0.03, 0.03};
  std::array<double, 3> atoms_per_rule_dist{0.5, 0.25, 0.25};

  void validate() const {
    if (n_sub < 1) throw std::invalid_argument("n_sub must be >= 1");
    if (n_r < 0) throw std::invalid_argument("n_r must be >= 0");
    if (n_actions < 1) throw std::invalid_argument("n_actions must be >= 1");
    double total = 0;
    for (double w : type_frequencies) {
      if (!(w >= 0)) throw std::invalid_argument("type frequencies must be non-negative");
      total += w;
    }
    if (total <= 0) throw std::invalid_argument("type frequencies must not all be zero");
  }
};

inline std::string synth_subject_class(int i) { return "Sub_" + std::to_string(i); }
inline std::string synth_resource_class(int j) { return "Res_" + std::to_string(j); }

inline std::vector<std::string> synth_actions(int n) {
  std::vector<std::string> out;
  for (int k = 1; k <= n; ++k) out.push_back("act" + std::to_string(k));
  return out;
}

inline std::shared_ptr<const ClassModel> gen_class_model() {
  std::vector<ClassDecl> decls;
  for (int i = 1; i <= kSynthSubjectClasses; ++i) {
    decls.push_back({synth_subject_class(i),
                     {{"b", "Boolean", Multiplicity::kOne},
                      {"directSingle", "DirectSingle", Multiplicity::kOne},
                      {"mul2", "Mul2", Multiplicity::kMany}}});
  }
  for (int j = 1; j <= kSynthResourceClasses; ++j) {
    ClassDecl d{synth_resource_class(j), {{"b", "Boolean", Multiplicity::kOne}}};
    for (int i = 1; i <= kSynthSubjectClasses; ++i) {
      d.fields.push_back({"subOne_" + std::to_string(i), synth_subject_class(i), Multiplicity::kOne});
      d.fields.push_back({"subMany_" + std::to_string(i), synth_subject_class(i), Multiplicity::kMany});
    }
    d.fields.push_back({"directSingle", "DirectSingle", Multiplicity::kOne});
    d.fields.push_back({"mul2", "Mul2", Multiplicity::kMany});
    d.fields.push_back({"mulSingle_1", "MulSingle_1", Multiplicity::kOne});
    d.fields.push_back({"mulSingle_2", "MulSingle_2", Multiplicity::kOne});
    decls.push_back(std::move(d));
  }
  decls.push_back({"DirectSingle", {{"mul2", "Mul2", Multiplicity::kMany}}});
  decls.push_back({"Mul2",
                   {{"mulSingle_1", "MulSingle_1", Multiplicity::kOne},
                    {"mulSingle_2", "MulSingle_2", Multiplicity::kOne}}});
  decls.push_back({"MulSingle_1", {}});
  decls.push_back({"MulSingle_2", {}});
  return std::make_shared<const ClassModel>(std::move(decls));
}

inline std::string synth_object_id(const std::string& cls, int k, int width) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%0*d", width, k);
  return cls + "-" + buf;
}

inline std::shared_ptr<const ObjectModel> gen_object_model(std::shared_ptr<const ClassModel> cm,
                                                           const SynthConfig& cfg) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, "synthetic/objects");
  std::map<std::string, std::vector<std::string>> ids;
  auto count = [&](const std::string& cls) {
    if (cls.rfind("Sub_", 0) == 0) return cfg.n_sub;
    if (cls.rfind("Res_", 0) == 0) return 5 * cfg.n_sub;
    return kSynthHelperInstances;
  };
  for (const auto& d : cm->decls()) {
    const int n = count(d.name);
    const int width = static_cast<int>(std::to_string(n).size());
    for (int k = 1; k <= n; ++k) ids[d.name].push_back(synth_object_id(d.name, k, width));
  }
  std::vector<RawObject> raw;
  for (const auto& d : cm->decls()) {
    for (const auto& id : ids[d.name]) {
      RawObject o{id, d.name, {}};
      for (const auto& f : d.fields) {
        if (f.type == "Boolean") {
          o.fields[f.name] = coin(rng);
          continue;
        }
        const auto& pool = ids[f.type];
        if (f.multiplicity == Multiplicity::kOne) {
          o.fields[f.name] = pool[uniform_index(rng, pool.size())];
          continue;
        }
        const std::size_t sizes[3] = {1, pool.size() - 1, pool.size()};
        const std::size_t size = sizes[uniform_index(rng, 3)];
        std::vector<std::string> chosen = pool;
        shuffle(rng, chosen);
        chosen.resize(size);
        std::sort(chosen.begin(), chosen.end());
        o.fields[f.name] = std::move(chosen);
      }
      raw.push_back(std::move(o));
    }
  }
  return std::make_shared<const ObjectModel>(std::move(cm), std::move(raw));
}

// Planned rule groups: one (subject class, resource class) pair per group,
// with its n_r and the atom count of each rule.
struct RuleShape {
  int subject_class = 1;
  int resource_class = 1;
  int n_r = 1;                    // as drawn (the last group may be cut short)
  std::vector<int> atom_counts;   // one per rule actually generated
};

inline std::vector<RuleShape> sample_rule_shapes(const SynthConfig& cfg, Rng& rng) {
  std::vector<RuleShape> out;
  const std::vector<double> nr(cfg.rules_per_pair_dist.begin(), cfg.rules_per_pair_dist.end());
  const std::vector<double> na(cfg.atoms_per_rule_dist.begin(), cfg.atoms_per_rule_dist.end());
  int total = 0;
  while (total < cfg.n_r) {
    RuleShape s;
    s.subject_class = 1 + static_cast<int>(uniform_index(rng, kSynthSubjectClasses));
    s.resource_class = 1 + static_cast<int>(uniform_index(rng, kSynthResourceClasses));
    s.n_r = 1 + static_cast<int>(weighted_index(rng, nr));
    for (int k = 0; k < s.n_r && total < cfg.n_r; ++k, ++total)
      s.atom_counts.push_back(1 + static_cast<int>(weighted_index(rng, na)));
    out.push_back(std::move(s));
  }
  return out;
}

struct GeneratedBundle {
  std::shared_ptr<const ClassModel> class_model;
  std::shared_ptr<const ObjectModel> object_model;
  std::vector<Rule> rules;
  ACLPolicy acl;
  std::vector<RuleShape> shapes;

  ReBACPolicy policy() const { return {object_model, acl.actions, rules}; }
};

namespace detail {

// Values observed at the end of `path` from instances of `cls`.
inline std::vector<std::string> observed_ids(const ObjectModel& om, ClassId cls, const Path& path) {
  std::set<std::string> seen;
  const auto cp = compile_path(om.class_model(), cls, path);
  for (ObjectId o : om.instances(cls))
    for (const auto& a : nav(om, o, cp).atoms) seen.insert(om.id(a.value));
  return {seen.begin(), seen.end()};
}

// One uniformly chosen concrete atom of the given type, added to `rule`.
inline void add_atom(const ObjectModel& om, int si, int rj, AtomType type, Rng& rng, Rule& rule) {
  const auto& cm = om.class_model();
  const auto cs = cm.require(synth_subject_class(si));
  const auto cr = cm.require(synth_resource_class(rj));
  auto pick = [&](int n) { return 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n))); };
  const std::string i = std::to_string(si);
  const std::string k = std::to_string(pick(2));
  auto constraint = [&](Path p1, ConstraintOp op, Path p2) {
    rule.constraint.push_back({std::move(p1), op, std::move(p2)});
  };
  auto condition = [&](Path path, ConditionOp op, const std::function<std::vector<Constant>(ClassId)>& values) {
    const bool subject = coin(rng);
    const ClassId cls = subject ? cs : cr;
    auto pool = values(cls);
    if (pool.empty()) return;
    AtomicCondition c{std::move(path), op, {pool[uniform_index(rng, pool.size())]}};
    (subject ? rule.subject_condition : rule.resource_condition).push_back(std::move(c));
  };
  auto ids_at = [&](const Path& p) {
    return [&om, p](ClassId cls) {
      std::vector<Constant> out;
      for (auto& s : observed_ids(om, cls, p)) out.emplace_back(std::move(s));
      return out;
    };
  };
  switch (type) {
    case AtomType::kEqual01: constraint({}, ConstraintOp::kEqual, {"subOne_" + i}); break;
    case AtomType::kIn01: constraint({}, ConstraintOp::kIn, {"subMany_" + i}); break;
    case AtomType::kEqual12: constraint({"directSingle"}, ConstraintOp::kEqual, {"subOne_" + i, "directSingle"}); break;
    case AtomType::kIn12: constraint({"directSingle"}, ConstraintOp::kIn, {"subMany_" + i, "directSingle"}); break;
    case AtomType::kEqual11: constraint({"directSingle"}, ConstraintOp::kEqual, {"directSingle"}); break;
    case AtomType::kContains21:
      constraint({"mul2", "mulSingle_" + k}, ConstraintOp::kContains, {"mulSingle_" + k});
      break;
    case AtomType::kContains31:
      constraint({"directSingle", "mul2", "mulSingle_" + k}, ConstraintOp::kContains, {"mulSingle_" + k});
      break;
    case AtomType::kSupseteq11: constraint({"mul2"}, ConstraintOp::kSupseteq, {"mul2"}); break;
    case AtomType::kSubseteq11: constraint({"mul2"}, ConstraintOp::kSubseteq, {"mul2"}); break;
    case AtomType::kSeteq11: constraint({"mul2"}, ConstraintOp::kSeteq, {"mul2"}); break;
    case AtomType::kCondIn1:
      condition({"b"}, ConditionOp::kIn, [&](ClassId) { return std::vector<Constant>{Constant{coin(rng)}}; });
      break;
    case AtomType::kCondIn2: condition({"directSingle", "id"}, ConditionOp::kIn, ids_at({"directSingle"})); break;
    case AtomType::kCondContains2: condition({"mul2", "id"}, ConditionOp::kContains, ids_at({"mul2"})); break;
  }
}

}  // namespace detail

// N_r rules: per planned shape, atoms of types drawn from the frequency
// table, one uniform action per rule, then simplification. Rules with empty
// meaning or duplicating an earlier rule get fresh atoms (same shape).
inline std::vector<Rule> gen_rules(const ObjectModel& om, const SynthConfig& cfg,
                                   std::vector<RuleShape>* shapes_out = nullptr) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, "synthetic/rules");
  const auto shapes = sample_rule_shapes(cfg, rng);
  if (shapes_out) *shapes_out = shapes;
  const auto actions = synth_actions(cfg.n_actions);
  const std::vector<double> freq(cfg.type_frequencies.begin(), cfg.type_frequencies.end());
  const auto& cm = om.class_model();
  std::map<std::pair<int, int>, std::shared_ptr<PairContext>> contexts;
  std::vector<Rule> out;
  std::set<Rule> seen;
  for (const auto& s : shapes) {
    auto& ctx = contexts[{s.subject_class, s.resource_class}];
    if (!ctx) {
      // Feature-free table: meanings are computed by direct evaluation.
      ctx = std::make_shared<PairContext>();
      ctx->table = std::make_shared<FeatureTable>(
          std::shared_ptr<const ObjectModel>(std::shared_ptr<const ObjectModel>{}, &om),
          cm.require(synth_subject_class(s.subject_class)), cm.require(synth_resource_class(s.resource_class)),
          std::vector<Feature>{});
    }
    for (int atoms : s.atom_counts) {
      for (int attempt = 0;; ++attempt) {
        if (attempt > 1000) throw std::runtime_error("gen_rules: cannot generate a satisfiable rule");
        Rule r;
        r.subject_type = synth_subject_class(s.subject_class);
        r.resource_type = synth_resource_class(s.resource_class);
        for (int a = 0; a < atoms; ++a)
          detail::add_atom(om, s.subject_class, s.resource_class, static_cast<AtomType>(weighted_index(rng, freq)),
                           rng, r);
        r.actions = {actions[uniform_index(rng, actions.size())]};
        r = simplify_rule(*ctx, std::move(r));
        if (body_pairs(*ctx, r).none() || seen.count(r)) continue;
        seen.insert(r);
        out.push_back(std::move(r));
        break;
      }
    }
  }
  return out;
}

inline ACLPolicy compute_au(std::shared_ptr<const ObjectModel> om, const std::vector<Rule>& rules,
                            std::vector<std::string> actions) {
  ACLPolicy acl;
  acl.authorizations = policy_meaning(*om, rules);
  for (const auto& r : rules) actions.insert(actions.end(), r.actions.begin(), r.actions.end());
  sort_unique(actions);
  acl.actions = std::move(actions);
  acl.object_model = std::move(om);
  return acl;
}

inline GeneratedBundle generate_bundle(const SynthConfig& cfg) {
  cfg.validate();
  GeneratedBundle b;
  b.class_model = gen_class_model();
  b.object_model = gen_object_model(b.class_model, cfg);
  b.rules = gen_rules(*b.object_model, cfg, &b.shapes);
  b.acl = compute_au(b.object_model, b.rules, synth_actions(cfg.n_actions));
  return b;
}

}  // namespace rebac
