#pragma once

// Candidate features (atomic conditions and constraints) for a pair of
// subject and resource classes, their truth tables over object pairs, labeled
// feature vectors and the constant/equivalent-feature pruning.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <variant>
#include <vector>

#include "rebac/model.hpp"
#include "rebac/pair_set.hpp"
#include "rebac/policy.hpp"

namespace rebac {

// Path-length limits. Constraint paths may exceed the condition limits by the
// SPED/RPED allowances, subject to the MTPL total.
struct FeatureLimits {
  int mspl = 3;  // subject condition path length
  int mrpl = 3;  // resource condition path length
  int sped = 0;  // extra subject path length in constraints
  int rped = 0;  // extra resource path length in constraints
  int mtpl = 4;  // total constraint path length
  int mcse = 5;  // constant set size in conditions

  friend bool operator==(const FeatureLimits&, const FeatureLimits&) = default;
};

// Optional constraint operators. Disabling both gives the original operator
// set (equal, in, contains, supseteq).
struct LanguageOptions {
  bool subseteq = true;
  bool seteq = true;

  bool allows(ConstraintOp op) const {
    if (op == ConstraintOp::kSubseteq) return subseteq;
    if (op == ConstraintOp::kSeteq) return seteq;
    return true;
  }

  friend bool operator==(const LanguageOptions&, const LanguageOptions&) = default;
};

enum class FeatureKind : std::uint8_t { kSubjectCondition, kResourceCondition, kConstraint };

struct Feature {
  FeatureKind kind = FeatureKind::kSubjectCondition;
  std::variant<AtomicCondition, AtomicConstraint> payload;
  int wsc = 0;
  std::string key;         // canonical text, unique per feature
  std::size_t index = 0;   // position in the enumeration

  bool is_condition() const { return kind != FeatureKind::kConstraint; }
  const AtomicCondition& condition() const { return std::get<AtomicCondition>(payload); }
  const AtomicConstraint& constraint() const { return std::get<AtomicConstraint>(payload); }

  bool is_id_condition() const { return is_condition() && condition().path == Path{"id"}; }

  // p in {true} <-> p in {false}.
  std::optional<std::string> complement_key() const {
    if (!is_condition()) return std::nullopt;
    const auto& c = condition();
    if (c.op != ConditionOp::kIn || c.values.size() != 1 || !std::holds_alternative<bool>(c.values.front()))
      return std::nullopt;
    AtomicCondition other{c.path, c.op, {Constant{!std::get<bool>(c.values.front())}}};
    return to_string(other, kind == FeatureKind::kSubjectCondition ? "subject" : "resource");
  }
};

inline Feature make_feature(FeatureKind kind, AtomicCondition c) {
  c = canonicalize(std::move(c));
  Feature f;
  f.kind = kind;
  f.wsc = wsc(c);
  f.key = to_string(c, kind == FeatureKind::kSubjectCondition ? "subject" : "resource");
  f.payload = std::move(c);
  return f;
}

inline Feature make_feature(AtomicConstraint c) {
  Feature f;
  f.kind = FeatureKind::kConstraint;
  f.wsc = wsc(c);
  f.key = to_string(c);
  f.payload = std::move(c);
  return f;
}

inline bool within_limits(const Feature& f, const FeatureLimits& lim) {
  switch (f.kind) {
    case FeatureKind::kSubjectCondition:
      return static_cast<int>(f.condition().path.size()) <= lim.mspl &&
             static_cast<int>(f.condition().values.size()) <= lim.mcse;
    case FeatureKind::kResourceCondition:
      return static_cast<int>(f.condition().path.size()) <= lim.mrpl &&
             static_cast<int>(f.condition().values.size()) <= lim.mcse;
    case FeatureKind::kConstraint: {
      const auto p1 = static_cast<int>(f.constraint().subject_path.size());
      const auto p2 = static_cast<int>(f.constraint().resource_path.size());
      return p1 <= lim.mspl + lim.sped && p2 <= lim.mrpl + lim.rped && p1 + p2 <= lim.mtpl;
    }
  }
  return false;
}

// All type-correct paths from `start` with length <= max_len, including the
// empty path, in DFS order.
inline std::vector<CompiledPath> enumerate_paths(const ClassModel& cm, ClassId start, int max_len) {
  std::vector<CompiledPath> out;
  Path cur;
  auto rec = [&](auto&& self, ClassId cls) -> void {
    out.push_back(compile_path(cm, start, cur));
    if (static_cast<int>(cur.size()) >= max_len || cls < 0) return;
    for (const auto& info : cm.fields(cls)) {
      cur.push_back(info.name);
      if (info.kind == FieldKind::kReference) {
        self(self, info.target);
      } else {
        out.push_back(compile_path(cm, start, cur));
      }
      cur.pop_back();
    }
  };
  rec(rec, start);
  return out;
}

inline Path path_names(const ClassModel& cm, const CompiledPath& p) {
  Path out;
  ClassId cls = p.start;
  for (FieldId f : p.steps) {
    const auto& info = cm.field(cls, f);
    out.push_back(info.name);
    cls = info.target;
  }
  return out;
}

namespace detail {

inline Constant atom_constant(const ObjectModel& om, const Atom& a) {
  if (a.kind == AtomKind::kBool) return Constant{a.value != 0};
  return Constant{om.id(a.value)};
}

inline void condition_features(const ObjectModel& om, ClassId cls, int max_len, FeatureKind kind,
                               std::vector<Feature>& out) {
  const auto& cm = om.class_model();
  for (const auto& p : enumerate_paths(cm, cls, max_len)) {
    if (p.steps.empty() || p.leaf_kind == FieldKind::kReference) continue;
    std::set<Atom> observed;
    if (p.leaf_kind == FieldKind::kBoolean && p.single_valued()) {
      observed = {Atom{AtomKind::kBool, 0}, Atom{AtomKind::kBool, 1}};
    } else {
      for (ObjectId o : om.instances(cls)) {
        auto v = nav(om, o, p);
        observed.insert(v.atoms.begin(), v.atoms.end());
      }
    }
    const Path names = path_names(cm, p);
    const ConditionOp op = p.single_valued() ? ConditionOp::kIn : ConditionOp::kContains;
    for (const auto& a : observed) out.push_back(make_feature(kind, AtomicCondition{names, op, {atom_constant(om, a)}}));
  }
}

}  // namespace detail

// Enumerates every feature for (subject class, resource class) under the
// limits. Condition constants are the values observed in the object model
// (singletons; larger constant sets only arise from merging). Constraint
// paths must end in a reference type. Ordered by kind, WSC, then key.
inline std::vector<Feature> enumerate_features(const ObjectModel& om, const FeatureLimits& limits, ClassId cs,
                                               ClassId cr, const LanguageOptions& lang = {}) {
  const auto& cm = om.class_model();
  if (cs < 0 || static_cast<std::size_t>(cs) >= cm.size() || cr < 0 || static_cast<std::size_t>(cr) >= cm.size())
    throw LookupError("enumerate_features: unknown class");
  std::vector<Feature> out;
  detail::condition_features(om, cs, limits.mspl, FeatureKind::kSubjectCondition, out);
  detail::condition_features(om, cr, limits.mrpl, FeatureKind::kResourceCondition, out);

  const auto sp = enumerate_paths(cm, cs, limits.mspl + limits.sped);
  const auto rp = enumerate_paths(cm, cr, limits.mrpl + limits.rped);
  for (const auto& p1 : sp) {
    if (p1.leaf_kind != FieldKind::kReference) continue;
    for (const auto& p2 : rp) {
      if (p2.leaf_kind != FieldKind::kReference || p1.leaf_class != p2.leaf_class) continue;
      if (static_cast<int>(p1.length() + p2.length()) > limits.mtpl) continue;
      const Path n1 = path_names(cm, p1), n2 = path_names(cm, p2);
      for (auto op : {ConstraintOp::kEqual, ConstraintOp::kIn, ConstraintOp::kContains, ConstraintOp::kSupseteq,
                      ConstraintOp::kSubseteq, ConstraintOp::kSeteq}) {
        if (!lang.allows(op) || !constraint_op_compatible(op, p1.single_valued(), p2.single_valued())) continue;
        out.push_back(make_feature(AtomicConstraint{n1, op, n2}));
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Feature& a, const Feature& b) {
    return std::tie(a.kind, a.wsc, a.key) < std::tie(b.kind, b.wsc, b.key);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i;
  return out;
}

// Truth value of a feature for one (subject, resource) pair, via the policy
// semantics.
inline bool evaluate_feature(const ObjectModel& om, const Feature& f, ObjectId s, ObjectId r) {
  switch (f.kind) {
    case FeatureKind::kSubjectCondition: return satisfies(om, s, compile_condition(om, om.type(s), f.condition()));
    case FeatureKind::kResourceCondition: return satisfies(om, r, compile_condition(om, om.type(r), f.condition()));
    case FeatureKind::kConstraint:
      return satisfies(om, s, r, compile_constraint(om, om.type(s), om.type(r), f.constraint()));
  }
  return false;
}

// Features of one type pair with their truth tables over all
// (subject, resource) instance pairs. Pair index = si * |resources| + ri.
class FeatureTable {
 public:
  FeatureTable(std::shared_ptr<const ObjectModel> om, ClassId cs, ClassId cr, std::vector<Feature> features)
      : om_(std::move(om)), cs_(cs), cr_(cr), features_(std::move(features)) {
    subjects_ = om_->instances(cs_);
    resources_ = om_->instances(cr_);
    for (std::size_t i = 0; i < subjects_.size(); ++i) subject_pos_.emplace(subjects_[i], i);
    for (std::size_t j = 0; j < resources_.size(); ++j) resource_pos_.emplace(resources_[j], j);
    columns_.reserve(features_.size());
    std::unordered_map<std::string, std::vector<Value>> nav_cache;
    auto navs = [&](const CompiledPath& p, const std::vector<ObjectId>& objs, const std::string& tag)
        -> const std::vector<Value>& {
      std::string key = tag + ":";
      for (FieldId f : p.steps) key += std::to_string(f) + ".";
      auto it = nav_cache.find(key);
      if (it != nav_cache.end()) return it->second;
      std::vector<Value> vals;
      vals.reserve(objs.size());
      for (ObjectId o : objs) vals.push_back(nav(*om_, o, p));
      return nav_cache.emplace(key, std::move(vals)).first->second;
    };
    for (std::size_t k = 0; k < features_.size(); ++k) {
      auto& f = features_[k];
      f.index = k;
      key_index_.emplace(f.key, k);
      PairSet col(pair_count());
      if (f.kind == FeatureKind::kSubjectCondition) {
        const auto c = compile_condition(*om_, cs_, f.condition());
        const auto& vals = navs(c.path, subjects_, "s");
        for (std::size_t i = 0; i < subjects_.size(); ++i)
          if (condition_holds(c, vals[i]))
            for (std::size_t j = 0; j < resources_.size(); ++j) col.set(pair_index(i, j));
      } else if (f.kind == FeatureKind::kResourceCondition) {
        const auto c = compile_condition(*om_, cr_, f.condition());
        const auto& vals = navs(c.path, resources_, "r");
        for (std::size_t j = 0; j < resources_.size(); ++j)
          if (condition_holds(c, vals[j]))
            for (std::size_t i = 0; i < subjects_.size(); ++i) col.set(pair_index(i, j));
      } else {
        const auto c = compile_constraint(*om_, cs_, cr_, f.constraint());
        const auto& sv = navs(c.subject_path, subjects_, "s");
        const auto& rv = navs(c.resource_path, resources_, "r");
        for (std::size_t i = 0; i < subjects_.size(); ++i)
          for (std::size_t j = 0; j < resources_.size(); ++j)
            if (constraint_holds(c.op, sv[i], rv[j])) col.set(pair_index(i, j));
      }
      columns_.push_back(std::move(col));
    }
  }

  const ObjectModel& object_model() const { return *om_; }
  const std::shared_ptr<const ObjectModel>& object_model_ptr() const { return om_; }
  ClassId subject_type() const { return cs_; }
  ClassId resource_type() const { return cr_; }
  const std::vector<ObjectId>& subjects() const { return subjects_; }
  const std::vector<ObjectId>& resources() const { return resources_; }
  std::size_t pair_count() const { return subjects_.size() * resources_.size(); }
  std::size_t pair_index(std::size_t si, std::size_t ri) const { return si * resources_.size() + ri; }
  ObjectId pair_subject(std::size_t p) const { return subjects_[p / resources_.size()]; }
  ObjectId pair_resource(std::size_t p) const { return resources_[p % resources_.size()]; }

  std::optional<std::size_t> pair_of(ObjectId s, ObjectId r) const {
    auto i = subject_pos_.find(s);
    auto j = resource_pos_.find(r);
    if (i == subject_pos_.end() || j == resource_pos_.end()) return std::nullopt;
    return pair_index(i->second, j->second);
  }

  std::size_t size() const { return features_.size(); }
  const std::vector<Feature>& features() const { return features_; }
  const Feature& feature(std::size_t k) const { return features_[k]; }
  const PairSet& column(std::size_t k) const { return columns_[k]; }
  bool value(std::size_t k, std::size_t pair) const { return columns_[k].test(pair); }

  std::optional<std::size_t> find(const std::string& key) const {
    auto it = key_index_.find(key);
    if (it == key_index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::shared_ptr<const ObjectModel> om_;
  ClassId cs_, cr_;
  std::vector<Feature> features_;
  std::vector<ObjectId> subjects_, resources_;
  std::unordered_map<ObjectId, std::size_t> subject_pos_, resource_pos_;
  std::vector<PairSet> columns_;
  std::unordered_map<std::string, std::size_t> key_index_;
};

struct TypedTriple {
  ClassId subject_type = -1;
  ClassId resource_type = -1;
  std::string action;

  friend auto operator<=>(const TypedTriple&, const TypedTriple&) = default;
};

// Triples that occur in AU, in (subject type, resource type, action) order.
inline std::vector<TypedTriple> typed_triples(const ObjectModel& om, const AuthorizationSet& au) {
  std::set<TypedTriple> seen;
  for (const auto& t : au) seen.insert({om.type(t.subject), om.type(t.resource), t.action});
  return {seen.begin(), seen.end()};
}

inline std::string triple_name(const ClassModel& cm, const TypedTriple& t) {
  return cm.name(t.subject_type) + "/" + cm.name(t.resource_type) + "/" + t.action;
}

// Pairs of the table's type pair that AU grants `action` for.
inline PairSet authorized_pairs(const FeatureTable& table, const AuthorizationSet& au, const std::string& action) {
  PairSet out(table.pair_count());
  for (const auto& t : au) {
    if (t.action != action) continue;
    if (auto p = table.pair_of(t.subject, t.resource)) out.set(*p);
  }
  return out;
}

struct LabeledFeatureVector {
  ObjectId subject = kNoObject;
  ObjectId resource = kNoObject;
  std::vector<std::uint8_t> bits;
  int label = 0;
};

// One vector per (subject, resource) pair of the table, in (subject id,
// resource id) order, over the given features. Pairs outside `include` (when
// given) are skipped.
inline std::vector<LabeledFeatureVector> build_vectors(const FeatureTable& table, const std::vector<Feature>& features,
                                                       const PairSet& positives, const PairSet* include = nullptr) {
  std::vector<LabeledFeatureVector> out;
  for (std::size_t p = 0; p < table.pair_count(); ++p) {
    if (include && !include->test(p)) continue;
    LabeledFeatureVector v{table.pair_subject(p), table.pair_resource(p), {}, positives.test(p) ? 1 : 0};
    v.bits.reserve(features.size());
    for (const auto& f : features) v.bits.push_back(table.value(f.index, p) ? 1 : 0);
    out.push_back(std::move(v));
  }
  return out;
}

inline std::vector<LabeledFeatureVector> build_vectors(const FeatureTable& table, const AuthorizationSet& au,
                                                       const TypedTriple& triple) {
  if (triple.subject_type != table.subject_type() || triple.resource_type != table.resource_type())
    throw TypeError("build_vectors: triple does not match the feature table");
  return build_vectors(table, table.features(), authorized_pairs(table, au, triple.action));
}

struct PrunedFeatures {
  std::vector<Feature> features;
  std::vector<LabeledFeatureVector> vectors;
};

inline std::vector<LabeledFeatureVector> select_columns(const std::vector<LabeledFeatureVector>& vectors,
                                                        const std::vector<std::size_t>& keep) {
  std::vector<LabeledFeatureVector> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    LabeledFeatureVector w{v.subject, v.resource, {}, v.label};
    w.bits.reserve(keep.size());
    for (auto k : keep) w.bits.push_back(v.bits[k]);
    out.push_back(std::move(w));
  }
  return out;
}

// Drops features whose value is the same in every vector.
inline PrunedFeatures prune_constant_features(const std::vector<LabeledFeatureVector>& vectors,
                                              const std::vector<Feature>& features) {
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < features.size(); ++k) {
    bool varies = false;
    for (std::size_t n = 1; n < vectors.size() && !varies; ++n) varies = vectors[n].bits[k] != vectors[0].bits[k];
    if (varies) keep.push_back(k);
  }
  PrunedFeatures out;
  for (auto k : keep) out.features.push_back(features[k]);
  out.vectors = select_columns(vectors, keep);
  return out;
}

struct EquivalencePruning {
  std::vector<Feature> features;                    // survivors, original order
  std::vector<LabeledFeatureVector> vectors;
  std::vector<std::vector<Feature>> dropped;        // one entry per class that lost members
  std::map<std::size_t, std::vector<std::size_t>> equivalents;  // survivor index -> dropped indices
};

// Groups features by their values on the positive vectors and keeps only the
// minimal-WSC members of each group (all of them on ties).
inline EquivalencePruning prune_equivalent_features(const std::vector<LabeledFeatureVector>& vectors,
                                                    const std::vector<Feature>& features) {
  EquivalencePruning out;
  std::vector<std::size_t> positives;
  for (std::size_t n = 0; n < vectors.size(); ++n)
    if (vectors[n].label == 1) positives.push_back(n);
  if (positives.empty()) {
    out.features = features;
    out.vectors = vectors;
    return out;
  }
  std::map<std::vector<std::uint8_t>, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < features.size(); ++k) {
    std::vector<std::uint8_t> sig;
    sig.reserve(positives.size());
    for (auto n : positives) sig.push_back(vectors[n].bits[k]);
    groups[std::move(sig)].push_back(k);
  }
  std::vector<bool> keep(features.size(), false);
  for (const auto& [sig, members] : groups) {
    // Ranked like the fitness: id usage first, then WSC.
    auto rank = [&](std::size_t k) { return std::pair(features[k].is_id_condition() ? 1 : 0, features[k].wsc); };
    auto best = rank(members.front());
    for (auto k : members) best = std::min(best, rank(k));
    std::vector<Feature> lost;
    for (auto k : members) {
      if (rank(k) == best) keep[k] = true;
      else lost.push_back(features[k]);
    }
    for (auto k : members)
      if (keep[k])
        for (const auto& f : lost) out.equivalents[features[k].index].push_back(f.index);
    if (!lost.empty()) out.dropped.push_back(std::move(lost));
  }
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < features.size(); ++k)
    if (keep[k]) kept.push_back(k);
  for (auto k : kept) out.features.push_back(features[k]);
  out.vectors = select_columns(vectors, kept);
  return out;
}

}  // namespace rebac
