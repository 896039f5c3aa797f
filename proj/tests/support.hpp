#pragma once

// Fixtures and an independent string-level semantics oracle shared by the
// unit tests and the acceptance binary.

#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "rebac/rebac.hpp"

namespace testing_support {

using namespace rebac;

using StrTuple = std::tuple<std::string, std::string, std::string>;
using StrAuth = std::set<StrTuple>;

inline StrAuth as_strings(const ObjectModel& om, const AuthorizationSet& au) {
  StrAuth out;
  for (const auto& t : au) out.emplace(om.id(t.subject), om.id(t.resource), t.action);
  return out;
}

// ---------------------------------------------------------------------------
// Naive oracle. Works on the raw declarations and raw objects only.

struct OValue {
  enum Shape { kBottom, kSingle, kSet } shape = kBottom;
  std::set<std::string> items;
};

class Oracle {
 public:
  Oracle(std::vector<ClassDecl> decls, std::vector<RawObject> objects) {
    for (auto& d : decls) classes_[d.name] = std::move(d);
    for (auto& o : objects) objects_[o.id] = std::move(o);
  }

  const FieldDecl* field(const std::string& cls, const std::string& name) const {
    for (const auto& f : classes_.at(cls).fields)
      if (f.name == name) return &f;
    return nullptr;
  }

  OValue nav(const std::string& id, const Path& path) const {
    if (path.empty()) return {OValue::kSingle, {"obj:" + id}};
    std::vector<std::string> frontier{id};
    bool many = false;
    std::string cls = objects_.at(id).type;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const std::string& name = path[i];
      if (name == "id") {
        std::set<std::string> out;
        for (const auto& x : frontier) out.insert("str:" + x);
        return finish(out, many);
      }
      const FieldDecl* f = field(cls, name);
      if (f->multiplicity == Multiplicity::kMany) many = true;
      if (f->type == "Boolean") {
        std::set<std::string> out;
        for (const auto& x : frontier) {
          const auto& v = objects_.at(x).fields.at(name);
          out.insert(std::get<bool>(v) ? "bool:true" : "bool:false");
        }
        return finish(out, many);
      }
      std::vector<std::string> next;
      for (const auto& x : frontier) {
        const auto& fields = objects_.at(x).fields;
        auto it = fields.find(name);
        if (it == fields.end()) continue;
        if (auto* s = std::get_if<std::string>(&it->second)) next.push_back(*s);
        if (auto* v = std::get_if<std::vector<std::string>>(&it->second)) next.insert(next.end(), v->begin(), v->end());
      }
      frontier = next;
      cls = f->type;
      if (frontier.empty()) return many ? OValue{OValue::kSet, {}} : OValue{};
    }
    std::set<std::string> out;
    for (const auto& x : frontier) out.insert("obj:" + x);
    return finish(out, many);
  }

  static std::string constant(const Constant& c) {
    if (auto* b = std::get_if<bool>(&c)) return *b ? "bool:true" : "bool:false";
    return "str:" + std::get<std::string>(c);
  }

  bool condition(const std::string& id, const AtomicCondition& c) const {
    const OValue v = nav(id, c.path);
    if (c.op == ConditionOp::kIn) {
      if (v.shape != OValue::kSingle) return false;
      for (const auto& k : c.values)
        if (constant(k) == *v.items.begin()) return true;
      return false;
    }
    return v.shape == OValue::kSet && v.items.count(constant(c.values.at(0))) > 0;
  }

  bool constraint(const std::string& s, const std::string& r, const AtomicConstraint& c) const {
    const OValue a = nav(s, c.subject_path), b = nav(r, c.resource_path);
    auto set = [](const OValue& v) { return v.shape == OValue::kSet ? v.items : std::set<std::string>{}; };
    auto subset = [](const std::set<std::string>& x, const std::set<std::string>& y) {
      for (const auto& e : x)
        if (!y.count(e)) return false;
      return true;
    };
    switch (c.op) {
      case ConstraintOp::kEqual:
        return a.shape == OValue::kSingle && b.shape == OValue::kSingle && a.items == b.items;
      case ConstraintOp::kIn: return a.shape == OValue::kSingle && set(b).count(*a.items.begin()) > 0;
      case ConstraintOp::kContains: return b.shape == OValue::kSingle && set(a).count(*b.items.begin()) > 0;
      case ConstraintOp::kSupseteq: return subset(set(b), set(a));
      case ConstraintOp::kSubseteq: return subset(set(a), set(b));
      case ConstraintOp::kSeteq: return set(a) == set(b);
    }
    return false;
  }

  StrAuth meaning(const Rule& rule) const {
    StrAuth out;
    for (const auto& [s, so] : objects_) {
      if (so.type != rule.subject_type) continue;
      bool ok = true;
      for (const auto& c : rule.subject_condition) ok = ok && condition(s, c);
      if (!ok) continue;
      for (const auto& [r, ro] : objects_) {
        if (ro.type != rule.resource_type) continue;
        bool rok = true;
        for (const auto& c : rule.resource_condition) rok = rok && condition(r, c);
        for (const auto& c : rule.constraint) rok = rok && constraint(s, r, c);
        if (!rok) continue;
        for (const auto& a : rule.actions) out.emplace(s, r, a);
      }
    }
    return out;
  }

  StrAuth meaning(const std::vector<Rule>& rules) const {
    StrAuth out;
    for (const auto& r : rules) {
      auto m = meaning(r);
      out.insert(m.begin(), m.end());
    }
    return out;
  }

 private:
  static OValue finish(std::set<std::string> items, bool many) {
    if (many) return {OValue::kSet, std::move(items)};
    if (items.empty()) return {};
    return {OValue::kSingle, std::move(items)};
  }

  std::map<std::string, ClassDecl> classes_;
  std::map<std::string, RawObject> objects_;
};

inline Oracle oracle_for(const ObjectModel& om) { return Oracle(om.class_model().decls(), om.to_raw()); }

// ---------------------------------------------------------------------------
// EMR fragment: physicians, consultations, patients, hospitals, records.

inline std::shared_ptr<const ClassModel> emr_class_model() {
  using M = Multiplicity;
  return std::make_shared<const ClassModel>(std::vector<ClassDecl>{
      {"Hospital", {}},
      {"Patient", {{"registrations", "Hospital", M::kMany}}},
      {"MedicalRecord", {}},
      {"Physician",
       {{"isTrainee", "Boolean", M::kOne},
        {"affiliation", "Hospital", M::kOne},
        {"consultations", "Consultation", M::kMany}}},
      {"Consultation",
       {{"physician", "Physician", M::kOne},
        {"patient", "Patient", M::kOne},
        {"records", "MedicalRecord", M::kMany}}},
  });
}

inline std::shared_ptr<const ObjectModel> emr_object_model() {
  std::vector<RawObject> objs;
  const std::vector<std::string> hospitals{"hosp1", "hosp2", "hosp3"};
  for (const auto& h : hospitals) objs.push_back({h, "Hospital", {}});
  for (int p = 1; p <= 5; ++p) {
    std::vector<std::string> reg{hospitals[p % 3]};
    if (p % 2 == 0) reg.push_back(hospitals[(p + 1) % 3]);
    std::sort(reg.begin(), reg.end());
    objs.push_back({"pat" + std::to_string(p), "Patient", {{"registrations", reg}}});
  }
  std::map<std::string, std::vector<std::string>> doc_consults;
  int rec = 0;
  for (int d = 1; d <= 6; ++d) {
    for (int k = 1; k <= 2; ++k) {
      const std::string c = "consultation" + std::to_string(d) + "-" + std::to_string(k);
      std::vector<std::string> records;
      for (int j = 0; j < 1 + (d + k) % 2; ++j) {
        const std::string r = "record" + std::to_string(++rec);
        objs.push_back({r, "MedicalRecord", {}});
        records.push_back(r);
      }
      std::sort(records.begin(), records.end());
      const std::string patient = "pat" + std::to_string(1 + (d * 2 + k) % 5);
      objs.push_back({c, "Consultation", {{"physician", "doc" + std::to_string(d)}, {"patient", patient}, {"records", records}}});
      doc_consults["doc" + std::to_string(d)].push_back(c);
    }
  }
  for (int d = 1; d <= 6; ++d) {
    const std::string id = "doc" + std::to_string(d);
    auto cs = doc_consults[id];
    std::sort(cs.begin(), cs.end());
    objs.push_back({id,
                    "Physician",
                    {{"isTrainee", d % 3 == 0}, {"affiliation", hospitals[d % 3]}, {"consultations", cs}}});
  }
  return std::make_shared<const ObjectModel>(emr_class_model(), std::move(objs));
}

inline Rule emr_rule() {
  Rule r;
  r.subject_type = "Physician";
  r.subject_condition = {{{"isTrainee"}, ConditionOp::kIn, {Constant{false}}}};
  r.resource_type = "Consultation";
  r.constraint = {{{}, ConstraintOp::kEqual, {"physician"}},
                  {{"affiliation"}, ConstraintOp::kIn, {"patient", "registrations"}}};
  r.actions = {"createMedicalRecord"};
  return canonicalize(r);
}

inline ACLPolicy acl_from_rules(std::shared_ptr<const ObjectModel> om, const std::vector<Rule>& rules) {
  ACLPolicy acl;
  acl.authorizations = policy_meaning(*om, rules);
  for (const auto& r : rules) acl.actions.insert(acl.actions.end(), r.actions.begin(), r.actions.end());
  sort_unique(acl.actions);
  acl.object_model = std::move(om);
  return acl;
}

// ---------------------------------------------------------------------------
// Random small models and rules.

inline std::shared_ptr<const ClassModel> fuzz_class_model() {
  using M = Multiplicity;
  return std::make_shared<const ClassModel>(std::vector<ClassDecl>{
      {"A", {{"flag", "Boolean", M::kOne}, {"b", "B", M::kOne}, {"c", "C", M::kOptional}, {"bs", "B", M::kMany}}},
      {"B", {{"flag", "Boolean", M::kOne}, {"cs", "C", M::kMany}, {"a", "A", M::kOptional}}},
      {"C", {{"flag", "Boolean", M::kOne}, {"owner", "A", M::kOne}}},
  });
}

inline std::shared_ptr<const ObjectModel> fuzz_object_model(Rng& rng, int per_class) {
  std::vector<RawObject> objs;
  auto id = [](const char* c, int i) { return std::string(c) + std::to_string(i); };
  auto pick_set = [&](const char* c) {
    std::set<std::string> s;
    const auto n = uniform_index(rng, 4);
    for (std::size_t k = 0; k < n; ++k) s.insert(id(c, static_cast<int>(uniform_index(rng, per_class))));
    return std::vector<std::string>(s.begin(), s.end());
  };
  auto one = [&](const char* c) { return id(c, static_cast<int>(uniform_index(rng, per_class))); };
  for (int i = 0; i < per_class; ++i) {
    RawObject a{id("A", i), "A", {{"flag", coin(rng)}, {"b", one("B")}, {"bs", pick_set("B")}}};
    if (coin(rng)) a.fields["c"] = one("C");
    objs.push_back(a);
    RawObject b{id("B", i), "B", {{"flag", coin(rng)}, {"cs", pick_set("C")}}};
    if (coin(rng)) b.fields["a"] = one("A");
    objs.push_back(b);
    objs.push_back({id("C", i), "C", {{"flag", coin(rng)}, {"owner", one("A")}}});
  }
  return std::make_shared<const ObjectModel>(fuzz_class_model(), std::move(objs));
}

inline Rule fuzz_rule(const ObjectModel& om, Rng& rng, const std::vector<std::string>& actions) {
  const auto& cm = om.class_model();
  const ClassId cs = static_cast<ClassId>(uniform_index(rng, cm.size()));
  const ClassId cr = static_cast<ClassId>(uniform_index(rng, cm.size()));
  FeatureLimits lim;
  lim.mspl = lim.mrpl = 2;
  lim.mtpl = 3;
  LanguageOptions lang;
  lang.subseteq = lang.seteq = true;
  const auto feats = enumerate_features(om, lim, cs, cr, lang);
  Rule r;
  r.subject_type = cm.name(cs);
  r.resource_type = cm.name(cr);
  const auto n = uniform_index(rng, 4);
  for (std::size_t k = 0; k < n && !feats.empty(); ++k) {
    const auto& f = feats[uniform_index(rng, feats.size())];
    if (f.kind == FeatureKind::kConstraint) {
      r.constraint.push_back(f.constraint());
      continue;
    }
    auto c = f.condition();
    if (c.op == ConditionOp::kIn && coin(rng, 0.3)) {
      for (const auto& g : feats)
        if (g.kind == f.kind && g.condition().path == c.path && g.condition().op == ConditionOp::kIn && coin(rng))
          c.values.push_back(g.condition().values.front());
    }
    (f.kind == FeatureKind::kSubjectCondition ? r.subject_condition : r.resource_condition).push_back(canonicalize(c));
  }
  r.actions = {actions[uniform_index(rng, actions.size())]};
  if (coin(rng, 0.3)) r.actions.push_back(actions[uniform_index(rng, actions.size())]);
  return canonicalize(r);
}

}  // namespace testing_support
