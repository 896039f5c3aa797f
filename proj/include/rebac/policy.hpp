#pragma once

// Policy language: atomic conditions and constraints, rules, satisfaction,
// meanings, WSC and consistency.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "rebac/model.hpp"

namespace rebac {

enum class ConditionOp : std::uint8_t { kIn, kContains };
enum class ConstraintOp : std::uint8_t { kEqual, kIn, kContains, kSupseteq, kSubseteq, kSeteq };

inline const char* to_string(ConditionOp op) { return op == ConditionOp::kIn ? "in" : "contains"; }

inline const char* to_string(ConstraintOp op) {
  switch (op) {
    case ConstraintOp::kEqual: return "equal";
    case ConstraintOp::kIn: return "in";
    case ConstraintOp::kContains: return "contains";
    case ConstraintOp::kSupseteq: return "supseteq";
    case ConstraintOp::kSubseteq: return "subseteq";
    case ConstraintOp::kSeteq: return "seteq";
  }
  return "?";
}

inline std::optional<ConditionOp> parse_condition_op(const std::string& s) {
  if (s == "in") return ConditionOp::kIn;
  if (s == "contains") return ConditionOp::kContains;
  return std::nullopt;
}

inline std::optional<ConstraintOp> parse_constraint_op(const std::string& s) {
  for (auto op : {ConstraintOp::kEqual, ConstraintOp::kIn, ConstraintOp::kContains, ConstraintOp::kSupseteq,
                  ConstraintOp::kSubseteq, ConstraintOp::kSeteq})
    if (s == to_string(op)) return op;
  return std::nullopt;
}

// Constants in conditions: Booleans or strings (object ids).
using Constant = std::variant<bool, std::string>;

inline std::string constant_string(const Constant& c) {
  if (std::holds_alternative<bool>(c)) return std::get<bool>(c) ? "true" : "false";
  return std::get<std::string>(c);
}

struct AtomicCondition {
  Path path;
  ConditionOp op = ConditionOp::kIn;
  std::vector<Constant> values;  // sorted, unique; exactly one for contains

  friend auto operator<=>(const AtomicCondition&, const AtomicCondition&) = default;
};

struct AtomicConstraint {
  Path subject_path;
  ConstraintOp op = ConstraintOp::kEqual;
  Path resource_path;

  friend auto operator<=>(const AtomicConstraint&, const AtomicConstraint&) = default;
};

// Conditions, constraints and actions are sets, kept as sorted unique vectors
// (see canonicalize).
struct Rule {
  std::string subject_type;
  std::vector<AtomicCondition> subject_condition;
  std::string resource_type;
  std::vector<AtomicCondition> resource_condition;
  std::vector<AtomicConstraint> constraint;
  std::vector<std::string> actions;

  friend auto operator<=>(const Rule&, const Rule&) = default;
};

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

inline AtomicCondition canonicalize(AtomicCondition c) {
  sort_unique(c.values);
  return c;
}

inline Rule canonicalize(Rule r) {
  for (auto& c : r.subject_condition) sort_unique(c.values);
  for (auto& c : r.resource_condition) sort_unique(c.values);
  sort_unique(r.subject_condition);
  sort_unique(r.resource_condition);
  sort_unique(r.constraint);
  sort_unique(r.actions);
  return r;
}

// Human-readable forms, also used as canonical keys.
inline std::string to_string(const AtomicCondition& c, const std::string& prefix) {
  std::string s = prefix + "." + path_string(c.path) + " " + to_string(c.op) + " ";
  if (c.op == ConditionOp::kContains && c.values.size() == 1) return s + constant_string(c.values.front());
  s += "{";
  for (std::size_t i = 0; i < c.values.size(); ++i) s += (i ? ", " : "") + constant_string(c.values[i]);
  return s + "}";
}

inline std::string to_string(const AtomicConstraint& c) {
  auto side = [](const char* who, const Path& p) { return p.empty() ? std::string(who) : std::string(who) + "." + path_string(p); };
  return side("subject", c.subject_path) + " " + to_string(c.op) + " " + side("resource", c.resource_path);
}

inline std::string to_string(const Rule& r) {
  std::string s = "<" + r.subject_type + ", ";
  auto conj = [](const std::vector<std::string>& parts) {
    if (parts.empty()) return std::string("true");
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " & " : "") + parts[i];
    return out;
  };
  std::vector<std::string> parts;
  for (const auto& c : r.subject_condition) parts.push_back(to_string(c, "subject"));
  s += conj(parts) + ", " + r.resource_type + ", ";
  parts.clear();
  for (const auto& c : r.resource_condition) parts.push_back(to_string(c, "resource"));
  s += conj(parts) + ", ";
  parts.clear();
  for (const auto& c : r.constraint) parts.push_back(to_string(c));
  s += conj(parts) + ", {";
  for (std::size_t i = 0; i < r.actions.size(); ++i) s += (i ? ", " : "") + r.actions[i];
  return s + "}>";
}

struct SRATuple {
  ObjectId subject = kNoObject;
  ObjectId resource = kNoObject;
  std::string action;

  friend auto operator<=>(const SRATuple&, const SRATuple&) = default;
};

using AuthorizationSet = std::set<SRATuple>;

struct ACLPolicy {
  std::shared_ptr<const ObjectModel> object_model;
  std::vector<std::string> actions;  // sorted, unique
  AuthorizationSet authorizations;

  const ClassModel& class_model() const { return object_model->class_model(); }
};

struct ReBACPolicy {
  std::shared_ptr<const ObjectModel> object_model;
  std::vector<std::string> actions;
  std::vector<Rule> rules;

  const ClassModel& class_model() const { return object_model->class_model(); }
};

// ---------------------------------------------------------------------------
// Compiled atoms and satisfaction.

struct CompiledCondition {
  CompiledPath path;
  ConditionOp op = ConditionOp::kIn;
  std::vector<Atom> values;  // sorted; unresolvable string constants dropped
};

struct CompiledConstraint {
  CompiledPath subject_path;
  ConstraintOp op = ConstraintOp::kEqual;
  CompiledPath resource_path;
};

inline bool constraint_op_compatible(ConstraintOp op, bool subject_single, bool resource_single) {
  switch (op) {
    case ConstraintOp::kEqual: return subject_single && resource_single;
    case ConstraintOp::kIn: return subject_single && !resource_single;
    case ConstraintOp::kContains: return !subject_single && resource_single;
    default: return !subject_single && !resource_single;
  }
}

// Compiles and checks well-formedness of a condition relative to `cls`.
inline CompiledCondition compile_condition(const ObjectModel& om, ClassId cls, const AtomicCondition& c) {
  const auto& cm = om.class_model();
  if (c.path.empty()) throw TypeError("condition path must be non-empty");
  CompiledCondition out{compile_path(cm, cls, c.path), c.op, {}};
  const std::string where = "condition on '" + path_string(c.path) + "'";
  if (out.path.leaf_kind == FieldKind::kReference)
    throw TypeError(where + ": conditions must end in a Boolean field or 'id'");
  if (c.op == ConditionOp::kIn && !out.path.single_valued()) throw TypeError(where + ": 'in' needs a single-valued path");
  if (c.op == ConditionOp::kContains && out.path.single_valued())
    throw TypeError(where + ": 'contains' needs a many-valued path");
  if (c.values.empty()) throw TypeError(where + ": empty constant");
  if (c.op == ConditionOp::kContains && c.values.size() != 1)
    throw TypeError(where + ": 'contains' takes one atomic constant");
  for (const auto& v : c.values) {
    if (out.path.leaf_kind == FieldKind::kBoolean) {
      if (!std::holds_alternative<bool>(v)) throw TypeError(where + ": expected Boolean constant");
      out.values.push_back({AtomKind::kBool, std::get<bool>(v) ? 1 : 0});
    } else {
      if (!std::holds_alternative<std::string>(v)) throw TypeError(where + ": expected string constant");
      if (auto o = om.find(std::get<std::string>(v))) out.values.push_back({AtomKind::kString, *o});
    }
  }
  sort_unique(out.values);
  return out;
}

inline CompiledConstraint compile_constraint(const ObjectModel& om, ClassId subject_cls, ClassId resource_cls,
                                             const AtomicConstraint& c) {
  const auto& cm = om.class_model();
  CompiledConstraint out{compile_path(cm, subject_cls, c.subject_path), c.op,
                         compile_path(cm, resource_cls, c.resource_path)};
  const std::string where = "constraint '" + to_string(c) + "'";
  if (out.subject_path.leaf_kind != FieldKind::kReference || out.resource_path.leaf_kind != FieldKind::kReference)
    throw TypeError(where + ": constraint paths must have reference type");
  if (out.subject_path.leaf_class != out.resource_path.leaf_class) throw TypeError(where + ": path types differ");
  if (!constraint_op_compatible(c.op, out.subject_path.single_valued(), out.resource_path.single_valued()))
    throw TypeError(where + ": operator incompatible with path multiplicities");
  return out;
}

inline bool contains_atom(const std::vector<Atom>& sorted, const Atom& a) {
  return std::binary_search(sorted.begin(), sorted.end(), a);
}

// Condition truth for an already-navigated value.
inline bool condition_holds(const CompiledCondition& c, const Value& v) {
  if (c.op == ConditionOp::kIn) return v.single() && contains_atom(c.values, v.atoms.front());
  return v.set() && !c.values.empty() && contains_atom(v.atoms, c.values.front());
}

// Constraint truth for already-navigated values. ⊥ in a single-valued
// position makes the atom false; in a set position it is the empty set.
inline bool constraint_holds(ConstraintOp op, const Value& a, const Value& b) {
  static const std::vector<Atom> kEmpty;
  auto set_of = [](const Value& v) -> const std::vector<Atom>& { return v.set() ? v.atoms : kEmpty; };
  switch (op) {
    case ConstraintOp::kEqual:
      return a.single() && b.single() && a.atoms.front() == b.atoms.front();
    case ConstraintOp::kIn:
      return a.single() && contains_atom(set_of(b), a.atoms.front());
    case ConstraintOp::kContains:
      return b.single() && contains_atom(set_of(a), b.atoms.front());
    case ConstraintOp::kSupseteq: {
      const auto &x = set_of(a), &y = set_of(b);
      return std::includes(x.begin(), x.end(), y.begin(), y.end());
    }
    case ConstraintOp::kSubseteq: {
      const auto &x = set_of(a), &y = set_of(b);
      return std::includes(y.begin(), y.end(), x.begin(), x.end());
    }
    case ConstraintOp::kSeteq:
      return set_of(a) == set_of(b);
  }
  return false;
}

inline bool satisfies(const ObjectModel& om, ObjectId o, const CompiledCondition& c) {
  return condition_holds(c, nav(om, o, c.path));
}

inline bool satisfies(const ObjectModel& om, ObjectId s, ObjectId r, const CompiledConstraint& c) {
  return constraint_holds(c.op, nav(om, s, c.subject_path), nav(om, r, c.resource_path));
}

inline bool satisfies_condition(const ObjectModel& om, ObjectId o, const std::vector<AtomicCondition>& conds) {
  for (const auto& c : conds)
    if (!satisfies(om, o, compile_condition(om, om.type(o), c))) return false;
  return true;
}

inline bool satisfies_constraint(const ObjectModel& om, ObjectId s, ObjectId r,
                                 const std::vector<AtomicConstraint>& cons) {
  for (const auto& c : cons)
    if (!satisfies(om, s, r, compile_constraint(om, om.type(s), om.type(r), c))) return false;
  return true;
}

// A rule resolved against an object model; throws TypeError/LookupError when
// the rule is not well-formed.
struct CompiledRule {
  ClassId subject_type = -1;
  ClassId resource_type = -1;
  std::vector<CompiledCondition> subject_condition;
  std::vector<CompiledCondition> resource_condition;
  std::vector<CompiledConstraint> constraint;
  std::vector<std::string> actions;

  CompiledRule(const ObjectModel& om, const Rule& rule) {
    const auto& cm = om.class_model();
    subject_type = cm.require(rule.subject_type);
    resource_type = cm.require(rule.resource_type);
    for (const auto& c : rule.subject_condition) subject_condition.push_back(compile_condition(om, subject_type, c));
    for (const auto& c : rule.resource_condition) resource_condition.push_back(compile_condition(om, resource_type, c));
    for (const auto& c : rule.constraint) constraint.push_back(compile_constraint(om, subject_type, resource_type, c));
    if (rule.actions.empty()) throw TypeError("rule has no actions");
    actions = rule.actions;
    sort_unique(actions);
  }

  bool subject_ok(const ObjectModel& om, ObjectId s) const {
    if (om.type(s) != subject_type) return false;
    for (const auto& c : subject_condition)
      if (!satisfies(om, s, c)) return false;
    return true;
  }

  bool resource_ok(const ObjectModel& om, ObjectId r) const {
    if (om.type(r) != resource_type) return false;
    for (const auto& c : resource_condition)
      if (!satisfies(om, r, c)) return false;
    return true;
  }

  bool pair_ok(const ObjectModel& om, ObjectId s, ObjectId r) const {
    for (const auto& c : constraint)
      if (!satisfies(om, s, r, c)) return false;
    return true;
  }

  bool permits(const ObjectModel& om, ObjectId s, ObjectId r, const std::string& action) const {
    return std::binary_search(actions.begin(), actions.end(), action) && subject_ok(om, s) && resource_ok(om, r) &&
           pair_ok(om, s, r);
  }
};

inline void validate_rule(const ObjectModel& om, const Rule& rule) { CompiledRule compiled(om, rule); }

// (subject, resource) pairs satisfying the rule's types, conditions and
// constraint, in (subject id, resource id) order.
inline std::vector<std::pair<ObjectId, ObjectId>> rule_pairs(const ObjectModel& om, const CompiledRule& rule) {
  std::vector<ObjectId> subjects, resources;
  for (ObjectId s : om.instances(rule.subject_type))
    if (rule.subject_ok(om, s)) subjects.push_back(s);
  for (ObjectId r : om.instances(rule.resource_type))
    if (rule.resource_ok(om, r)) resources.push_back(r);
  std::vector<std::pair<ObjectId, ObjectId>> out;
  if (subjects.empty() || resources.empty()) return out;
  // Navigate each constraint path once per object.
  std::vector<std::vector<Value>> sv(rule.constraint.size()), rv(rule.constraint.size());
  for (std::size_t k = 0; k < rule.constraint.size(); ++k) {
    for (ObjectId s : subjects) sv[k].push_back(nav(om, s, rule.constraint[k].subject_path));
    for (ObjectId r : resources) rv[k].push_back(nav(om, r, rule.constraint[k].resource_path));
  }
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    for (std::size_t j = 0; j < resources.size(); ++j) {
      bool ok = true;
      for (std::size_t k = 0; k < rule.constraint.size() && ok; ++k)
        ok = constraint_holds(rule.constraint[k].op, sv[k][i], rv[k][j]);
      if (ok) out.emplace_back(subjects[i], resources[j]);
    }
  }
  return out;
}

inline AuthorizationSet rule_meaning(const ObjectModel& om, const Rule& rule) {
  CompiledRule compiled(om, rule);
  AuthorizationSet out;
  for (const auto& [s, r] : rule_pairs(om, compiled))
    for (const auto& a : compiled.actions) out.insert(SRATuple{s, r, a});
  return out;
}

inline AuthorizationSet policy_meaning(const ObjectModel& om, const std::vector<Rule>& rules) {
  AuthorizationSet out;
  for (const auto& rule : rules) out.merge(rule_meaning(om, rule));
  return out;
}

inline AuthorizationSet policy_meaning(const ReBACPolicy& p) { return policy_meaning(*p.object_model, p.rules); }

// Does any rule permit ⟨s, r, a⟩?
inline bool permits(const ObjectModel& om, const std::vector<Rule>& rules, ObjectId s, ObjectId r,
                    const std::string& action) {
  for (const auto& rule : rules)
    if (CompiledRule(om, rule).permits(om, s, r, action)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Weighted structural complexity (all weights 1).

inline int wsc(const AtomicCondition& c) {
  const int val = c.op == ConditionOp::kContains ? 1 : static_cast<int>(c.values.size());
  return static_cast<int>(c.path.size()) + val;
}

inline int wsc(const AtomicConstraint& c) {
  return static_cast<int>(c.subject_path.size() + c.resource_path.size());
}

inline int wsc(const Rule& r) {
  int total = static_cast<int>(r.actions.size());
  for (const auto& c : r.subject_condition) total += wsc(c);
  for (const auto& c : r.resource_condition) total += wsc(c);
  for (const auto& c : r.constraint) total += wsc(c);
  return total;
}

inline int wsc(const std::vector<Rule>& rules) {
  int total = 0;
  for (const auto& r : rules) total += wsc(r);
  return total;
}

inline int wsc(const ReBACPolicy& p) { return wsc(p.rules); }

inline int atom_count(const Rule& r) {
  return static_cast<int>(r.subject_condition.size() + r.resource_condition.size() + r.constraint.size());
}

// 0, 1 or 2: how many of the two conditions use the bare "id" path.
inline int id_usage(const Rule& r) {
  auto uses = [](const std::vector<AtomicCondition>& cs) {
    return std::any_of(cs.begin(), cs.end(), [](const AtomicCondition& c) { return c.path == Path{"id"}; });
  };
  return (uses(r.subject_condition) ? 1 : 0) + (uses(r.resource_condition) ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Consistency.

struct ConsistencyResult {
  bool consistent = false;
  std::string reason;                 // empty when only the meanings differ
  std::vector<SRATuple> over_granted;  // in ⟦π⟧ but not AU
  std::vector<SRATuple> under_granted; // in AU but not ⟦π⟧
};

inline ConsistencyResult check_consistency(const ReBACPolicy& pi, const ACLPolicy& acl) {
  ConsistencyResult out;
  if (pi.object_model != acl.object_model) {
    if (!pi.object_model || !acl.object_model || !(pi.class_model() == acl.class_model())) {
      out.reason = "class models differ";
      return out;
    }
    if (pi.object_model->to_raw() != acl.object_model->to_raw()) {
      out.reason = "object models differ";
      return out;
    }
  }
  auto a1 = pi.actions, a2 = acl.actions;
  sort_unique(a1);
  sort_unique(a2);
  if (a1 != a2) {
    out.reason = "action sets differ";
    return out;
  }
  const auto meaning = policy_meaning(*acl.object_model, pi.rules);
  std::set_difference(meaning.begin(), meaning.end(), acl.authorizations.begin(), acl.authorizations.end(),
                      std::back_inserter(out.over_granted));
  std::set_difference(acl.authorizations.begin(), acl.authorizations.end(), meaning.begin(), meaning.end(),
                      std::back_inserter(out.under_granted));
  out.consistent = out.over_granted.empty() && out.under_granted.empty();
  return out;
}

inline bool is_consistent(const ReBACPolicy& pi, const ACLPolicy& acl) { return check_consistency(pi, acl).consistent; }

}  // namespace rebac
