#pragma once

// JSON documents for class models, object models, rules, ACLs, mining
// reports, similarity reports and run configuration. Output is canonical:
// sorted keys, sorted collections, two-space indent, trailing newline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rebac/metrics.hpp"
#include "rebac/miner.hpp"
#include "rebac/model.hpp"
#include "rebac/policy.hpp"
#include "rebac/synthetic.hpp"

namespace rebac {

using Json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// Writes to a temporary file next to `path`, then renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string() + ": cannot write file");
    out << content;
    if (!out.flush()) throw IoError(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

inline const Json& member(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw IoError(where + ": missing '" + key + "'");
  return j.at(key);
}

inline void check_header(const Json& j, const std::string& schema) {
  if (!j.is_object()) throw IoError(schema + ": document must be an object");
  if (j.value("schema", std::string()) != schema)
    throw IoError("expected schema '" + schema + "', got '" + j.value("schema", std::string("<none>")) + "'");
  if (j.value("version", 0) != kSchemaVersion)
    throw IoError(schema + ": unsupported version " + std::to_string(j.value("version", 0)));
}

inline Json header(const std::string& schema) { return Json{{"schema", schema}, {"version", kSchemaVersion}}; }

template <typename T>
T get(const Json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const Json::exception& e) {
    throw IoError(where + ": " + e.what());
  }
}

}  // namespace detail

// --- class model --------------------------------------------------------

inline Json to_json(const ClassModel& cm) {
  Json j = detail::header("rebac-class-model");
  Json classes = Json::array();
  for (const auto& d : cm.decls()) {
    Json fields = Json::array();
    for (const auto& f : d.fields)
      fields.push_back({{"name", f.name}, {"type", f.type}, {"multiplicity", to_string(f.multiplicity)}});
    classes.push_back({{"name", d.name}, {"fields", fields}});
  }
  j["classes"] = classes;
  return j;
}

inline std::shared_ptr<const ClassModel> class_model_from_json(const Json& j) {
  detail::check_header(j, "rebac-class-model");
  std::vector<ClassDecl> decls;
  for (const auto& c : detail::member(j, "classes", "class model")) {
    ClassDecl d;
    d.name = detail::get<std::string>(detail::member(c, "name", "class"), "class name");
    for (const auto& f : c.value("fields", Json::array())) {
      FieldDecl fd;
      const std::string where = d.name + " field";
      fd.name = detail::get<std::string>(detail::member(f, "name", where), where);
      fd.type = detail::get<std::string>(detail::member(f, "type", where), where);
      const auto m = f.value("multiplicity", std::string("one"));
      auto mult = parse_multiplicity(m);
      if (!mult) throw IoError(d.name + "." + fd.name + ": bad multiplicity '" + m + "'");
      fd.multiplicity = *mult;
      d.fields.push_back(std::move(fd));
    }
    decls.push_back(std::move(d));
  }
  try {
    return std::make_shared<const ClassModel>(std::move(decls));
  } catch (const ModelError& e) {
    throw IoError(std::string("class model: ") + e.what());
  }
}

// --- object model -------------------------------------------------------

inline Json to_json(const ObjectModel& om) {
  Json j = detail::header("rebac-object-model");
  Json objects = Json::array();
  for (const auto& o : om.to_raw()) {
    Json fields = Json::object();
    for (const auto& [name, v] : o.fields) {
      if (std::holds_alternative<bool>(v)) fields[name] = std::get<bool>(v);
      else if (std::holds_alternative<std::string>(v)) fields[name] = std::get<std::string>(v);
      else if (std::holds_alternative<std::vector<std::string>>(v)) fields[name] = std::get<std::vector<std::string>>(v);
      else fields[name] = nullptr;
    }
    objects.push_back({{"id", o.id}, {"type", o.type}, {"fields", fields}});
  }
  j["objects"] = objects;
  return j;
}

inline std::shared_ptr<const ObjectModel> object_model_from_json(const Json& j, std::shared_ptr<const ClassModel> cm) {
  detail::check_header(j, "rebac-object-model");
  std::vector<RawObject> raw;
  for (const auto& o : detail::member(j, "objects", "object model")) {
    RawObject r;
    r.id = detail::get<std::string>(detail::member(o, "id", "object"), "object id");
    r.type = detail::get<std::string>(detail::member(o, "type", "object " + r.id), "object type");
    const Json fields = o.value("fields", Json::object());
    for (const auto& [name, v] : fields.items()) {
      if (v.is_boolean()) r.fields[name] = v.get<bool>();
      else if (v.is_string()) r.fields[name] = v.get<std::string>();
      else if (v.is_array()) r.fields[name] = detail::get<std::vector<std::string>>(v, r.id + "." + name);
      else if (v.is_null()) r.fields[name] = std::monostate{};
      else throw IoError("object " + r.id + " field " + name + ": unsupported value");
    }
    raw.push_back(std::move(r));
  }
  try {
    return std::make_shared<const ObjectModel>(std::move(cm), std::move(raw));
  } catch (const ModelError& e) {
    throw IoError(std::string("object model: ") + e.what());
  }
}

// --- rules --------------------------------------------------------------

inline Json constant_json(const Constant& c) {
  if (std::holds_alternative<bool>(c)) return std::get<bool>(c);
  return std::get<std::string>(c);
}

inline Json to_json(const AtomicCondition& c) {
  Json values = Json::array();
  for (const auto& v : c.values) values.push_back(constant_json(v));
  return {{"path", c.path}, {"op", to_string(c.op)}, {"values", values}};
}

inline Json to_json(const AtomicConstraint& c) {
  return {{"subjectPath", c.subject_path}, {"op", to_string(c.op)}, {"resourcePath", c.resource_path}};
}

inline Json to_json(const Rule& r0) {
  const Rule r = canonicalize(r0);
  Json sc = Json::array(), rc = Json::array(), con = Json::array();
  for (const auto& c : r.subject_condition) sc.push_back(to_json(c));
  for (const auto& c : r.resource_condition) rc.push_back(to_json(c));
  for (const auto& c : r.constraint) con.push_back(to_json(c));
  return {{"subjectType", r.subject_type}, {"subjectCondition", sc}, {"resourceType", r.resource_type},
          {"resourceCondition", rc},      {"constraint", con},       {"actions", r.actions}};
}

inline Json rules_to_json(std::vector<Rule> rules) {
  for (auto& r : rules) r = canonicalize(std::move(r));
  std::sort(rules.begin(), rules.end());
  Json j = detail::header("rebac-rules");
  Json arr = Json::array();
  for (const auto& r : rules) arr.push_back(to_json(r));
  j["rules"] = arr;
  return j;
}

inline AtomicCondition condition_from_json(const Json& j) {
  AtomicCondition c;
  c.path = detail::get<Path>(detail::member(j, "path", "condition"), "condition path");
  const auto op = detail::get<std::string>(detail::member(j, "op", "condition"), "condition op");
  auto p = parse_condition_op(op);
  if (!p) throw IoError("condition: unknown operator '" + op + "'");
  c.op = *p;
  for (const auto& v : detail::member(j, "values", "condition")) {
    if (v.is_boolean()) c.values.emplace_back(v.get<bool>());
    else if (v.is_string()) c.values.emplace_back(v.get<std::string>());
    else throw IoError("condition: constants must be Booleans or strings");
  }
  return canonicalize(std::move(c));
}

inline AtomicConstraint constraint_from_json(const Json& j) {
  AtomicConstraint c;
  c.subject_path = detail::get<Path>(detail::member(j, "subjectPath", "constraint"), "constraint subjectPath");
  c.resource_path = detail::get<Path>(detail::member(j, "resourcePath", "constraint"), "constraint resourcePath");
  const auto op = detail::get<std::string>(detail::member(j, "op", "constraint"), "constraint op");
  auto p = parse_constraint_op(op);
  if (!p) throw IoError("constraint: unknown operator '" + op + "'");
  c.op = *p;
  return c;
}

inline Rule rule_from_json(const Json& j) {
  Rule r;
  r.subject_type = detail::get<std::string>(detail::member(j, "subjectType", "rule"), "subjectType");
  r.resource_type = detail::get<std::string>(detail::member(j, "resourceType", "rule"), "resourceType");
  for (const auto& c : j.value("subjectCondition", Json::array())) r.subject_condition.push_back(condition_from_json(c));
  for (const auto& c : j.value("resourceCondition", Json::array())) r.resource_condition.push_back(condition_from_json(c));
  for (const auto& c : j.value("constraint", Json::array())) r.constraint.push_back(constraint_from_json(c));
  r.actions = detail::get<std::vector<std::string>>(detail::member(j, "actions", "rule"), "actions");
  return canonicalize(std::move(r));
}

inline std::vector<Rule> rules_from_json(const Json& j) {
  detail::check_header(j, "rebac-rules");
  std::vector<Rule> out;
  for (const auto& r : detail::member(j, "rules", "rules")) out.push_back(rule_from_json(r));
  return out;
}

// Rules checked against an object model.
inline std::vector<Rule> validated_rules(const ObjectModel& om, std::vector<Rule> rules) {
  for (const auto& r : rules) {
    try {
      validate_rule(om, r);
    } catch (const std::exception& e) {
      throw IoError("rule " + to_string(r) + ": " + e.what());
    }
  }
  return rules;
}

// --- ACL ----------------------------------------------------------------

inline Json to_json(const ACLPolicy& acl) {
  Json j = detail::header("rebac-acl");
  j["actions"] = acl.actions;
  Json au = Json::array();
  const auto& om = *acl.object_model;
  for (const auto& t : acl.authorizations) au.push_back({om.id(t.subject), om.id(t.resource), t.action});
  j["authorizations"] = au;
  return j;
}

inline ACLPolicy acl_from_json(const Json& j, std::shared_ptr<const ObjectModel> om) {
  detail::check_header(j, "rebac-acl");
  ACLPolicy acl;
  acl.actions = detail::get<std::vector<std::string>>(detail::member(j, "actions", "acl"), "acl actions");
  sort_unique(acl.actions);
  for (const auto& t : detail::member(j, "authorizations", "acl")) {
    if (!t.is_array() || t.size() != 3) throw IoError("acl: each authorization is [subject, resource, action]");
    const auto s = detail::get<std::string>(t[0], "acl subject");
    const auto r = detail::get<std::string>(t[1], "acl resource");
    const auto a = detail::get<std::string>(t[2], "acl action");
    auto so = om->find(s), ro = om->find(r);
    if (!so) throw IoError("acl: unknown subject '" + s + "'");
    if (!ro) throw IoError("acl: unknown resource '" + r + "'");
    if (!std::binary_search(acl.actions.begin(), acl.actions.end(), a))
      throw IoError("acl: action '" + a + "' is not listed in actions");
    acl.authorizations.insert({*so, *ro, a});
  }
  acl.object_model = std::move(om);
  return acl;
}

// --- bundles on disk ----------------------------------------------------

struct BundlePaths {
  std::filesystem::path class_model, object_model, rules, acl;

  static BundlePaths in(const std::filesystem::path& dir) {
    return {dir / "class_model.json", dir / "object_model.json", dir / "rules.json", dir / "acl.json"};
  }
};

struct LoadedModels {
  std::shared_ptr<const ClassModel> class_model;
  std::shared_ptr<const ObjectModel> object_model;
};

inline LoadedModels load_models(const std::filesystem::path& cm_path, const std::filesystem::path& om_path) {
  LoadedModels m;
  try {
    m.class_model = class_model_from_json(read_json_file(cm_path));
  } catch (const IoError& e) {
    throw IoError(cm_path.string() + ": " + e.what());
  }
  try {
    m.object_model = object_model_from_json(read_json_file(om_path), m.class_model);
  } catch (const IoError& e) {
    throw IoError(om_path.string() + ": " + e.what());
  }
  return m;
}

inline std::vector<Rule> load_rules(const std::filesystem::path& path, const ObjectModel& om) {
  try {
    return validated_rules(om, rules_from_json(read_json_file(path)));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline ACLPolicy load_acl(const std::filesystem::path& path, std::shared_ptr<const ObjectModel> om) {
  try {
    return acl_from_json(read_json_file(path), std::move(om));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_bundle(const std::filesystem::path& dir, const GeneratedBundle& b) {
  const auto p = BundlePaths::in(dir);
  write_file_atomic(p.class_model, dump(to_json(*b.class_model)));
  write_file_atomic(p.object_model, dump(to_json(*b.object_model)));
  write_file_atomic(p.rules, dump(rules_to_json(b.rules)));
  write_file_atomic(p.acl, dump(to_json(b.acl)));
}

// --- reports ------------------------------------------------------------

inline Json to_json(const SimilarityReport& r) {
  Json j = detail::header("rebac-similarity");
  j["synSim"] = r.syn_sim;
  j["perRuleSemSim"] = r.per_rule_sem_sim;
  j["wscMined"] = r.wsc_mined;
  j["wscInput"] = r.wsc_input;
  j["wscRatio"] = r.wsc_ratio;
  return j;
}

inline Json to_json(const MiningReport& r, bool include_timing = false) {
  Json j = detail::header("rebac-mining-report");
  j["algorithm"] = to_string(r.algorithm);
  j["consistent"] = r.consistent;
  if (!r.consistency_reason.empty()) j["consistencyDiagnostic"] = r.consistency_reason;
  j["rules"] = r.policy.rules.size();
  j["wsc"] = wsc(r.policy.rules);
  j["searches"] = r.searches;
  j["fallbackRules"] = r.fallback_rules;
  j["seaFallback"] = r.sea_fallback;
  j["idRules"] = r.id_rules;
  j["warnings"] = r.warnings;
  Json iters = Json::array();
  for (const auto& it : r.iterations) {
    Json triples = Json::array();
    for (const auto& t : it.triples) {
      triples.push_back({{"triple", t.triple},
                         {"positives", t.positives},
                         {"vectors", t.vectors},
                         {"features", t.features},
                         {"keptFeatures", t.kept_features},
                         {"usefulFeatures", t.useful},
                         {"nnAccuracy", t.accuracy},
                         {"nnIterations", t.nn_iterations},
                         {"nnConverged", t.converged},
                         {"unlearnableVectors", t.unlearnable},
                         {"ruleAdded", t.rule_added}});
    }
    iters.push_back({{"iteration", it.iteration},
                     {"uncoveredBefore", it.uncovered_before},
                     {"uncoveredAfter", it.uncovered_after},
                     {"rulesAdded", it.rules_added},
                     {"triples", triples}});
  }
  j["iterations"] = iters;
  j["improvement"] = {{"rounds", r.improvement.rounds},
                      {"replaced", r.improvement.replaced},
                      {"atomsDropped", r.improvement.atoms_dropped},
                      {"actionsDropped", r.improvement.actions_dropped},
                      {"merged", r.improvement.merged},
                      {"redundantRemoved", r.improvement.redundant_removed},
                      {"notes", r.improvement.notes}};
  if (include_timing) j["elapsedSeconds"] = r.elapsed_seconds;
  return j;
}

// --- configuration ------------------------------------------------------

struct RunConfig {
  MinerConfig miner;
  SynthConfig synth;
  std::uint64_t seed = 0;
};

namespace detail {

inline void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw IoError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known |= k == key;
    if (!known) throw IoError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = get<T>(j.at(key), where + "." + key);
}

}  // namespace detail

inline TypeFrequencies type_frequencies_from_json(const Json& j, const std::string& where = "typeFrequencies") {
  if (!j.is_object()) throw IoError(where + ": expected an object of type name -> weight");
  TypeFrequencies f{};
  for (const auto& [k, v] : j.items()) {
    auto t = parse_atom_type(k);
    if (!t) throw IoError(where + ": unknown condition/constraint type '" + k + "'");
    f[static_cast<std::size_t>(*t)] = detail::get<double>(v, where + "." + k);
  }
  return f;
}

inline Json to_json(const TypeFrequencies& f) {
  Json j = Json::object();
  for (std::size_t i = 0; i < f.size(); ++i) j[atom_type_names()[i]] = f[i];
  return j;
}

inline TypeFrequencies load_type_frequencies(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  try {
    detail::check_header(j, "rebac-type-frequencies");
    detail::reject_unknown(j, {"schema", "version", "frequencies"}, "type frequencies");
    return type_frequencies_from_json(detail::member(j, "frequencies", "type frequencies"));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// Applies a configuration document on top of `cfg`. Unknown keys are
// rejected at every level.
inline void apply_config(const Json& j, RunConfig& cfg) {
  using detail::read;
  detail::reject_unknown(j, {"seed", "algorithm", "fu", "maxOuterIterations", "candidatesPerTriple", "threads",
                             "train", "search", "limits", "language", "synth"},
                         "config");
  read(j, "seed", cfg.seed, "config");
  cfg.miner.seed = cfg.seed;
  cfg.synth.seed = cfg.seed;
  auto& m = cfg.miner;
  if (j.contains("algorithm")) {
    const auto s = detail::get<std::string>(j["algorithm"], "config.algorithm");
    auto a = parse_algorithm(s);
    if (!a) throw IoError("config.algorithm: unknown algorithm '" + s + "'");
    m.algorithm = *a;
  }
  if (j.contains("fu")) m.fu = detail::get<double>(j["fu"], "config.fu");
  read(j, "maxOuterIterations", m.max_outer_iterations, "config");
  read(j, "candidatesPerTriple", m.candidates_per_triple, "config");
  read(j, "threads", m.threads, "config");
  if (j.contains("train")) {
    const auto& t = j["train"];
    detail::reject_unknown(t, {"hidden", "nTr", "rho", "eps"}, "config.train");
    read(t, "hidden", m.train.hidden, "config.train");
    read(t, "nTr", m.train.n_tr, "config.train");
    read(t, "rho", m.train.rho, "config.train");
    read(t, "eps", m.train.eps, "config.train");
  }
  if (j.contains("search")) {
    const auto& s = j["search"];
    detail::reject_unknown(s, {"population", "generations", "improvementGenerations", "tournament",
                               "operatorWeights", "randomFraction", "seedAtomBias", "maxList", "stallGenerations"},
                           "config.search");
    auto& c = m.search;
    read(s, "population", c.population, "config.search");
    read(s, "generations", c.generations, "config.search");
    read(s, "improvementGenerations", c.improvement_generations, "config.search");
    read(s, "tournament", c.tournament, "config.search");
    read(s, "randomFraction", c.random_fraction, "config.search");
    read(s, "seedAtomBias", c.seed_atom_bias, "config.search");
    read(s, "maxList", c.max_list, "config.search");
    read(s, "stallGenerations", c.stall_generations, "config.search");
    if (s.contains("operatorWeights")) {
      const auto& w = s["operatorWeights"];
      detail::reject_unknown(w, {"single", "double", "action", "simplify", "crossover"},
                             "config.search.operatorWeights");
      const char* names[5] = {"single", "double", "action", "simplify", "crossover"};
      for (int k = 0; k < 5; ++k) read(w, names[k], c.operator_weights[k], "config.search.operatorWeights");
    }
  }
  if (j.contains("limits")) {
    const auto& l = j["limits"];
    detail::reject_unknown(l, {"MSPL", "MRPL", "SPED", "RPED", "MTPL", "MCSE"}, "config.limits");
    read(l, "MSPL", m.limits.mspl, "config.limits");
    read(l, "MRPL", m.limits.mrpl, "config.limits");
    read(l, "SPED", m.limits.sped, "config.limits");
    read(l, "RPED", m.limits.rped, "config.limits");
    read(l, "MTPL", m.limits.mtpl, "config.limits");
    read(l, "MCSE", m.limits.mcse, "config.limits");
  }
  if (j.contains("language")) {
    const auto& l = j["language"];
    detail::reject_unknown(l, {"subseteq", "seteq"}, "config.language");
    read(l, "subseteq", m.language.subseteq, "config.language");
    read(l, "seteq", m.language.seteq, "config.language");
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    detail::reject_unknown(s, {"nSub", "nR", "nActions", "typeFrequencies"}, "config.synth");
    read(s, "nSub", cfg.synth.n_sub, "config.synth");
    read(s, "nR", cfg.synth.n_r, "config.synth");
    read(s, "nActions", cfg.synth.n_actions, "config.synth");
    if (s.contains("typeFrequencies"))
      cfg.synth.type_frequencies = type_frequencies_from_json(s["typeFrequencies"], "config.synth.typeFrequencies");
  }
  const auto& l = m.limits;
  if (l.mspl < 0 || l.mrpl < 0 || l.sped < 0 || l.rped < 0 || l.mtpl < 0 || l.mcse < 0)
    throw IoError("config.limits: limits must be non-negative");
  if (m.train.hidden < 1 || m.train.n_tr < 1) throw IoError("config.train: hidden and nTr must be >= 1");
  if (m.search.population < 2) throw IoError("config.search: population must be >= 2");
  double total = 0;
  for (double w : m.search.operator_weights) {
    if (w < 0) throw IoError("config.search.operatorWeights: weights must be non-negative");
    total += w;
  }
  if (total <= 0) throw IoError("config.search.operatorWeights: weights must not all be zero");
  if (m.fu && !(*m.fu > 0 && *m.fu <= 1)) throw IoError("config.fu: must be in (0, 1]");
}

inline Json to_json(const RunConfig& cfg) {
  const auto& m = cfg.miner;
  Json j;
  j["seed"] = cfg.seed;
  j["algorithm"] = to_string(m.algorithm);
  j["fu"] = m.effective_fu();
  j["maxOuterIterations"] = m.max_outer_iterations;
  j["candidatesPerTriple"] = m.candidates_per_triple;
  j["threads"] = m.threads;
  j["train"] = {{"hidden", m.train.hidden}, {"nTr", m.train.n_tr}, {"rho", m.train.rho}, {"eps", m.train.eps}};
  const auto& w = m.search.operator_weights;
  j["search"] = {{"population", m.search.population},
                 {"generations", m.search.generations},
                 {"improvementGenerations", m.search.improvement_generations},
                 {"tournament", m.search.tournament},
                 {"operatorWeights",
                  {{"single", w[0]}, {"double", w[1]}, {"action", w[2]}, {"simplify", w[3]}, {"crossover", w[4]}}},
                 {"randomFraction", m.search.random_fraction},
                 {"seedAtomBias", m.search.seed_atom_bias},
                 {"maxList", m.search.max_list},
                 {"stallGenerations", m.search.stall_generations}};
  j["limits"] = {{"MSPL", m.limits.mspl}, {"MRPL", m.limits.mrpl}, {"SPED", m.limits.sped},
                 {"RPED", m.limits.rped}, {"MTPL", m.limits.mtpl}, {"MCSE", m.limits.mcse}};
  j["language"] = {{"subseteq", m.language.subseteq}, {"seteq", m.language.seteq}};
  j["synth"] = {{"nSub", cfg.synth.n_sub},
                {"nR", cfg.synth.n_r},
                {"nActions", cfg.synth.n_actions},
                {"typeFrequencies", to_json(cfg.synth.type_frequencies)}};
  return j;
}

}  // namespace rebac
