#pragma once

// Class models, object models and path navigation.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace rebac {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Multiplicity : std::uint8_t { kOne, kOptional, kMany };
enum class FieldKind : std::uint8_t { kBoolean, kString, kReference };

inline const char* to_string(Multiplicity m) {
  switch (m) {
    case Multiplicity::kOne: return "one";
    case Multiplicity::kOptional: return "optional";
    case Multiplicity::kMany: return "many";
  }
  return "?";
}

inline std::optional<Multiplicity> parse_multiplicity(const std::string& s) {
  if (s == "one" || s == "1") return Multiplicity::kOne;
  if (s == "optional" || s == "?") return Multiplicity::kOptional;
  if (s == "many" || s == "*") return Multiplicity::kMany;
  return std::nullopt;
}

using ClassId = std::int32_t;
using FieldId = std::int32_t;
using ObjectId = std::int32_t;

inline constexpr FieldId kIdField = 0;
inline constexpr ObjectId kNoObject = -1;

// Field as written in a class model file. `type` is "Boolean", "String" or a
// class name.
struct FieldDecl {
  std::string name;
  std::string type;
  Multiplicity multiplicity = Multiplicity::kOne;

  friend bool operator==(const FieldDecl&, const FieldDecl&) = default;
};

struct ClassDecl {
  std::string name;
  std::vector<FieldDecl> fields;  // without the implicit "id"

  friend bool operator==(const ClassDecl&, const ClassDecl&) = default;
};

struct FieldInfo {
  std::string name;
  FieldKind kind = FieldKind::kBoolean;
  ClassId target = -1;  // reference fields only
  Multiplicity multiplicity = Multiplicity::kOne;
};

// Immutable, validated class model. Every class gets the implicit field "id"
// (String, one) at FieldId 0.
class ClassModel {
 public:
  ClassModel() = default;

  explicit ClassModel(std::vector<ClassDecl> decls) : decls_(std::move(decls)) {
    std::sort(decls_.begin(), decls_.end(),
              [](const ClassDecl& a, const ClassDecl& b) { return a.name < b.name; });
    for (std::size_t i = 0; i < decls_.size(); ++i) {
      if (decls_[i].name.empty()) throw ModelError("class with empty name");
      if (decls_[i].name == "Boolean" || decls_[i].name == "String")
        throw ModelError("class name '" + decls_[i].name + "' is reserved");
      if (!index_.emplace(decls_[i].name, static_cast<ClassId>(i)).second)
        throw ModelError("duplicate class '" + decls_[i].name + "'");
    }
    fields_.resize(decls_.size());
    field_index_.resize(decls_.size());
    for (std::size_t c = 0; c < decls_.size(); ++c) {
      auto& infos = fields_[c];
      infos.push_back({"id", FieldKind::kString, -1, Multiplicity::kOne});
      field_index_[c].emplace("id", kIdField);
      for (const auto& f : decls_[c].fields) {
        const std::string where = decls_[c].name + "." + f.name;
        if (f.name.empty()) throw ModelError("field with empty name in " + decls_[c].name);
        if (f.name == "id") throw ModelError(where + ": field 'id' is implicit and may not be redeclared");
        FieldInfo info{f.name, FieldKind::kBoolean, -1, f.multiplicity};
        if (f.type == "Boolean") {
          if (f.multiplicity != Multiplicity::kOne)
            throw ModelError(where + ": Boolean fields must have multiplicity one");
        } else if (f.type == "String") {
          throw ModelError(where + ": only the implicit 'id' field may have type String");
        } else {
          auto it = index_.find(f.type);
          if (it == index_.end()) throw ModelError(where + ": unknown class '" + f.type + "'");
          info.kind = FieldKind::kReference;
          info.target = it->second;
        }
        const auto fid = static_cast<FieldId>(infos.size());
        if (!field_index_[c].emplace(f.name, fid).second)
          throw ModelError(where + ": duplicate field");
        infos.push_back(std::move(info));
      }
    }
  }

  std::size_t size() const { return decls_.size(); }
  const std::vector<ClassDecl>& decls() const { return decls_; }
  const std::string& name(ClassId c) const { return decls_.at(static_cast<std::size_t>(c)).name; }

  std::optional<ClassId> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  ClassId require(const std::string& name) const {
    auto c = find(name);
    if (!c) throw LookupError("unknown class '" + name + "'");
    return *c;
  }

  const std::vector<FieldInfo>& fields(ClassId c) const { return fields_.at(static_cast<std::size_t>(c)); }
  const FieldInfo& field(ClassId c, FieldId f) const { return fields(c).at(static_cast<std::size_t>(f)); }

  std::optional<FieldId> find_field(ClassId c, const std::string& name) const {
    const auto& m = field_index_.at(static_cast<std::size_t>(c));
    auto it = m.find(name);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const ClassModel& a, const ClassModel& b) { return a.decls_ == b.decls_; }

 private:
  std::vector<ClassDecl> decls_;
  std::unordered_map<std::string, ClassId> index_;
  std::vector<std::vector<FieldInfo>> fields_;
  std::vector<std::unordered_map<std::string, FieldId>> field_index_;
};

// Field value stored on an object: ⊥, Boolean, single reference, or a set of
// references (sorted, unique).
using FieldValue = std::variant<std::monostate, bool, ObjectId, std::vector<ObjectId>>;

// Field value as it appears in an object model file, before reference
// resolution.
using RawValue = std::variant<std::monostate, bool, std::string, std::vector<std::string>>;

struct RawObject {
  std::string id;
  std::string type;
  std::map<std::string, RawValue> fields;

  friend bool operator==(const RawObject&, const RawObject&) = default;
};

struct Object {
  std::string id;
  ClassId type = -1;
  std::vector<FieldValue> values;  // indexed by FieldId; slot 0 (id) unused
};

// Immutable object model. ObjectIds are dense and assigned in lexicographic
// order of the id strings, so ordering by ObjectId is ordering by id.
class ObjectModel {
 public:
  ObjectModel(std::shared_ptr<const ClassModel> cm, std::vector<RawObject> raw) : cm_(std::move(cm)) {
    if (!cm_) throw ModelError("object model needs a class model");
    std::sort(raw.begin(), raw.end(), [](const RawObject& a, const RawObject& b) { return a.id < b.id; });
    objects_.reserve(raw.size());
    by_class_.resize(cm_->size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].id.empty()) throw ModelError("object with empty id");
      if (!index_.emplace(raw[i].id, static_cast<ObjectId>(i)).second)
        throw ModelError("duplicate object id '" + raw[i].id + "'");
      auto c = cm_->find(raw[i].type);
      if (!c) throw ModelError("object '" + raw[i].id + "' has undeclared type '" + raw[i].type + "'");
      objects_.push_back(Object{raw[i].id, *c, {}});
      by_class_[static_cast<std::size_t>(*c)].push_back(static_cast<ObjectId>(i));
    }
    for (std::size_t i = 0; i < raw.size(); ++i) resolve(objects_[i], raw[i]);
  }

  const ClassModel& class_model() const { return *cm_; }
  const std::shared_ptr<const ClassModel>& class_model_ptr() const { return cm_; }

  std::size_t size() const { return objects_.size(); }
  const Object& object(ObjectId o) const { return objects_.at(static_cast<std::size_t>(o)); }
  const std::vector<Object>& objects() const { return objects_; }
  const std::string& id(ObjectId o) const { return object(o).id; }
  ClassId type(ObjectId o) const { return object(o).type; }

  std::optional<ObjectId> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  ObjectId require(const std::string& id) const {
    auto o = find(id);
    if (!o) throw LookupError("unknown object '" + id + "'");
    return *o;
  }

  // Instances of a class, in id order.
  const std::vector<ObjectId>& instances(ClassId c) const { return by_class_.at(static_cast<std::size_t>(c)); }

  // Round-trips back to the file representation.
  std::vector<RawObject> to_raw() const {
    std::vector<RawObject> out;
    out.reserve(objects_.size());
    for (const auto& o : objects_) {
      RawObject r{o.id, cm_->name(o.type), {}};
      const auto& infos = cm_->fields(o.type);
      for (std::size_t f = 1; f < infos.size(); ++f) {
        const auto& v = o.values[f];
        RawValue raw;
        if (std::holds_alternative<bool>(v)) {
          raw = std::get<bool>(v);
        } else if (std::holds_alternative<ObjectId>(v)) {
          raw = id(std::get<ObjectId>(v));
        } else if (std::holds_alternative<std::vector<ObjectId>>(v)) {
          std::vector<std::string> ids;
          for (ObjectId x : std::get<std::vector<ObjectId>>(v)) ids.push_back(id(x));
          raw = std::move(ids);
        }
        r.fields.emplace(infos[f].name, std::move(raw));
      }
      out.push_back(std::move(r));
    }
    return out;
  }

 private:
  void resolve(Object& obj, const RawObject& raw) {
    const auto& infos = cm_->fields(obj.type);
    obj.values.assign(infos.size(), std::monostate{});
    for (const auto& [name, value] : raw.fields) {
      auto f = cm_->find_field(obj.type, name);
      if (!f) throw ModelError("object '" + obj.id + "': class " + cm_->name(obj.type) + " has no field '" + name + "'");
      if (*f == kIdField) throw ModelError("object '" + obj.id + "': 'id' is not a settable field");
    }
    for (std::size_t f = 1; f < infos.size(); ++f) {
      const auto& info = infos[f];
      const std::string where = "object '" + obj.id + "' field '" + info.name + "'";
      auto it = raw.fields.find(info.name);
      const RawValue none{};
      const RawValue& v = it == raw.fields.end() ? none : it->second;
      if (info.kind == FieldKind::kBoolean) {
        if (!std::holds_alternative<bool>(v)) throw ModelError(where + ": expected a Boolean");
        obj.values[f] = std::get<bool>(v);
        continue;
      }
      auto ref = [&](const std::string& id) {
        auto o = find(id);
        if (!o) throw ModelError(where + ": unknown object '" + id + "'");
        if (objects_[static_cast<std::size_t>(*o)].type != info.target)
          throw ModelError(where + ": '" + id + "' is not a " + cm_->name(info.target));
        return *o;
      };
      switch (info.multiplicity) {
        case Multiplicity::kOne:
          if (!std::holds_alternative<std::string>(v)) throw ModelError(where + ": expected exactly one reference");
          obj.values[f] = ref(std::get<std::string>(v));
          break;
        case Multiplicity::kOptional:
          if (std::holds_alternative<std::monostate>(v)) break;
          if (!std::holds_alternative<std::string>(v)) throw ModelError(where + ": expected a reference or null");
          obj.values[f] = ref(std::get<std::string>(v));
          break;
        case Multiplicity::kMany: {
          std::vector<ObjectId> ids;
          if (std::holds_alternative<std::vector<std::string>>(v)) {
            for (const auto& s : std::get<std::vector<std::string>>(v)) ids.push_back(ref(s));
          } else if (!std::holds_alternative<std::monostate>(v)) {
            throw ModelError(where + ": expected a list of references");
          }
          std::sort(ids.begin(), ids.end());
          ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
          obj.values[f] = std::move(ids);
          break;
        }
      }
    }
  }

  std::shared_ptr<const ClassModel> cm_;
  std::vector<Object> objects_;
  std::unordered_map<std::string, ObjectId> index_;
  std::vector<std::vector<ObjectId>> by_class_;
};

using Path = std::vector<std::string>;

inline std::string path_string(const Path& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += '.';
    s += p[i];
  }
  return s;
}

// A path resolved against a start class.
struct CompiledPath {
  ClassId start = -1;
  std::vector<FieldId> steps;
  FieldKind leaf_kind = FieldKind::kReference;  // kReference for the empty path
  ClassId leaf_class = -1;                      // reference leaves only
  Multiplicity multiplicity = Multiplicity::kOne;

  std::size_t length() const { return steps.size(); }
  bool single_valued() const { return multiplicity != Multiplicity::kMany; }
};

inline CompiledPath compile_path(const ClassModel& cm, ClassId start, const Path& path) {
  CompiledPath out;
  out.start = start;
  out.leaf_class = start;
  ClassId cur = start;
  bool any_many = false, any_optional = false;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (cur < 0)
      throw TypeError("path '" + path_string(path) + "': cannot navigate past non-reference field '" + path[i - 1] + "'");
    auto f = cm.find_field(cur, path[i]);
    if (!f) throw TypeError("path '" + path_string(path) + "': class " + cm.name(cur) + " has no field '" + path[i] + "'");
    const auto& info = cm.field(cur, *f);
    out.steps.push_back(*f);
    any_many |= info.multiplicity == Multiplicity::kMany;
    any_optional |= info.multiplicity == Multiplicity::kOptional;
    out.leaf_kind = info.kind;
    out.leaf_class = info.kind == FieldKind::kReference ? info.target : -1;
    cur = out.leaf_class;
  }
  out.multiplicity = any_many ? Multiplicity::kMany : any_optional ? Multiplicity::kOptional : Multiplicity::kOne;
  return out;
}

enum class AtomKind : std::uint8_t { kBool, kString, kObject };

// Atomic value produced by navigation. String atoms only come from "id"
// leaves, so they are represented by the object whose id they are.
struct Atom {
  AtomKind kind = AtomKind::kObject;
  std::int32_t value = 0;

  friend auto operator<=>(const Atom&, const Atom&) = default;
};

// Result of nav: ⊥, one atom, or a set of atoms (sorted, unique).
struct Value {
  enum class Shape : std::uint8_t { kBottom, kSingle, kSet };
  Shape shape = Shape::kBottom;
  std::vector<Atom> atoms;

  bool bottom() const { return shape == Shape::kBottom; }
  bool single() const { return shape == Shape::kSingle; }
  bool set() const { return shape == Shape::kSet; }

  static Value of(Atom a) { return Value{Shape::kSingle, {a}}; }

  friend bool operator==(const Value&, const Value&) = default;
};

namespace detail {

inline Atom leaf_atom(const ObjectModel& om, ObjectId o, FieldId f) {
  if (f == kIdField) return {AtomKind::kString, o};
  const auto& v = om.object(o).values[static_cast<std::size_t>(f)];
  return {AtomKind::kBool, std::get<bool>(v) ? 1 : 0};
}

}  // namespace detail

// Navigates a compiled path from `o`. Sets flatten; ⊥ elements are dropped
// from sets; navigating from ⊥ gives ⊥.
inline Value nav(const ObjectModel& om, ObjectId o, const CompiledPath& path) {
  if (om.type(o) != path.start) throw TypeError("nav: object '" + om.id(o) + "' is not a " + om.class_model().name(path.start));
  const auto& cm = om.class_model();
  if (path.steps.empty()) return Value::of({AtomKind::kObject, o});

  bool is_set = false;
  std::vector<ObjectId> cur{o};
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const FieldId f = path.steps[i];
    const bool last = i + 1 == path.steps.size();
    const auto& info = cm.field(om.type(cur.empty() ? o : cur.front()), f);
    if (last && info.kind != FieldKind::kReference) {
      std::vector<Atom> atoms;
      atoms.reserve(cur.size());
      for (ObjectId x : cur) atoms.push_back(detail::leaf_atom(om, x, f));
      if (!is_set) {
        if (atoms.empty()) return {};
        return Value::of(atoms.front());
      }
      std::sort(atoms.begin(), atoms.end());
      atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
      return Value{Value::Shape::kSet, std::move(atoms)};
    }
    std::vector<ObjectId> next;
    for (ObjectId x : cur) {
      const auto& v = om.object(x).values[static_cast<std::size_t>(f)];
      if (std::holds_alternative<ObjectId>(v)) {
        next.push_back(std::get<ObjectId>(v));
      } else if (std::holds_alternative<std::vector<ObjectId>>(v)) {
        const auto& many = std::get<std::vector<ObjectId>>(v);
        next.insert(next.end(), many.begin(), many.end());
      }
    }
    if (info.multiplicity == Multiplicity::kMany) is_set = true;
    if (is_set) {
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
    } else if (next.empty()) {
      return {};  // ⊥ through an optional field
    }
    cur = std::move(next);
    if (cur.empty()) break;
  }
  if (!is_set) return Value::of({AtomKind::kObject, cur.front()});
  std::vector<Atom> atoms;
  atoms.reserve(cur.size());
  for (ObjectId x : cur) atoms.push_back({AtomKind::kObject, x});
  return Value{Value::Shape::kSet, std::move(atoms)};
}

inline Value nav(const ObjectModel& om, ObjectId o, const Path& path) {
  return nav(om, o, compile_path(om.class_model(), om.type(o), path));
}

inline Value nav(const ObjectModel& om, const std::string& object_id, const Path& path) {
  return nav(om, om.require(object_id), path);
}

}  // namespace rebac
