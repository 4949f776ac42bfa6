#include "hiertask/skills.hpp"

#include <fstream>
#include <set>

#include "hiertask/errors.hpp"

namespace hiertask {

std::string to_string(RobotClass cls) {
  return cls == RobotClass::quadruped ? "quadruped" : "drone";
}

RobotClass robot_class_from_string(const std::string& s) {
  if (s == "quadruped") return RobotClass::quadruped;
  if (s == "drone") return RobotClass::drone;
  throw LoadError("unknown robot class: " + s);
}

std::string to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::scalar: return "scalar";
    case ParamKind::coordinate2d: return "coordinate2d";
    case ParamKind::object_ref: return "object-ref";
    case ParamKind::text: return "text";
  }
  return "text";
}

ParamKind param_kind_from_string(const std::string& s) {
  if (s == "scalar") return ParamKind::scalar;
  if (s == "coordinate2d") return ParamKind::coordinate2d;
  if (s == "object-ref") return ParamKind::object_ref;
  if (s == "text") return ParamKind::text;
  throw LoadError("unknown param kind: " + s);
}

namespace {

void expect_fields(const nlohmann::json& obj,
                   const std::set<std::string>& allowed,
                   const std::string& what) {
  for (const auto& [key, val] : obj.items()) {
    if (!allowed.contains(key)) {
      throw LoadError(what + ": unknown field \"" + key + "\"");
    }
  }
}

}  // namespace

SkillRegistry SkillRegistry::from_skills(std::vector<SkillDescriptor> skills) {
  SkillRegistry reg;
  for (auto& s : skills) {
    const std::string where = "skill \"" + s.id + "\"";
    if (s.id.empty()) throw LoadError("skill with empty id");
    if (reg.skills_.contains(s.id)) {
      throw LoadError("duplicate skill id: " + s.id);
    }
    if (s.description.empty()) throw LoadError(where + ": empty description");
    if (s.robot_classes.empty()) {
      throw LoadError(where + ": robot_classes must be non-empty");
    }
    std::set<std::string> names;
    for (const auto& p : s.params) {
      if (!names.insert(p.name).second) {
        throw LoadError(where + ": duplicate param name \"" + p.name + "\"");
      }
    }
    reg.vectors_[s.id] = embed(s.description, s.keywords, "");
    reg.skills_[s.id] = std::move(s);
  }
  return reg;
}

SkillRegistry SkillRegistry::parse(const nlohmann::json& doc) {
  if (!doc.is_array()) throw LoadError("skill registry: expected JSON array");
  std::vector<SkillDescriptor> skills;
  for (const auto& item : doc) {
    if (!item.is_object()) throw LoadError("skill registry: non-object entry");
    expect_fields(item, {"id", "name", "description", "keywords", "params",
                         "robot_classes"},
                  "skill entry");
    SkillDescriptor s;
    s.id = item.at("id").get<std::string>();
    s.name = item.value("name", s.id);
    s.description = item.at("description").get<std::string>();
    if (item.contains("keywords")) {
      s.keywords = item.at("keywords").get<std::vector<std::string>>();
    }
    if (item.contains("params")) {
      for (const auto& p : item.at("params")) {
        expect_fields(p, {"name", "kind"}, "param of skill \"" + s.id + "\"");
        s.params.push_back({p.at("name").get<std::string>(),
                            param_kind_from_string(
                                p.at("kind").get<std::string>())});
      }
    }
    for (const auto& c : item.at("robot_classes")) {
      s.robot_classes.push_back(robot_class_from_string(c.get<std::string>()));
    }
    skills.push_back(std::move(s));
  }
  return from_skills(std::move(skills));
}

SkillRegistry SkillRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open skill registry: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError("skill registry " + path.string() + ": " + e.what());
  }
  return parse(doc);
}

nlohmann::json SkillRegistry::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [id, s] : skills_) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : s.params) {
      params.push_back({{"name", p.name}, {"kind", to_string(p.kind)}});
    }
    nlohmann::json classes = nlohmann::json::array();
    for (auto c : s.robot_classes) classes.push_back(to_string(c));
    arr.push_back({{"id", s.id},
                   {"name", s.name},
                   {"description", s.description},
                   {"keywords", s.keywords},
                   {"params", params},
                   {"robot_classes", classes}});
  }
  return arr;
}

const SkillDescriptor* SkillRegistry::find(const std::string& id) const {
  auto it = skills_.find(id);
  return it == skills_.end() ? nullptr : &it->second;
}

const SkillDescriptor& SkillRegistry::at(const std::string& id) const {
  const auto* s = find(id);
  if (!s) throw ConfigError("unknown skill id: " + id);
  return *s;
}

const FeatureVector& SkillRegistry::vector_for(const std::string& id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) throw ConfigError("unknown skill id: " + id);
  return it->second;
}

std::vector<const SkillDescriptor*> SkillRegistry::for_class(
    RobotClass cls) const {
  std::vector<const SkillDescriptor*> out;
  for (const auto& [id, s] : skills_) {
    for (auto c : s.robot_classes) {
      if (c == cls) {
        out.push_back(&s);
        break;
      }
    }
  }
  return out;  // map iteration is already id-ordered
}

std::vector<std::pair<std::string, FeatureVector>>
SkillRegistry::vectors_for_class(RobotClass cls) const {
  std::vector<std::pair<std::string, FeatureVector>> out;
  for (const auto* s : for_class(cls)) {
    out.emplace_back(s->id, vectors_.at(s->id));
  }
  return out;
}

}  // namespace hiertask
