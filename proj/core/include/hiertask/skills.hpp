#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiertask/vectorizer.hpp"

namespace hiertask {

enum class RobotClass { quadruped, drone };

std::string to_string(RobotClass cls);
RobotClass robot_class_from_string(const std::string& s);

enum class ParamKind { scalar, coordinate2d, object_ref, text };

std::string to_string(ParamKind kind);
ParamKind param_kind_from_string(const std::string& s);

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::text;
};

/// An encapsulated atomic robot operation. Alignment only ever sees the
/// text (description + keywords); the executable body lives in the world
/// simulator keyed by `id`.
struct SkillDescriptor {
  std::string id;
  std::string name;
  std::string description;
  std::vector<std::string> keywords;
  std::vector<ParamSpec> params;
  std::vector<RobotClass> robot_classes;
};

/// Immutable, id-keyed collection of skills with precomputed feature
/// vectors. Safe to share across threads after construction.
class SkillRegistry {
 public:
  SkillRegistry() = default;

  /// Builds a registry, validating all invariants (unique ids, non-empty
  /// description and robot_classes, unique param names). Throws LoadError
  /// naming the offending skill.
  static SkillRegistry from_skills(std::vector<SkillDescriptor> skills);

  /// Parses the documented JSON schema. Unknown fields, duplicate ids,
  /// unknown kinds/classes are rejected with a LoadError.
  static SkillRegistry load(const std::filesystem::path& path);
  static SkillRegistry parse(const nlohmann::json& doc);

  nlohmann::json to_json() const;

  bool empty() const { return skills_.empty(); }
  std::size_t size() const { return skills_.size(); }

  const SkillDescriptor* find(const std::string& id) const;
  const SkillDescriptor& at(const std::string& id) const;
  const FeatureVector& vector_for(const std::string& id) const;

  /// All and only skills whose robot_classes contain `cls`, ordered by id.
  std::vector<const SkillDescriptor*> for_class(RobotClass cls) const;

  /// (id, vector) pairs for a class, ordered by id. Shape consumed by
  /// similarity::report.
  std::vector<std::pair<std::string, FeatureVector>> vectors_for_class(
      RobotClass cls) const;

 private:
  std::map<std::string, SkillDescriptor> skills_;
  std::map<std::string, FeatureVector> vectors_;
};

}  // namespace hiertask
