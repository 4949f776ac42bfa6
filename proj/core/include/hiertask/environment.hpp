#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiertask/geometry.hpp"

namespace hiertask {

struct EnvObject {
  std::string id;
  std::string cls;
  Vec2 position;
};

/// Edge-side world knowledge: what the drone surveys reported plus the
/// latest robot poses gleaned from observations. In the bundled scenarios
/// this starts empty and is populated exclusively by survey results.
struct EnvironmentSnapshot {
  std::vector<EnvObject> objects;
  std::map<std::string, Vec2> robot_poses;
  std::int64_t as_of_tick = 0;
};

inline void to_json(nlohmann::json& j, const EnvObject& o) {
  j = {{"id", o.id}, {"class", o.cls}, {"position", o.position}};
}

inline void from_json(const nlohmann::json& j, EnvObject& o) {
  o.id = j.at("id").get<std::string>();
  o.cls = j.at("class").get<std::string>();
  o.position = j.at("position").get<Vec2>();
}

}  // namespace hiertask
