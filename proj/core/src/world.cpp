#include "hiertask/world.hpp"

#include <algorithm>
#include <fstream>

#include "hiertask/errors.hpp"

namespace hiertask {

std::string to_string(Gripper g) {
  return g == Gripper::open ? "open" : "closed";
}

std::string to_string(RobotStatus s) {
  switch (s) {
    case RobotStatus::idle: return "idle";
    case RobotStatus::executing: return "executing";
    case RobotStatus::failed: return "failed";
    case RobotStatus::done: return "done";
  }
  return "idle";
}

std::string to_string(ObsKind k) {
  switch (k) {
    case ObsKind::survey_result: return "survey_result";
    case ObsKind::skill_done: return "skill_done";
    case ObsKind::skill_failed: return "skill_failed";
    case ObsKind::pose: return "pose";
  }
  return "pose";
}

ObsKind obs_kind_from_string(const std::string& s) {
  if (s == "survey_result") return ObsKind::survey_result;
  if (s == "skill_done") return ObsKind::skill_done;
  if (s == "skill_failed") return ObsKind::skill_failed;
  if (s == "pose") return ObsKind::pose;
  throw LoadError("unknown observation kind: " + s);
}

nlohmann::json to_json_line(const Observation& o) {
  return {{"robot_id", o.robot_id},
          {"tick", o.tick},
          {"kind", to_string(o.kind)},
          {"payload", o.payload}};
}

Observation observation_from_json(const nlohmann::json& j) {
  Observation o;
  o.robot_id = j.at("robot_id").get<std::string>();
  o.tick = j.at("tick").get<std::int64_t>();
  o.kind = obs_kind_from_string(j.at("kind").get<std::string>());
  o.payload = j.at("payload");
  return o;
}

World World::parse(const nlohmann::json& doc) {
  World w;
  for (const auto& oj : doc.at("objects")) {
    WorldObject o;
    o.id = oj.at("id").get<std::string>();
    o.cls = oj.at("class").get<std::string>();
    o.position = oj.at("position").get<Vec2>();
    for (const auto& existing : w.objects_) {
      if (existing.id == o.id) {
        throw LoadError("duplicate object id in world: " + o.id);
      }
    }
    w.objects_.push_back(std::move(o));
  }
  for (const auto& rj : doc.at("robots")) {
    RobotState r;
    r.id = rj.at("id").get<std::string>();
    r.cls = robot_class_from_string(rj.at("class").get<std::string>());
    r.position = rj.at("position").get<Vec2>();
    if (w.find_robot(r.id)) {
      throw LoadError("duplicate robot id in world: " + r.id);
    }
    w.robots_.push_back(std::move(r));
  }
  w.runtimes_.resize(w.robots_.size());
  return w;
}

World World::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open world file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError("world file " + path.string() + ": " + e.what());
  }
  return parse(doc);
}

const RobotState* World::find_robot(const std::string& id) const {
  for (const auto& r : robots_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

const WorldObject* World::find_object(const std::string& id) const {
  for (const auto& o : objects_) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

int World::failed_index(const std::string& robot_id) const {
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    if (robots_[i].id == robot_id) return runtimes_[i].failed_index;
  }
  return -1;
}

RobotState& World::robot_ref(const std::string& id) {
  for (auto& r : robots_) {
    if (r.id == id) return r;
  }
  throw ContractError("unknown robot id: " + id);
}

WorldObject* World::object_ptr(const std::string& id) {
  for (auto& o : objects_) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

void World::emit(const RobotState& r, ObsKind kind, nlohmann::json payload) {
  Observation o{r.id, tick_, kind, std::move(payload)};
  log_.push_back(o);
  if (sink_) sink_(o);
}

nlohmann::json World::pose_payload(const RobotState& r) const {
  nlohmann::json p = {{"position", r.position}};
  if (r.cls == RobotClass::drone) {
    p["altitude"] = r.altitude;
  } else {
    p["gripper"] = to_string(r.gripper);
  }
  return p;
}

void World::execute(const std::string& robot_id,
                    const Instruction& instruction) {
  auto& r = robot_ref(robot_id);
  auto& rt = runtimes_[&r - robots_.data()];
  if (r.status == RobotStatus::executing) {
    throw ContractError("robot " + robot_id + " is already executing");
  }
  rt.queue.clear();
  rt.active.reset();
  rt.queue.push_back(instruction);
  rt.completed = 0;
  rt.failed_index = -1;
  r.status = RobotStatus::executing;
}

void World::assign_sequence(const std::string& robot_id,
                            const InstructionSequence& seq) {
  auto& r = robot_ref(robot_id);
  auto& rt = runtimes_[&r - robots_.data()];
  if (r.status == RobotStatus::executing) {
    throw ContractError("robot " + robot_id + " is already executing");
  }
  rt.queue.assign(seq.instructions.begin(), seq.instructions.end());
  rt.active.reset();
  rt.completed = 0;
  rt.failed_index = -1;
  r.status = rt.queue.empty() ? RobotStatus::done : RobotStatus::executing;
}

bool World::any_executing() const {
  return std::any_of(robots_.begin(), robots_.end(), [](const RobotState& r) {
    return r.status == RobotStatus::executing;
  });
}

void World::complete(RobotState& r, Runtime& rt) {
  nlohmann::json payload = {{"skill_id", rt.active->skill_id},
                            {"seq_index", rt.active->seq_index}};
  payload.update(pose_payload(r));
  rt.active.reset();
  rt.completed += 1;
  emit(r, ObsKind::skill_done, std::move(payload));
  if (rt.queue.empty()) r.status = RobotStatus::done;
}

void World::fail(RobotState& r, Runtime& rt, const std::string& reason) {
  emit(r, ObsKind::skill_failed,
       {{"skill_id", rt.active->skill_id},
        {"seq_index", rt.active->seq_index},
        {"reason", reason}});
  rt.failed_index = rt.active->seq_index;
  rt.active.reset();
  rt.queue.clear();
  r.status = RobotStatus::failed;
}

void World::advance(RobotState& r, Runtime& rt, double dt) {
  const auto& instr = *rt.active;
  const std::string& sid = instr.skill_id;

  const bool is_quad = r.cls == RobotClass::quadruped;
  if ((is_quad && (sid == "takeoff" || sid == "land" || sid == "fly_to" ||
                   sid == "survey_area")) ||
      (!is_quad && (sid == "move_to" || sid == "rotate" || sid == "pick" ||
                    sid == "place" || sid == "open_gripper" ||
                    sid == "close_gripper"))) {
    fail(r, rt, "skill " + sid + " not applicable to " + to_string(r.cls));
    return;
  }

  if (sid == "move_to" || sid == "fly_to") {
    const Vec2 target = std::get<Vec2>(instr.args.at(0).value);
    const double speed = is_quad ? kin_.quad_speed : kin_.drone_speed;
    const double reach = speed * dt;
    const double dx = target.x - r.position.x;
    const double dy = target.y - r.position.y;
    const double dist = std::hypot(dx, dy);
    if (dist <= reach) {
      r.position = target;
      complete(r, rt);
    } else {
      r.position.x += dx / dist * reach;
      r.position.y += dy / dist * reach;
    }
  } else if (sid == "takeoff") {
    r.altitude = std::min(kin_.hover_altitude, r.altitude + kin_.climb_speed * dt);
    if (r.altitude >= kin_.hover_altitude) complete(r, rt);
  } else if (sid == "land") {
    r.altitude = std::max(0.0, r.altitude - kin_.climb_speed * dt);
    if (r.altitude <= 0.0) complete(r, rt);
  } else if (sid == "survey_area") {
    rt.dwell += 1;
    if (rt.dwell >= kin_.survey_dwell) {
      std::vector<const WorldObject*> seen;
      for (const auto& o : objects_) {
        if (distance(o.position, r.position) <= kin_.survey_radius) {
          seen.push_back(&o);
        }
      }
      std::sort(seen.begin(), seen.end(),
                [](const WorldObject* a, const WorldObject* b) {
                  return a->id < b->id;
                });
      nlohmann::json objs = nlohmann::json::array();
      for (const auto* o : seen) {
        objs.push_back({{"id", o->id},
                        {"class", o->cls},
                        {"position", o->position}});
      }
      emit(r, ObsKind::survey_result,
           {{"radius", kin_.survey_radius}, {"objects", objs}});
      complete(r, rt);
    }
  } else if (sid == "pick") {
    if (r.gripper != Gripper::open) {
      fail(r, rt, "gripper closed");
      return;
    }
    auto* target = object_ptr(std::get<std::string>(instr.args.at(0).value));
    if (!target) {
      fail(r, rt, "unknown object");
      return;
    }
    if (target->held_by) {
      fail(r, rt, "object already held");
      return;
    }
    if (distance(target->position, r.position) > kin_.pick_range) {
      fail(r, rt, "no object in range");
      return;
    }
    target->held_by = r.id;
    target->position = r.position;
    r.gripper = Gripper::closed;
    complete(r, rt);
  } else if (sid == "place") {
    WorldObject* held = nullptr;
    for (auto& o : objects_) {
      if (o.held_by == r.id) held = &o;
    }
    if (!held) {
      fail(r, rt, "nothing held");
      return;
    }
    if (held->id != std::get<std::string>(instr.args.at(0).value)) {
      fail(r, rt, "held object mismatch");
      return;
    }
    held->held_by.reset();
    held->position = r.position;
    r.gripper = Gripper::open;
    complete(r, rt);
  } else if (sid == "rotate") {
    complete(r, rt);  // pose update is a no-op in this flat world
  } else if (sid == "open_gripper") {
    r.gripper = Gripper::open;
    complete(r, rt);
  } else if (sid == "close_gripper") {
    r.gripper = Gripper::closed;
    complete(r, rt);
  } else {
    fail(r, rt, "unknown skill " + sid);
  }
}

void World::step(double dt) {
  if (dt <= 0.0) throw ContractError("step: dt must be > 0");
  tick_ += 1;
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    auto& r = robots_[i];
    auto& rt = runtimes_[i];
    if (r.status != RobotStatus::executing) continue;
    if (!rt.active && !rt.queue.empty()) {
      rt.active = rt.queue.front();
      rt.queue.pop_front();
      rt.dwell = 0;
      emit(r, ObsKind::pose, pose_payload(r));
    }
    if (rt.active) advance(r, rt, dt);
  }
  // held objects ride along with their robot
  for (auto& o : objects_) {
    if (o.held_by) o.position = robot_ref(*o.held_by).position;
  }
}

SequenceOutcome World::run_sequence(const std::string& robot_id,
                                    const InstructionSequence& seq) {
  assign_sequence(robot_id, seq);
  auto& r = robot_ref(robot_id);
  while (r.status == RobotStatus::executing) step(1.0);
  const auto& rt = runtimes_[&r - robots_.data()];
  if (r.status == RobotStatus::failed) return {false, rt.failed_index};
  return {true, -1};
}

EnvironmentSnapshot World::ground_truth_snapshot() const {
  EnvironmentSnapshot env;
  env.as_of_tick = tick_;
  for (const auto& o : objects_) {
    env.objects.push_back({o.id, o.cls, o.position});
  }
  for (const auto& r : robots_) {
    env.robot_poses[r.id] = r.position;
  }
  return env;
}

nlohmann::json World::state_to_json() const {
  nlohmann::json objs = nlohmann::json::array();
  for (const auto& o : objects_) {
    objs.push_back({{"id", o.id},
                    {"class", o.cls},
                    {"position", o.position},
                    {"held_by", o.held_by ? nlohmann::json(*o.held_by)
                                          : nlohmann::json(nullptr)}});
  }
  nlohmann::json robots = nlohmann::json::array();
  for (const auto& r : robots_) {
    robots.push_back({{"id", r.id},
                      {"class", to_string(r.cls)},
                      {"position", r.position},
                      {"altitude", r.altitude},
                      {"gripper", to_string(r.gripper)},
                      {"status", to_string(r.status)}});
  }
  return {{"tick", tick_}, {"objects", objs}, {"robots", robots}};
}

}  // namespace hiertask
