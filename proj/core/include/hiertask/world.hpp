#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiertask/environment.hpp"
#include "hiertask/geometry.hpp"
#include "hiertask/orchestrator.hpp"
#include "hiertask/skills.hpp"

namespace hiertask {

/// All invented world constants in one place.
struct Kinematics {
  double quad_speed = 1.0;     // m/s
  double drone_speed = 3.0;    // m/s
  double climb_speed = 1.0;    // m/s
  double hover_altitude = 2.0;  // m
  double pick_range = 0.5;     // m
  double survey_radius = 20.0;  // m
  int survey_dwell = 2;        // ticks
};

enum class Gripper { open, closed };
enum class RobotStatus { idle, executing, failed, done };

std::string to_string(Gripper g);
std::string to_string(RobotStatus s);

struct WorldObject {
  std::string id;
  std::string cls;
  Vec2 position;
  std::optional<std::string> held_by;
};

struct RobotState {
  std::string id;
  RobotClass cls = RobotClass::quadruped;
  Vec2 position;
  double altitude = 0.0;     // drones only; quadrupeds stay at 0
  Gripper gripper = Gripper::open;  // quadrupeds only
  RobotStatus status = RobotStatus::idle;
};

enum class ObsKind { survey_result, skill_done, skill_failed, pose };

std::string to_string(ObsKind k);
ObsKind obs_kind_from_string(const std::string& s);

struct Observation {
  std::string robot_id;
  std::int64_t tick = 0;
  ObsKind kind = ObsKind::pose;
  nlohmann::json payload;
};

nlohmann::json to_json_line(const Observation& o);
Observation observation_from_json(const nlohmann::json& j);

struct SequenceOutcome {
  bool done = false;
  int failed_index = -1;  // valid when !done
};

/// Deterministic flat 2D world. One simulation loop owns all mutation;
/// robots execute assigned instruction sequences skill-by-skill as the
/// world is stepped, emitting observations through the sink.
class World {
 public:
  World() = default;

  static World load(const std::filesystem::path& path);
  static World parse(const nlohmann::json& doc);

  const Kinematics& kinematics() const { return kin_; }

  /// Every observation the world emits goes through this hook (and is also
  /// kept in the internal log).
  void set_observer(std::function<void(const Observation&)> sink) {
    sink_ = std::move(sink);
  }

  std::int64_t tick() const { return tick_; }
  const std::vector<WorldObject>& objects() const { return objects_; }
  const std::vector<RobotState>& robots() const { return robots_; }
  const std::vector<Observation>& observation_log() const { return log_; }

  const RobotState* find_robot(const std::string& id) const;
  const WorldObject* find_object(const std::string& id) const;

  /// seq-index of the instruction a failed robot stopped at; -1 otherwise.
  int failed_index(const std::string& robot_id) const;

  /// Starts one instruction on an idle robot. Throws ContractError for an
  /// unknown robot, a busy robot, or an unknown skill; a skill that is not
  /// applicable to the robot's class fails at execution time with a
  /// skill_failed observation instead.
  void execute(const std::string& robot_id, const Instruction& instruction);

  /// Queues a whole sequence; instructions run strictly in seq-index order
  /// and stop at the first failure.
  void assign_sequence(const std::string& robot_id,
                       const InstructionSequence& seq);

  bool any_executing() const;

  /// Advances every executing robot by dt seconds of its current skill's
  /// kinematics and bumps the tick. Deterministic; no randomness anywhere.
  void step(double dt);

  /// Drives an assigned sequence to its terminal status, stepping with
  /// dt = 1 s per tick.
  SequenceOutcome run_sequence(const std::string& robot_id,
                               const InstructionSequence& seq);

  /// Edge-facing view of the ground truth (used directly by tests; in the
  /// full system the edge only ever sees survey observations).
  EnvironmentSnapshot ground_truth_snapshot() const;

  nlohmann::json state_to_json() const;

 private:
  struct Runtime {
    std::deque<Instruction> queue;
    std::optional<Instruction> active;
    int dwell = 0;
    int completed = 0;
    int failed_index = -1;
  };

  RobotState& robot_ref(const std::string& id);
  WorldObject* object_ptr(const std::string& id);
  void emit(const RobotState& r, ObsKind kind, nlohmann::json payload);
  nlohmann::json pose_payload(const RobotState& r) const;
  void complete(RobotState& r, Runtime& rt);
  void fail(RobotState& r, Runtime& rt, const std::string& reason);
  void advance(RobotState& r, Runtime& rt, double dt);

  Kinematics kin_;
  std::vector<WorldObject> objects_;
  std::vector<RobotState> robots_;
  std::vector<Runtime> runtimes_;  // parallel to robots_
  std::int64_t tick_ = 0;
  std::vector<Observation> log_;
  std::function<void(const Observation&)> sink_;
};

}  // namespace hiertask
