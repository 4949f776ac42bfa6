#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiertask/planner.hpp"
#include "hiertask/skills.hpp"

namespace hiertask {

struct FleetRobot {
  std::string id;
  RobotClass robot_class = RobotClass::quadruped;
};

struct FleetDescriptor {
  std::vector<FleetRobot> robots;

  const FleetRobot* find(const std::string& id) const;
};

struct PhaseSpec {
  std::string name;
  std::string goal;
  std::vector<std::string> robot_ids;
  std::vector<std::string> depends_on;  // names of earlier phases only
};

struct RobotPolicy {
  std::string robot_id;
  std::string goal;
  std::string phase;
};

/// The cloud tier's output: an ordered, acyclic phase schedule plus one
/// policy per participating robot.
struct Strategy {
  std::string task_id;
  std::vector<PhaseSpec> phases;
  std::vector<RobotPolicy> policies;
};

/// One strategy rule: matched by keyword overlap with the task text. Phase
/// goals may use "$task" to splice in the task description.
struct RulePhase {
  std::string name;
  RobotClass robot_class = RobotClass::quadruped;
  std::string goal;
  std::vector<std::string> depends_on;
};

struct StrategyRule {
  std::vector<std::string> pattern;
  std::vector<RulePhase> phases;
};

struct RuleSet {
  std::vector<StrategyRule> rules;

  static RuleSet load(const std::filesystem::path& path);
  static RuleSet parse(const nlohmann::json& doc);
};

/// Generates the cooperation strategy for a task. File rules are tried
/// first (largest keyword overlap, ties to file order); with no match, the
/// built-in survey-then-execute rule applies: every drone surveys, then
/// every quadruped runs the task text. Throws ContractError on an empty
/// fleet and StrategyError (naming the class) when a required robot class
/// is missing from the fleet.
Strategy generate_strategy(const TaskSpec& task, const FleetDescriptor& fleet,
                           const RuleSet& rules);

nlohmann::json strategy_to_json(const Strategy& s);
Strategy strategy_from_json(const nlohmann::json& j);

}  // namespace hiertask
