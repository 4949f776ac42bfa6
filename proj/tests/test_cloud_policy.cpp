#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "hiertask/cloud_policy.hpp"
#include "hiertask/errors.hpp"
#include "test_util.hpp"

using namespace hiertask;

namespace {

RuleSet bundled_rules() {
  return RuleSet::load(testutil::share_dir() / "rules/strategy_rules.json");
}

const TaskSpec kFetch{"task-1", "fetch the red box", "operator", {}};

}  // namespace

TEST_CASE("default rule: drones survey, quadrupeds execute afterwards") {
  FleetDescriptor fleet{{{"drone1", RobotClass::drone},
                         {"quad1", RobotClass::quadruped}}};
  const auto s = generate_strategy(kFetch, fleet, bundled_rules());
  REQUIRE(s.phases.size() == 2);
  CHECK(s.phases[0].name == "survey");
  CHECK(s.phases[0].goal == "survey the area");
  CHECK(s.phases[0].robot_ids == std::vector<std::string>{"drone1"});
  CHECK(s.phases[0].depends_on.empty());
  CHECK(s.phases[1].name == "execute");
  CHECK(s.phases[1].goal == "fetch the red box");
  CHECK(s.phases[1].robot_ids == std::vector<std::string>{"quad1"});
  CHECK(s.phases[1].depends_on == std::vector<std::string>{"survey"});
  REQUIRE(s.policies.size() == 2);
  CHECK(s.policies[0].robot_id == "drone1");
  CHECK(s.policies[1].robot_id == "quad1");
}

TEST_CASE("empty fleet violates the precondition") {
  CHECK_THROWS_AS(generate_strategy(kFetch, FleetDescriptor{}, bundled_rules()),
                  ContractError);
}

TEST_CASE("duplicate robot ids are rejected") {
  FleetDescriptor fleet{{{"r1", RobotClass::drone},
                         {"r1", RobotClass::quadruped}}};
  CHECK_THROWS_AS(generate_strategy(kFetch, fleet, bundled_rules()),
                  ContractError);
}

TEST_CASE("two quadrupeds both land in the execute phase with the same goal") {
  FleetDescriptor fleet{{{"quadA", RobotClass::quadruped},
                         {"quadB", RobotClass::quadruped}}};
  const auto s = generate_strategy(kFetch, fleet, bundled_rules());
  // no drones: the survey phase is dropped and execute has no dependencies
  REQUIRE(s.phases.size() == 1);
  CHECK(s.phases[0].name == "execute");
  CHECK(s.phases[0].robot_ids == std::vector<std::string>{"quadA", "quadB"});
  CHECK(s.phases[0].depends_on.empty());
  REQUIRE(s.policies.size() == 2);
  CHECK(s.policies[0].goal == s.policies[1].goal);
}

TEST_CASE("default rule without quadrupeds names the missing class") {
  FleetDescriptor fleet{{{"drone1", RobotClass::drone}}};
  CHECK_THROWS_WITH_AS(generate_strategy(kFetch, fleet, bundled_rules()),
                       doctest::Contains("quadruped"), StrategyError);
}

TEST_CASE("rule file match: patrol schedules survey then patrol") {
  FleetDescriptor fleet{{{"drone1", RobotClass::drone}}};
  const TaskSpec task{"task-1", "patrol the waypoints", "operator", {}};
  const auto s = generate_strategy(task, fleet, bundled_rules());
  REQUIRE(s.phases.size() == 2);
  CHECK(s.phases[0].name == "survey");
  CHECK(s.phases[1].name == "patrol");
  CHECK(s.phases[1].goal == "patrol the waypoints");  // $task spliced
  CHECK(s.phases[1].depends_on == std::vector<std::string>{"survey"});
}

TEST_CASE("rule requiring a class missing from the fleet names it") {
  FleetDescriptor fleet{{{"quad1", RobotClass::quadruped}}};
  const TaskSpec task{"task-1", "patrol the waypoints", "operator", {}};
  CHECK_THROWS_WITH_AS(generate_strategy(task, fleet, bundled_rules()),
                       doctest::Contains("drone"), StrategyError);
}

TEST_CASE("phase dependencies always resolve to earlier phases") {
  FleetDescriptor fleet{{{"drone1", RobotClass::drone},
                         {"quad1", RobotClass::quadruped}}};
  for (const char* text : {"fetch the red box", "patrol the waypoints",
                           "assemble the cabinet"}) {
    const TaskSpec task{"t", text, "op", {}};
    const auto s = generate_strategy(task, fleet, bundled_rules());
    std::set<std::string> earlier;
    for (const auto& ph : s.phases) {
      for (const auto& dep : ph.depends_on) CHECK(earlier.contains(dep));
      earlier.insert(ph.name);
    }
    // every policy's phase exists; every phase robot is in the fleet
    for (const auto& p : s.policies) {
      bool found = false;
      for (const auto& ph : s.phases) found |= ph.name == p.phase;
      CHECK(found);
    }
    for (const auto& ph : s.phases) {
      for (const auto& rid : ph.robot_ids) CHECK(fleet.find(rid) != nullptr);
    }
  }
}

TEST_CASE("a rule referencing a later phase is rejected") {
  auto rules = RuleSet::parse(nlohmann::json::parse(R"([
    {"pattern": ["weird"],
     "phases": [
       {"name": "a", "robot_class": "drone", "goal": "g", "depends_on": ["b"]},
       {"name": "b", "robot_class": "drone", "goal": "g", "depends_on": []}
     ]}
  ])"));
  FleetDescriptor fleet{{{"drone1", RobotClass::drone}}};
  const TaskSpec task{"t", "weird job", "op", {}};
  CHECK_THROWS_AS(generate_strategy(task, fleet, rules), StrategyError);
}

TEST_CASE("strategy generation is deterministic") {
  FleetDescriptor fleet{{{"drone1", RobotClass::drone},
                         {"quad1", RobotClass::quadruped}}};
  const auto a = strategy_to_json(generate_strategy(kFetch, fleet, bundled_rules()));
  const auto b = strategy_to_json(generate_strategy(kFetch, fleet, bundled_rules()));
  CHECK(a == b);
}

TEST_CASE("strategy JSON round-trips") {
  FleetDescriptor fleet{{{"drone1", RobotClass::drone},
                         {"quad1", RobotClass::quadruped}}};
  const auto s = generate_strategy(kFetch, fleet, bundled_rules());
  const auto j = strategy_to_json(s);
  const auto back = strategy_from_json(j);
  CHECK(strategy_to_json(back) == j);
}
