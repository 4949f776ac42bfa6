#include "hiertask/cloud_policy.hpp"

#include <fstream>
#include <set>

#include "hiertask/errors.hpp"
#include "hiertask/vectorizer.hpp"

namespace hiertask {

const FleetRobot* FleetDescriptor::find(const std::string& id) const {
  for (const auto& r : robots) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

RuleSet RuleSet::parse(const nlohmann::json& doc) {
  if (!doc.is_array()) throw LoadError("rule file: expected JSON array");
  RuleSet set;
  for (const auto& item : doc) {
    StrategyRule rule;
    rule.pattern = item.at("pattern").get<std::vector<std::string>>();
    for (const auto& p : item.at("phases")) {
      RulePhase ph;
      ph.name = p.at("name").get<std::string>();
      ph.robot_class =
          robot_class_from_string(p.at("robot_class").get<std::string>());
      ph.goal = p.at("goal").get<std::string>();
      if (p.contains("depends_on")) {
        ph.depends_on = p.at("depends_on").get<std::vector<std::string>>();
      }
      rule.phases.push_back(std::move(ph));
    }
    if (rule.phases.empty()) throw LoadError("strategy rule with no phases");
    set.rules.push_back(std::move(rule));
  }
  return set;
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open rule file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError("rule file " + path.string() + ": " + e.what());
  }
  return parse(doc);
}

namespace {

std::vector<const FleetRobot*> of_class(const FleetDescriptor& fleet,
                                        RobotClass cls) {
  std::vector<const FleetRobot*> out;
  for (const auto& r : fleet.robots) {
    if (r.robot_class == cls) out.push_back(&r);
  }
  return out;
}

void add_phase(Strategy& s, const std::string& name, const std::string& goal,
               const std::vector<const FleetRobot*>& members,
               std::vector<std::string> depends_on) {
  PhaseSpec phase;
  phase.name = name;
  phase.goal = goal;
  phase.depends_on = std::move(depends_on);
  for (const auto* r : members) phase.robot_ids.push_back(r->id);
  s.phases.push_back(std::move(phase));
  for (const auto* r : members) {
    s.policies.push_back({r->id, goal, name});
  }
}

void validate(const Strategy& s, const FleetDescriptor& fleet) {
  std::set<std::string> earlier;
  for (const auto& ph : s.phases) {
    for (const auto& dep : ph.depends_on) {
      if (!earlier.contains(dep)) {
        throw StrategyError("phase \"" + ph.name +
                            "\" depends on unknown or later phase \"" + dep +
                            "\"");
      }
    }
    for (const auto& rid : ph.robot_ids) {
      if (!fleet.find(rid)) {
        throw StrategyError("phase \"" + ph.name +
                            "\" names robot outside the fleet: " + rid);
      }
    }
    earlier.insert(ph.name);
  }
}

Strategy default_strategy(const TaskSpec& task, const FleetDescriptor& fleet) {
  const auto drones = of_class(fleet, RobotClass::drone);
  const auto quads = of_class(fleet, RobotClass::quadruped);
  if (quads.empty()) {
    throw StrategyError("default rule requires robot class: quadruped");
  }
  Strategy s;
  s.task_id = task.id;
  if (!drones.empty()) {
    add_phase(s, "survey", "survey the area", drones, {});
  }
  add_phase(s, "execute", task.description, quads,
            drones.empty() ? std::vector<std::string>{}
                           : std::vector<std::string>{"survey"});
  return s;
}

}  // namespace

Strategy generate_strategy(const TaskSpec& task, const FleetDescriptor& fleet,
                           const RuleSet& rules) {
  if (fleet.robots.empty()) {
    throw ContractError("generate_strategy: fleet must be non-empty");
  }
  {
    std::set<std::string> ids;
    for (const auto& r : fleet.robots) {
      if (!ids.insert(r.id).second) {
        throw ContractError("duplicate robot id in fleet: " + r.id);
      }
    }
  }

  std::set<std::string> ttoks;
  for (auto& t : tokenize(task.description)) ttoks.insert(t);
  const StrategyRule* selected = nullptr;
  std::size_t best_overlap = 0;
  for (const auto& rule : rules.rules) {
    std::size_t overlap = 0;
    for (const auto& kw : rule.pattern) {
      if (ttoks.contains(kw)) ++overlap;
    }
    if (overlap > best_overlap) {
      selected = &rule;
      best_overlap = overlap;
    }
  }

  Strategy s;
  if (!selected) {
    s = default_strategy(task, fleet);
  } else {
    s.task_id = task.id;
    for (const auto& ph : selected->phases) {
      const auto members = of_class(fleet, ph.robot_class);
      if (members.empty()) {
        throw StrategyError("strategy rule requires robot class: " +
                            to_string(ph.robot_class));
      }
      std::string goal = ph.goal;
      if (goal == "$task") goal = task.description;
      add_phase(s, ph.name, goal, members, ph.depends_on);
    }
  }
  validate(s, fleet);
  return s;
}

nlohmann::json strategy_to_json(const Strategy& s) {
  nlohmann::json phases = nlohmann::json::array();
  for (const auto& ph : s.phases) {
    phases.push_back({{"name", ph.name},
                      {"goal", ph.goal},
                      {"robot_ids", ph.robot_ids},
                      {"depends_on", ph.depends_on}});
  }
  nlohmann::json policies = nlohmann::json::array();
  for (const auto& p : s.policies) {
    policies.push_back({{"robot_id", p.robot_id},
                        {"goal", p.goal},
                        {"phase", p.phase}});
  }
  return {{"task_id", s.task_id}, {"phases", phases}, {"policies", policies}};
}

Strategy strategy_from_json(const nlohmann::json& j) {
  Strategy s;
  s.task_id = j.at("task_id").get<std::string>();
  for (const auto& ph : j.at("phases")) {
    PhaseSpec phase;
    phase.name = ph.at("name").get<std::string>();
    phase.goal = ph.at("goal").get<std::string>();
    phase.robot_ids = ph.at("robot_ids").get<std::vector<std::string>>();
    phase.depends_on = ph.at("depends_on").get<std::vector<std::string>>();
    s.phases.push_back(std::move(phase));
  }
  for (const auto& p : j.at("policies")) {
    s.policies.push_back({p.at("robot_id").get<std::string>(),
                          p.at("goal").get<std::string>(),
                          p.at("phase").get<std::string>()});
  }
  return s;
}

}  // namespace hiertask
