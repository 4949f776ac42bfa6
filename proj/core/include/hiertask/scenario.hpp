#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiertask/config.hpp"
#include "hiertask/orchestrator.hpp"

namespace hiertask {

struct ScenarioRunOptions {
  std::filesystem::path share_dir;
  std::string scenario;
  std::filesystem::path out_dir;
  bool tcp = false;
  OrchestratorConfig orchestrator;
};

/// Outcome of one scenario run; everything the CLI prints and the tests
/// assert on. Paths are only guaranteed to exist when the run reached the
/// edge (i.e. a Status came back).
struct RunReport {
  std::string scenario;
  std::string task_id;
  bool done = false;
  std::string detail;
  std::map<std::string, int> iterations;          // trace file -> iterations
  std::map<std::string, int> instruction_counts;  // robot -> instructions
  double wall_ms = 0.0;
  std::filesystem::path task_dir;
  std::vector<std::string> trace_files;
  std::string observations_file;

  nlohmann::json to_json() const;
};

/// Names of the bundled scenarios under share/scenarios.
std::vector<std::string> list_scenarios(const std::filesystem::path& share);

/// Boots cloud, edge, and device (threads over the chosen transport), runs
/// the scenario's task to its terminal Status, writes traces, sequences,
/// the merged observation log, the message logs, and the final world state
/// under out_dir/<task-id>/. Throws ConfigError for an unknown scenario.
RunReport run_scenario(const ScenarioRunOptions& options);

/// Dials a running edge, submits one task, waits for the terminal Status.
RunReport submit_task(const std::string& edge_addr, const TaskSpec& task);

}  // namespace hiertask
