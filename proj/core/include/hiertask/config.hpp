#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hiertask/cloud_policy.hpp"
#include "hiertask/orchestrator.hpp"

namespace hiertask {

struct PlannerConfig {
  std::string kind = "mock";  // "mock" | "remote"
  std::string templates;      // mock: template file path
  std::string url;            // remote: endpoint
  int timeout_ms = 5000;
};

/// Everything `hiertask serve` needs; run-scenario fills most of this from
/// the scenario fixture instead.
struct SystemConfig {
  std::string transport = "in-process";  // "in-process" | "tcp"
  OrchestratorConfig orchestrator;
  std::string cloud_addr = "127.0.0.1:7101";
  std::string edge_addr = "127.0.0.1:7102";
  std::string device_addr = "127.0.0.1:7103";
  PlannerConfig planner;
  std::string skills_path;
  std::string rules_path;
  std::string world_path;
  std::vector<FleetRobot> fleet;
  std::string out_dir = "runs";
};

SystemConfig parse_system_config(const nlohmann::json& doc);
SystemConfig load_system_config(const std::filesystem::path& path);

/// Builds the configured planner (MockPlanner over the template file, or
/// RemotePlanner against the configured URL).
std::unique_ptr<Planner> make_planner(const PlannerConfig& cfg,
                                      const std::filesystem::path& base_dir);

}  // namespace hiertask
