#include "hiertask/config.hpp"

#include <fstream>

#include "hiertask/errors.hpp"

namespace hiertask {

SystemConfig parse_system_config(const nlohmann::json& doc) {
  SystemConfig cfg;
  if (!doc.is_object()) throw ConfigError("config: expected JSON object");
  cfg.transport = doc.value("transport", cfg.transport);
  if (cfg.transport != "in-process" && cfg.transport != "tcp") {
    throw ConfigError("config: transport must be \"in-process\" or \"tcp\"");
  }
  cfg.orchestrator.threshold =
      doc.value("threshold", cfg.orchestrator.threshold);
  if (cfg.orchestrator.threshold < 0.0 || cfg.orchestrator.threshold > 1.0) {
    throw ConfigError("config: threshold must be in [0, 1]");
  }
  cfg.orchestrator.max_depth =
      doc.value("max_depth", cfg.orchestrator.max_depth);
  cfg.orchestrator.max_iterations =
      doc.value("max_iterations", cfg.orchestrator.max_iterations);
  if (cfg.orchestrator.max_depth < 1 || cfg.orchestrator.max_iterations < 1) {
    throw ConfigError("config: max_depth and max_iterations must be >= 1");
  }
  if (doc.contains("addresses")) {
    const auto& a = doc.at("addresses");
    cfg.cloud_addr = a.value("cloud", cfg.cloud_addr);
    cfg.edge_addr = a.value("edge", cfg.edge_addr);
    cfg.device_addr = a.value("device", cfg.device_addr);
  }
  if (cfg.transport == "tcp" &&
      (cfg.cloud_addr == cfg.edge_addr || cfg.cloud_addr == cfg.device_addr ||
       cfg.edge_addr == cfg.device_addr)) {
    throw ConfigError("config: tier addresses must be distinct in tcp mode");
  }
  if (doc.contains("planner")) {
    const auto& p = doc.at("planner");
    cfg.planner.kind = p.value("kind", cfg.planner.kind);
    if (cfg.planner.kind != "mock" && cfg.planner.kind != "remote") {
      throw ConfigError("config: planner.kind must be \"mock\" or \"remote\"");
    }
    cfg.planner.templates = p.value("templates", cfg.planner.templates);
    cfg.planner.url = p.value("url", cfg.planner.url);
    cfg.planner.timeout_ms = p.value("timeout_ms", cfg.planner.timeout_ms);
  }
  if (doc.contains("paths")) {
    const auto& p = doc.at("paths");
    cfg.skills_path = p.value("skills", cfg.skills_path);
    cfg.rules_path = p.value("rules", cfg.rules_path);
    cfg.world_path = p.value("world", cfg.world_path);
    if (cfg.planner.templates.empty()) {
      cfg.planner.templates = p.value("templates", cfg.planner.templates);
    }
    cfg.out_dir = p.value("out", cfg.out_dir);
  }
  if (doc.contains("fleet")) {
    for (const auto& r : doc.at("fleet")) {
      cfg.fleet.push_back(
          {r.at("id").get<std::string>(),
           robot_class_from_string(r.at("class").get<std::string>())});
    }
  }
  return cfg;
}

SystemConfig load_system_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return parse_system_config(doc);
}

std::unique_ptr<Planner> make_planner(const PlannerConfig& cfg,
                                      const std::filesystem::path& base_dir) {
  if (cfg.kind == "remote") {
    if (cfg.url.empty()) {
      throw ConfigError("remote planner requires planner.url");
    }
    return std::make_unique<RemotePlanner>(cfg.url, cfg.timeout_ms);
  }
  if (cfg.templates.empty()) {
    throw ConfigError("mock planner requires a template file path");
  }
  std::filesystem::path p = cfg.templates;
  if (p.is_relative()) p = base_dir / p;
  return std::make_unique<MockPlanner>(PlannerTemplateSet::load(p));
}

}  // namespace hiertask
