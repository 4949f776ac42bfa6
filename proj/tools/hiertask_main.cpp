// hiertask - operator entry point for the cloud-edge-device task stack.
//
// Subcommands:
//   run-scenario <name>   boot all tiers in-process and run a bundled
//                         scenario to its terminal status
//   serve <tier>          run one tier (cloud|edge|device) over TCP
//   submit <task-text>    send a TaskRequest to a running edge
//   trace <file>          pretty-print a refinement trace

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hiertask/config.hpp"
#include "hiertask/errors.hpp"
#include "hiertask/scenario.hpp"
#include "hiertask/services.hpp"
#include "hiertask/world.hpp"

namespace {

constexpr int kExitDone = 0;
constexpr int kExitTaskFailed = 1;
constexpr int kExitUsage = 2;

std::string default_share_dir() {
#ifdef HIERTASK_DEFAULT_SHARE_DIR
  return HIERTASK_DEFAULT_SHARE_DIR;
#else
  return "share";
#endif
}

hiertask::SystemConfig load_config_or_default(const std::string& config_path) {
  std::string path = config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("HIERTASK_CONFIG")) path = env;
  }
  if (path.empty()) return hiertask::SystemConfig{};
  return hiertask::load_system_config(path);
}

void print_report(const hiertask::RunReport& report, bool as_json) {
  if (as_json) {
    std::cout << report.to_json().dump(2) << "\n";
    return;
  }
  std::cout << "scenario:     " << report.scenario << "\n"
            << "task:         " << report.task_id << "\n"
            << "verdict:      " << (report.done ? "done" : "failed") << "\n";
  if (!report.detail.empty()) {
    std::cout << "detail:       " << report.detail << "\n";
  }
  for (const auto& [trace, iters] : report.iterations) {
    std::cout << "iterations:   " << trace << " -> " << iters << "\n";
  }
  for (const auto& [robot, count] : report.instruction_counts) {
    std::cout << "instructions: " << robot << " -> " << count << "\n";
  }
  std::cout << "wall:         " << report.wall_ms << " ms\n";
  if (!report.task_dir.empty()) {
    std::cout << "artifacts:    " << report.task_dir.string() << "\n";
  }
}

int cmd_run_scenario(const std::string& name, const std::string& config_path,
                     const std::string& share, const std::string& out_dir,
                     bool tcp, bool as_json) {
  const auto config = load_config_or_default(config_path);
  hiertask::ScenarioRunOptions opts;
  opts.share_dir = share;
  opts.scenario = name;
  opts.out_dir = out_dir;
  opts.tcp = tcp || config.transport == "tcp";
  opts.orchestrator = config.orchestrator;
  const auto report = hiertask::run_scenario(opts);
  print_report(report, as_json);
  return report.done ? kExitDone : kExitTaskFailed;
}

int cmd_serve(const std::string& tier, const std::string& config_path,
              const std::string& share) {
  const auto config = load_config_or_default(config_path);
  const std::filesystem::path base = share;

  auto resolve = [&](const std::string& p) {
    std::filesystem::path path = p;
    return path.is_relative() ? base / path : path;
  };

  if (tier == "cloud") {
    auto rules = config.rules_path.empty()
                     ? hiertask::RuleSet{}
                     : hiertask::RuleSet::load(resolve(config.rules_path));
    hiertask::CloudService cloud(std::move(rules), {config.fleet});
    auto [host, port] = hiertask::parse_address(config.cloud_addr);
    hiertask::TcpListener listener(host, port);
    std::cerr << "cloud listening on " << host << ":" << listener.bound_port()
              << "\n";
    cloud.serve(listener);
    return kExitDone;
  }
  if (tier == "device") {
    if (config.world_path.empty()) {
      throw hiertask::ConfigError("device tier needs paths.world");
    }
    hiertask::DeviceService device(
        hiertask::World::load(resolve(config.world_path)));
    auto [host, port] = hiertask::parse_address(config.device_addr);
    hiertask::TcpListener listener(host, port);
    std::cerr << "device listening on " << host << ":" << listener.bound_port()
              << "\n";
    device.serve(listener);
    return kExitDone;
  }
  if (tier == "edge") {
    if (config.skills_path.empty()) {
      throw hiertask::ConfigError("edge tier needs paths.skills");
    }
    auto registry = hiertask::SkillRegistry::load(resolve(config.skills_path));
    auto planner = hiertask::make_planner(config.planner, base);
    hiertask::EdgeOptions opts;
    opts.orchestrator = config.orchestrator;
    opts.out_dir = config.out_dir;
    auto [cloud_host, cloud_port] = hiertask::parse_address(config.cloud_addr);
    auto [dev_host, dev_port] = hiertask::parse_address(config.device_addr);
    hiertask::EdgeService edge(
        std::move(registry), {config.fleet}, std::move(planner), opts,
        [=] { return hiertask::tcp_dial(cloud_host, cloud_port); },
        [=] { return hiertask::tcp_dial(dev_host, dev_port); });
    auto [host, port] = hiertask::parse_address(config.edge_addr);
    hiertask::TcpListener listener(host, port);
    std::cerr << "edge listening on " << host << ":" << listener.bound_port()
              << "\n";
    edge.serve(listener);
    return kExitDone;
  }
  std::cerr << "unknown tier \"" << tier << "\" (want cloud|edge|device)\n";
  return kExitUsage;
}

int cmd_submit(const std::string& text, const std::string& edge_addr,
               const std::string& task_id, bool as_json) {
  hiertask::TaskSpec task{task_id, text, "cli", {}};
  const auto report = hiertask::submit_task(edge_addr, task);
  print_report(report, as_json);
  return report.done ? kExitDone : kExitTaskFailed;
}

int cmd_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open trace file: " << path << "\n";
    return kExitUsage;
  }
  nlohmann::json trace;
  try {
    in >> trace;
    std::cout << "task " << trace.at("task_id").get<std::string>() << "  robot "
              << trace.at("robot_id").get<std::string>() << " ("
              << trace.at("robot_class").get<std::string>() << ")  phase "
              << trace.at("phase").get<std::string>() << "\n";
    std::cout << "goal: " << trace.at("goal").get<std::string>() << "\n";
    std::cout << "threshold " << trace.at("threshold").get<double>()
              << "  max_depth " << trace.at("max_depth").get<int>()
              << "  max_iterations " << trace.at("max_iterations").get<int>()
              << "\n";
    const auto& root = trace.at("root");
    std::cout << "root " << root.at("node_id").get<std::string>() << ": "
              << root.at("text").get<std::string>() << "\n";
    for (const auto& child : trace.at("root_expansion")) {
      std::cout << "  +- " << child.at("node_id").get<std::string>() << ": "
                << child.at("text").get<std::string>() << "\n";
    }
    for (const auto& iter : trace.at("iterations")) {
      std::cout << "iteration " << iter.at("iteration").get<int>() << "\n";
      for (const auto& score : iter.at("scores")) {
        std::cout << "  " << score.at("node_id").get<std::string>()
                  << "  best=" << score.at("best_skill").get<std::string>()
                  << "  score=" << score.at("best_score").get<double>()
                  << (score.at("flagged").get<bool>() ? "  FLAGGED" : "")
                  << "\n";
      }
      for (const auto& exp : iter.at("expansions")) {
        std::cout << "  expand " << exp.at("parent").get<std::string>() << ":";
        for (const auto& child : exp.at("children")) {
          std::cout << " [" << child.at("node_id").get<std::string>() << " "
                    << child.at("text").get<std::string>() << "]";
        }
        std::cout << "\n";
      }
      const auto flagged = iter.at("flagged").size();
      std::cout << "  flagged nodes: " << flagged << "\n";
    }
    const auto verdict = trace.at("verdict").get<std::string>();
    std::cout << "verdict: " << verdict;
    if (!trace.at("failed_node").is_null()) {
      std::cout << " (exhausted node "
                << trace.at("failed_node").get<std::string>() << ")";
    }
    std::cout << "\n";
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "malformed trace file: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitDone;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical cloud-edge-device task orchestration"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string share = default_share_dir();
  app.add_option("--config", config_path,
                 "config file (fallback: $HIERTASK_CONFIG)");
  app.add_option("--share", share, "fixture directory")
      ->envname("HIERTASK_SHARE");

  auto* run = app.add_subcommand("run-scenario", "run a bundled scenario");
  std::string scenario;
  std::string out_dir = "runs";
  bool tcp = false;
  bool as_json = false;
  run->add_option("name", scenario, "scenario name");
  run->add_option("--scenario", scenario, "scenario name (flag form)");
  run->add_option("--out-dir", out_dir, "artifact directory");
  run->add_flag("--tcp", tcp, "use TCP loopback instead of in-process");
  run->add_flag("--json", as_json, "machine-readable report");

  auto* serve = app.add_subcommand("serve", "run one tier over TCP");
  std::string tier;
  serve->add_option("tier", tier, "cloud|edge|device")->required();

  auto* submit = app.add_subcommand("submit", "submit a task to an edge");
  std::string task_text;
  std::string edge_addr = "127.0.0.1:7102";
  std::string task_id = "task-1";
  bool submit_json = false;
  submit->add_option("task", task_text, "task description")->required();
  submit->add_option("--edge-addr", edge_addr, "edge host:port");
  submit->add_option("--task-id", task_id, "task id for the request");
  submit->add_flag("--json", submit_json, "machine-readable report");

  auto* trace = app.add_subcommand("trace", "pretty-print a refinement trace");
  std::string trace_path;
  trace->add_option("file", trace_path, "trace JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (run->parsed()) {
      if (scenario.empty()) {
        std::cerr << "run-scenario needs a scenario name\n";
        return kExitUsage;
      }
      return cmd_run_scenario(scenario, config_path, share, out_dir, tcp,
                              as_json);
    }
    if (serve->parsed()) return cmd_serve(tier, config_path, share);
    if (submit->parsed()) {
      return cmd_submit(task_text, edge_addr, task_id, submit_json);
    }
    if (trace->parsed()) return cmd_trace(trace_path);
  } catch (const hiertask::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const hiertask::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
