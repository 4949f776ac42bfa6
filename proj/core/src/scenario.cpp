#include "hiertask/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include "hiertask/errors.hpp"
#include "hiertask/services.hpp"
#include "hiertask/world.hpp"

namespace hiertask {

nlohmann::json RunReport::to_json() const {
  return {{"scenario", scenario},
          {"task_id", task_id},
          {"verdict", done ? "done" : "failed"},
          {"detail", detail},
          {"iterations", iterations},
          {"instruction_counts", instruction_counts},
          {"wall_ms", wall_ms},
          {"task_dir", task_dir.string()},
          {"traces", trace_files},
          {"observations", observations_file}};
}

std::vector<std::string> list_scenarios(const std::filesystem::path& share) {
  std::vector<std::string> names;
  const auto dir = share / "scenarios";
  if (!std::filesystem::is_directory(dir)) return names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") {
      names.push_back(entry.path().stem().string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

namespace {

struct ScenarioFixture {
  TaskSpec task;
  FleetDescriptor fleet;
  SkillRegistry registry;
  PlannerTemplateSet templates;
  RuleSet rules;
  World world;
};

ScenarioFixture load_fixture(const std::filesystem::path& share,
                             const std::string& name) {
  const auto path = share / "scenarios" / (name + ".json");
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("unknown scenario \"" + name + "\" (no " +
                      path.string() + ")");
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario file " + path.string() + ": " + e.what());
  }

  ScenarioFixture fix;
  const auto& t = doc.at("task");
  fix.task = {t.at("id").get<std::string>(),
              t.at("description").get<std::string>(),
              t.value("issued_by", "operator"),
              t.value("constraints", std::vector<std::string>{})};
  for (const auto& r : doc.at("fleet")) {
    fix.fleet.robots.push_back(
        {r.at("id").get<std::string>(),
         robot_class_from_string(r.at("class").get<std::string>())});
  }
  fix.registry = SkillRegistry::load(share / doc.at("skills").get<std::string>());
  fix.templates =
      PlannerTemplateSet::load(share / doc.at("templates").get<std::string>());
  fix.rules = RuleSet::load(share / doc.at("rules").get<std::string>());
  fix.world = World::load(share / doc.at("world").get<std::string>());
  return fix;
}

/// Appends {"dir","peer","envelope"} lines; one writer per service loop.
class MessageLogFile {
 public:
  explicit MessageLogFile(const std::filesystem::path& path) : out_(path) {}

  MessageLogFn fn() {
    return [this](const std::string& peer, const std::string& dir,
                  const Envelope& e) {
      std::lock_guard lock(mu_);
      nlohmann::json line = {{"peer", peer},
                             {"dir", dir},
                             {"envelope", nlohmann::json::parse(encode(e))}};
      out_ << line.dump() << "\n";
    };
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

RunReport finish_report(RunReport report, const Envelope& reply,
                        const std::filesystem::path& task_dir) {
  report.task_dir = task_dir;
  if (reply.type == MsgType::Error) {
    report.done = false;
    report.detail = reply.payload.value("message", "error");
    return report;
  }
  report.done = reply.payload.value("state", "") == "done";
  report.detail = reply.payload.value("detail", "");
  if (reply.payload.contains("traces")) {
    report.trace_files =
        reply.payload.at("traces").get<std::vector<std::string>>();
  }
  report.observations_file = reply.payload.value("observations", "");
  for (const auto& name : report.trace_files) {
    std::ifstream in(task_dir / name);
    if (!in) continue;
    nlohmann::json trace;
    in >> trace;
    report.iterations[name] =
        static_cast<int>(trace.at("iterations").size());
  }
  std::ifstream seqs(task_dir / "sequences.json");
  if (seqs) {
    nlohmann::json doc;
    seqs >> doc;
    for (const auto& s : doc) {
      report.instruction_counts[s.at("robot_id").get<std::string>()] +=
          static_cast<int>(s.at("instructions").size());
    }
  }
  return report;
}

}  // namespace

RunReport run_scenario(const ScenarioRunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  auto fix = load_fixture(options.share_dir, options.scenario);

  std::filesystem::create_directories(options.out_dir);
  const auto task_dir = options.out_dir / fix.task.id;
  std::filesystem::create_directories(task_dir);

  MessageLogFile cloud_log(task_dir / "messages_cloud.jsonl");
  MessageLogFile device_log(task_dir / "messages_device.jsonl");
  MessageLogFile edge_log(task_dir / "messages_edge.jsonl");

  CloudService cloud(std::move(fix.rules), fix.fleet);
  cloud.set_message_log(cloud_log.fn());
  DeviceService device(std::move(fix.world));
  device.set_message_log(device_log.fn());

  EdgeOptions edge_opts;
  edge_opts.orchestrator = options.orchestrator;
  edge_opts.out_dir = options.out_dir;

  RunReport report;
  report.scenario = options.scenario;
  report.task_id = fix.task.id;

  Envelope reply;
  auto planner = std::make_unique<MockPlanner>(std::move(fix.templates));

  if (!options.tcp) {
    auto cloud_ep = make_in_process_endpoint();
    auto device_ep = make_in_process_endpoint();
    auto edge_ep = make_in_process_endpoint();

    EdgeService edge(std::move(fix.registry), fix.fleet, std::move(planner),
                     edge_opts, cloud_ep.dial, device_ep.dial);
    edge.set_message_log(edge_log.fn());

    std::thread cloud_thread([&] { cloud.serve(*cloud_ep.acceptor); });
    std::thread device_thread([&] { device.serve(*device_ep.acceptor); });
    std::thread edge_thread([&] { edge.serve(*edge_ep.acceptor); });

    {
      auto client = edge_ep.dial();
      client->send(make_envelope(
          MsgType::TaskRequest, "client-1",
          {{"task",
            {{"id", fix.task.id},
             {"description", fix.task.description},
             {"issued_by", fix.task.issued_by},
             {"constraints", fix.task.constraints}}}}));
      auto resp = client->receive();
      if (!resp) throw ConfigError("edge closed without a reply");
      reply = *resp;
      client->close();
    }
    cloud_ep.acceptor->close();
    device_ep.acceptor->close();
    edge_ep.acceptor->close();
    cloud_thread.join();
    device_thread.join();
    edge_thread.join();
  } else {
    TcpListener cloud_listener("127.0.0.1", 0);
    TcpListener device_listener("127.0.0.1", 0);
    TcpListener edge_listener("127.0.0.1", 0);
    const int cloud_port = cloud_listener.bound_port();
    const int device_port = device_listener.bound_port();
    const int edge_port = edge_listener.bound_port();

    EdgeService edge(
        std::move(fix.registry), fix.fleet, std::move(planner), edge_opts,
        [cloud_port] { return tcp_dial("127.0.0.1", cloud_port); },
        [device_port] { return tcp_dial("127.0.0.1", device_port); });
    edge.set_message_log(edge_log.fn());

    std::thread cloud_thread([&] { cloud.serve(cloud_listener); });
    std::thread device_thread([&] { device.serve(device_listener); });
    std::thread edge_thread([&] { edge.serve(edge_listener); });

    {
      auto client = tcp_dial("127.0.0.1", edge_port);
      client->send(make_envelope(
          MsgType::TaskRequest, "client-1",
          {{"task",
            {{"id", fix.task.id},
             {"description", fix.task.description},
             {"issued_by", fix.task.issued_by},
             {"constraints", fix.task.constraints}}}}));
      auto resp = client->receive();
      if (!resp) throw ConfigError("edge closed without a reply");
      reply = *resp;
      client->close();
    }
    cloud_listener.close();
    device_listener.close();
    edge_listener.close();
    cloud_thread.join();
    device_thread.join();
    edge_thread.join();
  }

  {
    std::ofstream out(task_dir / "world_final.json");
    out << device.world().state_to_json().dump(2) << "\n";
  }

  report = finish_report(std::move(report), reply, task_dir);
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

RunReport submit_task(const std::string& edge_addr, const TaskSpec& task) {
  const auto start = std::chrono::steady_clock::now();
  auto [host, port] = parse_address(edge_addr);
  auto client = tcp_dial(host, port);
  client->send(make_envelope(MsgType::TaskRequest, "client-1",
                             {{"task",
                               {{"id", task.id},
                                {"description", task.description},
                                {"issued_by", task.issued_by},
                                {"constraints", task.constraints}}}}));
  auto resp = client->receive();
  client->close();
  if (!resp) throw ConfigError("edge closed without a reply");

  RunReport report;
  report.scenario = "(submitted)";
  report.task_id = task.id;
  if (resp->type == MsgType::Error) {
    report.done = false;
    report.detail = resp->payload.value("message", "error");
  } else {
    report.done = resp->payload.value("state", "") == "done";
    report.detail = resp->payload.value("detail", "");
    if (resp->payload.contains("traces")) {
      report.trace_files =
          resp->payload.at("traces").get<std::vector<std::string>>();
    }
    report.observations_file = resp->payload.value("observations", "");
  }
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

}  // namespace hiertask
