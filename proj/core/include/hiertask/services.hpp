#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <set>
#include <string>

#include "hiertask/cloud_policy.hpp"
#include "hiertask/orchestrator.hpp"
#include "hiertask/transport.hpp"
#include "hiertask/world.hpp"

namespace hiertask {

/// Sink for wire logging: peer is the remote tier name, dir "in"/"out".
using MessageLogFn = std::function<void(const std::string& peer,
                                        const std::string& dir,
                                        const Envelope& e)>;

/// Strategy generator behind a request-reply loop. Stateless between
/// requests; one connection served at a time.
class CloudService {
 public:
  CloudService(RuleSet rules, FleetDescriptor fleet)
      : rules_(std::move(rules)), fleet_(std::move(fleet)) {}

  void set_message_log(MessageLogFn log) { log_ = std::move(log); }

  void serve(Acceptor& acceptor);
  void handle_connection(Channel& ch);

 private:
  RuleSet rules_;
  FleetDescriptor fleet_;
  MessageLogFn log_;
  int msg_counter_ = 0;
  std::string next_id() { return "cloud-" + std::to_string(++msg_counter_); }
};

/// Owns the world and drives it while dispatched sequences are active.
/// Dispatches buffer until the final_in_batch flag so every robot of a
/// phase starts on the same tick regardless of transport timing.
class DeviceService {
 public:
  explicit DeviceService(World world) : world_(std::move(world)) {}

  void set_message_log(MessageLogFn log) { log_ = std::move(log); }

  void serve(Acceptor& acceptor);
  void handle_connection(Channel& ch);

  const World& world() const { return world_; }

 private:
  struct BatchEntry {
    std::string robot_id;
    std::string dispatch_msg_id;  // per-robot Status correlates to this
  };

  void run_batch(Channel& ch, const std::vector<BatchEntry>& robots,
                 const std::string& task_id);

  World world_;
  MessageLogFn log_;
  int msg_counter_ = 0;
  std::string next_id() { return "device-" + std::to_string(++msg_counter_); }
};

struct EdgeOptions {
  OrchestratorConfig orchestrator;
  std::filesystem::path out_dir;  // per-task artifact directories live here
};

/// The edge tier: forwards task requests to the cloud, refines each robot
/// policy phase by phase (folding survey observations into its environment
/// store between phases), dispatches instruction sequences to the device,
/// and reports a final task Status. Duplicate TaskRequest msg-ids are
/// acknowledged and ignored.
class EdgeService {
 public:
  EdgeService(SkillRegistry registry, FleetDescriptor fleet,
              std::unique_ptr<Planner> planner, EdgeOptions options,
              std::function<ChannelPtr()> dial_cloud,
              std::function<ChannelPtr()> dial_device)
      : registry_(std::move(registry)),
        fleet_(std::move(fleet)),
        planner_(std::move(planner)),
        options_(std::move(options)),
        dial_cloud_(std::move(dial_cloud)),
        dial_device_(std::move(dial_device)) {}

  void set_message_log(MessageLogFn log) { log_ = std::move(log); }

  void serve(Acceptor& acceptor);
  void handle_connection(Channel& client);

 private:
  Envelope handle_task(const Envelope& request);
  ChannelPtr open_logged(const std::function<ChannelPtr()>& dial,
                         const std::string& peer);

  SkillRegistry registry_;
  FleetDescriptor fleet_;
  std::unique_ptr<Planner> planner_;
  EdgeOptions options_;
  std::function<ChannelPtr()> dial_cloud_;
  std::function<ChannelPtr()> dial_device_;
  MessageLogFn log_;
  std::set<std::string> seen_task_msgs_;
  int msg_counter_ = 0;
  std::string next_id() { return "edge-" + std::to_string(++msg_counter_); }
};

/// Builds an envelope with the service-local msg id.
Envelope make_envelope(MsgType type, std::string msg_id,
                       nlohmann::json payload,
                       std::optional<std::string> correlates_to = {});

}  // namespace hiertask
