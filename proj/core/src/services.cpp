#include "hiertask/services.hpp"

#include <chrono>
#include <fstream>
#include <map>

#include "hiertask/errors.hpp"

namespace hiertask {

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

TaskSpec task_from_payload(const nlohmann::json& payload) {
  const auto& t = payload.at("task");
  TaskSpec task;
  task.id = t.at("id").get<std::string>();
  task.description = t.at("description").get<std::string>();
  task.issued_by = t.value("issued_by", "");
  if (t.contains("constraints")) {
    task.constraints = t.at("constraints").get<std::vector<std::string>>();
  }
  if (task.description.empty()) {
    throw ContractError("task description must be non-empty");
  }
  return task;
}

ChannelPtr wrap_logged(ChannelPtr ch, const MessageLogFn& log,
                       const std::string& peer) {
  if (!log) return ch;
  return std::make_unique<LoggingChannel>(
      std::move(ch), [log, peer](const std::string& dir, const Envelope& e) {
        log(peer, dir, e);
      });
}

}  // namespace

Envelope make_envelope(MsgType type, std::string msg_id,
                       nlohmann::json payload,
                       std::optional<std::string> correlates_to) {
  Envelope e;
  e.type = type;
  e.msg_id = std::move(msg_id);
  e.correlates_to = std::move(correlates_to);
  e.sent_at = now_ms();
  e.payload = std::move(payload);
  return e;
}

// -------------------------------------------------------------------- cloud

void CloudService::serve(Acceptor& acceptor) {
  while (auto conn = acceptor.accept()) {
    auto ch = wrap_logged(std::move(conn), log_, "edge");
    handle_connection(*ch);
  }
}

void CloudService::handle_connection(Channel& ch) {
  for (;;) {
    std::optional<Envelope> msg;
    try {
      msg = ch.receive();
    } catch (const DecodeError& e) {
      ch.send(make_envelope(MsgType::Error, next_id(),
                            {{"message", e.what()},
                             {"byte_offset", e.byte_offset}}));
      continue;
    }
    if (!msg) return;
    if (msg->type != MsgType::TaskRequest) {
      ch.send(make_envelope(MsgType::Error, next_id(),
                            {{"message", "cloud expects TaskRequest, got " +
                                             to_string(msg->type)}},
                            msg->msg_id));
      continue;
    }
    try {
      const TaskSpec task = task_from_payload(msg->payload);
      const Strategy strategy = generate_strategy(task, fleet_, rules_);
      ch.send(make_envelope(MsgType::StrategyResponse, next_id(),
                            {{"strategy", strategy_to_json(strategy)}},
                            msg->msg_id));
    } catch (const Error& e) {
      ch.send(make_envelope(MsgType::Error, next_id(),
                            {{"message", e.what()}}, msg->msg_id));
    }
  }
}

// ------------------------------------------------------------------- device

void DeviceService::serve(Acceptor& acceptor) {
  while (auto conn = acceptor.accept()) {
    auto ch = wrap_logged(std::move(conn), log_, "edge");
    handle_connection(*ch);
  }
}

void DeviceService::run_batch(Channel& ch,
                              const std::vector<BatchEntry>& robots,
                              const std::string& task_id) {
  world_.set_observer([&](const Observation& obs) {
    ch.send(make_envelope(MsgType::Observation, next_id(),
                          {{"observation", to_json_line(obs)}}));
  });
  auto executing = [&] {
    for (const auto& entry : robots) {
      const auto* r = world_.find_robot(entry.robot_id);
      if (r && r->status == RobotStatus::executing) return true;
    }
    return false;
  };
  while (executing()) world_.step(1.0);
  world_.set_observer(nullptr);

  for (const auto& entry : robots) {
    const auto* r = world_.find_robot(entry.robot_id);
    nlohmann::json payload = {{"scope", "sequence"},
                              {"robot_id", entry.robot_id},
                              {"task_id", task_id}};
    if (r->status == RobotStatus::failed) {
      payload["state"] = "failed";
      payload["failed_index"] = world_.failed_index(entry.robot_id);
    } else {
      payload["state"] = "done";
    }
    ch.send(make_envelope(MsgType::Status, next_id(), std::move(payload),
                          entry.dispatch_msg_id));
  }
}

void DeviceService::handle_connection(Channel& ch) {
  std::vector<BatchEntry> batch;
  std::string batch_task_id;
  for (;;) {
    std::optional<Envelope> msg;
    try {
      msg = ch.receive();
    } catch (const DecodeError& e) {
      ch.send(make_envelope(MsgType::Error, next_id(),
                            {{"message", e.what()},
                             {"byte_offset", e.byte_offset}}));
      continue;
    }
    if (!msg) return;
    if (msg->type != MsgType::InstructionDispatch) {
      ch.send(make_envelope(MsgType::Error, next_id(),
                            {{"message", "device expects InstructionDispatch"}},
                            msg->msg_id));
      continue;
    }
    const auto& payload = msg->payload;
    const std::string robot_id = payload.value("robot_id", "");
    if (!world_.find_robot(robot_id)) {
      ch.send(make_envelope(MsgType::Error, next_id(),
                            {{"message",
                              "dispatch for unknown robot-id: " + robot_id}},
                            msg->msg_id));
      continue;
    }
    try {
      const auto seq = sequence_from_json(payload.at("sequence"));
      world_.assign_sequence(robot_id, seq);
      batch.push_back({robot_id, msg->msg_id});
      batch_task_id = payload.value("task_id", batch_task_id);
    } catch (const Error& e) {
      ch.send(make_envelope(MsgType::Error, next_id(),
                            {{"message", e.what()}}, msg->msg_id));
      continue;
    }
    if (payload.value("final_in_batch", true)) {
      run_batch(ch, batch, batch_task_id);
      batch.clear();
    }
  }
}

// --------------------------------------------------------------------- edge

void EdgeService::serve(Acceptor& acceptor) {
  while (auto conn = acceptor.accept()) {
    auto ch = wrap_logged(std::move(conn), log_, "client");
    handle_connection(*ch);
  }
}

ChannelPtr EdgeService::open_logged(const std::function<ChannelPtr()>& dial,
                                    const std::string& peer) {
  return wrap_logged(dial(), log_, peer);
}

void EdgeService::handle_connection(Channel& client) {
  for (;;) {
    std::optional<Envelope> msg;
    try {
      msg = client.receive();
    } catch (const DecodeError& e) {
      client.send(make_envelope(MsgType::Error, next_id(),
                                {{"message", e.what()},
                                 {"byte_offset", e.byte_offset}}));
      continue;
    }
    if (!msg) return;
    if (msg->type != MsgType::TaskRequest) {
      client.send(make_envelope(MsgType::Error, next_id(),
                                {{"message", "edge expects TaskRequest"}},
                                msg->msg_id));
      continue;
    }
    if (seen_task_msgs_.contains(msg->msg_id)) {
      // duplicate delivery: acknowledge, change nothing
      client.send(make_envelope(MsgType::Ack, next_id(),
                                nlohmann::json::object(), msg->msg_id));
      continue;
    }
    seen_task_msgs_.insert(msg->msg_id);
    client.send(handle_task(*msg));
  }
}

Envelope EdgeService::handle_task(const Envelope& request) {
  auto error_reply = [&](const std::string& message) {
    return make_envelope(MsgType::Error, next_id(), {{"message", message}},
                         request.msg_id);
  };

  TaskSpec task;
  try {
    task = task_from_payload(request.payload);
  } catch (const std::exception& e) {
    return error_reply(std::string("bad TaskRequest: ") + e.what());
  }

  // ask the cloud for the strategy
  Strategy strategy;
  try {
    // a fresh request on the cloud connection: correlates-to must only
    // reference ids already seen on the same connection
    auto cloud = open_logged(dial_cloud_, "cloud");
    cloud->send(
        make_envelope(MsgType::TaskRequest, next_id(), request.payload));
    auto resp = cloud->receive();
    cloud->close();
    if (!resp) return error_reply("cloud unreachable: connection closed");
    if (resp->type == MsgType::Error) {
      return error_reply("cloud error: " +
                         resp->payload.value("message", "unknown"));
    }
    if (resp->type != MsgType::StrategyResponse) {
      return error_reply("unexpected cloud reply: " + to_string(resp->type));
    }
    strategy = strategy_from_json(resp->payload.at("strategy"));
  } catch (const Error& e) {
    return error_reply(std::string("cloud unreachable: ") + e.what());
  }

  const auto task_dir = options_.out_dir / task.id;
  std::filesystem::create_directories(task_dir);
  std::ofstream obs_log(task_dir / "observations.jsonl");
  nlohmann::json sequences_doc = nlohmann::json::array();
  std::vector<std::string> trace_files;

  auto write_sequences = [&] {
    std::ofstream out(task_dir / "sequences.json");
    out << sequences_doc.dump(2) << "\n";
  };
  auto status_reply = [&](bool done, const std::string& detail) {
    write_sequences();
    nlohmann::json payload = {{"scope", "task"},
                              {"state", done ? "done" : "failed"},
                              {"task_id", task.id},
                              {"traces", trace_files},
                              {"observations", "observations.jsonl"}};
    if (!detail.empty()) payload["detail"] = detail;
    return make_envelope(MsgType::Status, next_id(), std::move(payload),
                         request.msg_id);
  };

  ChannelPtr device;
  try {
    device = open_logged(dial_device_, "device");
  } catch (const Error& e) {
    return error_reply(std::string("device unreachable: ") + e.what());
  }

  EnvironmentSnapshot env;  // starts empty; surveys fill it in
  for (const auto& phase : strategy.phases) {
    // refine and dispatch every policy of this phase
    std::vector<InstructionSequence> dispatches;
    for (const auto& policy : strategy.policies) {
      if (policy.phase != phase.name) continue;
      const auto* robot = fleet_.find(policy.robot_id);
      if (!robot) {
        return error_reply("policy names robot outside the fleet: " +
                           policy.robot_id);
      }
      RefineResult result;
      try {
        result = refine_task(task, policy, robot->robot_class, env, registry_,
                             *planner_, options_.orchestrator);
      } catch (const Error& e) {
        return error_reply(std::string("refinement error: ") + e.what());
      }
      const std::string trace_name =
          "trace_" + policy.robot_id + "_" + policy.phase + ".json";
      {
        std::ofstream out(task_dir / trace_name);
        out << trace_to_json(result.trace).dump(2) << "\n";
      }
      trace_files.push_back(trace_name);
      if (result.tree.verdict != Verdict::converged) {
        device->close();
        return status_reply(false, "refinement verdict " +
                                       to_string(result.tree.verdict) +
                                       " for robot " + policy.robot_id +
                                       " in phase " + policy.phase);
      }
      try {
        auto seqs = emit_sequences(result.tree, env, registry_);
        for (auto& seq : seqs) {
          auto doc = sequence_to_json(seq);
          doc["phase"] = policy.phase;
          sequences_doc.push_back(std::move(doc));
          dispatches.push_back(std::move(seq));
        }
      } catch (const Error& e) {
        device->close();
        return status_reply(false, std::string("grounding error: ") + e.what());
      }
    }

    for (std::size_t i = 0; i < dispatches.size(); ++i) {
      device->send(make_envelope(
          MsgType::InstructionDispatch, next_id(),
          {{"robot_id", dispatches[i].robot_id},
           {"sequence", sequence_to_json(dispatches[i])},
           {"task_id", task.id},
           {"final_in_batch", i + 1 == dispatches.size()}}));
    }

    // collect the phase's observations and per-robot statuses
    std::set<std::string> pending;
    for (const auto& d : dispatches) pending.insert(d.robot_id);
    bool robot_failed = false;
    std::string failure_detail;
    while (!pending.empty()) {
      auto msg = device->receive();
      if (!msg) {
        device->close();
        return status_reply(false, "device connection lost mid-phase");
      }
      if (msg->type == MsgType::Observation) {
        const auto obs = observation_from_json(msg->payload.at("observation"));
        obs_log << to_json_line(obs).dump() << "\n";
        if (obs.kind == ObsKind::survey_result) {
          for (const auto& oj : obs.payload.at("objects")) {
            const auto obj = oj.get<EnvObject>();
            bool known = false;
            for (const auto& e : env.objects) known |= e.id == obj.id;
            if (!known) env.objects.push_back(obj);
          }
          env.as_of_tick = obs.tick;
        }
        if ((obs.kind == ObsKind::pose || obs.kind == ObsKind::skill_done) &&
            obs.payload.contains("position")) {
          env.robot_poses[obs.robot_id] =
              obs.payload.at("position").get<Vec2>();
          env.as_of_tick = obs.tick;
        }
      } else if (msg->type == MsgType::Status) {
        const std::string rid = msg->payload.value("robot_id", "");
        pending.erase(rid);
        if (msg->payload.value("state", "") == "failed") {
          robot_failed = true;
          failure_detail =
              "robot " + rid + " failed at instruction " +
              std::to_string(msg->payload.value("failed_index", -1));
        }
      } else if (msg->type == MsgType::Error) {
        device->close();
        return status_reply(false, "device error: " +
                                       msg->payload.value("message", ""));
      }
    }
    if (robot_failed) {
      device->close();
      return status_reply(false, failure_detail);
    }
  }

  device->close();
  return status_reply(true, "");
}

}  // namespace hiertask
