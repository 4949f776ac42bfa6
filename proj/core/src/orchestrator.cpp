#include "hiertask/orchestrator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <set>

#include "hiertask/errors.hpp"
#include "hiertask/similarity.hpp"
#include "hiertask/vectorizer.hpp"

namespace hiertask {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::depth_exhausted: return "depth_exhausted";
    case Verdict::planner_failed: return "planner_failed";
  }
  return "depth_exhausted";
}

nlohmann::json to_json_value(const ArgValue& a) {
  nlohmann::json j = {{"kind", to_string(a.kind)}};
  switch (a.kind) {
    case ParamKind::scalar:
      j["value"] = std::get<double>(a.value);
      break;
    case ParamKind::coordinate2d:
      j["value"] = std::get<Vec2>(a.value);
      break;
    case ParamKind::object_ref:
    case ParamKind::text:
      j["value"] = std::get<std::string>(a.value);
      break;
  }
  return j;
}

ArgValue arg_from_json(const nlohmann::json& j) {
  ArgValue a;
  a.kind = param_kind_from_string(j.at("kind").get<std::string>());
  switch (a.kind) {
    case ParamKind::scalar:
      a.value = j.at("value").get<double>();
      break;
    case ParamKind::coordinate2d:
      a.value = j.at("value").get<Vec2>();
      break;
    case ParamKind::object_ref:
    case ParamKind::text:
      a.value = j.at("value").get<std::string>();
      break;
  }
  return a;
}

nlohmann::json sequence_to_json(const InstructionSequence& seq) {
  nlohmann::json instrs = nlohmann::json::array();
  for (const auto& ins : seq.instructions) {
    nlohmann::json args = nlohmann::json::array();
    for (const auto& a : ins.args) args.push_back(to_json_value(a));
    instrs.push_back({{"seq_index", ins.seq_index},
                      {"robot_id", ins.robot_id},
                      {"skill_id", ins.skill_id},
                      {"args", args}});
  }
  return {{"robot_id", seq.robot_id}, {"instructions", instrs}};
}

InstructionSequence sequence_from_json(const nlohmann::json& j) {
  InstructionSequence seq;
  seq.robot_id = j.at("robot_id").get<std::string>();
  for (const auto& ij : j.at("instructions")) {
    Instruction ins;
    ins.seq_index = ij.at("seq_index").get<int>();
    ins.robot_id = ij.at("robot_id").get<std::string>();
    ins.skill_id = ij.at("skill_id").get<std::string>();
    for (const auto& aj : ij.at("args")) ins.args.push_back(arg_from_json(aj));
    seq.instructions.push_back(std::move(ins));
  }
  return seq;
}

namespace {

nlohmann::json node_refs_json(const std::vector<TraceNodeRef>& refs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : refs) {
    arr.push_back({{"node_id", r.node_id}, {"text", r.text}});
  }
  return arr;
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc;
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

nlohmann::json trace_to_json(const RefinementTrace& trace,
                             bool include_generated_at) {
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& it : trace.iterations) {
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& s : it.scores) {
      scores.push_back({{"node_id", s.node_id},
                        {"best_skill", s.best_skill},
                        {"best_score", s.best_score},
                        {"flagged", s.flagged}});
    }
    nlohmann::json expansions = nlohmann::json::array();
    for (const auto& e : it.expansions) {
      expansions.push_back(
          {{"parent", e.parent}, {"children", node_refs_json(e.children)}});
    }
    iters.push_back({{"iteration", it.iteration},
                     {"embedded", node_refs_json(it.embedded)},
                     {"scores", scores},
                     {"flagged", it.flagged},
                     {"expansions", expansions}});
  }
  nlohmann::json bound = nlohmann::json::array();
  for (const auto& b : trace.bound) {
    bound.push_back(
        {{"node_id", b.node_id}, {"skill", b.skill}, {"score", b.score}});
  }
  nlohmann::json j = {
      {"task_id", trace.task_id},
      {"robot_id", trace.robot_id},
      {"robot_class", to_string(trace.robot_class)},
      {"phase", trace.phase},
      {"goal", trace.goal},
      {"threshold", trace.threshold},
      {"max_depth", trace.max_depth},
      {"max_iterations", trace.max_iterations},
      {"verdict", to_string(trace.verdict)},
      {"failed_node", trace.failed_node ? nlohmann::json(*trace.failed_node)
                                        : nlohmann::json(nullptr)},
      {"root", {{"node_id", trace.root.node_id}, {"text", trace.root.text}}},
      {"root_expansion", node_refs_json(trace.root_expansion)},
      {"iterations", iters},
      {"bound", bound},
  };
  if (trace.planner_error) j["planner_error"] = *trace.planner_error;
  if (include_generated_at) j["generated_at"] = iso8601_now();
  return j;
}

namespace {

void collect_raw_leaves(SubtaskNode& node, std::vector<SubtaskNode*>& out) {
  if (node.is_leaf()) {
    if (node.status == NodeStatus::raw) out.push_back(&node);
    return;
  }
  for (auto& c : node.children) collect_raw_leaves(c, out);
}

void collect_bound_leaves(SubtaskNode& node, std::vector<SubtaskNode*>& out) {
  if (node.is_leaf()) {
    if (node.status == NodeStatus::bound) out.push_back(&node);
    return;
  }
  for (auto& c : node.children) collect_bound_leaves(c, out);
}

}  // namespace

RefineResult refine_task(const TaskSpec& task, const RobotPolicy& policy,
                         RobotClass robot_class,
                         const EnvironmentSnapshot& env,
                         const SkillRegistry& registry, Planner& planner,
                         const OrchestratorConfig& config) {
  const auto skill_hints = registry.for_class(robot_class);
  if (skill_hints.empty()) {
    throw ConfigError("no skills registered for robot class " +
                      to_string(robot_class));
  }
  const auto skill_vectors = registry.vectors_for_class(robot_class);

  RefineResult result;
  auto& tree = result.tree;
  auto& trace = result.trace;
  tree.robot_id = policy.robot_id;
  tree.robot_class = robot_class;
  trace.task_id = task.id;
  trace.robot_id = policy.robot_id;
  trace.robot_class = robot_class;
  trace.phase = policy.phase;
  trace.goal = policy.goal;
  trace.threshold = config.threshold;
  trace.max_depth = config.max_depth;
  trace.max_iterations = config.max_iterations;

  NodeIdGen ids;
  auto& root = tree.root;
  root.node_id = ids.next();
  root.description = policy.goal;
  root.depth = 0;
  trace.root = {root.node_id, root.description};

  std::optional<Verdict> verdict;
  try {
    root.children =
        decompose(planner, root.description, env, skill_hints, 0, ids);
    root.status = NodeStatus::needs_decomposition;
    for (const auto& c : root.children) {
      trace.root_expansion.push_back({c.node_id, c.description});
    }

    int iteration = 0;
    while (iteration < config.max_iterations) {
      std::vector<SubtaskNode*> leaves;
      collect_raw_leaves(root, leaves);
      if (leaves.empty()) {
        verdict = Verdict::converged;
        break;
      }
      ++iteration;
      IterationRecord rec;
      rec.iteration = iteration;

      std::vector<FeatureVector> vecs;
      vecs.reserve(leaves.size());
      for (const auto* leaf : leaves) {
        vecs.push_back(embed(leaf->description, leaf->keywords, leaf->context));
        rec.embedded.push_back({leaf->node_id, leaf->description});
      }
      const auto rep = report(vecs, skill_vectors, config.threshold);

      std::vector<SubtaskNode*> flagged;
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        auto* leaf = leaves[i];
        const auto& row = rep.rows[i];
        rec.scores.push_back({leaf->node_id, row.best_skill_id, row.best_score,
                              row.needs_decomposition});
        if (row.needs_decomposition) {
          flagged.push_back(leaf);
          rec.flagged.push_back(leaf->node_id);
        } else {
          leaf->status = NodeStatus::bound;
          leaf->bound_skill = row.best_skill_id;
          leaf->bound_score = row.best_score;
        }
      }

      for (auto* leaf : flagged) {
        if (leaf->depth >= config.max_depth) {
          leaf->status = NodeStatus::failed;
          verdict = Verdict::depth_exhausted;
          trace.failed_node = leaf->node_id;
          break;
        }
        auto kids = decompose(planner, leaf->description, env, skill_hints,
                              leaf->depth, ids);
        const bool fixed_again =
            kids.size() == 1 && kids[0].via_fixed_point;
        if (fixed_again && leaf->via_fixed_point) {
          // same text twice in a row down one lineage: give up on it
          leaf->status = NodeStatus::failed;
          verdict = Verdict::depth_exhausted;
          trace.failed_node = leaf->node_id;
          break;
        }
        leaf->status = NodeStatus::needs_decomposition;
        TraceExpansion exp;
        exp.parent = leaf->node_id;
        for (const auto& k : kids) {
          exp.children.push_back({k.node_id, k.description});
        }
        rec.expansions.push_back(std::move(exp));
        leaf->children = std::move(kids);
      }
      trace.iterations.push_back(std::move(rec));
      if (verdict) break;
    }
    if (!verdict) {
      std::vector<SubtaskNode*> leaves;
      collect_raw_leaves(root, leaves);
      verdict = leaves.empty() ? Verdict::converged : Verdict::depth_exhausted;
    }
  } catch (const PlannerError& e) {
    verdict = Verdict::planner_failed;
    trace.planner_error = std::string(e.what()) +
                          (e.raw_response.empty()
                               ? ""
                               : "; raw response: " + e.raw_response);
  }

  tree.verdict = *verdict;
  trace.verdict = *verdict;

  std::vector<SubtaskNode*> bound;
  collect_bound_leaves(root, bound);
  for (const auto* leaf : bound) {
    trace.bound.push_back({leaf->node_id, *leaf->bound_skill,
                           leaf->bound_score.value_or(0.0)});
  }
  return result;
}

std::vector<ArgValue> ground_args(const SubtaskNode& node,
                                  const SkillDescriptor& skill,
                                  const EnvironmentSnapshot& env,
                                  const Vec2& robot_pose) {
  std::set<std::string> toks;
  for (auto& t : tokenize(node.description)) toks.insert(t);

  auto pick_object = [&]() -> const EnvObject& {
    const EnvObject* best = nullptr;
    std::size_t best_overlap = 0;
    double best_dist = 0.0;
    for (const auto& obj : env.objects) {
      std::size_t overlap = 0;
      for (auto& t : tokenize(obj.cls)) {
        if (toks.contains(t)) ++overlap;
      }
      if (overlap == 0) continue;
      const double d = distance(obj.position, robot_pose);
      if (!best || overlap > best_overlap ||
          (overlap == best_overlap &&
           (d < best_dist || (d == best_dist && obj.id < best->id)))) {
        best = &obj;
        best_overlap = overlap;
        best_dist = d;
      }
    }
    if (!best) {
      throw GroundingError("no environment object matches node \"" +
                           node.node_id + "\" (" + node.description + ")");
    }
    return *best;
  };

  std::vector<ArgValue> args;
  args.reserve(skill.params.size());
  for (const auto& p : skill.params) {
    ArgValue a;
    a.kind = p.kind;
    switch (p.kind) {
      case ParamKind::coordinate2d:
        a.value = pick_object().position;
        break;
      case ParamKind::object_ref:
        a.value = pick_object().id;
        break;
      case ParamKind::scalar: {
        double v = 0.0;
        for (const auto& t : tokenize(node.description)) {
          if (std::all_of(t.begin(), t.end(),
                          [](unsigned char c) { return std::isdigit(c); })) {
            v = std::stod(t);
            break;
          }
        }
        a.value = v;
        break;
      }
      case ParamKind::text:
        a.value = node.description;
        break;
    }
    args.push_back(std::move(a));
  }
  return args;
}

namespace {

void emit_walk(SubtaskNode& node, const std::string& robot_id,
               const EnvironmentSnapshot& env, const SkillRegistry& registry,
               const Vec2& robot_pose, InstructionSequence& seq) {
  if (node.is_leaf()) {
    if (node.status != NodeStatus::bound) {
      throw ContractError("emit_sequences: leaf " + node.node_id +
                          " is not bound (status " + to_string(node.status) +
                          ")");
    }
    const auto& skill = registry.at(*node.bound_skill);
    Instruction ins;
    ins.seq_index = static_cast<int>(seq.instructions.size());
    ins.robot_id = robot_id;
    ins.skill_id = skill.id;
    ins.args = ground_args(node, skill, env, robot_pose);
    nlohmann::json args = nlohmann::json::array();
    for (const auto& a : ins.args) args.push_back(to_json_value(a));
    node.bound_args = std::move(args);
    seq.instructions.push_back(std::move(ins));
    return;
  }
  for (auto& c : node.children) {
    emit_walk(c, robot_id, env, registry, robot_pose, seq);
  }
}

}  // namespace

std::vector<InstructionSequence> emit_sequences(
    DecompositionTree& tree, const EnvironmentSnapshot& env,
    const SkillRegistry& registry) {
  if (tree.verdict != Verdict::converged) {
    throw ContractError("emit_sequences requires a converged tree (verdict " +
                        to_string(tree.verdict) + ")");
  }
  Vec2 robot_pose{0.0, 0.0};
  if (auto it = env.robot_poses.find(tree.robot_id);
      it != env.robot_poses.end()) {
    robot_pose = it->second;
  }
  InstructionSequence seq;
  seq.robot_id = tree.robot_id;
  emit_walk(tree.root, tree.robot_id, env, registry, robot_pose, seq);
  return {std::move(seq)};
}

}  // namespace hiertask
