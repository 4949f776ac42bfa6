#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiertask/cloud_policy.hpp"
#include "hiertask/environment.hpp"
#include "hiertask/planner.hpp"
#include "hiertask/skills.hpp"

namespace hiertask {

struct OrchestratorConfig {
  double threshold = 0.6;  // T_similarity
  int max_depth = 4;
  int max_iterations = 16;
};

/// A grounded instruction argument; the variant alternative must match the
/// declared ParamKind (object-ref and text both carry strings).
struct ArgValue {
  ParamKind kind = ParamKind::text;
  std::variant<double, Vec2, std::string> value;
};

struct Instruction {
  int seq_index = 0;
  std::string robot_id;
  std::string skill_id;
  std::vector<ArgValue> args;
};

struct InstructionSequence {
  std::string robot_id;
  std::vector<Instruction> instructions;
};

nlohmann::json to_json_value(const ArgValue& a);
ArgValue arg_from_json(const nlohmann::json& j);
nlohmann::json sequence_to_json(const InstructionSequence& seq);
InstructionSequence sequence_from_json(const nlohmann::json& j);

enum class Verdict { converged, depth_exhausted, planner_failed };

std::string to_string(Verdict v);

struct TraceNodeRef {
  std::string node_id;
  std::string text;
};

struct TraceScore {
  std::string node_id;
  std::string best_skill;
  double best_score = 0.0;
  bool flagged = false;
};

struct TraceExpansion {
  std::string parent;
  std::vector<TraceNodeRef> children;
};

struct IterationRecord {
  int iteration = 0;
  std::vector<TraceNodeRef> embedded;
  std::vector<TraceScore> scores;
  std::vector<std::string> flagged;
  std::vector<TraceExpansion> expansions;
};

struct BoundLeaf {
  std::string node_id;
  std::string skill;
  double score = 0.0;
};

/// Audit trail of one refinement: which nodes were embedded, their best
/// alignment scores, what was flagged, and how flagged nodes expanded.
/// Enough to re-check the threshold decisions after the fact.
struct RefinementTrace {
  std::string task_id;
  std::string robot_id;
  RobotClass robot_class = RobotClass::quadruped;
  std::string phase;
  std::string goal;
  double threshold = 0.0;
  int max_depth = 0;
  int max_iterations = 0;
  Verdict verdict = Verdict::depth_exhausted;
  std::optional<std::string> failed_node;
  std::optional<std::string> planner_error;
  TraceNodeRef root;
  std::vector<TraceNodeRef> root_expansion;
  std::vector<IterationRecord> iterations;
  std::vector<BoundLeaf> bound;
};

nlohmann::json trace_to_json(const RefinementTrace& trace,
                             bool include_generated_at = true);

struct DecompositionTree {
  SubtaskNode root;
  std::string robot_id;
  RobotClass robot_class = RobotClass::quadruped;
  Verdict verdict = Verdict::depth_exhausted;
};

struct RefineResult {
  DecompositionTree tree;
  RefinementTrace trace;
};

/// The cosine-alignment feedback loop. Decomposes the policy goal, embeds
/// raw leaves each iteration, aligns them against the class's skills, binds
/// leaves whose best score clears the threshold, re-decomposes flagged
/// leaves, and stops on convergence, depth/fixed-point exhaustion, planner
/// failure, or the iteration budget. Never throws for those outcomes; they
/// are returned as the trace verdict. Throws ConfigError when the registry
/// has no skills for the policy's robot class.
RefineResult refine_task(const TaskSpec& task, const RobotPolicy& policy,
                         RobotClass robot_class,
                         const EnvironmentSnapshot& env,
                         const SkillRegistry& registry, Planner& planner,
                         const OrchestratorConfig& config);

/// Grounds one bound leaf's arguments against the environment:
/// coordinate2d/object-ref pick the object whose class has the largest
/// token overlap with the node text (ties: nearest to the robot, then
/// lowest id); scalar parses the first integer token (default 0.0); text
/// passes the node description through. Throws GroundingError naming the
/// node when no object overlaps.
std::vector<ArgValue> ground_args(const SubtaskNode& node,
                                  const SkillDescriptor& skill,
                                  const EnvironmentSnapshot& env,
                                  const Vec2& robot_pose);

/// Walks bound leaves depth-first left-to-right and grounds each into an
/// Instruction. Requires a converged tree; backfills node.bound_args.
/// Returns one sequence per robot in the tree (a per-robot policy tree has
/// exactly one).
std::vector<InstructionSequence> emit_sequences(DecompositionTree& tree,
                                                const EnvironmentSnapshot& env,
                                                const SkillRegistry& registry);

}  // namespace hiertask
