#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hiertask/environment.hpp"
#include "hiertask/skills.hpp"

namespace hiertask {

struct TaskSpec {
  std::string id;
  std::string description;
  std::string issued_by;
  std::vector<std::string> constraints;
};

enum class NodeStatus { raw, bound, needs_decomposition, failed };

std::string to_string(NodeStatus s);

/// One node of the decomposition tree. Children are owned in-place; depth of
/// every child is parent depth + 1.
struct SubtaskNode {
  std::string node_id;
  std::string description;
  std::vector<std::string> keywords;
  std::string context;
  int depth = 0;
  NodeStatus status = NodeStatus::raw;
  std::optional<std::string> bound_skill;
  std::optional<double> bound_score;
  nlohmann::json bound_args;  // filled by emit_sequences
  bool via_fixed_point = false;
  std::vector<SubtaskNode> children;

  bool is_leaf() const { return children.empty(); }
};

/// One decomposition template: selected by keyword overlap with the parent
/// text, expanded with {object}/{location} placeholders filled from the
/// environment.
struct PlannerTemplate {
  std::vector<std::string> pattern;
  std::vector<std::string> expansion;
};

struct PlannerTemplateSet {
  std::vector<PlannerTemplate> templates;

  static PlannerTemplateSet load(const std::filesystem::path& path);
  static PlannerTemplateSet parse(const nlohmann::json& doc);
};

/// Decomposition engine interface. Returns the candidate subtask texts for
/// a parent; never returns an empty list (implementations either fall back
/// to the parent text or throw PlannerError).
class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::vector<std::string> propose(
      const std::string& parent_text, const EnvironmentSnapshot& env,
      std::span<const SkillDescriptor* const> skill_hints) = 0;
};

/// Deterministic template-driven planner. Selects the template whose pattern
/// has the largest keyword overlap with the parent text (ties: first in file
/// order); with no overlap at all, returns the parent text verbatim.
class MockPlanner : public Planner {
 public:
  explicit MockPlanner(PlannerTemplateSet templates)
      : templates_(std::move(templates)) {}

  std::vector<std::string> propose(
      const std::string& parent_text, const EnvironmentSnapshot& env,
      std::span<const SkillDescriptor* const> skill_hints) override;

 private:
  PlannerTemplateSet templates_;
};

/// JSON-over-HTTP client for a live language model: POST {prompt} -> {text}.
/// Transport failures and malformed responses raise PlannerError carrying
/// the raw response.
class RemotePlanner : public Planner {
 public:
  RemotePlanner(std::string url, int timeout_ms)
      : url_(std::move(url)), timeout_ms_(timeout_ms) {}

  std::vector<std::string> propose(
      const std::string& parent_text, const EnvironmentSnapshot& env,
      std::span<const SkillDescriptor* const> skill_hints) override;

 private:
  std::string url_;
  int timeout_ms_;
};

/// Renders the deterministic decomposition prompt: parent text, a compact
/// environment summary, and the skill list (ids + descriptions), one
/// requested subtask per output line.
std::string render_prompt(const std::string& parent_text,
                          const EnvironmentSnapshot& env,
                          std::span<const SkillDescriptor* const> skill_hints);

/// Splits raw planner output into subtask texts: one per line, list markers
/// ("-", "*", "1.") and surrounding whitespace stripped, empties dropped.
/// Throws PlannerError when nothing remains.
std::vector<std::string> parse_planner_output(const std::string& raw);

/// Monotonically increasing node-id source ("n0", "n1", ...), one per
/// refinement so reruns produce identical trees.
class NodeIdGen {
 public:
  std::string next() { return "n" + std::to_string(counter_++); }

 private:
  int counter_ = 0;
};

/// Wraps Planner::propose into child SubtaskNodes at depth+1, status raw,
/// empty keywords/context. A single child whose text equals the parent's is
/// the fixed-point fallback and is marked via_fixed_point.
std::vector<SubtaskNode> decompose(
    Planner& planner, const std::string& parent_text,
    const EnvironmentSnapshot& env,
    std::span<const SkillDescriptor* const> skill_hints, int depth,
    NodeIdGen& ids);

}  // namespace hiertask
