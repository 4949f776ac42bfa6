#include "hiertask/planner.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>

#include "hiertask/errors.hpp"
#include "hiertask/vectorizer.hpp"

namespace hiertask {

std::string to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::raw: return "raw";
    case NodeStatus::bound: return "bound";
    case NodeStatus::needs_decomposition: return "needs_decomposition";
    case NodeStatus::failed: return "failed";
  }
  return "raw";
}

PlannerTemplateSet PlannerTemplateSet::parse(const nlohmann::json& doc) {
  if (!doc.is_array()) throw LoadError("template file: expected JSON array");
  PlannerTemplateSet set;
  std::set<std::vector<std::string>> seen;
  for (const auto& item : doc) {
    PlannerTemplate t;
    t.pattern = item.at("pattern").get<std::vector<std::string>>();
    t.expansion = item.at("expansion").get<std::vector<std::string>>();
    if (t.expansion.empty()) {
      throw LoadError("template with empty expansion");
    }
    if (!seen.insert(t.pattern).second) {
      throw LoadError("duplicate template pattern");
    }
    set.templates.push_back(std::move(t));
  }
  return set;
}

PlannerTemplateSet PlannerTemplateSet::load(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open template file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError("template file " + path.string() + ": " + e.what());
  }
  return parse(doc);
}

namespace {

// Best class-name match for placeholder filling: largest token overlap with
// the parent text, ties broken by lowest object id. nullptr when nothing
// overlaps.
const EnvObject* best_object(const EnvironmentSnapshot& env,
                             const std::string& parent_text) {
  std::set<std::string> ptoks;
  for (auto& t : tokenize(parent_text)) ptoks.insert(t);
  const EnvObject* best = nullptr;
  std::size_t best_overlap = 0;
  for (const auto& obj : env.objects) {
    std::size_t overlap = 0;
    for (auto& t : tokenize(obj.cls)) {
      if (ptoks.contains(t)) ++overlap;
    }
    if (overlap > best_overlap ||
        (overlap == best_overlap && overlap > 0 && best &&
         obj.id < best->id)) {
      best = &obj;
      best_overlap = overlap;
    }
  }
  return best;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::vector<std::string> MockPlanner::propose(
    const std::string& parent_text, const EnvironmentSnapshot& env,
    std::span<const SkillDescriptor* const> /*skill_hints*/) {
  std::set<std::string> ptoks;
  for (auto& t : tokenize(parent_text)) ptoks.insert(t);

  const PlannerTemplate* selected = nullptr;
  std::size_t best_overlap = 0;
  for (const auto& t : templates_.templates) {
    std::size_t overlap = 0;
    for (const auto& kw : t.pattern) {
      if (ptoks.contains(kw)) ++overlap;
    }
    if (overlap > best_overlap) {  // strict: ties keep first in file order
      selected = &t;
      best_overlap = overlap;
    }
  }
  if (!selected) return {parent_text};

  std::vector<std::string> lines;
  lines.reserve(selected->expansion.size());
  const EnvObject* obj = nullptr;
  bool looked_up = false;
  for (const auto& raw : selected->expansion) {
    std::string line = raw;
    if (line.find("{object}") != std::string::npos ||
        line.find("{location}") != std::string::npos) {
      if (!looked_up) {
        obj = best_object(env, parent_text);
        looked_up = true;
      }
      if (obj) {
        replace_all(line, "{object}", obj->cls);
        replace_all(line, "{location}", obj->cls);
      }
      // no matching object: leave the placeholder visible in the trace
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string render_prompt(
    const std::string& parent_text, const EnvironmentSnapshot& env,
    std::span<const SkillDescriptor* const> skill_hints) {
  std::ostringstream out;
  out << "You decompose robot tasks into atomic subtasks.\n";
  out << "## Task\n" << parent_text << "\n";
  out << "## Environment\n";
  if (env.objects.empty()) {
    out << "(none)\n";
  } else {
    char buf[64];
    for (const auto& o : env.objects) {
      std::snprintf(buf, sizeof(buf), " at (%.1f, %.1f)", o.position.x,
                    o.position.y);
      out << "- " << o.id << " [" << o.cls << "]" << buf << "\n";
    }
  }
  out << "## Skills\n";
  if (skill_hints.empty()) {
    out << "(none)\n";
  } else {
    for (const auto* s : skill_hints) {
      out << "- " << s->id << ": " << s->description << "\n";
    }
  }
  out << "## Output\n";
  out << "Reply with one subtask per line, using only the listed skills'"
         " vocabulary.\n";
  return out.str();
}

std::vector<std::string> parse_planner_output(const std::string& raw) {
  std::vector<std::string> lines;
  std::istringstream in(raw);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t b = 0, e = line.size();
    while (b < e && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1]))) --e;
    std::string s = line.substr(b, e - b);
    if (!s.empty() && (s[0] == '-' || s[0] == '*')) {
      s.erase(0, 1);
    } else {
      std::size_t d = 0;
      while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d])))
        ++d;
      if (d > 0 && d < s.size() && s[d] == '.') s.erase(0, d + 1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s[0])))
      s.erase(0, 1);
    if (!s.empty()) lines.push_back(std::move(s));
  }
  if (lines.empty()) {
    throw PlannerError("planner produced no subtasks", raw);
  }
  return lines;
}

std::vector<std::string> RemotePlanner::propose(
    const std::string& parent_text, const EnvironmentSnapshot& env,
    std::span<const SkillDescriptor* const> skill_hints) {
  const std::string prompt = render_prompt(parent_text, env, skill_hints);

  httplib::Client client(url_);
  client.set_connection_timeout(0, timeout_ms_ * 1000);
  client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

  nlohmann::json body = {{"prompt", prompt}};
  auto res = client.Post("/", body.dump(), "application/json");
  if (!res) {
    throw PlannerError("remote planner unreachable: " + url_, "");
  }
  if (res->status != 200) {
    throw PlannerError(
        "remote planner returned HTTP " + std::to_string(res->status),
        res->body);
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error&) {
    throw PlannerError("remote planner reply is not JSON", res->body);
  }
  if (!reply.contains("text") || !reply["text"].is_string()) {
    throw PlannerError("remote planner reply missing \"text\"", res->body);
  }
  return parse_planner_output(reply["text"].get<std::string>());
}

std::vector<SubtaskNode> decompose(
    Planner& planner, const std::string& parent_text,
    const EnvironmentSnapshot& env,
    std::span<const SkillDescriptor* const> skill_hints, int depth,
    NodeIdGen& ids) {
  const auto texts = planner.propose(parent_text, env, skill_hints);
  const bool fixed_point = texts.size() == 1 && texts[0] == parent_text;
  std::vector<SubtaskNode> children;
  children.reserve(texts.size());
  for (const auto& text : texts) {
    SubtaskNode node;
    node.node_id = ids.next();
    node.description = text;
    node.depth = depth + 1;
    node.status = NodeStatus::raw;
    node.via_fixed_point = fixed_point;
    children.push_back(std::move(node));
  }
  return children;
}

}  // namespace hiertask
