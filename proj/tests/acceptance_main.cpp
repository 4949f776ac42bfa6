// Acceptance suite: one check per shipping criterion, one PASS/FAIL line
// each. Exits non-zero if any criterion fails.

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "hiertask/scenario.hpp"
#include "hiertask/similarity.hpp"
#include "hiertask/vectorizer.hpp"
#include "test_util.hpp"

using namespace hiertask;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void result(int criterion, const std::string& name, bool ok,
            const std::string& detail = "") {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": "
            << name;
  if (!ok && !detail.empty()) std::cout << " -- " << detail;
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

double dense_cosine(const FeatureVector& a, const FeatureVector& b) {
  std::vector<double> da(a.dim, 0.0), db(b.dim, 0.0);
  for (const auto& [d, w] : a.entries) da[d] = w;
  for (const auto& [d, w] : b.entries) db[d] = w;
  double dot = 0, na = 0, nb = 0;
  for (std::uint32_t i = 0; i < a.dim; ++i) {
    dot += da[i] * db[i];
    na += da[i] * da[i];
    nb += db[i] * db[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

RunReport run(const std::string& scenario, const fs::path& out,
              bool tcp = false) {
  ScenarioRunOptions opts;
  opts.share_dir = testutil::share_dir();
  opts.scenario = scenario;
  opts.out_dir = out;
  opts.tcp = tcp;
  return run_scenario(opts);
}

// ---------------------------------------------------------------- criteria

void criterion1_cosine() {
  const auto t0 = std::chrono::steady_clock::now();
  testutil::VecGen gen(424242);
  bool oracle_ok = true, self_ok = true, sym_ok = true;
  std::vector<FeatureVector> pool;
  for (int i = 0; i < 1000; ++i) {
    const auto a = gen.next(4096, 32);
    const auto b = gen.next(4096, 32);
    if (std::fabs(cosine(a, b) - dense_cosine(a, b)) > 1e-9) oracle_ok = false;
    if (!a.is_zero() && std::fabs(cosine(a, a) - 1.0) > 1e-12) self_ok = false;
    if (i < 24) pool.push_back(a);
  }
  const auto m = pairwise_matrix(pool);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const double x = m.at(i, j);
      const double y = m.at(j, i);
      if (std::memcmp(&x, &y, sizeof(double)) != 0) sym_ok = false;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  result(1, "cosine vs dense oracle (1000 pairs), self-similarity, symmetry",
         oracle_ok && self_ok && sym_ok && secs < 1.0,
         oracle_ok ? (self_ok ? (sym_ok ? "runtime " + std::to_string(secs) +
                                              "s exceeded 1s"
                                        : "asymmetry")
                              : "self-similarity off")
                   : "oracle mismatch");
}

void criterion2_decision() {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  bool ok = true;
  for (int round = 0; round < 200; ++round) {
    SimilarityMatrix m{6, 7, {}};
    m.values.resize(42);
    for (auto& v : m.values) v = val(rng);
    const double t = val(rng);
    m.values[round % m.values.size()] = t;  // exact boundary cell
    const auto d = decide(m, t);
    for (std::size_t k = 0; k < m.values.size(); ++k) {
      if (d.flags[k] != (m.values[k] < t ? 1 : 0)) ok = false;
    }
  }
  result(2, "decide == element-wise strict less-than incl. boundary", ok);
}

void criterion3_soundness(const std::vector<RunReport>& reports) {
  const auto registry =
      SkillRegistry::load(testutil::share_dir() / "skills/registry.json");
  bool ok = true;
  std::string detail;
  for (const auto& rep : reports) {
    for (const auto& name : rep.trace_files) {
      const auto trace = testutil::load_json(rep.task_dir / name);
      if (trace.at("verdict") != "converged") continue;
      const double threshold = trace.at("threshold").get<double>();
      for (const auto& b : trace.at("bound")) {
        if (b.at("score").get<double>() < threshold) {
          ok = false;
          detail = name + ": bound leaf below threshold";
        }
      }
    }
    const auto seq_path = rep.task_dir / "sequences.json";
    if (!fs::exists(seq_path)) continue;
    for (const auto& seq : testutil::load_json(seq_path)) {
      const auto robot = seq.at("robot_id").get<std::string>();
      const bool is_drone = robot.find("drone") == 0;
      for (const auto& ins : seq.at("instructions")) {
        const auto* skill =
            registry.find(ins.at("skill_id").get<std::string>());
        if (!skill) {
          ok = false;
          detail = "unregistered skill in " + rep.scenario;
          continue;
        }
        bool class_ok = false;
        for (auto c : skill->robot_classes) {
          class_ok |= (c == RobotClass::drone) == is_drone;
        }
        if (!class_ok) {
          ok = false;
          detail = "skill " + skill->id + " not applicable to " + robot;
        }
      }
    }
  }
  result(3, "alignment soundness + executable closure over all scenarios", ok,
         detail);
}

void criterion4_refinement(const RunReport& fetch, double secs) {
  bool ok = true;
  std::string detail;
  const auto trace =
      testutil::load_json(fetch.task_dir / "trace_quad1_execute.json");
  const auto iters = trace.at("iterations");
  if (iters.size() < 2) {
    ok = false;
    detail = "fewer than 2 iterations";
  }
  // at least one node flagged then successfully re-decomposed into bound kids
  bool flagged_then_bound = false;
  std::set<std::string> bound_ids;
  for (const auto& b : trace.at("bound")) {
    bound_ids.insert(b.at("node_id").get<std::string>());
  }
  for (const auto& it : iters) {
    for (const auto& exp : it.at("expansions")) {
      bool all_bound = !exp.at("children").empty();
      for (const auto& c : exp.at("children")) {
        all_bound &= bound_ids.contains(c.at("node_id").get<std::string>());
      }
      bool was_flagged = false;
      for (const auto& f : it.at("flagged")) {
        was_flagged |= f == exp.at("parent");
      }
      flagged_then_bound |= was_flagged && all_bound;
    }
  }
  if (!flagged_then_bound) {
    ok = false;
    detail = "no flagged node was re-decomposed into bound children";
  }
  std::string why;
  const auto golden = testutil::load_json(
      testutil::share_dir() / "golden/survey_and_fetch/trace_quad1_execute.json");
  if (!testutil::json_close(trace, golden, 1e-12, why, {"generated_at"})) {
    ok = false;
    detail = "golden trace mismatch: " + why;
  }
  if (secs >= 5.0) {
    ok = false;
    detail = "runtime " + std::to_string(secs) + "s exceeded 5s";
  }
  result(4, "iterative refinement visible in trace + golden match (<5s)", ok,
         detail);
}

void criterion5_termination(const std::vector<RunReport>& reports) {
  bool ok = true;
  std::string detail;
  bool exhausted_seen = false;
  for (const auto& rep : reports) {
    for (const auto& name : rep.trace_files) {
      const auto trace = testutil::load_json(rep.task_dir / name);
      const int max_iters = trace.at("max_iterations").get<int>();
      if (static_cast<int>(trace.at("iterations").size()) > max_iters) {
        ok = false;
        detail = name + " exceeded max_iterations";
      }
      if (rep.scenario == "unmatched_task" &&
          trace.at("verdict") == "depth_exhausted") {
        exhausted_seen = true;
      }
    }
  }
  if (!exhausted_seen) {
    ok = false;
    detail = "unmatched_task produced no depth_exhausted verdict";
  }
  result(5, "termination: depth_exhausted for unmatched_task, budget held",
         ok, detail);
}

void criterion6_end_to_end(const fs::path& out_dir) {
  bool ok = true;
  std::string detail;
  const std::string cmd = testutil::cli_path().string() +
                          " run-scenario survey_and_fetch --share " +
                          testutil::share_dir().string() + " --out-dir " +
                          out_dir.string() + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  if (WEXITSTATUS(raw) != 0) {
    ok = false;
    detail = "cli exited " + std::to_string(WEXITSTATUS(raw));
  }
  const auto task_dir = out_dir / "task-1";
  const auto lines = testutil::read_lines(task_dir / "observations.jsonl");
  std::size_t survey = lines.size(), first_quad = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto j = nlohmann::json::parse(lines[i]);
    if (j.at("kind") == "survey_result" && survey == lines.size()) survey = i;
    if (j.at("robot_id") == "quad1" && first_quad == lines.size()) {
      first_quad = i;
    }
  }
  if (!(survey < first_quad)) {
    ok = false;
    detail = "survey_result does not precede the quadruped's first step";
  }
  std::string why;
  if (!testutil::json_close(
          testutil::load_json(task_dir / "world_final.json"),
          testutil::load_json(testutil::share_dir() /
                              "golden/survey_and_fetch/world_final.json"),
          1e-9, why)) {
    ok = false;
    detail = "final world mismatch: " + why;
  }
  result(6, "cli end-to-end: exit 0, phase barrier, golden final world", ok,
         detail);
}

void criterion7_protocol(const fs::path& scratch) {
  bool ok = true;
  std::string detail;
  const auto lines =
      testutil::read_lines(testutil::share_dir() / "fixtures/envelopes.jsonl");
  if (lines.size() != 7) {
    ok = false;
    detail = "expected 7 fixture envelopes";
  }
  for (const auto& line : lines) {
    const auto e = decode(line);
    if (!(decode(encode(e)) == e)) {
      ok = false;
      detail = "round-trip failed for " + to_string(e.type);
    }
  }
  const auto a = run("survey_and_fetch", scratch / "inproc", false);
  const auto b = run("survey_and_fetch", scratch / "tcp", true);
  for (const char* svc : {"messages_cloud.jsonl", "messages_edge.jsonl",
                          "messages_device.jsonl"}) {
    if (testutil::normalized_log(a.task_dir / svc) !=
        testutil::normalized_log(b.task_dir / svc)) {
      ok = false;
      detail = std::string("transport logs differ for ") + svc;
    }
  }
  result(7, "envelope round-trip + transport-equivalent message logs", ok,
         detail);
}

void criterion8_determinism(const fs::path& scratch) {
  bool ok = true;
  std::string detail;
  for (const std::string scenario :
       {"survey_and_fetch", "patrol", "unmatched_task"}) {
    const auto a = run(scenario, scratch / (scenario + "_a"));
    const auto b = run(scenario, scratch / (scenario + "_b"));
    for (const auto& name : a.trace_files) {
      auto ta = testutil::load_json(a.task_dir / name);
      auto tb = testutil::load_json(b.task_dir / name);
      ta.erase("generated_at");
      tb.erase("generated_at");
      if (ta.dump() != tb.dump()) {
        ok = false;
        detail = scenario + "/" + name + " differs between runs";
      }
    }
    if (testutil::read_lines(a.task_dir / "observations.jsonl") !=
        testutil::read_lines(b.task_dir / "observations.jsonl")) {
      ok = false;
      detail = scenario + " observation logs differ";
    }
    for (const char* svc : {"messages_cloud.jsonl", "messages_edge.jsonl",
                            "messages_device.jsonl"}) {
      if (testutil::normalized_log(a.task_dir / svc) !=
          testutil::normalized_log(b.task_dir / svc)) {
        ok = false;
        detail = scenario + std::string(" message log differs: ") + svc;
      }
    }
  }
  result(8, "byte-identical reruns after timestamp/msg-id normalization", ok,
         detail);
}

}  // namespace

int main() {
  testutil::TempDir scratch("acceptance");

  criterion1_cosine();
  criterion2_decision();

  const auto t0 = std::chrono::steady_clock::now();
  const auto fetch = run("survey_and_fetch", scratch.path() / "fetch");
  const double fetch_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const auto patrol = run("patrol", scratch.path() / "patrol");
  const auto unmatched = run("unmatched_task", scratch.path() / "unmatched");
  const std::vector<RunReport> reports{fetch, patrol, unmatched};

  criterion3_soundness(reports);
  criterion4_refinement(fetch, fetch_secs);
  criterion5_termination(reports);
  criterion6_end_to_end(scratch.path() / "cli");
  criterion7_protocol(scratch.path() / "proto");
  criterion8_determinism(scratch.path() / "det");

  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all acceptance criteria passed" << std::endl;
  return 0;
}
