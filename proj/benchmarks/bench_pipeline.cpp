#include <benchmark/benchmark.h>

#include <random>

#include "hiertask/orchestrator.hpp"
#include "hiertask/protocol.hpp"
#include "hiertask/similarity.hpp"
#include "hiertask/vectorizer.hpp"

using namespace hiertask;

namespace {

std::filesystem::path share_dir() {
#ifdef HIERTASK_SHARE_DIR
  return HIERTASK_SHARE_DIR;
#else
  return "share";
#endif
}

std::vector<FeatureVector> random_vectors(std::size_t n, int entries) {
  std::mt19937 rng(12345);
  std::uniform_int_distribution<std::uint32_t> dim(0, kFeatureDim - 1);
  std::uniform_real_distribution<double> w(0.05, 4.0);
  std::vector<FeatureVector> out(n);
  for (auto& v : out) {
    v.dim = kFeatureDim;
    for (int i = 0; i < entries; ++i) v.entries[dim(rng)] = w(rng);
  }
  return out;
}

}  // namespace

static void BM_Embed(benchmark::State& state) {
  const std::vector<std::string> kws{"grasp", "grab"};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        embed("pick up the red box near the drop-off", kws, "fetch task"));
  }
}
BENCHMARK(BM_Embed);

static void BM_Cosine(benchmark::State& state) {
  const auto vs = random_vectors(2, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cosine(vs[0], vs[1]));
  }
}
BENCHMARK(BM_Cosine)->Arg(8)->Arg(32)->Arg(128);

static void BM_PairwiseMatrix(benchmark::State& state) {
  const auto vs = random_vectors(static_cast<std::size_t>(state.range(0)), 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pairwise_matrix(vs));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PairwiseMatrix)->Range(8, 128)->Complexity();

static void BM_RefineFetchFixture(benchmark::State& state) {
  const auto registry = SkillRegistry::load(share_dir() / "skills/registry.json");
  MockPlanner planner(
      PlannerTemplateSet::load(share_dir() / "templates/planner_templates.json"));
  EnvironmentSnapshot env;
  env.objects = {{"box1", "red box", {3.0, 4.0}},
                 {"dz1", "drop-off", {8.0, 0.0}}};
  const TaskSpec task{"t", "fetch the red box", "bench", {}};
  const RobotPolicy policy{"quad1", "fetch the red box", "execute"};
  OrchestratorConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(refine_task(task, policy, RobotClass::quadruped,
                                         env, registry, planner, config));
  }
}
BENCHMARK(BM_RefineFetchFixture);

static void BM_EncodeDecode(benchmark::State& state) {
  Envelope e;
  e.type = MsgType::Observation;
  e.msg_id = "device-42";
  e.correlates_to = "edge-7";
  e.sent_at = 1700000000000;
  e.payload = {{"observation",
                {{"robot_id", "drone1"},
                 {"tick", 4},
                 {"kind", "survey_result"},
                 {"payload",
                  {{"radius", 20.0},
                   {"objects",
                    {{{"id", "box1"},
                      {"class", "red box"},
                      {"position", {3.0, 4.0}}}}}}}}}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode(encode(e)));
  }
}
BENCHMARK(BM_EncodeDecode);

BENCHMARK_MAIN();
