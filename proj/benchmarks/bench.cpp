#include <benchmark/benchmark.h>

#include "mem0/ddpm.hpp"
#include "mem0/policy.hpp"
#include "mem0/rng.hpp"
#include "mem0/tasks.hpp"
#include "mem0/tmc.hpp"

namespace {

void BM_ExpertRollout(benchmark::State& state) {
  mem0::TaskSpec spec = mem0::build_task("put_back_block");
  mem0::AgentFn expert = mem0::expert_policy(spec);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mem0::rollout(spec, expert, seed++, spec.horizon));
  }
}
BENCHMARK(BM_ExpertRollout);

void BM_CrossAttend(benchmark::State& state) {
  mem0::TaskSpec spec = mem0::build_task("put_back_block");
  mem0::PolicyConfig cfg;
  mem0::Mem0Model model = mem0::Mem0Model::create(spec, cfg, 0);
  std::vector<float> feat = mem0::featurize(spec, spec.observe(spec.init(0)));
  for (auto _ : state) {
    mem0::Tape t;
    mem0::Tape::Var q = model.encode_img(t, t.leaf_vec(feat));
    std::vector<mem0::Tape::Var> mem(8, q);
    benchmark::DoNotOptimize(t.value(model.cross_attend(t, "attn_anchor", q, mem)));
  }
}
BENCHMARK(BM_CrossAttend);

void BM_DdpmSample(benchmark::State& state) {
  mem0::TaskSpec spec = mem0::build_task("put_back_block");
  mem0::PolicyConfig cfg;
  mem0::Mem0Model model = mem0::Mem0Model::create(spec, cfg, 0);
  mem0::Tensor cond({model.den_cfg.cond_dim});
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mem0::ddpm_sample(model.params, "den", model.den_cfg, model.sched, cond, seed++));
  }
}
BENCHMARK(BM_DdpmSample);

void BM_MemorylessSearch(benchmark::State& state) {
  mem0::TaskSpec spec = mem0::build_task("put_back_block_reduced");
  for (auto _ : state) {
    benchmark::DoNotOptimize(mem0::best_value_with_memory(spec, 0));
  }
}
BENCHMARK(BM_MemorylessSearch);

}  // namespace

BENCHMARK_MAIN();
