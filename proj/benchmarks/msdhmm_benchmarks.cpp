#include <benchmark/benchmark.h>

#include <random>

#include "msdhmm/dual_stage.hpp"
#include "msdhmm/msd_hmm.hpp"
#include "msdhmm/segmenter.hpp"
#include "msdhmm/skeleton_io.hpp"
#include "msdhmm/synthetic.hpp"

using namespace msdhmm;

namespace {

const DualStageModel& model() {
  static const DualStageModel m = [] {
    SyntheticOptions o;
    o.classes = 20;
    o.subjects = 5;
    o.episodes = 3;
    const auto d = SkeletonDescriptor::msr_action3d();
    return train_pipeline(synthetic_dataset(d, o), d, PipelineOptions{});
  }();
  return m;
}

GestureInstance sample_gesture(int label) {
  SyntheticOptions o;
  o.seed = 99;
  return synthetic_gesture(label, 2, 50, SkeletonDescriptor::msr_action3d(), o);
}

void BM_ForwardStep(benchmark::State& state) {
  const auto& hmm = model().stage1.models.front();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> sym(0, hmm.levels() - 1);
  std::vector<Symbol> o(hmm.streams());
  for (auto& s : o) s = static_cast<Symbol>(sym(rng));
  ForwardState fs;
  for (auto _ : state) {
    if (fs.steps > 200) fs.reset();
    benchmark::DoNotOptimize(forward_step(hmm, fs, o));
  }
}
BENCHMARK(BM_ForwardStep);

void BM_Classify(benchmark::State& state) {
  const auto& m = model();
  const auto g = sample_gesture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(classify(m, g.frames).label);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.frames.size()));
}
BENCHMARK(BM_Classify)->Arg(1)->Arg(10)->Arg(20);

void BM_RunStream(benchmark::State& state) {
  const auto& m = model();
  std::vector<GestureInstance> gestures;
  for (int label = 1; label <= 20; ++label) gestures.push_back(sample_gesture(label));
  const auto stream = merge_into_stream(gestures, 30);
  for (auto _ : state) benchmark::DoNotOptimize(run_stream(stream.frames, m, SegmenterConfig{}).size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.frames.size()));
}
BENCHMARK(BM_RunStream)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
