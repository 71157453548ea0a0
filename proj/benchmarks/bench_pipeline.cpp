#include <benchmark/benchmark.h>

#include "taaco/model.hpp"
#include "taaco/synthetic.hpp"

namespace {

using namespace taaco;

struct Fixture {
  SyntheticResult synth;
  std::shared_ptr<const EmbeddingProvider> embedder;
  std::unique_ptr<TaacoModel> model;
  std::vector<TrainingPoint> points;

  Fixture() {
    synth = generate_synthetic_persona(make_synthetic_spec(0, 99, 40, 0.6));
    embedder = std::make_shared<HashEmbedder>(13, 256);
    ModelConfig config;
    config.encoder.seed = 5;
    config.lm_dim = 256;
    model = std::make_unique<TaacoModel>(config, synth.dataset.state_space,
                                         synth.dataset.vocabulary, embedder);
    ReplayClient replay("synthetic-oracle");
    Rng rng(17);
    for (const auto& pt : synth.dataset.tasks) {
      auto task = std::make_shared<const TaskDescription>(pt.task);
      auto rep = std::make_shared<const ScoredRepresentation>(
          build_representation(*task, synth.dataset.vocabulary, replay, synth.oracle_cache));
      for (const auto& sample : pt.feedback) {
        auto expanded =
            expand_feedback(sample, synth.dataset.state_space, task, rep, 2, rng);
        points.insert(points.end(), expanded.begin(), expanded.end());
      }
    }
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_BuildRepresentation(benchmark::State& state) {
  auto& f = fixture();
  ReplayClient replay("synthetic-oracle");
  for (auto _ : state) {
    auto rep = build_representation(f.synth.dataset.tasks[0].task, f.synth.dataset.vocabulary,
                                    replay, f.synth.oracle_cache);
    benchmark::DoNotOptimize(rep.entries.data());
  }
}
BENCHMARK(BM_BuildRepresentation);

void BM_TrainEpoch(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    double loss = f.model->loss_and_gradients(f.points, 20.0);
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.points.size()));
}
BENCHMARK(BM_TrainEpoch);

void BM_Predict(benchmark::State& state) {
  auto& f = fixture();
  StateVector sv;
  sv.values.assign(f.synth.dataset.state_space.size(), false);
  for (auto _ : state) {
    auto pred = f.model->predict_from_rep(*f.points[0].rep, sv, f.points[0].task.get());
    benchmark::DoNotOptimize(pred.probabilities.data());
  }
}
BENCHMARK(BM_Predict);

}  // namespace
