#include <benchmark/benchmark.h>

#include <vector>

#include "cmaa2c/critic.hpp"
#include "cmaa2c/occupation.hpp"
#include "cmaa2c/risk.hpp"
#include "cmaa2c/tabular_mdp.hpp"
#include "cmaa2c/trainer.hpp"

using namespace cmaa2c;

namespace {

Eigen::MatrixXd random_inputs(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -1.0, 1.0);
    return m;
}

// Actor-sized network on one episode worth of observations.
void BM_MlpForwardBatch(benchmark::State& state) {
    Rng rng(1);
    const std::vector<int> widths{6, 64, 64, 5};
    const auto net = nn::Mlp::make(widths, rng);
    const auto x = random_inputs(6, static_cast<int>(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBatch)->Arg(1)->Arg(26)->Arg(256);

void BM_MlpBackwardBatch(benchmark::State& state) {
    Rng rng(2);
    const std::vector<int> widths{8, 64, 64, 2};
    const auto net = nn::Mlp::make(widths, rng);
    const auto x = random_inputs(8, static_cast<int>(state.range(0)), rng);
    const auto g = random_inputs(2, static_cast<int>(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(net.backward_batch(x, g));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpBackwardBatch)->Arg(26)->Arg(256);

void BM_OccupationExact(benchmark::State& state) {
    Rng rng(3);
    const auto mdp = env::TabularMdp::random(static_cast<int>(state.range(0)), rng);
    const occupation::DiscountSpec spec{0.99, std::nullopt};
    for (auto _ : state) benchmark::DoNotOptimize(occupation::occupation_exact(mdp, spec).measure);
}
BENCHMARK(BM_OccupationExact)->Arg(10)->Arg(50)->Arg(200);

void BM_EmpiricalCvar(benchmark::State& state) {
    Rng rng(4);
    std::vector<std::vector<double>> episodes(static_cast<std::size_t>(state.range(0)));
    for (auto& e : episodes)
        for (int t = 0; t <= 25; ++t) e.push_back(standard_normal(rng));
    const auto samples = risk::occupation_samples(episodes, 0.99);
    for (auto _ : state) benchmark::DoNotOptimize(risk::empirical_cvar(samples, 0.9));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size()));
}
BENCHMARK(BM_EmpiricalCvar)->Arg(50)->Arg(500);

void BM_TrainStep(benchmark::State& state) {
    training::TrainerConfig cfg;
    cfg.critic = static_cast<critics::CriticVariant>(state.range(0));
    cfg.eval_interval = 0;
    training::Trainer trainer(cfg);
    for (auto _ : state) benchmark::DoNotOptimize(trainer.train_step());
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
