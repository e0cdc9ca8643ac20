#include "agwo/agent_space.hpp"
#include "agwo/fitness.hpp"
#include "agwo/gwo.hpp"
#include "agwo/orchestrator.hpp"
#include "agwo/test_functions.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

using namespace agwo;

static void BM_MinimizeSphere(benchmark::State& state) {
    const auto dims = static_cast<std::size_t>(state.range(0));
    const auto space = gwo::SearchSpace::cube(dims, -100.0, 100.0);
    gwo::GwoOptions o;
    o.max_iterations = 100;
    for (auto _ : state) {
        ++o.seed;
        benchmark::DoNotOptimize(gwo::minimize(gwo::sphere, space, o).value);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(o.population_size * o.max_iterations));
}
BENCHMARK(BM_MinimizeSphere)->Arg(5)->Arg(30);

static void BM_WeightedLeaderUpdate(benchmark::State& state) {
    const auto policy = SamplingPolicy::defaults();
    const auto weights = LeaderWeights::standard();
    Rng rng(1);
    std::vector<DecodingConfig> leaders(3);
    for (auto& l : leaders) l = sample_decoding(policy, rng);
    const auto follower = sample_decoding(policy, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(weighted_leader_update(follower, leaders, weights, 0.1, policy, rng));
}
BENCHMARK(BM_WeightedLeaderUpdate);

static void BM_RankPopulation(benchmark::State& state) {
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> level(0, 16);
    std::vector<FitnessReport> reports;
    for (int i = 0; i < state.range(0); ++i)
        reports.push_back(FitnessReport::verifiable(level(gen) / 16.0, 16, std::nullopt, JudgeWeights::standard()));
    for (auto _ : state) benchmark::DoNotOptimize(rank_population(reports).order.data());
}
BENCHMARK(BM_RankPopulation)->RangeMultiplier(4)->Range(4, 256);

static void BM_ExtractNumeric(benchmark::State& state) {
    const std::string text =
        "First, Tiffany had 3 bags on Monday. The next day she found 7 more bags.\n"
        "Total Bags = 3 + 7 = 10\nTherefore, Tiffany has a total of 10 bags of cans altogether.";
    for (auto _ : state) benchmark::DoNotOptimize(extract_answer(text, TaskKind::numeric));
}
BENCHMARK(BM_ExtractNumeric);

static void BM_MockRun(benchmark::State& state) {
    const auto root = std::filesystem::temp_directory_path() / "agwo-bench";
    int i = 0;
    for (auto _ : state) {
        state.PauseTiming();
        const auto dir = root / std::to_string(i++);
        std::filesystem::remove_all(dir);
        auto config = load_config(std::nullopt, {});
        config.out_dir = dir;
        state.ResumeTiming();
        benchmark::DoNotOptimize(run(config).history.size());
    }
    std::filesystem::remove_all(root);
}
BENCHMARK(BM_MockRun)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
