#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "enrichbench/datasets.hpp"
#include "enrichbench/embedder.hpp"
#include "enrichbench/metrics.hpp"
#include "enrichbench/store.hpp"
#include "enrichbench/textprep.hpp"
#include "enrichbench/vector_math.hpp"

using namespace enrichbench;

static std::vector<double> random_vector(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    std::vector<double> v(dim);
    for (auto& x : v) x = n(rng);
    return v;
}

static void BM_Cosine(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto dim = static_cast<std::size_t>(state.range(0));
    const auto a = random_vector(dim, rng), b = random_vector(dim, rng);
    for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity(a, b));
}
BENCHMARK(BM_Cosine)->Arg(256)->Arg(1024)->Arg(4096);

static void BM_AveragePrecision(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<ScoredPair> pairs(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = {std::to_string(i), u(rng), static_cast<int>(i % 2)};
    for (auto _ : state) benchmark::DoNotOptimize(average_precision(pairs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AveragePrecision)->Arg(1000)->Arg(100000);

static void BM_MockEmbed(benchmark::State& state) {
    MockEmbedder embedder(static_cast<int>(state.range(0)), 42);
    const auto pairs = datasets::synthetic_pairset(50, 50, 7);
    std::vector<std::string> texts;
    for (const auto& p : pairs.pairs) texts.push_back(p.text_a);
    for (auto _ : state) benchmark::DoNotOptimize(embedder.embed(texts));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(texts.size()));
}
BENCHMARK(BM_MockEmbed)->Arg(256)->Arg(1536);

static void BM_Preprocess(benchmark::State& state) {
    const std::string tweet = "Loved the NEW update!! https://t.co/xyz #winning @support thanks Ärger über alles";
    for (auto _ : state) benchmark::DoNotOptimize(textprep::preprocess(tweet, textprep::default_pair_steps()));
}
BENCHMARK(BM_Preprocess);

namespace {

struct BenchStore {
    BenchStore() : root(std::filesystem::temp_directory_path() / "enrichbench-bench-store"), store(fresh(root)) {}
    ~BenchStore() { std::filesystem::remove_all(root); }
    static std::filesystem::path fresh(const std::filesystem::path& p) {
        std::filesystem::remove_all(p);
        return p;
    }
    std::filesystem::path root;
    store::Store store;
};

}  // namespace

static void BM_StorePut(benchmark::State& state) {
    BenchStore s;
    const std::string payload(static_cast<std::size_t>(state.range(0)), 'x');
    std::uint64_t n = 0;
    for (auto _ : state) {
        s.store.put(store::CacheKey::embed("bench", "m", Digest::of(std::to_string(n++))), payload);
    }
}
BENCHMARK(BM_StorePut)->Arg(1024)->Arg(16 * 1024);

static void BM_StoreGetHit(benchmark::State& state) {
    BenchStore s;
    const auto key = store::CacheKey::embed("bench", "m", Digest::of("hit"));
    s.store.put(key, std::string(static_cast<std::size_t>(state.range(0)), 'x'));
    for (auto _ : state) benchmark::DoNotOptimize(s.store.get(key));
}
BENCHMARK(BM_StoreGetHit)->Arg(1024)->Arg(16 * 1024);
BENCHMARK_MAIN();
