#include "gdvae/graph.hpp"
#include "gdvae/model.hpp"
#include "gdvae/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace gdvae;

namespace {

const Corpus& bench_corpus(int n_admissions) {
    static std::map<int, Corpus> cache;
    auto it = cache.find(n_admissions);
    if (it == cache.end()) {
        SyntheticSpec spec = default_synthetic_spec(8, 12, n_admissions, 0.1);
        it = cache.emplace(n_admissions, generate_synthetic_corpus(spec, 7).corpus).first;
    }
    return it->second;
}

std::vector<std::string> all_ids(const Corpus& c) {
    std::vector<std::string> ids;
    ids.reserve(c.admissions.size());
    for (const auto& a : c.admissions) ids.push_back(a.id);
    return ids;
}

}  // namespace

static void BM_CountCooccurrence(benchmark::State& state) {
    const Corpus& c = bench_corpus(static_cast<int>(state.range(0)));
    auto ids = all_ids(c);
    for (auto _ : state) {
        CooccurrenceStats stats = count_cooccurrence(c, ids);
        benchmark::DoNotOptimize(stats.pair_count.size());
    }
}
BENCHMARK(BM_CountCooccurrence)->Arg(1000)->Arg(4000);

static void BM_ComputePmi(benchmark::State& state) {
    const Corpus& c = bench_corpus(static_cast<int>(state.range(0)));
    auto ids = all_ids(c);
    for (auto _ : state) {
        PmiMap pmi = compute_pmi(c, ids);
        benchmark::DoNotOptimize(pmi.size());
    }
}
BENCHMARK(BM_ComputePmi)->Arg(1000)->Arg(4000);

static void BM_ComputeTfidf(benchmark::State& state) {
    const Corpus& c = bench_corpus(static_cast<int>(state.range(0)));
    auto ids = all_ids(c);
    for (auto _ : state) {
        TfidfMap w = compute_tfidf(c, ids);
        benchmark::DoNotOptimize(w.size());
    }
}
BENCHMARK(BM_ComputeTfidf)->Arg(1000)->Arg(4000);

static void BM_AssembleGraph(benchmark::State& state) {
    const Corpus& c = bench_corpus(static_cast<int>(state.range(0)));
    auto ids = all_ids(c);
    for (auto _ : state) {
        AdmissionGraph g = build_graph_variant(c, ids, GraphVariant::pmi_tfidf);
        benchmark::DoNotOptimize(g.normalized.entries.size());
    }
}
BENCHMARK(BM_AssembleGraph)->Arg(1000)->Arg(4000);

static void BM_TaskViewRecommend(benchmark::State& state) {
    const Corpus& c = bench_corpus(2000);
    auto ids = all_ids(c);
    AdmissionGraph g = build_graph_variant(c, ids, GraphVariant::pmi_tfidf);
    for (auto _ : state) {
        TaskGraph tg = make_task_graph(g, c, Task::recommend);
        benchmark::DoNotOptimize(tg.norm_adj.entries.size());
    }
}
BENCHMARK(BM_TaskViewRecommend);
