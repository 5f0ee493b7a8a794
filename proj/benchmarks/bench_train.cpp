#include "gdvae/optim.hpp"
#include "gdvae/synthetic.hpp"
#include "gdvae/trainer.hpp"

#include <benchmark/benchmark.h>

using namespace gdvae;

namespace {

struct TrainFixture {
    Corpus corpus;
    AdmissionGraph graph;
    TaskGraph full_view;
    TaskGraph rec_view;
    std::unique_ptr<GdVaeModel> model;
    JointBatch batch;

    explicit TrainFixture(int n_admissions) {
        SyntheticSpec spec = default_synthetic_spec(5, 8, n_admissions, 0.1);
        corpus = generate_synthetic_corpus(spec, 11).corpus;
        std::vector<std::string> ids;
        for (const auto& a : corpus.admissions) ids.push_back(a.id);
        graph = build_graph_variant(corpus, ids, GraphVariant::pmi_tfidf);
        full_view = make_task_graph(graph, corpus, Task::topic);
        rec_view = make_task_graph(graph, corpus, Task::recommend);

        ModelDims dims;
        dims.n_disease = corpus.disease_vocab.size();
        dims.n_procedure = corpus.procedure_vocab.size();
        dims.n_labels = static_cast<int>(corpus.labels.size());
        dims.d_emb = 64;
        dims.d_hidden = 64;
        dims.z_dim = 32;
        dims.rec_hidden = 64;
        dims.num_topics = 5;
        model = std::make_unique<GdVaeModel>(dims, 0.02, 13);

        Rng rng(17);
        auto docs = make_biterm_documents(corpus, ids, 10, 32, rng);
        IndexedAdmissions ix = index_admissions(corpus);
        std::vector<int> admissions;
        for (int i = 0; i < corpus.size(); ++i)
            if (!ix.procedures[i].empty()) admissions.push_back(i);
        if (admissions.size() > 64) admissions.resize(64);

        for (const auto& d : docs) {
            batch.doc_bags.push_back(d.pairs);
            batch.doc_codes.push_back(d.codes);
        }
        batch.rec_admissions = admissions;
        batch.rec_targets = recommend_targets(ix, admissions, dims.n_disease, dims.n_procedure);
        batch.cls_admissions = admissions;
        batch.cls_targets = label_targets(ix, admissions, dims.n_labels);
    }

    NoiseDraw noise(uint64_t seed) const {
        Rng rng(seed);
        NoiseDraw n;
        n.topic = DenseMatrix(static_cast<int>(batch.doc_bags.size()), model->dims.num_topics);
        n.rec = DenseMatrix(static_cast<int>(batch.rec_admissions.size()), model->dims.z_dim);
        n.cls = DenseMatrix(static_cast<int>(batch.cls_admissions.size()), model->dims.z_dim);
        for (double& x : n.topic.v) x = rng.normal();
        for (double& x : n.rec.v) x = rng.normal();
        for (double& x : n.cls.v) x = rng.normal();
        return n;
    }
};

}  // namespace

static void BM_ElboForward(benchmark::State& state) {
    TrainFixture fx(static_cast<int>(state.range(0)));
    NoiseDraw noise = fx.noise(23);
    for (auto _ : state) {
        ElboResult r = elbo_joint(*fx.model, &fx.full_view, &fx.rec_view, fx.batch, noise, false);
        benchmark::DoNotOptimize(r.loss);
    }
}
BENCHMARK(BM_ElboForward)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_TrainStep(benchmark::State& state) {
    TrainFixture fx(static_cast<int>(state.range(0)));
    NoiseDraw noise = fx.noise(29);
    AdamConfig adam;
    for (auto _ : state) {
        ElboResult r = elbo_joint(*fx.model, &fx.full_view, &fx.rec_view, fx.batch, noise, true);
        adam_step(fx.model->params.list(), adam);
        benchmark::DoNotOptimize(r.loss);
    }
}
BENCHMARK(BM_TrainStep)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
