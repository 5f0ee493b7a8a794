#include "gdvae/trainer.hpp"

#include "gdvae/optim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace gdvae {

std::vector<BitermDocument> make_biterm_documents(const Corpus& corpus,
                                                  const std::vector<std::string>& reference_ids,
                                                  int merge_count, int num_docs, Rng& rng) {
    if (reference_ids.empty())
        throw std::invalid_argument("biterm documents: empty reference set");
    if (merge_count < 1) throw std::invalid_argument("biterm documents: merge_count must be >= 1");
    if (num_docs < 1) throw std::invalid_argument("biterm documents: num_docs must be >= 1");
    IndexedAdmissions ix = index_admissions(corpus);
    std::vector<int> ref_idx;
    ref_idx.reserve(reference_ids.size());
    for (const auto& id : reference_ids) {
        int a = corpus.admission_index(id);
        if (a < 0) throw std::invalid_argument("biterm documents: unknown admission id " + id);
        ref_idx.push_back(a);
    }
    int n = static_cast<int>(ref_idx.size());
    int k = std::min(merge_count, n);

    std::vector<BitermDocument> docs;
    docs.reserve(num_docs);
    std::vector<int> work;
    for (int d = 0; d < num_docs; ++d) {
        work = ref_idx;
        for (int t = 0; t < k; ++t) {  // partial Fisher-Yates: first k are the sample
            int j = t + rng.uniform_int(n - t);
            std::swap(work[t], work[j]);
        }
        std::map<std::pair<int, int>, double> counts;
        std::set<int> codes;
        BitermDocument doc;
        for (int t = 0; t < k; ++t) {
            int a = work[t];
            doc.admission_ids.push_back(corpus.admissions[a].id);
            const auto& cs = ix.all_codes[a];
            codes.insert(cs.begin(), cs.end());
            for (size_t i = 0; i < cs.size(); ++i)
                for (size_t j = i + 1; j < cs.size(); ++j) counts[{cs[i], cs[j]}] += 1.0;
        }
        for (const auto& [key, c] : counts) doc.pairs.push_back({key.first, key.second, c});
        doc.codes.assign(codes.begin(), codes.end());
        std::sort(doc.admission_ids.begin(), doc.admission_ids.end());
        docs.push_back(std::move(doc));
    }
    return docs;
}

namespace {

std::vector<int> ids_to_indices(const Corpus& corpus, const std::vector<std::string>& ids) {
    std::vector<int> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        int a = corpus.admission_index(id);
        if (a < 0) throw std::invalid_argument("unknown admission id in split: " + id);
        out.push_back(a);
    }
    return out;
}

constexpr int kEvalChunk = 512;

ElboComponents chunked_topic_elbo(GdVaeModel& model, const TaskGraph& tg,
                                  const std::vector<BitermDocument>& docs) {
    ElboComponents total;
    for (size_t start = 0; start < docs.size(); start += kEvalChunk) {
        size_t end = std::min(start + static_cast<size_t>(kEvalChunk), docs.size());
        JointBatch b;
        for (size_t i = start; i < end; ++i) {
            b.doc_bags.push_back(docs[i].pairs);
            b.doc_codes.push_back(docs[i].codes);
        }
        NoiseDraw noise;
        noise.topic = DenseMatrix(static_cast<int>(end - start), model.dims.num_topics);
        ElboResult r = elbo_joint(model, &tg, nullptr, b, noise, false);
        total.recon_sum += r.topic.recon_sum;
        total.kl_sum += r.topic.kl_sum;
        total.count += r.topic.count;
    }
    return total;
}

ElboComponents chunked_rec_elbo(GdVaeModel& model, const TaskGraph& tg,
                                const IndexedAdmissions& ix, const std::vector<int>& admissions) {
    ElboComponents total;
    for (size_t start = 0; start < admissions.size(); start += kEvalChunk) {
        size_t end = std::min(start + static_cast<size_t>(kEvalChunk), admissions.size());
        JointBatch b;
        b.rec_admissions.assign(admissions.begin() + start, admissions.begin() + end);
        b.rec_targets = recommend_targets(ix, b.rec_admissions, model.dims.n_disease,
                                          model.dims.n_procedure);
        NoiseDraw noise;
        noise.rec = DenseMatrix(static_cast<int>(end - start), model.dims.z_dim);
        ElboResult r = elbo_joint(model, nullptr, &tg, b, noise, false);
        total.recon_sum += r.rec.recon_sum;
        total.kl_sum += r.rec.kl_sum;
        total.count += r.rec.count;
    }
    return total;
}

ElboComponents chunked_cls_elbo(GdVaeModel& model, const TaskGraph& tg,
                                const IndexedAdmissions& ix, const std::vector<int>& admissions) {
    ElboComponents total;
    for (size_t start = 0; start < admissions.size(); start += kEvalChunk) {
        size_t end = std::min(start + static_cast<size_t>(kEvalChunk), admissions.size());
        JointBatch b;
        b.cls_admissions.assign(admissions.begin() + start, admissions.begin() + end);
        b.cls_targets = label_targets(ix, b.cls_admissions, model.dims.n_labels);
        NoiseDraw noise;
        noise.cls = DenseMatrix(static_cast<int>(end - start), model.dims.z_dim);
        ElboResult r = elbo_joint(model, &tg, nullptr, b, noise, false);
        total.recon_sum += r.cls.recon_sum;
        total.kl_sum += r.cls.kl_sum;
        total.count += r.cls.count;
    }
    return total;
}

void fill_normal(DenseMatrix& m, Rng& rng) {
    for (double& x : m.v) x = rng.normal();
}

}  // namespace

TrainOutput train_model(const TrainConfig& cfg, const Corpus& corpus, const AdmissionGraph& graph,
                        bool verbose) {
    cfg.validate();
    std::string tasks = normalize_tasks(cfg.tasks);
    bool do_t = tasks.find('T') != std::string::npos;
    bool do_r = tasks.find('R') != std::string::npos;
    bool do_p = tasks.find('P') != std::string::npos;

    TrainOutput out;
    out.tasks = tasks;
    out.splits = split_corpus(corpus, cfg.train_ratio, cfg.val_ratio, cfg.test_ratio, cfg.seed);

    ModelDims dims;
    dims.n_disease = corpus.disease_vocab.size();
    dims.n_procedure = corpus.procedure_vocab.size();
    dims.n_labels = static_cast<int>(corpus.labels.size());
    dims.d_emb = cfg.d_emb;
    dims.d_hidden = cfg.d_hidden;
    dims.num_topics = cfg.num_topics;
    dims.z_dim = cfg.z_dim;
    dims.rec_hidden = cfg.rec_hidden;
    dims.residual = cfg.residual;

    // All stochastic choices of this run flow from one stream keyed by the
    // seed and the task subset.
    Rng rng(derive_seed(cfg.seed, "train-" + tasks));
    out.model = std::make_unique<GdVaeModel>(dims, cfg.alpha, rng.next_u64());
    GdVaeModel& model = *out.model;

    IndexedAdmissions ix = index_admissions(corpus);
    std::optional<TaskGraph> tg_full, tg_rec;
    if (do_t || do_p)
        tg_full = make_task_graph(graph, corpus, do_t ? Task::topic : Task::predict);
    if (do_r) tg_rec = make_task_graph(graph, corpus, Task::recommend);

    std::vector<BitermDocument> train_docs, val_docs;
    if (do_t) {
        train_docs = make_biterm_documents(corpus, out.splits.train, cfg.merge_count,
                                           cfg.num_biterm_docs, rng);
        int n_val = std::max<int>(
            1, static_cast<int>(std::llround(static_cast<double>(cfg.num_biterm_docs) *
                                             static_cast<double>(out.splits.val.size()) /
                                             static_cast<double>(out.splits.train.size()))));
        val_docs = make_biterm_documents(corpus, out.splits.val, cfg.merge_count, n_val, rng);
    }

    std::vector<int> train_idx = ids_to_indices(corpus, out.splits.train);
    std::vector<int> val_idx = ids_to_indices(corpus, out.splits.val);
    std::vector<int> rec_train, rec_val, cls_train, cls_val;
    if (do_r) {
        for (int a : train_idx)
            if (!ix.procedures[a].empty()) rec_train.push_back(a);
        for (int a : val_idx)
            if (!ix.procedures[a].empty()) rec_val.push_back(a);
        if (rec_train.empty())
            throw std::runtime_error("no train admissions with procedure codes; cannot train R");
        if (rec_val.empty())
            throw std::runtime_error("no validation admissions with procedure codes; cannot validate R");
    }
    if (do_p) {
        cls_train = train_idx;
        cls_val = val_idx;
    }

    int nt = static_cast<int>(train_docs.size());
    int nr = static_cast<int>(rec_train.size());
    int np = static_cast<int>(cls_train.size());
    int bt = do_t ? std::min(cfg.batch_size, nt) : 0;
    int br = do_r ? std::min(cfg.batch_size, nr) : 0;
    int bp = do_p ? std::min(cfg.batch_size, np) : 0;
    int steps = 1;
    if (do_t) steps = std::max(steps, (nt + bt - 1) / bt);
    if (do_r) steps = std::max(steps, (nr + br - 1) / br);
    if (do_p) steps = std::max(steps, (np + bp - 1) / bp);

    AdamConfig adam;
    adam.lr = cfg.learning_rate;

    std::vector<DenseMatrix> best_values;
    auto snapshot = [&] {
        best_values.clear();
        for (Parameter* p : model.params.list()) best_values.push_back(p->value);
    };
    auto restore = [&] {
        const auto& ps = model.params.list();
        for (size_t i = 0; i < ps.size(); ++i) ps[i]->value = best_values[i];
    };

    double best_val = -std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    std::vector<int> perm_t(nt), perm_r(nr), perm_p(np);
    for (int i = 0; i < nt; ++i) perm_t[i] = i;
    for (int i = 0; i < nr; ++i) perm_r[i] = i;
    for (int i = 0; i < np; ++i) perm_p[i] = i;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (do_t) rng.shuffle(perm_t);
        if (do_r) rng.shuffle(perm_r);
        if (do_p) rng.shuffle(perm_p);

        EpochRecord er;
        er.epoch = epoch;
        double loss_sum = 0.0;
        for (int s = 0; s < steps; ++s) {
            JointBatch batch;
            NoiseDraw noise;
            if (do_t) {
                for (int t = 0; t < bt; ++t) {
                    const BitermDocument& d = train_docs[perm_t[(s * bt + t) % nt]];
                    batch.doc_bags.push_back(d.pairs);
                    batch.doc_codes.push_back(d.codes);
                }
                noise.topic = DenseMatrix(bt, dims.num_topics);
                fill_normal(noise.topic, rng);
            }
            if (do_r) {
                for (int t = 0; t < br; ++t)
                    batch.rec_admissions.push_back(rec_train[perm_r[(s * br + t) % nr]]);
                batch.rec_targets =
                    recommend_targets(ix, batch.rec_admissions, dims.n_disease, dims.n_procedure);
                noise.rec = DenseMatrix(br, dims.z_dim);
                fill_normal(noise.rec, rng);
            }
            if (do_p) {
                for (int t = 0; t < bp; ++t)
                    batch.cls_admissions.push_back(cls_train[perm_p[(s * bp + t) % np]]);
                batch.cls_targets = label_targets(ix, batch.cls_admissions, dims.n_labels);
                noise.cls = DenseMatrix(bp, dims.z_dim);
                fill_normal(noise.cls, rng);
            }
            ElboResult r = elbo_joint(model, tg_full ? &*tg_full : nullptr,
                                      tg_rec ? &*tg_rec : nullptr, batch, noise, true);
            adam_step(model.params.list(), adam);
            loss_sum += r.loss;
            er.topic.recon_sum += r.topic.recon_sum;
            er.topic.kl_sum += r.topic.kl_sum;
            er.topic.count += r.topic.count;
            er.rec.recon_sum += r.rec.recon_sum;
            er.rec.kl_sum += r.rec.kl_sum;
            er.rec.count += r.rec.count;
            er.cls.recon_sum += r.cls.recon_sum;
            er.cls.kl_sum += r.cls.kl_sum;
            er.cls.count += r.cls.count;
        }
        er.train_loss = loss_sum / steps;

        double val_elbo = 0.0;
        if (do_t) val_elbo += chunked_topic_elbo(model, *tg_full, val_docs).elbo_mean();
        if (do_r) val_elbo += chunked_rec_elbo(model, *tg_rec, ix, rec_val).elbo_mean();
        if (do_p) val_elbo += chunked_cls_elbo(model, *tg_full, ix, cls_val).elbo_mean();
        er.val_elbo = val_elbo;

        if (val_elbo > best_val) {
            best_val = val_elbo;
            best_epoch = epoch;
            er.best = true;
            snapshot();
        }
        out.epochs.push_back(er);
        if (verbose) {
            std::printf("[%s] epoch %d  train_loss %.6f  val_elbo %.6f%s\n", tasks.c_str(), epoch,
                        er.train_loss, er.val_elbo, er.best ? "  *" : "");
            std::fflush(stdout);
        }
        if (epoch - best_epoch >= cfg.patience) break;
    }

    restore();
    out.best_epoch = best_epoch;
    out.best_val_elbo = best_val;
    return out;
}

static const char* kSubsets[7] = {"T", "R", "P", "TR", "TP", "RP", "TRP"};

std::vector<AblationRow> ablation_matrix(const TrainConfig& base, const Corpus& corpus,
                                         const AdmissionGraph& graph, bool verbose) {
    base.validate();
    std::vector<AblationRow> rows(7);
    std::atomic<size_t> next{0};
    std::mutex mu;
    std::exception_ptr first_error;

    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    if (const char* cap = std::getenv("GDVAE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(cap, &end, 10);
        if (end == cap || *end != '\0' || v < 1)
            throw std::invalid_argument("GDVAE_THREADS must be a positive integer");
        workers = std::min<unsigned>(workers, static_cast<unsigned>(v));
    }
    workers = std::min<unsigned>(workers, 7);

    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= 7) return;
            try {
                TrainConfig cfg = base;
                cfg.tasks = kSubsets[i];
                TrainOutput t = train_model(cfg, corpus, graph, false);
                AblationRow row;
                row.tasks = kSubsets[i];
                row.best_epoch = t.best_epoch;
                row.best_val_elbo = t.best_val_elbo;
                row.split_digest = t.splits.digest();
                row.metrics = evaluate_model(*t.model, graph, corpus, t.splits, cfg);
                rows[i] = std::move(row);
                if (verbose) {
                    std::lock_guard<std::mutex> lock(mu);
                    std::printf("ablation %s done (best epoch %d, val_elbo %.6f)\n", kSubsets[i],
                                rows[i].best_epoch, rows[i].best_val_elbo);
                    std::fflush(stdout);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    for (const auto& row : rows)
        if (row.split_digest != rows[0].split_digest)
            throw std::logic_error("ablation rows disagree on the corpus split");
    return rows;
}

std::string ablation_table_text(const std::vector<AblationRow>& rows) {
    auto cell = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%10.4f", v);
        return std::string(buf);
    };
    auto blank = [] { return std::string(10, ' ').replace(9, 1, "-"); };
    const AblationRow* full = nullptr;
    for (const auto& r : rows)
        if (r.tasks == "TRP") full = &r;

    std::string out;
    out += "tasks  best_epoch   val_elbo   coherence      p@m        f1@m    accuracy    macro_f1\n";
    for (const auto& r : rows) {
        char head[32];
        std::snprintf(head, sizeof(head), "%-5s  %10d", r.tasks.c_str(), r.best_epoch);
        out += head;
        out += " " + cell(r.best_val_elbo);
        out += " " + (r.metrics.coherence ? cell(*r.metrics.coherence) : blank());
        if (!r.metrics.recommendation.empty()) {
            out += " " + cell(r.metrics.recommendation.front().precision);
            out += " " + cell(r.metrics.recommendation.front().f1);
        } else {
            out += " " + blank() + " " + blank();
        }
        if (r.metrics.classification) {
            out += " " + cell(r.metrics.classification->accuracy);
            out += " " + cell(r.metrics.classification->f1);
        } else {
            out += " " + blank() + " " + blank();
        }
        out += "\n";
    }
    if (full) {
        out += "\ndeltas vs TRP\n";
        for (const auto& r : rows) {
            if (r.tasks == "TRP") continue;
            char head[32];
            std::snprintf(head, sizeof(head), "%-5s", r.tasks.c_str());
            out += head;
            out += r.metrics.coherence && full->metrics.coherence
                       ? "  coherence " + cell(*r.metrics.coherence - *full->metrics.coherence)
                       : "";
            if (!r.metrics.recommendation.empty() && !full->metrics.recommendation.empty())
                out += "  f1@m " + cell(r.metrics.recommendation.front().f1 -
                                        full->metrics.recommendation.front().f1);
            if (r.metrics.classification && full->metrics.classification)
                out += "  accuracy " +
                       cell(r.metrics.classification->accuracy - full->metrics.classification->accuracy);
            out += "\n";
        }
    }
    return out;
}

}  // namespace gdvae
