#include "gdvae/model.hpp"

#include "gdvae/rng.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace gdvae {

LaplacePrior laplace_prior(const std::vector<double>& alpha) {
    size_t L = alpha.size();
    if (L < 2) throw std::invalid_argument("laplace_prior: need at least 2 components");
    for (double a : alpha)
        if (!(a > 0.0)) throw std::invalid_argument("laplace_prior: alpha must be positive");
    LaplacePrior p;
    p.mu.resize(L);
    p.var.resize(L);
    // running mean: exact for constant sequences, so symmetric alpha gives
    // mu identically zero
    double mean_log = 0.0, sum_inv = 0.0;
    size_t k = 0;
    for (double a : alpha) {
        mean_log += (std::log(a) - mean_log) / static_cast<double>(++k);
        sum_inv += 1.0 / a;
    }
    double Ld = static_cast<double>(L);
    for (size_t i = 0; i < L; ++i) {
        p.mu[i] = std::log(alpha[i]) - mean_log;
        p.var[i] = (1.0 / alpha[i]) * (1.0 - 2.0 / Ld) + sum_inv / (Ld * Ld);
    }
    return p;
}

void ModelDims::validate() const {
    if (n_disease <= 0 || n_procedure <= 0) throw std::invalid_argument("model dims: empty vocabulary");
    if (n_labels <= 0) throw std::invalid_argument("model dims: no labels");
    if (d_emb <= 0 || d_hidden <= 0 || z_dim <= 0 || rec_hidden <= 0)
        throw std::invalid_argument("model dims: layer sizes must be positive");
    if (num_topics < 2) throw std::invalid_argument("model dims: need at least 2 topics");
}

TaskGraph make_task_graph(const AdmissionGraph& graph, const Corpus& corpus, Task task) {
    if (graph.layout.n_admission != corpus.size())
        throw std::invalid_argument("task graph: graph and corpus disagree on admission count");
    TaskGraph tg;
    tg.task = task;
    tg.view = task_view(graph, task);
    tg.norm_adj = normalize_adjacency(sub_adjacency(graph.adjacency, tg.view.nodes));
    tg.n_view_codes = task == Task::recommend ? graph.layout.n_disease : graph.layout.n_codes();
    tg.code_rows.assign(tg.view.nodes.begin(), tg.view.nodes.begin() + tg.n_view_codes);

    IndexedAdmissions ix = index_admissions(corpus);
    tg.pool_rows.resize(corpus.size());
    tg.usable.resize(corpus.size());
    int excluded = 0;
    for (int a = 0; a < corpus.size(); ++a) {
        tg.pool_rows[a] = tg.view.pool_procedures ? ix.all_codes[a] : ix.diseases[a];
        tg.usable[a] = tg.pool_rows[a].empty() ? 0 : 1;
        if (!tg.usable[a]) ++excluded;
    }
    if (excluded > 0)
        std::cerr << "warning: " << excluded << " admissions have no codes to pool in the "
                  << task_letter(task) << " view; they stay in the graph but are excluded from that objective\n";
    return tg;
}

GdVaeModel::GdVaeModel(const ModelDims& d, double alpha, uint64_t seed) : dims(d) {
    dims.validate();
    if (!(alpha > 0.0)) throw std::invalid_argument("model: alpha must be positive");
    topic_prior = laplace_prior(std::vector<double>(dims.num_topics, alpha));

    Rng rng(derive_seed(seed, "model-init"));
    auto gaussian_fill = [&](Parameter& p, double scale) {
        for (double& x : p.value.v) x = scale * rng.normal();
    };
    auto xavier = [&](Parameter& p) {
        double scale = std::sqrt(2.0 / (p.value.rows + p.value.cols));
        gaussian_fill(p, scale);
    };

    X = &params.create("X", dims.n_codes(), dims.d_emb);
    gaussian_fill(*X, 0.1);
    gcn_w1 = &params.create("gcn.w1", dims.d_emb, dims.d_hidden);
    xavier(*gcn_w1);
    gcn_w2 = &params.create("gcn.w2", dims.d_hidden, dims.d_hidden);
    xavier(*gcn_w2);

    const char* names[3] = {"T", "R", "P"};
    for (int k = 0; k < 3; ++k) {
        Task t = static_cast<Task>(k);
        int twoz = 2 * z_dim_for(t);
        head_w[k] = &params.create(std::string("head.") + names[k] + ".w", dims.d_hidden, twoz);
        xavier(*head_w[k]);
        head_b[k] = &params.create(std::string("head.") + names[k] + ".b", 1, twoz);
    }

    topic_logits = &params.create("topic.B", dims.num_topics, dims.n_codes());
    gaussian_fill(*topic_logits, 0.1);

    rec_w1 = &params.create("rec.w1", dims.z_dim, dims.rec_hidden);
    xavier(*rec_w1);
    rec_b1 = &params.create("rec.b1", 1, dims.rec_hidden);
    rec_w2 = &params.create("rec.w2", dims.rec_hidden, dims.n_procedure);
    xavier(*rec_w2);
    rec_b2 = &params.create("rec.b2", 1, dims.n_procedure);

    cls_w = &params.create("cls.w", dims.z_dim, dims.n_labels);
    xavier(*cls_w);
    cls_b = &params.create("cls.b", 1, dims.n_labels);
}

void GdVaeModel::zero_grads() {
    for (Parameter* p : params.list()) p->zero_grad();
}

int GdVaeModel::node_features(Tape& t, const TaskGraph& g) const {
    int xn = t.param(*X);
    int codes = t.gather_rows(xn, g.code_rows);
    int pooled = t.max_pool_rows(xn, g.pool_rows);
    return t.concat_rows(codes, pooled);
}

int GdVaeModel::encode(Tape& t, const TaskGraph& g) const {
    int f = node_features(t, g);
    int h1 = t.relu(t.spmm(g.norm_adj, t.matmul(f, t.param(*gcn_w1))));
    int h2 = t.relu(t.spmm(g.norm_adj, t.matmul(h1, t.param(*gcn_w2))));
    return dims.residual ? t.add(h2, h1) : h2;
}

int GdVaeModel::document_rows(Tape& t, int h, const std::vector<std::vector<int>>& doc_codes) const {
    for (const auto& codes : doc_codes)
        if (codes.empty()) throw std::invalid_argument("document with no codes");
    return t.max_pool_rows(h, doc_codes);
}

int GdVaeModel::admission_rows(Tape& t, int h, const TaskGraph& g,
                               const std::vector<int>& admissions) const {
    std::vector<int> rows;
    rows.reserve(admissions.size());
    int n_adm = static_cast<int>(g.pool_rows.size());
    for (int a : admissions) {
        if (a < 0 || a >= n_adm) throw std::invalid_argument("admission index out of range");
        rows.push_back(g.admission_row(a));
    }
    return t.gather_rows(h, rows);
}

StochasticHead GdVaeModel::head(Tape& t, int input, Task task) const {
    int k = static_cast<int>(task);
    int z = z_dim_for(task);
    int out = t.add_row(t.matmul(input, t.param(*head_w[k])), t.param(*head_b[k]));
    return {t.slice_cols(out, 0, z), t.slice_cols(out, z, 2 * z)};
}

int GdVaeModel::sample_latent(Tape& t, const StochasticHead& h, Task task, DenseMatrix eps) const {
    int z = t.reparam(h.mu, h.logsigma, std::move(eps));
    return task == Task::topic ? t.row_softmax(z) : z;
}

int GdVaeModel::topic_beta(Tape& t) const { return t.row_softmax(t.param(*topic_logits)); }

int GdVaeModel::topic_log_likelihood(Tape& t, int z, std::vector<BitermBag> bags) const {
    return t.biterm_ll(z, topic_beta(t), std::move(bags));
}

int GdVaeModel::rec_log_likelihood(Tape& t, int z, const DenseMatrix& targets) const {
    if (targets.cols != dims.n_procedure)
        throw std::invalid_argument("recommendation targets must cover the procedure vocabulary");
    for (int r = 0; r < targets.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < targets.cols; ++c) s += targets.at(r, c);
        if (!(s > 0.0)) throw std::invalid_argument("empty recommendation target at batch row " +
                                                    std::to_string(r));
    }
    int hid = t.tanh_op(t.add_row(t.matmul(z, t.param(*rec_w1)), t.param(*rec_b1)));
    int logp = t.row_log_softmax(t.add_row(t.matmul(hid, t.param(*rec_w2)), t.param(*rec_b2)));
    return t.weighted_sum(logp, targets);
}

int GdVaeModel::cls_log_likelihood(Tape& t, int z, const DenseMatrix& targets) const {
    if (targets.cols != dims.n_labels)
        throw std::invalid_argument("label targets must cover the label set");
    int logp = t.row_log_softmax(t.add_row(t.matmul(z, t.param(*cls_w)), t.param(*cls_b)));
    return t.weighted_sum(logp, targets);
}

int GdVaeModel::kl(Tape& t, const StochasticHead& h, Task task) const {
    if (task == Task::topic)
        return t.kl_gaussian_prior(h.mu, h.logsigma, topic_prior.mu, topic_prior.var);
    return t.kl_standard_normal(h.mu, h.logsigma);
}

static void check_noise(const DenseMatrix& eps, int rows, int cols, const char* task) {
    if (eps.rows != rows || eps.cols != cols)
        throw std::invalid_argument(std::string("noise draw for ") + task + " must be " +
                                    std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                                    eps.shape_str());
}

ElboResult elbo_joint(GdVaeModel& model, const TaskGraph* full_view, const TaskGraph* rec_view,
                      const JointBatch& batch, const NoiseDraw& noise, bool with_grad) {
    bool do_topic = !batch.doc_bags.empty();
    bool do_rec = !batch.rec_admissions.empty();
    bool do_cls = !batch.cls_admissions.empty();
    if (!do_topic && !do_rec && !do_cls) throw std::invalid_argument("elbo_joint: empty batch");
    if ((do_topic || do_cls) && full_view == nullptr)
        throw std::invalid_argument("elbo_joint: topic/predict batch without the full view");
    if (do_rec && rec_view == nullptr)
        throw std::invalid_argument("elbo_joint: recommend batch without its view");
    if (do_topic && batch.doc_bags.size() != batch.doc_codes.size())
        throw std::invalid_argument("elbo_joint: document bags and code lists disagree");

    Tape tape;
    ElboResult res;
    int h_full = (do_topic || do_cls) ? model.encode(tape, *full_view) : -1;
    int loss = -1;

    auto fold = [&](int recon, int kl_node, int count, ElboComponents& comp, const char* task) {
        comp.recon_sum = tape.scalar_value(recon);
        comp.kl_sum = tape.scalar_value(kl_node);
        comp.count = count;
        if (!std::isfinite(comp.recon_sum) || !std::isfinite(comp.kl_sum))
            throw std::runtime_error(std::string("non-finite loss in ") + task + " objective");
        double inv = 1.0 / static_cast<double>(count);
        int term = tape.add(tape.scale(recon, -inv), tape.scale(kl_node, inv));
        loss = loss < 0 ? term : tape.add(loss, term);
    };

    if (do_topic) {
        check_noise(noise.topic, static_cast<int>(batch.doc_bags.size()), model.dims.num_topics,
                    "topic");
        int pooled = model.document_rows(tape, h_full, batch.doc_codes);
        StochasticHead h = model.head(tape, pooled, Task::topic);
        int z = model.sample_latent(tape, h, Task::topic, noise.topic);
        fold(model.topic_log_likelihood(tape, z, batch.doc_bags),
             model.kl(tape, h, Task::topic), static_cast<int>(batch.doc_bags.size()), res.topic,
             "topic");
    }
    if (do_rec) {
        if (static_cast<int>(batch.rec_admissions.size()) != batch.rec_targets.rows)
            throw std::invalid_argument("elbo_joint: recommendation targets do not match batch");
        check_noise(noise.rec, batch.rec_targets.rows, model.dims.z_dim, "recommend");
        int h_rec = model.encode(tape, *rec_view);
        int rows = model.admission_rows(tape, h_rec, *rec_view, batch.rec_admissions);
        StochasticHead h = model.head(tape, rows, Task::recommend);
        int z = model.sample_latent(tape, h, Task::recommend, noise.rec);
        fold(model.rec_log_likelihood(tape, z, batch.rec_targets),
             model.kl(tape, h, Task::recommend), batch.rec_targets.rows, res.rec, "recommend");
    }
    if (do_cls) {
        if (static_cast<int>(batch.cls_admissions.size()) != batch.cls_targets.rows)
            throw std::invalid_argument("elbo_joint: label targets do not match batch");
        check_noise(noise.cls, batch.cls_targets.rows, model.dims.z_dim, "predict");
        int rows = model.admission_rows(tape, h_full, *full_view, batch.cls_admissions);
        StochasticHead h = model.head(tape, rows, Task::predict);
        int z = model.sample_latent(tape, h, Task::predict, noise.cls);
        fold(model.cls_log_likelihood(tape, z, batch.cls_targets),
             model.kl(tape, h, Task::predict), batch.cls_targets.rows, res.cls, "predict");
    }

    res.loss = tape.scalar_value(loss);
    if (!std::isfinite(res.loss)) throw std::runtime_error("non-finite training loss");
    if (with_grad) {
        model.zero_grads();
        tape.backward(loss);
    }
    return res;
}

DenseMatrix recommend_targets(const IndexedAdmissions& ix, const std::vector<int>& admissions,
                              int n_disease, int n_procedure) {
    DenseMatrix y(static_cast<int>(admissions.size()), n_procedure);
    for (size_t r = 0; r < admissions.size(); ++r) {
        int a = admissions[r];
        if (a < 0 || a >= static_cast<int>(ix.procedures.size()))
            throw std::invalid_argument("recommend_targets: admission index out of range");
        if (ix.procedures[a].empty())
            throw std::invalid_argument("recommend_targets: admission has no procedures");
        for (int code : ix.procedures[a]) y.at(static_cast<int>(r), code - n_disease) = 1.0;
    }
    return y;
}

DenseMatrix label_targets(const IndexedAdmissions& ix, const std::vector<int>& admissions,
                          int n_labels) {
    DenseMatrix y(static_cast<int>(admissions.size()), n_labels);
    for (size_t r = 0; r < admissions.size(); ++r) {
        int a = admissions[r];
        if (a < 0 || a >= static_cast<int>(ix.label.size()))
            throw std::invalid_argument("label_targets: admission index out of range");
        int l = ix.label[a];
        if (l < 0 || l >= n_labels) throw std::invalid_argument("label_targets: label out of range");
        y.at(static_cast<int>(r), l) = 1.0;
    }
    return y;
}

}  // namespace gdvae
