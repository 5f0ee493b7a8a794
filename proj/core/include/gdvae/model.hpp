#pragma once

#include "gdvae/autodiff.hpp"
#include "gdvae/corpus.hpp"
#include "gdvae/graph.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace gdvae {

// Diagonal logistic-normal approximation of Dir(alpha) in the softmax
// basis: mu_i = log a_i - mean_j log a_j,
// var_i = (1 - 2/L)/a_i + sum_j (1/a_j) / L^2.
struct LaplacePrior {
    std::vector<double> mu;
    std::vector<double> var;
};
LaplacePrior laplace_prior(const std::vector<double>& alpha);

struct ModelDims {
    int n_disease = 0;
    int n_procedure = 0;
    int n_labels = 0;
    int d_emb = 200;
    int d_hidden = 200;
    int num_topics = 10;
    int z_dim = 200;      // recommendation and prediction latents
    int rec_hidden = 200;
    bool residual = true;

    int n_codes() const { return n_disease + n_procedure; }
    void validate() const;
};

// A task's working slice of the admission graph: the view's renormalized
// sub-adjacency plus the row bookkeeping the encoder needs. Node order
// inside a view: its code nodes (ascending global index), then every
// admission in corpus order.
struct TaskGraph {
    Task task = Task::topic;
    TaskView view;
    SparseMatrix norm_adj;
    std::vector<int> code_rows;  // local code row -> embedding row
    int n_view_codes = 0;
    std::vector<std::vector<int>> pool_rows;  // per admission: embedding rows pooled
    std::vector<char> usable;                 // pool_rows nonempty
    int admission_row(int admission_index) const { return n_view_codes + admission_index; }
};
TaskGraph make_task_graph(const AdmissionGraph& graph, const Corpus& corpus, Task task);

struct StochasticHead {
    int mu;
    int logsigma;
};

// One joint optimization step's data. A task is active iff its slot is
// nonempty. Documents index the topic view; admissions index the corpus.
struct JointBatch {
    std::vector<BitermBag> doc_bags;
    std::vector<std::vector<int>> doc_codes;  // pooled embedding rows per document
    std::vector<int> rec_admissions;
    DenseMatrix rec_targets;  // |rec_admissions| x n_procedure, row sums > 0
    std::vector<int> cls_admissions;
    DenseMatrix cls_targets;  // |cls_admissions| x n_labels, one-hot rows
};

struct NoiseDraw {
    DenseMatrix topic;  // docs x num_topics
    DenseMatrix rec;    // admissions x z_dim
    DenseMatrix cls;    // admissions x z_dim
};

struct ElboComponents {
    double recon_sum = 0.0;
    double kl_sum = 0.0;
    int count = 0;
    double recon_mean() const { return count ? recon_sum / count : 0.0; }
    double kl_mean() const { return count ? kl_sum / count : 0.0; }
    double elbo_mean() const { return recon_mean() - kl_mean(); }
};

struct ElboResult {
    double loss = 0.0;  // sum over active tasks of (mean KL - mean recon)
    ElboComponents topic, rec, cls;
};

// Shared GCN encoder, three stochastic heads, three decoders. All
// parameters exist regardless of which tasks are trained, so checkpoints
// have one layout.
class GdVaeModel {
public:
    ModelDims dims;
    LaplacePrior topic_prior;
    ParameterStore params;

    Parameter* X;       // code embeddings, n_codes x d_emb
    Parameter* gcn_w1;  // d_emb x d_hidden
    Parameter* gcn_w2;  // d_hidden x d_hidden
    std::array<Parameter*, 3> head_w{};  // d_hidden x 2 z(task)
    std::array<Parameter*, 3> head_b{};
    Parameter* topic_logits;  // num_topics x n_codes; rows softmax to topic-word dists
    Parameter* rec_w1;        // z_dim x rec_hidden
    Parameter* rec_b1;
    Parameter* rec_w2;  // rec_hidden x n_procedure
    Parameter* rec_b2;
    Parameter* cls_w;  // z_dim x n_labels
    Parameter* cls_b;

    GdVaeModel(const ModelDims& dims, double alpha, uint64_t seed);

    int z_dim_for(Task t) const { return t == Task::topic ? dims.num_topics : dims.z_dim; }
    void zero_grads();

    // Node features: rows of X for the view's codes, column-wise max over
    // each admission's pooled code rows for admissions.
    int node_features(Tape& t, const TaskGraph& g) const;
    // Two ReLU graph-convolution layers; the second adds a residual from
    // the first when dims.residual is set.
    int encode(Tape& t, const TaskGraph& g) const;
    int document_rows(Tape& t, int h, const std::vector<std::vector<int>>& doc_codes) const;
    int admission_rows(Tape& t, int h, const TaskGraph& g, const std::vector<int>& admissions) const;
    StochasticHead head(Tape& t, int input, Task task) const;
    // Reparameterized draw; the topic latent is pushed through a softmax.
    int sample_latent(Tape& t, const StochasticHead& h, Task task, DenseMatrix eps) const;
    int topic_beta(Tape& t) const;
    int topic_log_likelihood(Tape& t, int z, std::vector<BitermBag> bags) const;
    int rec_log_likelihood(Tape& t, int z, const DenseMatrix& targets) const;
    int cls_log_likelihood(Tape& t, int z, const DenseMatrix& targets) const;
    int kl(Tape& t, const StochasticHead& h, Task task) const;
};

// Joint negative-ELBO over the active tasks with one noise draw per datum.
// With with_grad, zeroes model gradients and backpropagates the loss.
// full_view serves topic and predict; rec_view serves recommend; either may
// be null if the corresponding tasks are inactive.
ElboResult elbo_joint(GdVaeModel& model, const TaskGraph* full_view, const TaskGraph* rec_view,
                      const JointBatch& batch, const NoiseDraw& noise, bool with_grad);

// Multinomial targets over procedure codes (set semantics, 0/1 counts).
// Admissions without procedures are rejected here; filter first.
DenseMatrix recommend_targets(const IndexedAdmissions& ix, const std::vector<int>& admissions,
                              int n_disease, int n_procedure);
// One-hot label targets.
DenseMatrix label_targets(const IndexedAdmissions& ix, const std::vector<int>& admissions,
                          int n_labels);

}  // namespace gdvae
