#pragma once

#include "gdvae/config.hpp"
#include "gdvae/corpus.hpp"
#include "gdvae/eval.hpp"
#include "gdvae/graph.hpp"
#include "gdvae/model.hpp"
#include "gdvae/rng.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gdvae {

// A pseudo-document for the topic task: merge_count admissions sampled
// without replacement, each contributing every unordered pair of its own
// code set; the pair multisets are pooled. Admissions with one code
// contribute no pairs but still widen the pooled code set.
struct BitermDocument {
    BitermBag pairs;                       // i < j, global code indices
    std::vector<int> codes;                // union, ascending
    std::vector<std::string> admission_ids;  // sorted
};

std::vector<BitermDocument> make_biterm_documents(const Corpus& corpus,
                                                  const std::vector<std::string>& reference_ids,
                                                  int merge_count, int num_docs, Rng& rng);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;  // mean step loss
    double val_elbo = 0.0;    // summed per-task mean ELBO, zero-noise
    bool best = false;
    ElboComponents topic, rec, cls;  // training epoch totals
};

struct TrainOutput {
    std::unique_ptr<GdVaeModel> model;  // best-validation parameters
    SplitIds splits;
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;
    double best_val_elbo = 0.0;
    std::string tasks;
};

// Joint training over the config's task subset. Deterministic in
// (config, corpus): model init, document sampling, batch order and noise
// all come from streams derived from config.seed and the task subset.
// Early stopping: no validation improvement for `patience` epochs; the
// best-validation parameters are restored before returning.
TrainOutput train_model(const TrainConfig& cfg, const Corpus& corpus,
                        const AdmissionGraph& graph, bool verbose = false);

struct AblationRow {
    std::string tasks;
    int best_epoch = -1;
    double best_val_elbo = 0.0;
    std::string split_digest;
    EvalReport metrics;
};

// Trains every nonempty subset of {T, R, P} under the base config (same
// seed, so identical splits) and evaluates each. Rows run in a worker pool;
// GDVAE_THREADS caps its size. Results do not depend on the thread count.
std::vector<AblationRow> ablation_matrix(const TrainConfig& base, const Corpus& corpus,
                                         const AdmissionGraph& graph, bool verbose = false);

// Fixed-width comparison table with deltas against the full subset.
std::string ablation_table_text(const std::vector<AblationRow>& rows);

}  // namespace gdvae
