#pragma once

#include "gdvae/config.hpp"
#include "gdvae/corpus.hpp"
#include "gdvae/graph.hpp"
#include "gdvae/model.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace gdvae {

// Per-topic ranked (code index, probability) lists from the topic decoder.
// Equal probabilities rank the lower code index first.
struct TopicTopWords {
    std::vector<std::vector<std::pair<int, double>>> topics;
};
TopicTopWords topic_top_words(const GdVaeModel& model, int top_n);

// Normalized PMI under the reference counts: (log p_ij - log p_i p_j) /
// (-log p_ij). Pairs that never co-occur give -1; p_ij = 1 gives 0.
double npmi(const CooccurrenceStats& stats, int i, int j);

// Mean pairwise NPMI of each topic's top-n words, averaged over topics and
// over the n values (each capped at the ranked list length).
double npmi_coherence(const TopicTopWords& words, const CooccurrenceStats& reference,
                      const std::vector<int>& top_ns);

// Per-instance precision/recall/F1 of the top-m list against a truth set,
// averaged over instances. Instances with empty truth are skipped and
// counted. F1 is 0 where precision + recall is 0.
struct TopmReport {
    int m = 0;
    double precision = 0, recall = 0, f1 = 0;
    int evaluated = 0, skipped = 0;
};
TopmReport topm_metrics(const std::vector<std::vector<int>>& ranked,
                        const std::vector<std::vector<int>>& truth, int m);

// Macro-averaged over all n_classes classes (absent classes contribute 0),
// plus plain accuracy.
struct ClassificationReport {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    int count = 0;
};
ClassificationReport classification_metrics(const std::vector<int>& predicted,
                                            const std::vector<int>& truth, int n_classes);

// Posterior means (zero-noise encode) for admissions under a task head.
// For the topic task an admission is treated as the document of its codes.
DenseMatrix admission_latent_mu(const GdVaeModel& model, const TaskGraph& graph,
                                const std::vector<int>& admissions, Task task);
// Decoder distributions at the posterior mean, one row per admission.
DenseMatrix recommend_scores(const GdVaeModel& model, const TaskGraph& rec_graph,
                             const std::vector<int>& admissions);
DenseMatrix predict_scores(const GdVaeModel& model, const TaskGraph& full_graph,
                           const std::vector<int>& admissions);

// Indices of the m largest scores, descending; ties toward lower index.
std::vector<int> top_m_indices(const double* scores, int n, int m);

struct EvalReport {
    std::string tasks;
    std::optional<double> coherence;
    std::vector<int> coherence_top_ns;
    std::vector<TopmReport> recommendation;
    std::optional<ClassificationReport> classification;
};

// Test-split metrics for every task the config trains. Topic coherence is
// referenced against train-split co-occurrence counts.
EvalReport evaluate_model(const GdVaeModel& model, const AdmissionGraph& graph,
                          const Corpus& corpus, const SplitIds& splits, const TrainConfig& cfg);

// One JSON object per line, fixed key order.
std::string metrics_to_jsonl(const EvalReport& report);

// TSV with a header row. Codes are rows of X; admission vectors are the
// posterior means of the chosen task head.
void export_code_embeddings(const GdVaeModel& model, const Corpus& corpus, std::ostream& out);
void export_admission_latents(const GdVaeModel& model, const AdmissionGraph& graph,
                              const Corpus& corpus, Task task, std::ostream& out);

}  // namespace gdvae
