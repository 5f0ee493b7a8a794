#pragma once

#include "gdvae/corpus.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gdvae {

struct SparseEntry {
    int row;
    int col;
    double weight;
};

// COO storage sorted by (row, col), plus a CSR row index built by
// finalize(). finalize() rejects duplicates, out-of-range indices and
// non-finite weights; zero weights are dropped so the form is canonical.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<SparseEntry> entries;
    std::vector<int> row_ptr;

    SparseMatrix() = default;
    SparseMatrix(int r, int c) : rows(r), cols(c) {}

    void add(int r, int c, double w) { entries.push_back({r, c, w}); }
    void finalize();
    bool finalized() const { return row_ptr.size() == static_cast<size_t>(rows) + 1; }
    size_t nnz() const { return entries.size(); }
    double at(int r, int c) const;  // 0 for absent entries
    bool is_symmetric() const;      // exact comparison
};

SparseMatrix transpose(const SparseMatrix& m);

// Node order: diseases, then procedures, then admissions in corpus order.
// Code nodes use the global code index from IndexedAdmissions.
struct NodeLayout {
    int n_disease = 0;
    int n_procedure = 0;
    int n_admission = 0;
    int n_codes() const { return n_disease + n_procedure; }
    int total() const { return n_codes() + n_admission; }
    int admission_node(int admission_index) const { return n_codes() + admission_index; }
};

// Set-semantics counts over a reference set of admissions: an admission
// contributes each code once and each unordered code pair once.
struct CooccurrenceStats {
    int num_admissions = 0;
    std::unordered_map<int, int> df;                 // global code idx -> #admissions
    std::map<std::pair<int, int>, int> pair_count;   // key has i < j

    double p(int code) const;
    double p_joint(int i, int j) const;
    int pair(int i, int j) const;
};
CooccurrenceStats count_cooccurrence(const Corpus& corpus,
                                     const std::vector<std::string>& admission_ids);

// PMI(i, j) = log p_ij - log(p_i p_j), natural log, counts restricted to the
// reference admissions. Only co-occurring pairs are present; values can be
// negative. Symmetric by construction (canonical key i < j).
using PmiMap = std::map<std::pair<int, int>, double>;
PmiMap compute_pmi(const Corpus& corpus, const std::vector<std::string>& reference_ids);
std::optional<double> pmi_lookup(const PmiMap& pmi, int i, int j);

// TF-IDF weight between every admission (all splits; the graph is built
// transductively) and each of its codes: tf = 1/|codes of admission|,
// idf = log(N_ref / df_ref). Codes unseen in the reference set get no edge.
using TfidfMap = std::map<std::pair<int, int>, double>;  // (admission idx, global code idx)
TfidfMap compute_tfidf(const Corpus& corpus, const std::vector<std::string>& reference_ids);

struct AdmissionGraph {
    NodeLayout layout;
    SparseMatrix adjacency;   // raw weights, unit diagonal
    SparseMatrix normalized;  // D^-1/2 A D^-1/2 with d_i = sum_j a_ij
};

// Piecewise adjacency: 1 on the diagonal, positive PMI between codes,
// TF-IDF between admissions and their codes, 0 otherwise. Verified
// symmetric before returning.
AdmissionGraph assemble_adjacency(const Corpus& corpus, const PmiMap& pmi, const TfidfMap& tfidf);

SparseMatrix normalize_adjacency(const SparseMatrix& a);

// Rows/cols restricted to `nodes` (ascending global ids), reindexed densely.
SparseMatrix sub_adjacency(const SparseMatrix& a, const std::vector<int>& nodes);

enum class GraphVariant { binary, tfidf, pmi_binary, pmi_tfidf };
GraphVariant graph_variant_from_name(const std::string& name);
std::string graph_variant_name(GraphVariant v);

// Edge-weighting ablations: binary / tfidf drop code-code edges entirely and
// weight admission-code edges by 1 / tf-idf; pmi_binary keeps PMI edges and
// binarizes admission-code edges; pmi_tfidf is assemble_adjacency.
AdmissionGraph build_graph_variant(const Corpus& corpus,
                                   const std::vector<std::string>& reference_ids,
                                   GraphVariant variant);

enum class Task { topic = 0, recommend = 1, predict = 2 };
char task_letter(Task t);

// Which nodes a task's encoder sees and which code kinds feed admission
// feature pooling. topic/predict: all nodes, pool diseases and procedures.
// recommend: disease and admission nodes only, pool diseases only.
struct TaskView {
    Task task;
    std::vector<int> nodes;  // global node ids, ascending
    bool pool_procedures = true;
};
TaskView task_view(const AdmissionGraph& graph, Task task);

// Debug dump: one header line, then "row col weight" per stored entry.
void export_graph(const AdmissionGraph& graph, const std::string& path);

}  // namespace gdvae
