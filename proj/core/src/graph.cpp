#include "gdvae/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gdvae {

void SparseMatrix::finalize() {
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
            throw std::logic_error("sparse entry out of range");
        if (!std::isfinite(e.weight)) throw std::logic_error("sparse entry is not finite");
    }
    std::erase_if(entries, [](const SparseEntry& e) { return e.weight == 0.0; });
    std::sort(entries.begin(), entries.end(), [](const SparseEntry& a, const SparseEntry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (size_t i = 1; i < entries.size(); ++i)
        if (entries[i].row == entries[i - 1].row && entries[i].col == entries[i - 1].col)
            throw std::logic_error("duplicate sparse entry at (" + std::to_string(entries[i].row) +
                                   ", " + std::to_string(entries[i].col) + ")");
    row_ptr.assign(static_cast<size_t>(rows) + 1, 0);
    for (const auto& e : entries) ++row_ptr[static_cast<size_t>(e.row) + 1];
    for (int r = 0; r < rows; ++r) row_ptr[static_cast<size_t>(r) + 1] += row_ptr[r];
}

double SparseMatrix::at(int r, int c) const {
    if (!finalized()) throw std::logic_error("sparse matrix not finalized");
    int lo = row_ptr[r], hi = row_ptr[static_cast<size_t>(r) + 1];
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (entries[mid].col == c) return entries[mid].weight;
        if (entries[mid].col < c)
            lo = mid + 1;
        else
            hi = mid;
    }
    return 0.0;
}

bool SparseMatrix::is_symmetric() const {
    if (rows != cols || !finalized()) return false;
    for (const auto& e : entries)
        if (at(e.col, e.row) != e.weight) return false;
    return true;
}

SparseMatrix transpose(const SparseMatrix& m) {
    SparseMatrix t(m.cols, m.rows);
    t.entries.reserve(m.entries.size());
    for (const auto& e : m.entries) t.add(e.col, e.row, e.weight);
    t.finalize();
    return t;
}

double CooccurrenceStats::p(int code) const {
    auto it = df.find(code);
    return it == df.end() ? 0.0 : static_cast<double>(it->second) / num_admissions;
}

int CooccurrenceStats::pair(int i, int j) const {
    if (i > j) std::swap(i, j);
    auto it = pair_count.find({i, j});
    return it == pair_count.end() ? 0 : it->second;
}

double CooccurrenceStats::p_joint(int i, int j) const {
    return static_cast<double>(pair(i, j)) / num_admissions;
}

CooccurrenceStats count_cooccurrence(const Corpus& corpus,
                                     const std::vector<std::string>& admission_ids) {
    if (admission_ids.empty()) throw std::invalid_argument("co-occurrence: empty reference set");
    IndexedAdmissions ix = index_admissions(corpus);
    CooccurrenceStats st;
    st.num_admissions = static_cast<int>(admission_ids.size());
    for (const auto& id : admission_ids) {
        int a = corpus.admission_index(id);
        if (a < 0) throw std::invalid_argument("co-occurrence: unknown admission id " + id);
        const auto& codes = ix.all_codes[a];
        for (int c : codes) ++st.df[c];
        for (size_t i = 0; i < codes.size(); ++i)
            for (size_t j = i + 1; j < codes.size(); ++j)
                ++st.pair_count[{codes[i], codes[j]}];
    }
    return st;
}

PmiMap compute_pmi(const Corpus& corpus, const std::vector<std::string>& reference_ids) {
    CooccurrenceStats st = count_cooccurrence(corpus, reference_ids);
    PmiMap out;
    for (const auto& [key, cnt] : st.pair_count) {
        if (cnt == 0) continue;
        double pij = static_cast<double>(cnt) / st.num_admissions;
        double pi = st.p(key.first);
        double pj = st.p(key.second);
        out[key] = std::log(pij) - std::log(pi * pj);
    }
    return out;
}

std::optional<double> pmi_lookup(const PmiMap& pmi, int i, int j) {
    if (i > j) std::swap(i, j);
    auto it = pmi.find({i, j});
    if (it == pmi.end()) return std::nullopt;
    return it->second;
}

TfidfMap compute_tfidf(const Corpus& corpus, const std::vector<std::string>& reference_ids) {
    CooccurrenceStats st = count_cooccurrence(corpus, reference_ids);
    IndexedAdmissions ix = index_admissions(corpus);
    TfidfMap out;
    for (int a = 0; a < corpus.size(); ++a) {
        const auto& codes = ix.all_codes[a];
        if (codes.empty()) continue;
        double tf = 1.0 / static_cast<double>(codes.size());
        for (int c : codes) {
            auto it = st.df.find(c);
            if (it == st.df.end()) continue;  // code unseen in reference set: no edge
            double idf = std::log(static_cast<double>(st.num_admissions) / it->second);
            double w = tf * idf;
            if (w != 0.0) out[{a, c}] = w;
        }
    }
    return out;
}

AdmissionGraph assemble_adjacency(const Corpus& corpus, const PmiMap& pmi, const TfidfMap& tfidf) {
    AdmissionGraph g;
    g.layout.n_disease = corpus.disease_vocab.size();
    g.layout.n_procedure = corpus.procedure_vocab.size();
    g.layout.n_admission = corpus.size();
    int n = g.layout.total();
    g.adjacency = SparseMatrix(n, n);
    for (int i = 0; i < n; ++i) g.adjacency.add(i, i, 1.0);
    for (const auto& [key, value] : pmi) {
        if (value <= 0.0) continue;
        g.adjacency.add(key.first, key.second, value);
        g.adjacency.add(key.second, key.first, value);
    }
    for (const auto& [key, w] : tfidf) {
        int adm_node = g.layout.admission_node(key.first);
        g.adjacency.add(adm_node, key.second, w);
        g.adjacency.add(key.second, adm_node, w);
    }
    g.adjacency.finalize();
    if (!g.adjacency.is_symmetric()) throw std::logic_error("assembled adjacency is not symmetric");
    g.normalized = normalize_adjacency(g.adjacency);
    return g;
}

SparseMatrix normalize_adjacency(const SparseMatrix& a) {
    if (!a.finalized()) throw std::logic_error("normalize_adjacency: matrix not finalized");
    if (a.rows != a.cols) throw std::invalid_argument("normalize_adjacency: matrix must be square");
    std::vector<double> degree(a.rows, 0.0);
    for (const auto& e : a.entries) degree[e.row] += e.weight;
    std::vector<double> inv_sqrt(a.rows);
    for (int i = 0; i < a.rows; ++i) {
        if (degree[i] <= 0.0)
            throw std::runtime_error("normalize_adjacency: nonpositive degree at node " +
                                     std::to_string(i));
        inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);
    }
    SparseMatrix out(a.rows, a.cols);
    out.entries.reserve(a.nnz());
    // parenthesized scale keeps the result exactly symmetric (product of the
    // two inverse roots is order-independent, so (r,c) and (c,r) agree bitwise)
    for (const auto& e : a.entries)
        out.add(e.row, e.col, e.weight * (inv_sqrt[e.row] * inv_sqrt[e.col]));
    out.finalize();
    return out;
}

SparseMatrix sub_adjacency(const SparseMatrix& a, const std::vector<int>& nodes) {
    if (!a.finalized()) throw std::logic_error("sub_adjacency: matrix not finalized");
    std::vector<int> remap(a.rows, -1);
    for (size_t i = 0; i < nodes.size(); ++i) {
        int n = nodes[i];
        if (n < 0 || n >= a.rows) throw std::invalid_argument("sub_adjacency: node out of range");
        if (i > 0 && nodes[i] <= nodes[i - 1])
            throw std::invalid_argument("sub_adjacency: nodes must be ascending and unique");
        remap[n] = static_cast<int>(i);
    }
    SparseMatrix out(static_cast<int>(nodes.size()), static_cast<int>(nodes.size()));
    for (const auto& e : a.entries) {
        int r = remap[e.row], c = remap[e.col];
        if (r >= 0 && c >= 0) out.add(r, c, e.weight);
    }
    out.finalize();
    return out;
}

GraphVariant graph_variant_from_name(const std::string& name) {
    if (name == "binary") return GraphVariant::binary;
    if (name == "tfidf") return GraphVariant::tfidf;
    if (name == "pmi_binary") return GraphVariant::pmi_binary;
    if (name == "pmi_tfidf") return GraphVariant::pmi_tfidf;
    throw std::invalid_argument("unknown graph variant: " + name);
}

std::string graph_variant_name(GraphVariant v) {
    switch (v) {
        case GraphVariant::binary: return "binary";
        case GraphVariant::tfidf: return "tfidf";
        case GraphVariant::pmi_binary: return "pmi_binary";
        case GraphVariant::pmi_tfidf: return "pmi_tfidf";
    }
    throw std::logic_error("bad graph variant");
}

AdmissionGraph build_graph_variant(const Corpus& corpus,
                                   const std::vector<std::string>& reference_ids,
                                   GraphVariant variant) {
    TfidfMap tfidf = compute_tfidf(corpus, reference_ids);
    PmiMap pmi;
    if (variant == GraphVariant::pmi_binary || variant == GraphVariant::pmi_tfidf)
        pmi = compute_pmi(corpus, reference_ids);
    if (variant == GraphVariant::binary || variant == GraphVariant::pmi_binary)
        for (auto& [key, w] : tfidf) w = 1.0;
    return assemble_adjacency(corpus, pmi, tfidf);
}

char task_letter(Task t) {
    switch (t) {
        case Task::topic: return 'T';
        case Task::recommend: return 'R';
        case Task::predict: return 'P';
    }
    throw std::logic_error("bad task");
}

TaskView task_view(const AdmissionGraph& graph, Task task) {
    TaskView view;
    view.task = task;
    const NodeLayout& L = graph.layout;
    if (task == Task::recommend) {
        view.pool_procedures = false;
        for (int i = 0; i < L.n_disease; ++i) view.nodes.push_back(i);
        for (int i = 0; i < L.n_admission; ++i) view.nodes.push_back(L.admission_node(i));
    } else {
        view.pool_procedures = true;
        for (int i = 0; i < L.total(); ++i) view.nodes.push_back(i);
    }
    return view;
}

void export_graph(const AdmissionGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write graph export: " + path);
    const NodeLayout& L = graph.layout;
    out << "# nodes " << L.total() << " diseases " << L.n_disease << " procedures " << L.n_procedure
        << " admissions " << L.n_admission << " edges " << graph.adjacency.nnz() << "\n";
    char buf[64];
    for (const auto& e : graph.adjacency.entries) {
        std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", e.row, e.col, e.weight);
        out << buf;
    }
}

}  // namespace gdvae
