#pragma once

#include "gdvae/graph.hpp"

#include <cstdint>
#include <string>

namespace gdvae {

// Training configuration. File format: one `key = value` per line, `#`
// comments, unknown keys rejected. tasks accepts forms like "TRP", "T,R"
// or "rp" and is normalized to subset order T, R, P.
struct TrainConfig {
    std::string tasks = "TRP";
    int epochs = 100;
    int batch_size = 256;
    double learning_rate = 1e-3;
    uint64_t seed = 1;
    int num_topics = 10;
    int merge_count = 10;       // admissions merged into one biterm document
    int num_biterm_docs = 5000;
    int d_emb = 200;
    int d_hidden = 200;
    int z_dim = 200;
    int rec_hidden = 200;
    double alpha = 0.02;
    std::string graph_variant = "pmi_tfidf";
    int patience = 10;
    int min_count = 1;
    double train_ratio = 0.6;
    double val_ratio = 0.2;
    double test_ratio = 0.2;
    bool residual = true;

    bool task_active(Task t) const;
    void validate() const;
    // Fixed-order key=value rendering; the digest is a hash of this text,
    // so equal digests mean equal resolved configurations.
    std::string canonical() const;
    std::string digest() const;
};

TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config(const std::string& path);
void save_config(const TrainConfig& cfg, const std::string& path);

std::string normalize_tasks(const std::string& tasks);

}  // namespace gdvae
