#pragma once

#include "gdvae/corpus.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gdvae {

// Generator spec for synthetic admissions: planted topics over disease
// codes, a disease -> procedure conditional table, and a topic -> label map.
// Rows of topic_disease and disease_procedure are probability vectors.
struct SyntheticSpec {
    std::vector<std::string> disease_codes;
    std::vector<std::string> procedure_codes;
    std::vector<std::string> labels;
    std::vector<double> topic_weights;                   // L*, sums to 1
    std::vector<std::vector<double>> topic_disease;      // L* x |D|
    std::vector<int> topic_label;                        // L* -> label index
    std::vector<std::vector<double>> disease_procedure;  // |D| x |P|
    int num_admissions = 0;
    int min_codes = 1;  // diseases sampled per admission, uniform on [min, max]
    int max_codes = 1;
    double label_noise = 0.0;  // probability of replacing the topic's label by a uniform one

    int num_topics() const { return static_cast<int>(topic_weights.size()); }
    void validate() const;
};

SyntheticSpec load_synthetic_spec(const std::string& path);
void save_synthetic_spec(const SyntheticSpec& spec, const std::string& path);

// What was actually planted, for recovery checks. Distributions are indexed
// by the generator spec's code lists, not by any later vocabulary.
struct PlantedTruth {
    std::vector<std::vector<double>> topic_disease;
    std::vector<std::vector<double>> topic_procedure;  // induced: sum_d p(d|l) q(p|d)
    std::vector<double> topic_weights;
    std::vector<int> topic_label;
    std::vector<int> admission_topic;  // per generated admission
};

struct SyntheticCorpus {
    Corpus corpus;
    PlantedTruth truth;
};

// Deterministic in (spec, seed). Each admission: draw a topic, draw a
// without-replacement disease set from that topic, map each disease through
// the procedure table, then emit the topic's label or (with probability
// label_noise) a uniformly random one.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, uint64_t seed);

// Convenience spec with disjoint uniform topics, a deterministic
// disease -> procedure map and a bijective topic -> label map.
SyntheticSpec default_synthetic_spec(int num_topics, int diseases_per_topic,
                                     int num_admissions, double label_noise);

}  // namespace gdvae
