#pragma once

#include "gdvae/config.hpp"
#include "gdvae/synthetic.hpp"
#include "gdvae/trainer.hpp"

#include <memory>
#include <string>

namespace gdvae {

// Data preparation shared by every subcommand: load, frequency-threshold,
// split, then build the configured graph variant transductively (all
// admissions are nodes; edge statistics use the train split only).
struct PreparedData {
    Corpus corpus;
    SplitIds splits;
    AdmissionGraph graph;
    std::string corpus_digest;  // of the raw data file bytes
};
PreparedData prepare_data(const TrainConfig& cfg, const std::string& data_path);

struct RunPaths {
    std::string dir;
    std::string config;
    std::string checkpoint;
    std::string epochs;
    std::string splits;
    std::string manifest;
    std::string metrics;
    static RunPaths in(const std::string& dir);
};

// Creates dir; an existing one is refused unless force, which replaces it.
void ensure_fresh_dir(const std::string& dir, bool force);

void write_corpus_jsonl(const Corpus& corpus, const std::string& path);

// Generates a corpus from a generator spec and writes it (plus a
// "<out>.truth.json" sidecar with the planted structure).
std::string run_synth(const std::string& spec_path, uint64_t seed, const std::string& out_path,
                      bool force);

// Writes the assembled graph of cfg.graph_variant as a text edge list.
void run_build_graph(const TrainConfig& cfg, const std::string& data_path,
                     const std::string& out_path, bool force);

// Full training run: artifacts are config.cfg, splits.json, epochs.jsonl,
// checkpoint.bin and manifest.json (the only file carrying timestamps).
RunPaths run_train(const TrainConfig& cfg, const std::string& data_path,
                   const std::string& run_dir, bool force, bool verbose = false);

struct LoadedRun {
    RunPaths paths;
    TrainConfig config;
    std::string data_path;
    PreparedData data;
    std::unique_ptr<GdVaeModel> model;
};

// Rebuilds corpus, splits and graph from the recorded config and data file,
// verifying the corpus digest and the stored split, then loads the
// checkpoint. data_override repoints the data file (same content required).
LoadedRun load_run(const std::string& run_dir, const std::string& data_override = "");

// Evaluates a finished run and writes metrics.jsonl into it.
std::string run_eval(const std::string& run_dir, const std::string& data_override = "");

// Trains all task subsets and writes ablation.jsonl plus table.txt.
void run_ablate(const TrainConfig& cfg, const std::string& data_path, const std::string& out_dir,
                bool force, bool verbose = false);

}  // namespace gdvae
