#include "gdvae/pipeline.hpp"

#include "gdvae/checkpoint.hpp"
#include "gdvae/digest.hpp"

#include <json.hpp>

#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gdvae {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

PreparedData prepare_data(const TrainConfig& cfg, const std::string& data_path) {
    cfg.validate();
    PreparedData d;
    d.corpus_digest = digest_file(data_path);
    d.corpus = apply_frequency_threshold(load_admissions(data_path), cfg.min_count);
    d.splits = split_corpus(d.corpus, cfg.train_ratio, cfg.val_ratio, cfg.test_ratio, cfg.seed);
    d.graph = build_graph_variant(d.corpus, d.splits.train,
                                  graph_variant_from_name(cfg.graph_variant));
    return d;
}

RunPaths RunPaths::in(const std::string& dir) {
    RunPaths p;
    p.dir = dir;
    p.config = dir + "/config.cfg";
    p.checkpoint = dir + "/checkpoint.bin";
    p.epochs = dir + "/epochs.jsonl";
    p.splits = dir + "/splits.json";
    p.manifest = dir + "/manifest.json";
    p.metrics = dir + "/metrics.jsonl";
    return p;
}

void ensure_fresh_dir(const std::string& dir, bool force) {
    fs::path p(dir);
    if (fs::exists(p)) {
        if (!force)
            throw std::runtime_error("output directory already exists (use --force to replace): " +
                                     dir);
        fs::remove_all(p);
    }
    fs::create_directories(p);
}

static void refuse_existing_file(const std::string& path, bool force) {
    if (fs::exists(path)) {
        if (!force)
            throw std::runtime_error("output file already exists (use --force to replace): " + path);
        fs::remove(path);
    }
}

void write_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corpus: " + path);
    for (const auto& a : corpus.admissions) {
        ordered_json j;
        j["id"] = a.id;
        j["diseases"] = a.diseases;
        j["procedures"] = a.procedures;
        j["type"] = a.type_label;
        out << j.dump() << "\n";
    }
}

std::string run_synth(const std::string& spec_path, uint64_t seed, const std::string& out_path,
                      bool force) {
    SyntheticSpec spec = load_synthetic_spec(spec_path);
    refuse_existing_file(out_path, force);
    refuse_existing_file(out_path + ".truth.json", force);
    SyntheticCorpus sc = generate_synthetic_corpus(spec, seed);
    write_corpus_jsonl(sc.corpus, out_path);
    ordered_json truth;
    truth["seed"] = seed;
    truth["topic_weights"] = sc.truth.topic_weights;
    truth["topic_label"] = sc.truth.topic_label;
    truth["topic_disease"] = sc.truth.topic_disease;
    truth["topic_procedure"] = sc.truth.topic_procedure;
    truth["admission_topic"] = sc.truth.admission_topic;
    std::ofstream tout(out_path + ".truth.json");
    if (!tout) throw std::runtime_error("cannot write truth sidecar for " + out_path);
    tout << truth.dump(2) << "\n";
    return out_path;
}

void run_build_graph(const TrainConfig& cfg, const std::string& data_path,
                     const std::string& out_path, bool force) {
    PreparedData d = prepare_data(cfg, data_path);
    refuse_existing_file(out_path, force);
    export_graph(d.graph, out_path);
}

static std::string iso_utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

static void write_splits_file(const SplitIds& splits, const std::string& path) {
    ordered_json j;
    j["train"] = splits.train;
    j["val"] = splits.val;
    j["test"] = splits.test;
    j["digest"] = splits.digest();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write splits: " + path);
    out << j.dump(2) << "\n";
}

static void write_epochs_file(const std::vector<EpochRecord>& epochs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write epoch log: " + path);
    for (const auto& e : epochs) {
        ordered_json j;
        j["epoch"] = e.epoch;
        j["train_loss"] = e.train_loss;
        j["val_elbo"] = e.val_elbo;
        j["best"] = e.best;
        if (e.topic.count) {
            j["topic_recon"] = e.topic.recon_mean();
            j["topic_kl"] = e.topic.kl_mean();
        }
        if (e.rec.count) {
            j["rec_recon"] = e.rec.recon_mean();
            j["rec_kl"] = e.rec.kl_mean();
        }
        if (e.cls.count) {
            j["cls_recon"] = e.cls.recon_mean();
            j["cls_kl"] = e.cls.kl_mean();
        }
        out << j.dump() << "\n";
    }
}

RunPaths run_train(const TrainConfig& cfg, const std::string& data_path,
                   const std::string& run_dir, bool force, bool verbose) {
    ensure_fresh_dir(run_dir, force);
    PreparedData d = prepare_data(cfg, data_path);
    TrainOutput t = train_model(cfg, d.corpus, d.graph, verbose);

    RunPaths paths = RunPaths::in(run_dir);
    save_config(cfg, paths.config);
    write_splits_file(t.splits, paths.splits);
    write_epochs_file(t.epochs, paths.epochs);
    save_checkpoint(paths.checkpoint, t.model->params, cfg.digest());

    ordered_json m;
    m["run_id"] = cfg.digest().substr(0, 16) + "-s" + std::to_string(cfg.seed);
    m["config_digest"] = cfg.digest();
    m["corpus_digest"] = d.corpus_digest;
    m["seed"] = cfg.seed;
    m["tasks"] = t.tasks;
    m["data_path"] = fs::absolute(data_path).string();
    m["split_digest"] = t.splits.digest();
    m["best_epoch"] = t.best_epoch;
    m["best_val_elbo"] = t.best_val_elbo;
    m["epochs_run"] = static_cast<int>(t.epochs.size());
    ordered_json artifacts;
    artifacts["config"] = "config.cfg";
    artifacts["splits"] = "splits.json";
    artifacts["epochs"] = "epochs.jsonl";
    artifacts["checkpoint"] = "checkpoint.bin";
    m["artifacts"] = artifacts;
    m["created_at"] = iso_utc_now();
    std::ofstream out(paths.manifest);
    if (!out) throw std::runtime_error("cannot write manifest: " + paths.manifest);
    out << m.dump(2) << "\n";
    return paths;
}

LoadedRun load_run(const std::string& run_dir, const std::string& data_override) {
    RunPaths paths = RunPaths::in(run_dir);
    std::ifstream min(paths.manifest);
    if (!min) throw std::runtime_error("not a run directory (no manifest.json): " + run_dir);
    ordered_json m;
    try {
        min >> m;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed manifest in " + run_dir + ": " + e.what());
    }

    LoadedRun run;
    run.paths = paths;
    run.config = load_config(paths.config);
    if (run.config.digest() != m.at("config_digest").get<std::string>())
        throw std::runtime_error("config.cfg does not match the manifest digest in " + run_dir);
    run.data_path = data_override.empty() ? m.at("data_path").get<std::string>() : data_override;
    run.data = prepare_data(run.config, run.data_path);
    if (run.data.corpus_digest != m.at("corpus_digest").get<std::string>())
        throw std::runtime_error("data file does not match the one this run was trained on: " +
                                 run.data_path);
    if (run.data.splits.digest() != m.at("split_digest").get<std::string>())
        throw std::runtime_error("recomputed split disagrees with the manifest in " + run_dir);

    ModelDims dims;
    dims.n_disease = run.data.corpus.disease_vocab.size();
    dims.n_procedure = run.data.corpus.procedure_vocab.size();
    dims.n_labels = static_cast<int>(run.data.corpus.labels.size());
    dims.d_emb = run.config.d_emb;
    dims.d_hidden = run.config.d_hidden;
    dims.num_topics = run.config.num_topics;
    dims.z_dim = run.config.z_dim;
    dims.rec_hidden = run.config.rec_hidden;
    dims.residual = run.config.residual;
    run.model = std::make_unique<GdVaeModel>(dims, run.config.alpha, run.config.seed);
    load_checkpoint(paths.checkpoint, run.model->params, run.config.digest());
    return run;
}

std::string run_eval(const std::string& run_dir, const std::string& data_override) {
    LoadedRun run = load_run(run_dir, data_override);
    EvalReport rep =
        evaluate_model(*run.model, run.data.graph, run.data.corpus, run.data.splits, run.config);
    std::ofstream out(run.paths.metrics);
    if (!out) throw std::runtime_error("cannot write metrics: " + run.paths.metrics);
    out << metrics_to_jsonl(rep);
    return run.paths.metrics;
}

void run_ablate(const TrainConfig& cfg, const std::string& data_path, const std::string& out_dir,
                bool force, bool verbose) {
    ensure_fresh_dir(out_dir, force);
    PreparedData d = prepare_data(cfg, data_path);
    std::vector<AblationRow> rows = ablation_matrix(cfg, d.corpus, d.graph, verbose);

    save_config(cfg, out_dir + "/config.cfg");
    write_splits_file(d.splits, out_dir + "/splits.json");

    std::ofstream out(out_dir + "/ablation.jsonl");
    if (!out) throw std::runtime_error("cannot write ablation results: " + out_dir);
    for (const auto& row : rows) {
        ordered_json j;
        j["tasks"] = row.tasks;
        j["best_epoch"] = row.best_epoch;
        j["best_val_elbo"] = row.best_val_elbo;
        j["split_digest"] = row.split_digest;
        if (row.metrics.coherence) j["npmi_coherence"] = *row.metrics.coherence;
        for (const auto& r : row.metrics.recommendation) {
            std::string key = "rec_top" + std::to_string(r.m);
            ordered_json rj;
            rj["precision"] = r.precision;
            rj["recall"] = r.recall;
            rj["f1"] = r.f1;
            rj["evaluated"] = r.evaluated;
            rj["skipped"] = r.skipped;
            j[key] = rj;
        }
        if (row.metrics.classification) {
            ordered_json cj;
            cj["accuracy"] = row.metrics.classification->accuracy;
            cj["precision"] = row.metrics.classification->precision;
            cj["recall"] = row.metrics.classification->recall;
            cj["f1"] = row.metrics.classification->f1;
            j["classification"] = cj;
        }
        out << j.dump() << "\n";
    }
    std::ofstream table(out_dir + "/table.txt");
    if (!table) throw std::runtime_error("cannot write ablation table: " + out_dir);
    table << ablation_table_text(rows);

    ordered_json m;
    m["config_digest"] = cfg.digest();
    m["corpus_digest"] = d.corpus_digest;
    m["seed"] = cfg.seed;
    m["data_path"] = fs::absolute(data_path).string();
    m["split_digest"] = d.splits.digest();
    m["created_at"] = iso_utc_now();
    std::ofstream mf(out_dir + "/manifest.json");
    if (!mf) throw std::runtime_error("cannot write manifest: " + out_dir);
    mf << m.dump(2) << "\n";
}

}  // namespace gdvae
