// Command-line front end: synthetic data, graph assembly, training,
// ablation, evaluation and inspection of finished runs.

#include "gdvae/eval.hpp"
#include "gdvae/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace gdvae;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string data_path;
    std::string out_path;
    std::string run_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string tasks;
    std::string graph_variant;
    int top = 10;
    bool force = false;
    bool quiet = false;
};

TrainConfig resolve_config(const CommonOpts& o) {
    TrainConfig cfg = o.config_path.empty() ? TrainConfig() : load_config(o.config_path);
    if (o.seed_set) cfg.seed = o.seed;
    if (!o.tasks.empty()) cfg.tasks = normalize_tasks(o.tasks);
    if (!o.graph_variant.empty()) {
        graph_variant_from_name(o.graph_variant);
        cfg.graph_variant = o.graph_variant;
    }
    cfg.validate();
    return cfg;
}

void add_config_overrides(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "training config file (key = value lines)");
    cmd->add_option("--seed", o.seed, "override the config seed")->each([&](const std::string&) {
        o.seed_set = true;
    });
    cmd->add_option("--tasks", o.tasks, "override the task subset, e.g. TRP or T,R");
    cmd->add_option("--graph-variant", o.graph_variant,
                    "override the edge weighting: binary | tfidf | pmi_binary | pmi_tfidf");
}

int run_topics(const CommonOpts& o) {
    LoadedRun run = load_run(o.run_dir, o.data_path);
    TopicTopWords words = topic_top_words(*run.model, o.top);
    const Corpus& corpus = run.data.corpus;
    int n_d = corpus.disease_vocab.size();
    std::string text;
    for (size_t l = 0; l < words.topics.size(); ++l) {
        text += "topic " + std::to_string(l) + ":";
        for (const auto& [code, prob] : words.topics[l]) {
            char buf[64];
            const std::string& name = code < n_d ? corpus.disease_vocab.codes[code]
                                                 : corpus.procedure_vocab.codes[code - n_d];
            std::snprintf(buf, sizeof(buf), " %s:%.4f", name.c_str(), prob);
            text += buf;
        }
        text += "\n";
    }
    std::cout << text;
    if (!o.out_path.empty()) {
        std::ofstream out(o.out_path);
        if (!out) throw std::runtime_error("cannot write topics to " + o.out_path);
        out << text;
    }
    return 0;
}

int run_recommend(const CommonOpts& o, const std::string& admission_id) {
    LoadedRun run = load_run(o.run_dir, o.data_path);
    const Corpus& corpus = run.data.corpus;
    int a = corpus.admission_index(admission_id);
    if (a < 0) throw std::runtime_error("unknown admission id: " + admission_id);
    TaskGraph tg = make_task_graph(run.data.graph, corpus, Task::recommend);
    DenseMatrix scores = recommend_scores(*run.model, tg, {a});
    std::vector<int> ranked = top_m_indices(scores.row(0), scores.cols, o.top);
    for (int p : ranked)
        std::printf("%s\t%.6f\n", corpus.procedure_vocab.codes[p].c_str(), scores.at(0, p));
    return 0;
}

int run_predict(const CommonOpts& o, const std::string& admission_id) {
    LoadedRun run = load_run(o.run_dir, o.data_path);
    const Corpus& corpus = run.data.corpus;
    int a = corpus.admission_index(admission_id);
    if (a < 0) throw std::runtime_error("unknown admission id: " + admission_id);
    TaskGraph tg = make_task_graph(run.data.graph, corpus, Task::predict);
    DenseMatrix scores = predict_scores(*run.model, tg, {a});
    const double* row = scores.row(0);
    int best = static_cast<int>(std::max_element(row, row + scores.cols) - row);
    std::printf("label\t%s\n", corpus.labels[best].c_str());
    for (int c = 0; c < scores.cols; ++c)
        std::printf("%s\t%.6f\n", corpus.labels[c].c_str(), row[c]);
    return 0;
}

int run_export(const CommonOpts& o) {
    LoadedRun run = load_run(o.run_dir, o.data_path);
    namespace fs = std::filesystem;
    if (fs::exists(o.out_path)) {
        if (!o.force)
            throw std::runtime_error("output directory already exists (use --force to replace): " +
                                     o.out_path);
        fs::remove_all(o.out_path);
    }
    fs::create_directories(o.out_path);
    {
        std::ofstream out(o.out_path + "/codes.tsv");
        if (!out) throw std::runtime_error("cannot write " + o.out_path + "/codes.tsv");
        export_code_embeddings(*run.model, run.data.corpus, out);
    }
    for (Task task : {Task::topic, Task::recommend, Task::predict}) {
        std::string path =
            o.out_path + "/admissions_" + std::string(1, task_letter(task)) + ".tsv";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        export_admission_latents(*run.model, run.data.graph, run.data.corpus, task, out);
    }
    std::printf("wrote embeddings to %s\n", o.out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph-driven variational autoencoders over admission records"};
    app.require_subcommand(1);
    CommonOpts o;
    std::string admission_id;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus from a generator spec");
    synth->add_option("--config", o.config_path, "generator spec (JSON)")->required();
    synth->add_option("--out", o.out_path, "output admissions JSONL")->required();
    synth->add_option("--seed", o.seed, "generator seed")->each([&](const std::string&) {
        o.seed_set = true;
    });
    synth->add_flag("--force", o.force, "replace existing outputs");

    CLI::App* build = app.add_subcommand("build-graph", "assemble the admission graph and dump its edges");
    add_config_overrides(build, o);
    build->add_option("--data", o.data_path, "admissions JSONL")->required();
    build->add_option("--out", o.out_path, "edge list output path")->required();
    build->add_flag("--force", o.force, "replace existing outputs");

    CLI::App* train = app.add_subcommand("train", "train a model and write a run directory");
    add_config_overrides(train, o);
    train->add_option("--data", o.data_path, "admissions JSONL")->required();
    train->add_option("--out", o.run_dir, "run directory to create")->required();
    train->add_flag("--force", o.force, "replace an existing run directory");
    train->add_flag("--quiet", o.quiet, "suppress per-epoch progress lines");

    CLI::App* ablate = app.add_subcommand("ablate", "train every task subset and compare metrics");
    add_config_overrides(ablate, o);
    ablate->add_option("--data", o.data_path, "admissions JSONL")->required();
    ablate->add_option("--out", o.run_dir, "output directory to create")->required();
    ablate->add_flag("--force", o.force, "replace an existing output directory");
    ablate->add_flag("--quiet", o.quiet, "suppress progress lines");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a finished run on its test split");
    eval->add_option("--run", o.run_dir, "run directory")->required();
    eval->add_option("--data", o.data_path, "override the data file location");

    CLI::App* topics = app.add_subcommand("topics", "print the top words of each learned topic");
    topics->add_option("--run", o.run_dir, "run directory")->required();
    topics->add_option("--data", o.data_path, "override the data file location");
    topics->add_option("--top", o.top, "words per topic");
    topics->add_option("--out", o.out_path, "also write the listing to this file");

    CLI::App* recommend = app.add_subcommand("recommend", "rank procedure codes for one admission");
    recommend->add_option("--run", o.run_dir, "run directory")->required();
    recommend->add_option("--data", o.data_path, "override the data file location");
    recommend->add_option("--top", o.top, "number of codes to print");
    recommend->add_option("admission", admission_id, "admission id")->required();

    CLI::App* predict = app.add_subcommand("predict", "predict the admission type for one admission");
    predict->add_option("--run", o.run_dir, "run directory")->required();
    predict->add_option("--data", o.data_path, "override the data file location");
    predict->add_option("admission", admission_id, "admission id")->required();

    CLI::App* exp = app.add_subcommand("export-embeddings", "write code and admission vectors as TSV");
    exp->add_option("--run", o.run_dir, "run directory")->required();
    exp->add_option("--data", o.data_path, "override the data file location");
    exp->add_option("--out", o.out_path, "output directory")->required();
    exp->add_flag("--force", o.force, "replace an existing output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        nlohmann::ordered_json j;
        j["error"] = e.what();
        std::cerr << j.dump() << std::endl;
        return 1;
    }

    try {
        if (synth->parsed()) {
            run_synth(o.config_path, o.seed_set ? o.seed : 1, o.out_path, o.force);
            std::printf("wrote %s\n", o.out_path.c_str());
        } else if (build->parsed()) {
            run_build_graph(resolve_config(o), o.data_path, o.out_path, o.force);
            std::printf("wrote %s\n", o.out_path.c_str());
        } else if (train->parsed()) {
            RunPaths paths = run_train(resolve_config(o), o.data_path, o.run_dir, o.force, !o.quiet);
            std::printf("run written to %s\n", paths.dir.c_str());
        } else if (ablate->parsed()) {
            run_ablate(resolve_config(o), o.data_path, o.run_dir, o.force, !o.quiet);
            std::ifstream table(o.run_dir + "/table.txt");
            std::cout << table.rdbuf();
        } else if (eval->parsed()) {
            std::string path = run_eval(o.run_dir, o.data_path);
            std::ifstream metrics(path);
            std::cout << metrics.rdbuf();
        } else if (topics->parsed()) {
            return run_topics(o);
        } else if (recommend->parsed()) {
            return run_recommend(o, admission_id);
        } else if (predict->parsed()) {
            return run_predict(o, admission_id);
        } else if (exp->parsed()) {
            return run_export(o);
        }
    } catch (const std::exception& e) {
        nlohmann::ordered_json j;
        j["error"] = e.what();
        std::cerr << j.dump() << std::endl;
        return 1;
    }
    return 0;
}
