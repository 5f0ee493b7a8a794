#include "gdvae/config.hpp"

#include "gdvae/digest.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gdvae {

std::string normalize_tasks(const std::string& tasks) {
    bool has[3] = {false, false, false};
    for (char c : tasks) {
        switch (c) {
            case 'T': case 't': has[0] = true; break;
            case 'R': case 'r': has[1] = true; break;
            case 'P': case 'p': has[2] = true; break;
            case ',': case ' ': break;
            default:
                throw std::invalid_argument(std::string("unknown task letter '") + c +
                                            "' (expected subset of T, R, P)");
        }
    }
    std::string out;
    if (has[0]) out += 'T';
    if (has[1]) out += 'R';
    if (has[2]) out += 'P';
    if (out.empty()) throw std::invalid_argument("task set is empty");
    return out;
}

bool TrainConfig::task_active(Task t) const {
    return tasks.find(task_letter(t)) != std::string::npos;
}

void TrainConfig::validate() const {
    normalize_tasks(tasks);
    if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
    if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (num_topics < 2) throw std::invalid_argument("num_topics must be at least 2");
    if (merge_count < 1) throw std::invalid_argument("merge_count must be at least 1");
    if (num_biterm_docs < 1) throw std::invalid_argument("num_biterm_docs must be at least 1");
    if (d_emb <= 0 || d_hidden <= 0 || z_dim <= 0 || rec_hidden <= 0)
        throw std::invalid_argument("layer sizes must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    graph_variant_from_name(graph_variant);
    if (patience < 1) throw std::invalid_argument("patience must be at least 1");
    if (min_count < 1) throw std::invalid_argument("min_count must be at least 1");
    if (!(train_ratio > 0.0) || !(val_ratio > 0.0) || !(test_ratio > 0.0))
        throw std::invalid_argument("split ratios must be positive");
    if (std::fabs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw std::invalid_argument("split ratios must sum to 1");
}

static std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string TrainConfig::canonical() const {
    std::ostringstream out;
    out << "alpha = " << fmt_double(alpha) << "\n";
    out << "batch_size = " << batch_size << "\n";
    out << "d_emb = " << d_emb << "\n";
    out << "d_hidden = " << d_hidden << "\n";
    out << "epochs = " << epochs << "\n";
    out << "graph_variant = " << graph_variant << "\n";
    out << "learning_rate = " << fmt_double(learning_rate) << "\n";
    out << "merge_count = " << merge_count << "\n";
    out << "min_count = " << min_count << "\n";
    out << "num_biterm_docs = " << num_biterm_docs << "\n";
    out << "num_topics = " << num_topics << "\n";
    out << "patience = " << patience << "\n";
    out << "rec_hidden = " << rec_hidden << "\n";
    out << "residual = " << (residual ? "true" : "false") << "\n";
    out << "seed = " << seed << "\n";
    out << "tasks = " << normalize_tasks(tasks) << "\n";
    out << "test_ratio = " << fmt_double(test_ratio) << "\n";
    out << "train_ratio = " << fmt_double(train_ratio) << "\n";
    out << "val_ratio = " << fmt_double(val_ratio) << "\n";
    out << "z_dim = " << z_dim << "\n";
    return out.str();
}

std::string TrainConfig::digest() const { return hex64(fnv1a64(canonical())); }

static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

static int parse_int(const std::string& v, const std::string& key) {
    try {
        size_t pos;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument("config value for " + key + " is not an integer: " + v);
    }
}

static uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
        size_t pos;
        unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return static_cast<uint64_t>(x);
    } catch (...) {
        throw std::invalid_argument("config value for " + key + " is not an unsigned integer: " + v);
    }
}

static double parse_double(const std::string& v, const std::string& key) {
    try {
        size_t pos;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument("config value for " + key + " is not a number: " + v);
    }
}

static bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config value for " + key + " is not a boolean: " + v);
}

TrainConfig parse_config_text(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        " is not of the form key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        " has an empty key or value");
        if (key == "tasks") cfg.tasks = normalize_tasks(value);
        else if (key == "epochs") cfg.epochs = parse_int(value, key);
        else if (key == "batch_size") cfg.batch_size = parse_int(value, key);
        else if (key == "learning_rate") cfg.learning_rate = parse_double(value, key);
        else if (key == "seed") cfg.seed = parse_u64(value, key);
        else if (key == "num_topics") cfg.num_topics = parse_int(value, key);
        else if (key == "merge_count") cfg.merge_count = parse_int(value, key);
        else if (key == "num_biterm_docs") cfg.num_biterm_docs = parse_int(value, key);
        else if (key == "d_emb") cfg.d_emb = parse_int(value, key);
        else if (key == "d_hidden") cfg.d_hidden = parse_int(value, key);
        else if (key == "z_dim") cfg.z_dim = parse_int(value, key);
        else if (key == "rec_hidden") cfg.rec_hidden = parse_int(value, key);
        else if (key == "alpha") cfg.alpha = parse_double(value, key);
        else if (key == "graph_variant") cfg.graph_variant = value;
        else if (key == "patience") cfg.patience = parse_int(value, key);
        else if (key == "min_count") cfg.min_count = parse_int(value, key);
        else if (key == "train_ratio") cfg.train_ratio = parse_double(value, key);
        else if (key == "val_ratio") cfg.val_ratio = parse_double(value, key);
        else if (key == "test_ratio") cfg.test_ratio = parse_double(value, key);
        else if (key == "residual") cfg.residual = parse_bool(value, key);
        else
            throw std::invalid_argument("unknown config key at line " + std::to_string(lineno) +
                                        ": " + key);
    }
    cfg.validate();
    return cfg;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void save_config(const TrainConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << cfg.canonical();
}

}  // namespace gdvae
