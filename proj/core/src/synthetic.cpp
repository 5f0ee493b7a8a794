#include "gdvae/synthetic.hpp"

#include "gdvae/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gdvae {

using ordered_json = nlohmann::ordered_json;

static void check_prob_rows(const std::vector<std::vector<double>>& rows, size_t n_rows,
                            size_t n_cols, const char* what) {
    if (rows.size() != n_rows)
        throw std::runtime_error(std::string(what) + ": expected " + std::to_string(n_rows) + " rows");
    for (const auto& r : rows) {
        if (r.size() != n_cols)
            throw std::runtime_error(std::string(what) + ": ragged row");
        double s = 0.0;
        for (double x : r) {
            if (x < 0.0 || !std::isfinite(x))
                throw std::runtime_error(std::string(what) + ": entries must be finite and >= 0");
            s += x;
        }
        if (std::fabs(s - 1.0) > 1e-6)
            throw std::runtime_error(std::string(what) + ": row must sum to 1");
    }
}

void SyntheticSpec::validate() const {
    if (disease_codes.empty()) throw std::runtime_error("synthetic spec: no disease codes");
    if (procedure_codes.empty()) throw std::runtime_error("synthetic spec: no procedure codes");
    if (labels.empty()) throw std::runtime_error("synthetic spec: no labels");
    size_t L = topic_weights.size();
    if (L == 0) throw std::runtime_error("synthetic spec: no topics");
    double ws = 0.0;
    for (double w : topic_weights) {
        if (w < 0.0 || !std::isfinite(w)) throw std::runtime_error("synthetic spec: bad topic weight");
        ws += w;
    }
    if (std::fabs(ws - 1.0) > 1e-6) throw std::runtime_error("synthetic spec: topic weights must sum to 1");
    check_prob_rows(topic_disease, L, disease_codes.size(), "synthetic spec topic_disease");
    check_prob_rows(disease_procedure, disease_codes.size(), procedure_codes.size(),
                    "synthetic spec disease_procedure");
    if (topic_label.size() != L) throw std::runtime_error("synthetic spec: topic_label size mismatch");
    for (int t : topic_label)
        if (t < 0 || t >= static_cast<int>(labels.size()))
            throw std::runtime_error("synthetic spec: topic_label out of range");
    if (num_admissions <= 0) throw std::runtime_error("synthetic spec: num_admissions must be positive");
    if (min_codes < 1 || max_codes < min_codes)
        throw std::runtime_error("synthetic spec: need 1 <= min_codes <= max_codes");
    if (max_codes > static_cast<int>(disease_codes.size()))
        throw std::runtime_error("synthetic spec: max_codes exceeds number of disease codes");
    if (label_noise < 0.0 || label_noise > 1.0)
        throw std::runtime_error("synthetic spec: label_noise must be in [0, 1]");
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synthetic spec: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("synthetic spec parse error: " + std::string(e.what()));
    }
    SyntheticSpec s;
    try {
        s.disease_codes = j.at("disease_codes").get<std::vector<std::string>>();
        s.procedure_codes = j.at("procedure_codes").get<std::vector<std::string>>();
        s.labels = j.at("labels").get<std::vector<std::string>>();
        s.topic_weights = j.at("topic_weights").get<std::vector<double>>();
        s.topic_disease = j.at("topic_disease").get<std::vector<std::vector<double>>>();
        s.topic_label = j.at("topic_label").get<std::vector<int>>();
        s.disease_procedure = j.at("disease_procedure").get<std::vector<std::vector<double>>>();
        s.num_admissions = j.at("num_admissions").get<int>();
        s.min_codes = j.at("min_codes").get<int>();
        s.max_codes = j.at("max_codes").get<int>();
        s.label_noise = j.at("label_noise").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("synthetic spec field error: " + std::string(e.what()));
    }
    s.validate();
    return s;
}

void save_synthetic_spec(const SyntheticSpec& s, const std::string& path) {
    ordered_json j;
    j["disease_codes"] = s.disease_codes;
    j["procedure_codes"] = s.procedure_codes;
    j["labels"] = s.labels;
    j["topic_weights"] = s.topic_weights;
    j["topic_disease"] = s.topic_disease;
    j["topic_label"] = s.topic_label;
    j["disease_procedure"] = s.disease_procedure;
    j["num_admissions"] = s.num_admissions;
    j["min_codes"] = s.min_codes;
    j["max_codes"] = s.max_codes;
    j["label_noise"] = s.label_noise;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write synthetic spec: " + path);
    out << j.dump(2) << "\n";
}

static int sample_categorical(const std::vector<double>& p, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    int last = 0;
    for (int i = 0; i < static_cast<int>(p.size()); ++i) {
        if (p[i] <= 0.0) continue;
        acc += p[i];
        last = i;
        if (u < acc) return i;
    }
    return last;  // numeric tail of the cumulative sum
}

// Without-replacement draw from p restricted to unused entries.
static int sample_remaining(const std::vector<double>& p, const std::vector<char>& used,
                            double mass, Rng& rng) {
    double u = rng.uniform() * mass;
    double acc = 0.0;
    int last = -1;
    for (int i = 0; i < static_cast<int>(p.size()); ++i) {
        if (used[i] || p[i] <= 0.0) continue;
        acc += p[i];
        last = i;
        if (u < acc) return i;
    }
    return last;
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, uint64_t seed) {
    spec.validate();
    Rng rng(derive_seed(seed, "synthetic-corpus"));
    int L = spec.num_topics();
    int n_labels = static_cast<int>(spec.labels.size());

    PlantedTruth truth;
    truth.topic_disease = spec.topic_disease;
    truth.topic_weights = spec.topic_weights;
    truth.topic_label = spec.topic_label;
    truth.topic_procedure.assign(L, std::vector<double>(spec.procedure_codes.size(), 0.0));
    for (int l = 0; l < L; ++l)
        for (size_t d = 0; d < spec.disease_codes.size(); ++d) {
            double pd = spec.topic_disease[l][d];
            if (pd == 0.0) continue;
            for (size_t p = 0; p < spec.procedure_codes.size(); ++p)
                truth.topic_procedure[l][p] += pd * spec.disease_procedure[d][p];
        }

    std::vector<AdmissionRecord> records;
    records.reserve(spec.num_admissions);
    for (int n = 0; n < spec.num_admissions; ++n) {
        int topic = sample_categorical(spec.topic_weights, rng);
        truth.admission_topic.push_back(topic);
        const auto& pd = spec.topic_disease[topic];
        int support = 0;
        for (double x : pd)
            if (x > 0.0) ++support;
        int k = spec.min_codes + rng.uniform_int(spec.max_codes - spec.min_codes + 1);
        if (k > support) k = support;

        std::vector<char> used(pd.size(), 0);
        std::vector<int> diseases;
        double mass = 1.0;
        for (int t = 0; t < k; ++t) {
            int d = sample_remaining(pd, used, mass, rng);
            used[d] = 1;
            mass -= pd[d];
            diseases.push_back(d);
        }
        std::sort(diseases.begin(), diseases.end());

        AdmissionRecord r;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "S%06d", n);
        r.id = buf;
        std::vector<int> procs;
        for (int d : diseases) {
            r.diseases.push_back(spec.disease_codes[d]);
            procs.push_back(sample_categorical(spec.disease_procedure[d], rng));
        }
        std::sort(procs.begin(), procs.end());
        procs.erase(std::unique(procs.begin(), procs.end()), procs.end());
        for (int p : procs) r.procedures.push_back(spec.procedure_codes[p]);

        int label = spec.topic_label[topic];
        if (spec.label_noise > 0.0 && rng.uniform() < spec.label_noise)
            label = rng.uniform_int(n_labels);
        r.type_label = spec.labels[label];
        records.push_back(std::move(r));
    }

    SyntheticCorpus out{make_corpus(std::move(records)), std::move(truth)};
    return out;
}

SyntheticSpec default_synthetic_spec(int num_topics, int diseases_per_topic,
                                     int num_admissions, double label_noise) {
    if (num_topics < 2 || diseases_per_topic < 1)
        throw std::invalid_argument("default_synthetic_spec: need >= 2 topics, >= 1 disease each");
    SyntheticSpec s;
    int n_d = num_topics * diseases_per_topic;
    int n_p = (n_d + 1) / 2;
    char buf[32];
    for (int d = 0; d < n_d; ++d) {
        std::snprintf(buf, sizeof(buf), "D%03d", d);
        s.disease_codes.push_back(buf);
    }
    for (int p = 0; p < n_p; ++p) {
        std::snprintf(buf, sizeof(buf), "P%03d", p);
        s.procedure_codes.push_back(buf);
    }
    for (int l = 0; l < num_topics; ++l) {
        std::snprintf(buf, sizeof(buf), "type%02d", l);
        s.labels.push_back(buf);
    }
    s.topic_weights.assign(num_topics, 1.0 / num_topics);
    s.topic_disease.assign(num_topics, std::vector<double>(n_d, 0.0));
    for (int l = 0; l < num_topics; ++l)
        for (int j = 0; j < diseases_per_topic; ++j)
            s.topic_disease[l][l * diseases_per_topic + j] = 1.0 / diseases_per_topic;
    for (int l = 0; l < num_topics; ++l) s.topic_label.push_back(l);
    // deterministic map: disease d always produces procedure d/2
    s.disease_procedure.assign(n_d, std::vector<double>(n_p, 0.0));
    for (int d = 0; d < n_d; ++d) s.disease_procedure[d][d / 2] = 1.0;
    s.num_admissions = num_admissions;
    s.min_codes = std::min(2, diseases_per_topic);
    s.max_codes = std::min(5, diseases_per_topic);
    s.label_noise = label_noise;
    return s;
}

}  // namespace gdvae
