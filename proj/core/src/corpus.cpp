#include "gdvae/corpus.hpp"

#include "gdvae/digest.hpp"
#include "gdvae/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace gdvae {

using nlohmann::json;

Vocabulary Vocabulary::build(CodeKind kind, std::vector<std::string> codes) {
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    Vocabulary v;
    v.kind = kind;
    v.codes = std::move(codes);
    for (int i = 0; i < v.size(); ++i) v.index[v.codes[i]] = i;
    return v;
}

int Corpus::label_id(const std::string& label) const {
    auto it = label_index.find(label);
    return it == label_index.end() ? -1 : it->second;
}

int Corpus::admission_index(const std::string& id) const {
    auto it = id_index.find(id);
    return it == id_index.end() ? -1 : it->second;
}

std::string Corpus::digest() const {
    Fnv1a f;
    for (const auto& a : admissions) {
        f.update(a.id);
        f.update("|");
        for (const auto& d : a.diseases) { f.update(d); f.update(","); }
        f.update("|");
        for (const auto& p : a.procedures) { f.update(p); f.update(","); }
        f.update("|");
        f.update(a.type_label);
        f.update("\n");
    }
    return f.hex();
}

static void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

Corpus make_corpus(std::vector<AdmissionRecord> records) {
    if (records.empty()) throw std::runtime_error("corpus is empty");
    Corpus c;
    std::vector<std::string> diseases, procedures, labels;
    for (auto& r : records) {
        sort_unique(r.diseases);
        sort_unique(r.procedures);
        if (r.diseases.empty() && r.procedures.empty())
            throw std::runtime_error("admission " + r.id + " has no disease or procedure codes");
        if (r.id.empty()) throw std::runtime_error("admission with empty id");
        diseases.insert(diseases.end(), r.diseases.begin(), r.diseases.end());
        procedures.insert(procedures.end(), r.procedures.begin(), r.procedures.end());
        labels.push_back(r.type_label);
    }
    c.admissions = std::move(records);
    for (int i = 0; i < c.size(); ++i) {
        auto ins = c.id_index.emplace(c.admissions[i].id, i);
        if (!ins.second) throw std::runtime_error("duplicate admission id: " + c.admissions[i].id);
    }
    c.disease_vocab = Vocabulary::build(CodeKind::disease, std::move(diseases));
    c.procedure_vocab = Vocabulary::build(CodeKind::procedure, std::move(procedures));
    sort_unique(labels);
    c.labels = std::move(labels);
    for (int i = 0; i < static_cast<int>(c.labels.size()); ++i) c.label_index[c.labels[i]] = i;
    return c;
}

static std::vector<std::string> read_string_array(const json& j, const char* field, int line) {
    if (!j.contains(field))
        throw std::runtime_error("parse error at line " + std::to_string(line) +
                                 ": missing field '" + field + "'");
    const json& arr = j.at(field);
    if (!arr.is_array())
        throw std::runtime_error("parse error at line " + std::to_string(line) +
                                 ": field '" + field + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : arr) {
        if (!e.is_string())
            throw std::runtime_error("parse error at line " + std::to_string(line) +
                                     ": field '" + field + "' must contain strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

Corpus load_admissions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open admissions file: " + path);
    std::vector<AdmissionRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("parse error at line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object())
            throw std::runtime_error("parse error at line " + std::to_string(lineno) +
                                     ": expected a JSON object");
        AdmissionRecord r;
        if (!j.contains("id") || !j.at("id").is_string())
            throw std::runtime_error("parse error at line " + std::to_string(lineno) +
                                     ": missing string field 'id'");
        r.id = j.at("id").get<std::string>();
        r.diseases = read_string_array(j, "diseases", lineno);
        r.procedures = read_string_array(j, "procedures", lineno);
        if (!j.contains("type") || !j.at("type").is_string())
            throw std::runtime_error("parse error at line " + std::to_string(lineno) +
                                     ": missing string field 'type'");
        r.type_label = j.at("type").get<std::string>();
        records.push_back(std::move(r));
    }
    if (records.empty()) throw std::runtime_error("admissions file has no records: " + path);
    return make_corpus(std::move(records));
}

Corpus apply_frequency_threshold(const Corpus& corpus, int min_count) {
    if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
    if (min_count == 1) return corpus;
    // document frequency with set semantics: one admission counts once
    std::unordered_map<std::string, int> df_d, df_p;
    for (const auto& a : corpus.admissions) {
        for (const auto& d : a.diseases) ++df_d[d];
        for (const auto& p : a.procedures) ++df_p[p];
    }
    std::vector<AdmissionRecord> kept;
    for (const auto& a : corpus.admissions) {
        AdmissionRecord r;
        r.id = a.id;
        r.type_label = a.type_label;
        for (const auto& d : a.diseases)
            if (df_d[d] >= min_count) r.diseases.push_back(d);
        for (const auto& p : a.procedures)
            if (df_p[p] >= min_count) r.procedures.push_back(p);
        if (!r.diseases.empty() || !r.procedures.empty()) kept.push_back(std::move(r));
    }
    if (kept.empty())
        throw std::runtime_error("frequency threshold " + std::to_string(min_count) +
                                 " removed every admission");
    return make_corpus(std::move(kept));
}

std::string SplitIds::digest() const {
    Fnv1a f;
    for (const auto& id : train) { f.update(id); f.update(","); }
    f.update("|");
    for (const auto& id : val) { f.update(id); f.update(","); }
    f.update("|");
    for (const auto& id : test) { f.update(id); f.update(","); }
    return f.hex();
}

SplitIds split_corpus(const Corpus& corpus, double train_ratio, double val_ratio,
                      double test_ratio, uint64_t seed) {
    if (train_ratio <= 0 || val_ratio <= 0 || test_ratio <= 0)
        throw std::invalid_argument("split ratios must be positive");
    if (std::fabs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw std::invalid_argument("split ratios must sum to 1");
    int n = corpus.size();
    int n_train = static_cast<int>(std::floor(train_ratio * n));
    int n_val = static_cast<int>(std::floor(val_ratio * n));
    int n_test = static_cast<int>(std::floor(test_ratio * n));
    n_train += n - (n_train + n_val + n_test);  // remainder to train
    if (n_train <= 0 || n_val <= 0 || n_test <= 0)
        throw std::runtime_error("corpus too small for requested split: " + std::to_string(n) +
                                 " admissions");
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, "corpus-split"));
    rng.shuffle(order);
    SplitIds s;
    for (int i = 0; i < n; ++i) {
        const std::string& id = corpus.admissions[order[i]].id;
        if (i < n_train)
            s.train.push_back(id);
        else if (i < n_train + n_val)
            s.val.push_back(id);
        else
            s.test.push_back(id);
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

IndexedAdmissions index_admissions(const Corpus& corpus) {
    IndexedAdmissions ix;
    int nd = corpus.disease_vocab.size();
    ix.diseases.resize(corpus.size());
    ix.procedures.resize(corpus.size());
    ix.all_codes.resize(corpus.size());
    ix.label.resize(corpus.size());
    for (int i = 0; i < corpus.size(); ++i) {
        const auto& a = corpus.admissions[i];
        for (const auto& d : a.diseases) {
            int id = corpus.disease_vocab.id(d);
            if (id < 0) throw std::logic_error("disease code missing from vocabulary: " + d);
            ix.diseases[i].push_back(id);
        }
        for (const auto& p : a.procedures) {
            int id = corpus.procedure_vocab.id(p);
            if (id < 0) throw std::logic_error("procedure code missing from vocabulary: " + p);
            ix.procedures[i].push_back(nd + id);
        }
        // vocab order is lexicographic like the record lists, so both are ascending
        ix.all_codes[i] = ix.diseases[i];
        ix.all_codes[i].insert(ix.all_codes[i].end(), ix.procedures[i].begin(), ix.procedures[i].end());
        ix.label[i] = corpus.label_id(a.type_label);
    }
    return ix;
}

}  // namespace gdvae
