#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace gdvae {

// One admission: two code sets (kept sorted and unique) and a type label.
struct AdmissionRecord {
    std::string id;
    std::vector<std::string> diseases;
    std::vector<std::string> procedures;
    std::string type_label;
};

enum class CodeKind { disease, procedure };

// Stable code <-> index bijection; codes are held in lexicographic order so
// indices do not depend on input order.
struct Vocabulary {
    CodeKind kind = CodeKind::disease;
    std::vector<std::string> codes;
    std::unordered_map<std::string, int> index;

    int size() const { return static_cast<int>(codes.size()); }
    int id(const std::string& code) const {
        auto it = index.find(code);
        return it == index.end() ? -1 : it->second;
    }
    bool contains(const std::string& code) const { return index.count(code) > 0; }

    static Vocabulary build(CodeKind kind, std::vector<std::string> codes);
};

struct Corpus {
    std::vector<AdmissionRecord> admissions;
    Vocabulary disease_vocab;
    Vocabulary procedure_vocab;
    std::vector<std::string> labels;  // lexicographic
    std::unordered_map<std::string, int> label_index;
    std::unordered_map<std::string, int> id_index;

    int size() const { return static_cast<int>(admissions.size()); }
    int n_codes() const { return disease_vocab.size() + procedure_vocab.size(); }
    int label_id(const std::string& label) const;
    int admission_index(const std::string& id) const;
    // Fingerprint of the canonical content (ids, code sets, labels).
    std::string digest() const;
};

// Validates records (unique ids, at least one code each), sorts and dedupes
// code lists, then derives vocabularies and the label set.
Corpus make_corpus(std::vector<AdmissionRecord> records);

// JSONL reader: one object per line with fields id, diseases, procedures,
// type. Malformed input is reported with its line number.
Corpus load_admissions(const std::string& path);

// Drops codes present in fewer than min_count admissions, then admissions
// left without any code. Applying the same threshold twice is a no-op.
Corpus apply_frequency_threshold(const Corpus& corpus, int min_count);

struct SplitIds {
    std::vector<std::string> train, val, test;  // each sorted
    std::string digest() const;
};

// Disjoint shuffle split; sizes are floor(ratio*N) with the remainder going
// to train. Deterministic in (corpus order, seed).
SplitIds split_corpus(const Corpus& corpus, double train_ratio, double val_ratio,
                      double test_ratio, uint64_t seed);

// Vocabulary indices resolved once per corpus. "Global code index" means
// disease i -> i and procedure j -> n_disease + j; this numbering is shared
// by graph nodes, embedding rows and decoder outputs.
struct IndexedAdmissions {
    std::vector<std::vector<int>> diseases;    // ascending global indices
    std::vector<std::vector<int>> procedures;  // ascending global indices
    std::vector<std::vector<int>> all_codes;   // union, ascending
    std::vector<int> label;
};
IndexedAdmissions index_admissions(const Corpus& corpus);

}  // namespace gdvae
