#pragma once

// Shared test fixtures. The four-admission corpus is small enough that
// every graph quantity can be derived by hand:
//   A1 {d1,d2|p1}  A2 {d1,d2|-}  A3 {d1|p1}  A4 {d3|-}
// df: d1=3 d2=2 d3=1 p1=2, N=4; pairs: (d1,d2)=2 (d1,p1)=2 (d2,p1)=1.

#include "gdvae/corpus.hpp"
#include "gdvae/graph.hpp"
#include "gdvae/synthetic.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace testfx {

inline gdvae::AdmissionRecord rec(std::string id, std::vector<std::string> dis,
                                  std::vector<std::string> pro, std::string type) {
    gdvae::AdmissionRecord r;
    r.id = std::move(id);
    r.diseases = std::move(dis);
    r.procedures = std::move(pro);
    r.type_label = std::move(type);
    return r;
}

inline gdvae::Corpus four_admissions() {
    return gdvae::make_corpus({
        rec("A1", {"d1", "d2"}, {"p1"}, "urgent"),
        rec("A2", {"d1", "d2"}, {}, "elective"),
        rec("A3", {"d1"}, {"p1"}, "urgent"),
        rec("A4", {"d3"}, {}, "elective"),
    });
}

inline std::vector<std::string> ids_of(const gdvae::Corpus& c) {
    std::vector<std::string> out;
    for (const auto& a : c.admissions) out.push_back(a.id);
    return out;
}

// Six admissions over eight codes (five diseases, three procedures), two
// labels; every admission has a procedure so all tasks are trainable.
inline gdvae::Corpus grad_fixture() {
    return gdvae::make_corpus({
        rec("G1", {"d1", "d2"}, {"p1"}, "a"),
        rec("G2", {"d2", "d3"}, {"p2"}, "b"),
        rec("G3", {"d1", "d3", "d4"}, {"p1", "p3"}, "a"),
        rec("G4", {"d4", "d5"}, {"p2"}, "b"),
        rec("G5", {"d5"}, {"p3"}, "a"),
        rec("G6", {"d1", "d5"}, {"p1", "p2"}, "b"),
    });
}

// Scratch directory under the current working directory, wiped on creation.
inline std::string fresh_dir(const std::string& name) {
    namespace fs = std::filesystem;
    fs::path p = fs::current_path() / "test_tmp" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

}  // namespace testfx
