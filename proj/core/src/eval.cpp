#include "gdvae/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace gdvae {

using ordered_json = nlohmann::ordered_json;

TopicTopWords topic_top_words(const GdVaeModel& model, int top_n) {
    if (top_n < 1) throw std::invalid_argument("topic_top_words: top_n must be positive");
    Tape tape;
    int beta = model.topic_beta(tape);
    const DenseMatrix& B = tape.value(beta);
    top_n = std::min(top_n, B.cols);
    TopicTopWords out;
    out.topics.resize(B.rows);
    std::vector<int> order(B.cols);
    for (int l = 0; l < B.rows; ++l) {
        const double* row = B.row(l);
        for (int i = 0; i < B.cols; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (row[a] != row[b]) return row[a] > row[b];
            return a < b;
        });
        for (int t = 0; t < top_n; ++t) out.topics[l].push_back({order[t], row[order[t]]});
    }
    return out;
}

double npmi(const CooccurrenceStats& stats, int i, int j) {
    double pij = stats.p_joint(i, j);
    if (pij <= 0.0) return -1.0;
    if (pij >= 1.0) return 0.0;  // both marginals are 1 as well; 0/0 resolves to 0
    double pmi = std::log(pij) - std::log(stats.p(i) * stats.p(j));
    return pmi / (-std::log(pij));
}

double npmi_coherence(const TopicTopWords& words, const CooccurrenceStats& reference,
                      const std::vector<int>& top_ns) {
    if (words.topics.empty()) throw std::invalid_argument("npmi_coherence: no topics");
    double total = 0.0;
    int cells = 0;
    for (const auto& topic : words.topics) {
        for (int n : top_ns) {
            int take = std::min<int>(n, static_cast<int>(topic.size()));
            if (take < 2) continue;
            double s = 0.0;
            int pairs = 0;
            for (int a = 0; a < take; ++a)
                for (int b = a + 1; b < take; ++b) {
                    s += npmi(reference, topic[a].first, topic[b].first);
                    ++pairs;
                }
            total += s / pairs;
            ++cells;
        }
    }
    if (cells == 0) throw std::invalid_argument("npmi_coherence: top lists too short");
    return total / cells;
}

TopmReport topm_metrics(const std::vector<std::vector<int>>& ranked,
                        const std::vector<std::vector<int>>& truth, int m) {
    if (ranked.size() != truth.size())
        throw std::invalid_argument("topm_metrics: ranked and truth sizes differ");
    if (m < 1) throw std::invalid_argument("topm_metrics: m must be positive");
    TopmReport rep;
    rep.m = m;
    double sp = 0, sr = 0, sf = 0;
    for (size_t i = 0; i < ranked.size(); ++i) {
        if (truth[i].empty()) {
            ++rep.skipped;
            continue;
        }
        int take = std::min<int>(m, static_cast<int>(ranked[i].size()));
        if (take == 0) throw std::invalid_argument("topm_metrics: empty ranking");
        std::set<int> truth_set(truth[i].begin(), truth[i].end());
        int hits = 0;
        for (int t = 0; t < take; ++t)
            if (truth_set.count(ranked[i][t])) ++hits;
        double p = static_cast<double>(hits) / take;
        double r = static_cast<double>(hits) / static_cast<double>(truth_set.size());
        double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        sp += p;
        sr += r;
        sf += f;
        ++rep.evaluated;
    }
    if (rep.evaluated > 0) {
        rep.precision = sp / rep.evaluated;
        rep.recall = sr / rep.evaluated;
        rep.f1 = sf / rep.evaluated;
    }
    return rep;
}

ClassificationReport classification_metrics(const std::vector<int>& predicted,
                                            const std::vector<int>& truth, int n_classes) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("classification_metrics: size mismatch");
    if (predicted.empty()) throw std::invalid_argument("classification_metrics: no instances");
    std::vector<int> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
    int correct = 0;
    for (size_t i = 0; i < predicted.size(); ++i) {
        int p = predicted[i], t = truth[i];
        if (p < 0 || p >= n_classes || t < 0 || t >= n_classes)
            throw std::invalid_argument("classification_metrics: class out of range");
        if (p == t) {
            ++correct;
            ++tp[p];
        } else {
            ++fp[p];
            ++fn[t];
        }
    }
    ClassificationReport rep;
    rep.count = static_cast<int>(predicted.size());
    rep.accuracy = static_cast<double>(correct) / rep.count;
    double sp = 0, sr = 0, sf = 0;
    for (int c = 0; c < n_classes; ++c) {
        double p = tp[c] + fp[c] > 0 ? static_cast<double>(tp[c]) / (tp[c] + fp[c]) : 0.0;
        double r = tp[c] + fn[c] > 0 ? static_cast<double>(tp[c]) / (tp[c] + fn[c]) : 0.0;
        double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        sp += p;
        sr += r;
        sf += f;
    }
    rep.precision = sp / n_classes;
    rep.recall = sr / n_classes;
    rep.f1 = sf / n_classes;
    return rep;
}

DenseMatrix admission_latent_mu(const GdVaeModel& model, const TaskGraph& graph,
                                const std::vector<int>& admissions, Task task) {
    Tape tape;
    int h = model.encode(tape, graph);
    int rows;
    if (task == Task::topic) {
        // an admission is scored as the document of its own codes
        std::vector<std::vector<int>> docs;
        docs.reserve(admissions.size());
        for (int a : admissions) {
            if (a < 0 || a >= static_cast<int>(graph.pool_rows.size()))
                throw std::invalid_argument("admission index out of range");
            docs.push_back(graph.pool_rows[a]);
        }
        rows = model.document_rows(tape, h, docs);
    } else {
        rows = model.admission_rows(tape, h, graph, admissions);
    }
    StochasticHead head = model.head(tape, rows, task);
    return tape.value(head.mu);
}

DenseMatrix recommend_scores(const GdVaeModel& model, const TaskGraph& rec_graph,
                             const std::vector<int>& admissions) {
    Tape tape;
    int h = model.encode(tape, rec_graph);
    int rows = model.admission_rows(tape, h, rec_graph, admissions);
    StochasticHead head = model.head(tape, rows, Task::recommend);
    int hid = tape.tanh_op(tape.add_row(tape.matmul(head.mu, tape.param(*model.rec_w1)),
                                        tape.param(*model.rec_b1)));
    int probs = tape.row_softmax(tape.add_row(tape.matmul(hid, tape.param(*model.rec_w2)),
                                              tape.param(*model.rec_b2)));
    return tape.value(probs);
}

DenseMatrix predict_scores(const GdVaeModel& model, const TaskGraph& full_graph,
                           const std::vector<int>& admissions) {
    Tape tape;
    int h = model.encode(tape, full_graph);
    int rows = model.admission_rows(tape, h, full_graph, admissions);
    StochasticHead head = model.head(tape, rows, Task::predict);
    int probs = tape.row_softmax(tape.add_row(tape.matmul(head.mu, tape.param(*model.cls_w)),
                                              tape.param(*model.cls_b)));
    return tape.value(probs);
}

std::vector<int> top_m_indices(const double* scores, int n, int m) {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    order.resize(std::min(n, m));
    return order;
}

EvalReport evaluate_model(const GdVaeModel& model, const AdmissionGraph& graph,
                          const Corpus& corpus, const SplitIds& splits, const TrainConfig& cfg) {
    EvalReport rep;
    rep.tasks = normalize_tasks(cfg.tasks);
    IndexedAdmissions ix = index_admissions(corpus);
    std::vector<int> test_idx;
    for (const auto& id : splits.test) {
        int a = corpus.admission_index(id);
        if (a < 0) throw std::invalid_argument("evaluate_model: unknown test admission " + id);
        test_idx.push_back(a);
    }

    if (cfg.task_active(Task::topic)) {
        CooccurrenceStats stats = count_cooccurrence(corpus, splits.train);
        std::vector<int> top_ns;
        for (int n : {5, 10, 15, 20})
            if (n <= corpus.n_codes()) top_ns.push_back(n);
        if (top_ns.empty()) top_ns.push_back(std::min(2, corpus.n_codes()));
        TopicTopWords words = topic_top_words(model, top_ns.back());
        rep.coherence = npmi_coherence(words, stats, top_ns);
        rep.coherence_top_ns = top_ns;
    }

    if (cfg.task_active(Task::recommend)) {
        TaskGraph tg = make_task_graph(graph, corpus, Task::recommend);
        DenseMatrix scores = recommend_scores(model, tg, test_idx);
        int n_d = corpus.disease_vocab.size();
        std::vector<std::vector<int>> ranked(test_idx.size()), truth(test_idx.size());
        for (size_t i = 0; i < test_idx.size(); ++i) {
            ranked[i] = top_m_indices(scores.row(static_cast<int>(i)), scores.cols, scores.cols);
            for (int code : ix.procedures[test_idx[i]]) truth[i].push_back(code - n_d);
        }
        for (int m : {1, 3, 5, 10}) {
            if (m > corpus.procedure_vocab.size()) continue;
            rep.recommendation.push_back(topm_metrics(ranked, truth, m));
        }
        if (rep.recommendation.empty())
            rep.recommendation.push_back(topm_metrics(ranked, truth, corpus.procedure_vocab.size()));
    }

    if (cfg.task_active(Task::predict)) {
        TaskGraph tg = make_task_graph(graph, corpus, Task::predict);
        DenseMatrix scores = predict_scores(model, tg, test_idx);
        std::vector<int> predicted(test_idx.size()), truth(test_idx.size());
        for (size_t i = 0; i < test_idx.size(); ++i) {
            const double* row = scores.row(static_cast<int>(i));
            predicted[i] = static_cast<int>(std::max_element(row, row + scores.cols) - row);
            truth[i] = ix.label[test_idx[i]];
        }
        rep.classification =
            classification_metrics(predicted, truth, static_cast<int>(corpus.labels.size()));
    }
    return rep;
}

std::string metrics_to_jsonl(const EvalReport& rep) {
    std::string out;
    {
        ordered_json j;
        j["metric"] = "tasks";
        j["tasks"] = rep.tasks;
        out += j.dump() + "\n";
    }
    if (rep.coherence.has_value()) {
        ordered_json j;
        j["task"] = "topic";
        j["metric"] = "npmi_coherence";
        j["top_ns"] = rep.coherence_top_ns;
        j["value"] = *rep.coherence;
        out += j.dump() + "\n";
    }
    for (const auto& r : rep.recommendation) {
        ordered_json j;
        j["task"] = "recommend";
        j["metric"] = "top_m";
        j["m"] = r.m;
        j["precision"] = r.precision;
        j["recall"] = r.recall;
        j["f1"] = r.f1;
        j["evaluated"] = r.evaluated;
        j["skipped"] = r.skipped;
        out += j.dump() + "\n";
    }
    if (rep.classification.has_value()) {
        ordered_json j;
        j["task"] = "predict";
        j["metric"] = "classification";
        j["accuracy"] = rep.classification->accuracy;
        j["precision"] = rep.classification->precision;
        j["recall"] = rep.classification->recall;
        j["f1"] = rep.classification->f1;
        j["count"] = rep.classification->count;
        out += j.dump() + "\n";
    }
    return out;
}

static void write_vector_row(std::ostream& out, const double* v, int n) {
    char buf[32];
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "\t%.17g", v[i]);
        out << buf;
    }
    out << "\n";
}

void export_code_embeddings(const GdVaeModel& model, const Corpus& corpus, std::ostream& out) {
    const DenseMatrix& X = model.X->value;
    out << "code\tkind";
    for (int j = 0; j < X.cols; ++j) out << "\te" << j;
    out << "\n";
    int n_d = corpus.disease_vocab.size();
    for (int i = 0; i < X.rows; ++i) {
        if (i < n_d)
            out << corpus.disease_vocab.codes[i] << "\tdisease";
        else
            out << corpus.procedure_vocab.codes[i - n_d] << "\tprocedure";
        write_vector_row(out, X.row(i), X.cols);
    }
}

void export_admission_latents(const GdVaeModel& model, const AdmissionGraph& graph,
                              const Corpus& corpus, Task task, std::ostream& out) {
    TaskGraph tg = make_task_graph(graph, corpus, task);
    std::vector<int> all(corpus.size());
    for (int i = 0; i < corpus.size(); ++i) all[i] = i;
    DenseMatrix mu = admission_latent_mu(model, tg, all, task);
    out << "admission\ttask";
    for (int j = 0; j < mu.cols; ++j) out << "\tz" << j;
    out << "\n";
    for (int i = 0; i < corpus.size(); ++i) {
        out << corpus.admissions[i].id << "\t" << task_letter(task);
        write_vector_row(out, mu.row(i), mu.cols);
    }
}

}  // namespace gdvae
