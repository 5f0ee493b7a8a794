#include "fixtures.hpp"
#include "gdvae/model.hpp"
#include "gdvae/optim.hpp"
#include "gdvae/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace gdvae;

TEST_SUITE_BEGIN("model");

namespace {

ModelDims tiny_dims(const Corpus& c, int topics = 2, int z = 2) {
    ModelDims d;
    d.n_disease = c.disease_vocab.size();
    d.n_procedure = c.procedure_vocab.size();
    d.n_labels = static_cast<int>(c.labels.size());
    d.d_emb = 3;
    d.d_hidden = 3;
    d.num_topics = topics;
    d.z_dim = z;
    d.rec_hidden = 2;
    return d;
}

DenseMatrix normal_noise(int r, int c, uint64_t seed) {
    DenseMatrix m(r, c);
    Rng rng(seed);
    for (double& x : m.v) x = rng.normal();
    return m;
}

}  // namespace

TEST_CASE("diagonal logistic-normal surrogate of the dirichlet") {
    SUBCASE("alpha 0.02, 50 components") {
        LaplacePrior p = laplace_prior(std::vector<double>(50, 0.02));
        for (double m : p.mu) CHECK(m == 0.0);  // symmetric: exactly zero
        // 50 * (1 - 2/50) + 50 * 50 / 2500 = 48 + 1
        for (double v : p.var) CHECK(std::abs(v - 49.0) <= 1e-12);
    }
    SUBCASE("alpha (L-1)/L gives unit variance exactly") {
        LaplacePrior p = laplace_prior(std::vector<double>(50, 49.0 / 50.0));
        for (double v : p.var) CHECK(v == 1.0);
        for (double m : p.mu) CHECK(m == 0.0);
    }
    SUBCASE("asymmetric alpha") {
        LaplacePrior p = laplace_prior({0.1, 0.4, 0.4});
        // var_0 = 10/3 + 15/9 = 5, var_1 = 2.5/3 + 15/9 = 2.5
        CHECK(std::abs(p.var[0] - 5.0) <= 1e-12);
        CHECK(std::abs(p.var[1] - 2.5) <= 1e-12);
        CHECK(p.mu[0] < p.mu[1]);  // mu orders with log alpha
        CHECK(std::abs(p.mu[0] + p.mu[1] + p.mu[2]) <= 1e-12);  // centered
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(laplace_prior({1.0}), std::invalid_argument);
        CHECK_THROWS_AS(laplace_prior({1.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(laplace_prior({1.0, -2.0}), std::invalid_argument);
    }
}

TEST_CASE("parameter layout is fixed and complete") {
    Corpus c = testfx::four_admissions();
    GdVaeModel model(tiny_dims(c), 0.02, 1);
    std::vector<std::string> names;
    for (Parameter* p : model.params.list()) names.push_back(p->name);
    CHECK(names == std::vector<std::string>{"X", "gcn.w1", "gcn.w2", "head.T.w", "head.T.b",
                                            "head.R.w", "head.R.b", "head.P.w", "head.P.b",
                                            "topic.B", "rec.w1", "rec.b1", "rec.w2", "rec.b2",
                                            "cls.w", "cls.b"});
    CHECK(model.X->value.rows == 4);       // n_codes
    CHECK(model.X->value.cols == 3);       // d_emb
    CHECK(model.topic_logits->value.rows == 2);
    CHECK(model.topic_logits->value.cols == 4);
    CHECK(model.head_w[0]->value.cols == 2 * 2);  // topic head: 2 * num_topics
    CHECK(model.head_w[1]->value.cols == 2 * 2);  // rec head: 2 * z_dim
    CHECK(model.z_dim_for(Task::topic) == 2);
    CHECK(model.z_dim_for(Task::recommend) == 2);

    SUBCASE("same seed, same init; different seed differs") {
        GdVaeModel m2(tiny_dims(c), 0.02, 1);
        GdVaeModel m3(tiny_dims(c), 0.02, 2);
        CHECK(model.X->value.v == m2.X->value.v);
        CHECK(model.X->value.v != m3.X->value.v);
    }
    SUBCASE("dims validation") {
        ModelDims bad = tiny_dims(c);
        bad.num_topics = 1;
        CHECK_THROWS_AS(GdVaeModel(bad, 0.02, 1), std::invalid_argument);
        ModelDims bad2 = tiny_dims(c);
        bad2.d_emb = 0;
        CHECK_THROWS_AS(GdVaeModel(bad2, 0.02, 1), std::invalid_argument);
        CHECK_THROWS_AS(GdVaeModel(tiny_dims(c), 0.0, 1), std::invalid_argument);
    }
}

TEST_CASE("task graphs carry the right views") {
    Corpus c = testfx::four_admissions();
    AdmissionGraph g = build_graph_variant(c, testfx::ids_of(c), GraphVariant::pmi_tfidf);

    TaskGraph full = make_task_graph(g, c, Task::topic);
    CHECK(full.n_view_codes == 4);
    CHECK(full.norm_adj.rows == 8);
    CHECK(full.admission_row(0) == 4);
    CHECK(full.pool_rows[0] == std::vector<int>{0, 1, 3});  // A1 pools all its codes
    for (char u : full.usable) CHECK(u == 1);

    TaskGraph rec = make_task_graph(g, c, Task::recommend);
    CHECK(rec.n_view_codes == 3);
    CHECK(rec.norm_adj.rows == 7);
    CHECK(rec.pool_rows[0] == std::vector<int>{0, 1});  // diseases only
    CHECK(rec.code_rows == std::vector<int>{0, 1, 2});

    // sub-view is renormalized from raw weights, not sliced from the
    // full normalization: compare against a dense recomputation
    std::vector<int> nodes = {0, 1, 2, 4, 5, 6, 7};
    int n = 7;
    std::vector<double> deg(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) deg[i] += g.adjacency.at(nodes[i], nodes[j]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double want = g.adjacency.at(nodes[i], nodes[j]) / std::sqrt(deg[i] * deg[j]);
            CHECK(rec.norm_adj.at(i, j) == doctest::Approx(want).epsilon(1e-12).scale(1.0));
        }
}

TEST_CASE("recommend view marks admissions without poolable codes unusable") {
    Corpus c = make_corpus({
        testfx::rec("W1", {}, {"p1"}, "a"),  // no diseases: nothing to pool in the R view
        testfx::rec("W2", {"d1"}, {"p1"}, "b"),
        testfx::rec("W3", {"d1", "d2"}, {}, "a"),
    });
    AdmissionGraph g = build_graph_variant(c, testfx::ids_of(c), GraphVariant::pmi_tfidf);
    TaskGraph rec = make_task_graph(g, c, Task::recommend);
    CHECK(rec.usable[0] == 0);
    CHECK(rec.usable[1] == 1);
    CHECK(rec.usable[2] == 1);
    TaskGraph full = make_task_graph(g, c, Task::topic);
    CHECK(full.usable[0] == 1);  // procedures pool in the full view
}

TEST_CASE("decoder likelihood closed forms") {
    Corpus c = make_corpus({
        testfx::rec("Z1", {"d1"}, {"p1", "p2", "p3"}, "a"),
        testfx::rec("Z2", {"d2"}, {"p4", "p5"}, "b"),
        testfx::rec("Z3", {"d1", "d2"}, {"p1"}, "c"),
    });
    REQUIRE(c.procedure_vocab.size() == 5);
    REQUIRE(c.labels.size() == 3);
    GdVaeModel model(tiny_dims(c), 0.02, 3);

    SUBCASE("uniform topics factorize one biterm to log(1/16)") {
        // 2 diseases + 5 procedures = 7 codes; force a 4-code vocabulary
        Corpus c4 = testfx::four_admissions();
        GdVaeModel m4(tiny_dims(c4), 0.02, 3);
        m4.topic_logits->value.fill(0.0);  // beta uniform over 4 codes
        Tape t;
        int z = t.input(DenseMatrix::from_rows({{0.5, 0.5}}));
        int ll = m4.topic_log_likelihood(t, z, {{{0, 1, 1.0}}});
        CHECK(t.scalar_value(ll) == doctest::Approx(std::log(1.0 / 16.0)).epsilon(1e-12));
    }
    SUBCASE("uniform recommendation scores one procedure at log(1/5)") {
        model.rec_w2->value.fill(0.0);
        model.rec_b2->value.fill(0.0);
        Tape t;
        int z = t.input(normal_noise(1, 2, 9));
        DenseMatrix y(1, 5);
        y.at(0, 3) = 1.0;
        int ll = model.rec_log_likelihood(t, z, y);
        CHECK(t.scalar_value(ll) == doctest::Approx(std::log(1.0 / 5.0)).epsilon(1e-12));
        // multinomial counts add up
        DenseMatrix y2(1, 5);
        y2.at(0, 0) = 1.0;
        y2.at(0, 4) = 1.0;
        Tape t2;
        int ll2 = model.rec_log_likelihood(t2, t2.input(normal_noise(1, 2, 9)), y2);
        CHECK(t2.scalar_value(ll2) == doctest::Approx(2 * std::log(1.0 / 5.0)).epsilon(1e-12));
    }
    SUBCASE("uniform classifier scores log(1/3)") {
        model.cls_w->value.fill(0.0);
        model.cls_b->value.fill(0.0);
        Tape t;
        DenseMatrix y(1, 3);
        y.at(0, 2) = 1.0;
        int ll = model.cls_log_likelihood(t, t.input(normal_noise(1, 2, 10)), y);
        CHECK(t.scalar_value(ll) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
    }
    SUBCASE("target validation") {
        Tape t;
        DenseMatrix zero(1, 5);
        CHECK_THROWS_WITH_AS(model.rec_log_likelihood(t, t.input(normal_noise(1, 2, 1)), zero),
                             doctest::Contains("empty recommendation target"), std::invalid_argument);
        DenseMatrix narrow(1, 4);
        CHECK_THROWS_AS(model.rec_log_likelihood(t, t.input(normal_noise(1, 2, 1)), narrow),
                        std::invalid_argument);
    }
}

TEST_CASE("kl closed forms and exact zeros") {
    SUBCASE("unit shift costs one half nat") {
        Tape t;
        int mu = t.input(DenseMatrix::from_rows({{1.0}}));
        int ls = t.input(DenseMatrix::from_rows({{0.0}}));
        CHECK(t.scalar_value(t.kl_standard_normal(mu, ls)) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(t.scalar_value(t.kl_gaussian_prior(mu, ls, {0.0}, {1.0})) ==
              doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("posterior equal to prior costs exactly zero") {
        Tape t;
        int mu = t.input(DenseMatrix(2, 3));
        int ls = t.input(DenseMatrix(2, 3));
        CHECK(t.scalar_value(t.kl_standard_normal(mu, ls)) == 0.0);
        CHECK(t.scalar_value(t.kl_gaussian_prior(mu, ls, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0})) == 0.0);
        // the dirichlet surrogate with alpha = (L-1)/L is exactly standard
        LaplacePrior p = laplace_prior(std::vector<double>(3, 2.0 / 3.0));
        CHECK(t.scalar_value(t.kl_gaussian_prior(mu, ls, p.mu, p.var)) == 0.0);
    }
    SUBCASE("nonnegative on random inputs") {
        Rng rng(13);
        for (int i = 0; i < 1000; ++i) {
            Tape t;
            DenseMatrix mu(1, 4), ls(1, 4);
            for (double& x : mu.v) x = 3.0 * (rng.uniform() - 0.5);
            for (double& x : ls.v) x = 2.0 * (rng.uniform() - 0.5);
            std::vector<double> pm(4), pv(4);
            for (auto& x : pm) x = 2.0 * (rng.uniform() - 0.5);
            for (auto& x : pv) x = 0.1 + 3.0 * rng.uniform();
            CHECK(t.scalar_value(t.kl_standard_normal(t.input(mu), t.input(ls))) >= 0.0);
            CHECK(t.scalar_value(t.kl_gaussian_prior(t.input(mu), t.input(ls), pm, pv)) >= 0.0);
        }
    }
}

TEST_CASE("topic latents live on the simplex") {
    Corpus c = testfx::four_admissions();
    GdVaeModel model(tiny_dims(c), 0.02, 5);
    AdmissionGraph g = build_graph_variant(c, testfx::ids_of(c), GraphVariant::pmi_tfidf);
    TaskGraph full = make_task_graph(g, c, Task::topic);
    Tape t;
    int h = model.encode(t, full);
    int docs = model.document_rows(t, h, {{0, 1, 3}, {2}});
    StochasticHead head = model.head(t, docs, Task::topic);
    int z = model.sample_latent(t, head, Task::topic, normal_noise(2, 2, 21));
    const DenseMatrix& zv = t.value(z);
    for (int i = 0; i < 2; ++i) {
        double s = 0.0;
        for (int j = 0; j < 2; ++j) {
            CHECK(zv.at(i, j) >= 0.0);
            s += zv.at(i, j);
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    // recommend/predict latents are unconstrained gaussians
    StochasticHead rhead = model.head(t, docs, Task::recommend);
    int rz = model.sample_latent(t, rhead, Task::recommend, DenseMatrix(2, 2));
    CHECK(t.value(rz).at(0, 0) == t.value(rhead.mu).at(0, 0));  // zero noise: z = mu
}

TEST_CASE("joint objective wiring") {
    Corpus c = testfx::grad_fixture();
    AdmissionGraph g = build_graph_variant(c, testfx::ids_of(c), GraphVariant::pmi_tfidf);
    GdVaeModel model(tiny_dims(c), 0.02, 7);
    TaskGraph full = make_task_graph(g, c, Task::topic);
    TaskGraph rec = make_task_graph(g, c, Task::recommend);
    IndexedAdmissions ix = index_admissions(c);

    JointBatch batch;
    batch.doc_bags = {{{0, 1, 1.0}, {0, 5, 2.0}}, {{2, 3, 1.0}}};
    batch.doc_codes = {{0, 1, 5}, {2, 3}};
    batch.rec_admissions = {0, 2, 3};
    batch.rec_targets = recommend_targets(ix, batch.rec_admissions, 5, 3);
    batch.cls_admissions = {1, 4};
    batch.cls_targets = label_targets(ix, batch.cls_admissions, 2);

    NoiseDraw noise;
    noise.topic = normal_noise(2, 2, 31);
    noise.rec = normal_noise(3, 2, 32);
    noise.cls = normal_noise(2, 2, 33);

    ElboResult r = elbo_joint(model, &full, &rec, batch, noise, false);
    CHECK(std::isfinite(r.loss));
    CHECK(r.topic.count == 2);
    CHECK(r.rec.count == 3);
    CHECK(r.cls.count == 2);
    CHECK(r.topic.kl_sum >= 0.0);
    double want = (r.topic.kl_mean() - r.topic.recon_mean()) +
                  (r.rec.kl_mean() - r.rec.recon_mean()) + (r.cls.kl_mean() - r.cls.recon_mean());
    CHECK(r.loss == doctest::Approx(want).epsilon(1e-9));

    SUBCASE("inactive tasks leave their decoders untouched") {
        JointBatch only_topic;
        only_topic.doc_bags = batch.doc_bags;
        only_topic.doc_codes = batch.doc_codes;
        elbo_joint(model, &full, nullptr, only_topic, noise, true);
        auto all_zero = [](const DenseMatrix& m) {
            for (double x : m.v)
                if (x != 0.0) return false;
            return true;
        };
        CHECK_FALSE(all_zero(model.topic_logits->grad));
        CHECK_FALSE(all_zero(model.X->grad));
        CHECK(all_zero(model.rec_w1->grad));
        CHECK(all_zero(model.rec_w2->grad));
        CHECK(all_zero(model.cls_w->grad));
        CHECK(all_zero(model.head_w[1]->grad));

        JointBatch only_rec;
        only_rec.rec_admissions = batch.rec_admissions;
        only_rec.rec_targets = batch.rec_targets;
        elbo_joint(model, nullptr, &rec, only_rec, noise, true);
        CHECK(all_zero(model.topic_logits->grad));
        CHECK(all_zero(model.cls_w->grad));
        CHECK_FALSE(all_zero(model.rec_w1->grad));
        CHECK_FALSE(all_zero(model.X->grad));

        JointBatch only_cls;
        only_cls.cls_admissions = batch.cls_admissions;
        only_cls.cls_targets = batch.cls_targets;
        elbo_joint(model, &full, nullptr, only_cls, noise, true);
        CHECK(all_zero(model.topic_logits->grad));
        CHECK(all_zero(model.rec_w1->grad));
        CHECK_FALSE(all_zero(model.cls_w->grad));
    }
    SUBCASE("validation") {
        JointBatch empty;
        CHECK_THROWS_AS(elbo_joint(model, &full, &rec, empty, noise, false), std::invalid_argument);
        JointBatch no_view;
        no_view.doc_bags = batch.doc_bags;
        no_view.doc_codes = batch.doc_codes;
        CHECK_THROWS_AS(elbo_joint(model, nullptr, &rec, no_view, noise, false),
                        std::invalid_argument);
        NoiseDraw bad = noise;
        bad.topic = DenseMatrix(1, 2);
        CHECK_THROWS_WITH_AS(elbo_joint(model, &full, &rec, batch, bad, false),
                             doctest::Contains("noise draw"), std::invalid_argument);
    }
}

TEST_CASE("targets") {
    Corpus c = testfx::four_admissions();
    IndexedAdmissions ix = index_admissions(c);
    DenseMatrix y = recommend_targets(ix, {0, 2}, 3, 1);
    CHECK(y.rows == 2);
    CHECK(y.cols == 1);
    CHECK(y.at(0, 0) == 1.0);  // p1 is local procedure 0
    CHECK_THROWS_WITH_AS(recommend_targets(ix, {1}, 3, 1), doctest::Contains("no procedures"),
                         std::invalid_argument);

    DenseMatrix l = label_targets(ix, {0, 1}, 2);
    CHECK(l.at(0, c.label_id("urgent")) == 1.0);
    CHECK(l.at(0, c.label_id("elective")) == 0.0);
    CHECK(l.at(1, c.label_id("elective")) == 1.0);
}

TEST_CASE("full joint gradient check on the six-admission fixture") {
    Corpus c = testfx::grad_fixture();
    REQUIRE(c.n_codes() == 8);
    AdmissionGraph g = build_graph_variant(c, testfx::ids_of(c), GraphVariant::pmi_tfidf);
    GdVaeModel model(tiny_dims(c), 0.02, 17);
    TaskGraph full = make_task_graph(g, c, Task::topic);
    TaskGraph rec = make_task_graph(g, c, Task::recommend);
    IndexedAdmissions ix = index_admissions(c);

    JointBatch batch;
    batch.doc_bags = {{{0, 1, 1.0}, {0, 5, 2.0}, {1, 5, 1.0}}, {{2, 3, 1.0}, {6, 7, 1.0}}};
    batch.doc_codes = {{0, 1, 5}, {2, 3, 6, 7}};
    batch.rec_admissions = {0, 1, 2, 3, 4, 5};
    batch.rec_targets = recommend_targets(ix, batch.rec_admissions, 5, 3);
    batch.cls_admissions = {0, 1, 2, 3, 4, 5};
    batch.cls_targets = label_targets(ix, batch.cls_admissions, 2);

    NoiseDraw noise;
    noise.topic = normal_noise(2, 2, 41);
    noise.rec = normal_noise(6, 2, 42);
    noise.cls = normal_noise(6, 2, 43);

    auto f = [&](bool with_grad) {
        return elbo_joint(model, &full, &rec, batch, noise, with_grad).loss;
    };
    GradCheckResult r = gradient_check(f, model.params.list());
    INFO("worst parameter: ", r.worst_param, "[", r.worst_index, "] analytic ", r.analytic,
         " numeric ", r.numeric);
    CHECK(r.max_rel_err < 1e-4);
}

TEST_SUITE_END();
