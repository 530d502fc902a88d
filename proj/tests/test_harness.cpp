#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gcan/harness.hpp"
#include "gcan/synthgen.hpp"

#include <cmath>

using namespace gcan::harness;
using gcan::data::Dataset;
using gcan::model::GcanConfig;
using gcan::num::Rng;

namespace {

GcanConfig tiny_config() {
    GcanConfig c;
    c.max_tweet_len = 6;
    c.num_users = 5;
    c.embed_dim = 4;
    c.gcn_dim = 4;
    c.filter_size = 2;
    c.attn_dim = 3;
    c.epochs = 4;
    c.seed = 7;
    return c;
}

Dataset tiny_dataset(int n, uint64_t seed = 11) {
    gcan::synth::GeneratorConfig g;
    g.n_stories = n;
    g.retweets_min = 3;
    g.retweets_max = 8;
    g.seed = seed;
    return gcan::synth::generate(g);
}

// Independent recomputation straight from the definitions.
Metrics count_oracle(const std::vector<int>& p, const std::vector<int>& y) {
    Metrics m;
    for (size_t i = 0; i < p.size(); ++i) {
        m.tp += p[i] == 1 && y[i] == 1;
        m.fp += p[i] == 1 && y[i] == 0;
        m.tn += p[i] == 0 && y[i] == 0;
        m.fn += p[i] == 0 && y[i] == 1;
    }
    m.accuracy = double(m.tp + m.tn) / double(p.size());
    double p1 = m.tp + m.fp ? double(m.tp) / (m.tp + m.fp) : 0;
    double r1 = m.tp + m.fn ? double(m.tp) / (m.tp + m.fn) : 0;
    double p0 = m.tn + m.fn ? double(m.tn) / (m.tn + m.fn) : 0;
    double r0 = m.tn + m.fp ? double(m.tn) / (m.tn + m.fp) : 0;
    double f1 = p1 + r1 ? 2 * p1 * r1 / (p1 + r1) : 0;
    double f0 = p0 + r0 ? 2 * p0 * r0 / (p0 + r0) : 0;
    m.fake_precision = p1;
    m.fake_recall = r1;
    m.fake_f1 = f1;
    m.precision = (p0 + p1) / 2;
    m.recall = (r0 + r1) / 2;
    m.f1 = (f0 + f1) / 2;
    return m;
}

}  // namespace

TEST_CASE("compute_metrics: hand-counted example") {
    Metrics m = compute_metrics({1, 1, 0, 0}, {1, 0, 0, 0});
    CHECK(m.accuracy == doctest::Approx(0.75));
    CHECK(m.fake_precision == doctest::Approx(0.5));
    CHECK(m.fake_recall == doctest::Approx(1.0));
    // class-0 precision 1.0, recall 2/3 -> macro-F1 = (2/3 + 0.8) / 2
    CHECK(m.precision == doctest::Approx(0.75));
    CHECK(m.recall == doctest::Approx(5.0 / 6.0));
    CHECK(m.f1 == doctest::Approx((2.0 / 3.0 + 0.8) / 2.0));
    CHECK(m.tp == 1);
    CHECK(m.fp == 1);
    CHECK(m.tn == 2);
    CHECK(m.fn == 0);
}

TEST_CASE("compute_metrics: all correct gives ones") {
    Metrics m = compute_metrics({1, 0, 1, 0}, {1, 0, 1, 0});
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.fake_f1 == 1.0);
}

TEST_CASE("compute_metrics: rejects empty and mismatched input") {
    CHECK_THROWS_AS(compute_metrics({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(compute_metrics({1}, {1, 0}), std::invalid_argument);
}

TEST_CASE("compute_metrics matches direct-count oracle on random vectors") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + int(rng.below(40));
        std::vector<int> p(n), y(n);
        for (int i = 0; i < n; ++i) {
            p[i] = int(rng.below(2));
            y[i] = int(rng.below(2));
        }
        Metrics a = compute_metrics(p, y);
        Metrics b = count_oracle(p, y);
        CHECK(a.accuracy == doctest::Approx(b.accuracy).epsilon(1e-12));
        CHECK(a.precision == doctest::Approx(b.precision).epsilon(1e-12));
        CHECK(a.recall == doctest::Approx(b.recall).epsilon(1e-12));
        CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-12));
        CHECK(a.fake_precision == doctest::Approx(b.fake_precision).epsilon(1e-12));
        CHECK(a.fake_recall == doctest::Approx(b.fake_recall).epsilon(1e-12));
        CHECK(a.fake_f1 == doctest::Approx(b.fake_f1).epsilon(1e-12));
        CHECK(a.tp == b.tp);
        CHECK(a.fp == b.fp);
        CHECK(a.tn == b.tn);
        CHECK(a.fn == b.fn);
    }
}

TEST_CASE("random predictor on balanced labels stays near 0.5") {
    Rng rng(23);
    std::vector<int> labels(200);
    for (int i = 0; i < 200; ++i) labels[i] = i % 2;
    double mean = 0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
        std::vector<int> preds(200);
        for (int& p : preds) p = int(rng.below(2));
        mean += compute_metrics(preds, labels).accuracy / trials;
    }
    CHECK(std::fabs(mean - 0.5) < 0.1);
}

TEST_CASE("aggregate: mean is the arithmetic mean, stddev matches closed form") {
    Metrics a, b;
    a.accuracy = 0.8;
    a.f1 = 0.6;
    b.accuracy = 0.6;
    b.f1 = 1.0;
    ExperimentReport rep = aggregate({a, b});
    CHECK(rep.mean.accuracy == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(rep.mean.f1 == doctest::Approx(0.8).epsilon(1e-12));
    // population stddev: sqrt(((x-mu)^2 + (y-mu)^2)/2)
    CHECK(rep.stddev.accuracy == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(rep.stddev.f1 == doctest::Approx(0.2).epsilon(1e-12));
    REQUIRE(rep.per_repeat.size() == 2);
}

TEST_CASE("aggregate mean equals arithmetic mean to 1e-12 on random reports") {
    Rng rng(29);
    std::vector<Metrics> rows(9);
    double acc_sum = 0;
    for (Metrics& m : rows) {
        m.accuracy = rng.uniform(0.0, 1.0);
        acc_sum += m.accuracy;
    }
    ExperimentReport rep = aggregate(rows);
    CHECK(std::fabs(rep.mean.accuracy - acc_sum / 9.0) < 1e-12);
}

TEST_CASE("run_experiment: deterministic for a fixed base seed") {
    Dataset ds = tiny_dataset(12);
    GcanConfig cfg = tiny_config();
    ExperimentReport a = run_experiment(ds, cfg, 2, 5);
    ExperimentReport b = run_experiment(ds, cfg, 2, 5);
    REQUIRE(a.per_repeat.size() == 2);
    for (size_t i = 0; i < a.per_repeat.size(); ++i) {
        CHECK(a.per_repeat[i].accuracy == b.per_repeat[i].accuracy);
        CHECK(a.per_repeat[i].f1 == b.per_repeat[i].f1);
    }
    CHECK(a.mean.accuracy == b.mean.accuracy);
}

TEST_CASE("run_experiment: repeats recorded and rejects repeats < 1") {
    Dataset ds = tiny_dataset(12);
    ExperimentReport rep = run_experiment(ds, tiny_config(), 3, 1);
    CHECK(rep.per_repeat.size() == 3);
    CHECK(rep.base_seed == 1);
    CHECK(rep.wall_seconds > 0);
    CHECK_THROWS_AS(run_experiment(ds, tiny_config(), 0, 1), std::invalid_argument);
}

TEST_CASE("early_detection_sweep: one row per n, resampling path runs") {
    Dataset ds = tiny_dataset(10);
    GcanConfig cfg = tiny_config();
    // retweet counts are 3..8, so n=12 forces cyclic resampling
    auto rows = early_detection_sweep(ds, cfg, {4, 12}, 1, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n == 4);
    CHECK(rows[1].n == 12);
    for (const SweepRow& r : rows) CHECK(r.report.per_repeat.size() == 1);
    CHECK_THROWS_AS(early_detection_sweep(ds, cfg, {1}, 1, 2), std::invalid_argument);
}

TEST_CASE("ablation_suite: seven rows with paper-style labels") {
    Dataset ds = tiny_dataset(10);
    GcanConfig cfg = tiny_config();
    cfg.epochs = 1;
    auto rows = ablation_suite(ds, cfg, 1, 3);
    REQUIRE(rows.size() == 7);
    const char* names[] = {"FULL", "GCAN-G", "-A", "-R", "-G", "-C", "-S-A"};
    for (int i = 0; i < 7; ++i) CHECK(rows[i].name == names[i]);
    // -G and GCAN-G drop the same branch, so shared seeds give identical metrics
    CHECK(rows[1].report.mean.accuracy == rows[4].report.mean.accuracy);
}

TEST_CASE("evaluate rejects an empty test set") {
    Dataset ds = tiny_dataset(4);
    gcan::model::ModelState state(tiny_config(), gcan::data::build_vocab(ds, 1),
                                  gcan::data::fit_scaler(ds));
    CHECK_THROWS_AS(evaluate(state, Dataset{}), std::invalid_argument);
}

TEST_CASE("JSON and table rendering are well-formed") {
    Dataset ds = tiny_dataset(10);
    GcanConfig cfg = tiny_config();
    cfg.epochs = 1;
    ExperimentReport rep = run_experiment(ds, cfg, 2, 4);
    std::string rj = report_to_json(rep);
    CHECK(rj.find("\"mean\"") != std::string::npos);
    CHECK(rj.find("\"per_repeat\"") != std::string::npos);

    auto sweep = early_detection_sweep(ds, cfg, {4, 6}, 1, 4);
    std::string st = sweep_table(sweep);
    CHECK(st.find("   4") != std::string::npos);
    CHECK(st.find('#') != std::string::npos);
    std::string sj = sweep_to_json(sweep);
    CHECK(sj.find("\"n\": 4") != std::string::npos);

    auto abl = ablation_suite(ds, cfg, 1, 4);
    std::string at = ablation_table(abl);
    CHECK(at.find("FULL") != std::string::npos);
    CHECK(at.find("-S-A") != std::string::npos);
    std::string aj = ablation_to_json(abl);
    CHECK(aj.find("\"variant\": \"FULL\"") != std::string::npos);
}
