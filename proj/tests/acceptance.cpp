// Acceptance gate: runs every stated criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code is the failure count.

#include "gcan/explain.hpp"
#include "gcan/harness.hpp"
#include "gcan/model.hpp"
#include "gcan/synthgen.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using gcan::data::Dataset;
using gcan::model::GcanConfig;
using gcan::model::ModelState;
using gcan::num::Rng;
using gcan::num::Tape;
using gcan::num::Tensor;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

Tensor random_tensor(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(r, c);
    for (double& x : t.v) x = rng.uniform(lo, hi);
    return t;
}

GcanConfig tiny_config() {
    GcanConfig c;
    c.max_tweet_len = 6;
    c.num_users = 5;
    c.embed_dim = 4;
    c.gcn_dim = 4;
    c.filter_size = 2;
    c.attn_dim = 3;
    c.seed = 7;
    return c;
}

Dataset small_dataset(int n, uint64_t seed) {
    gcan::synth::GeneratorConfig g;
    g.n_stories = n;
    g.retweets_min = 3;
    g.retweets_max = 10;
    g.seed = seed;
    return gcan::synth::generate(g);
}

// ---- criterion 1: end-to-end gradient correctness --------------------------

std::pair<bool, std::string> check_gradients() {
    double t0 = now_seconds();
    Dataset ds = small_dataset(4, 11);
    GcanConfig cfg = tiny_config();
    ModelState state(cfg, gcan::data::build_vocab(ds, 1), gcan::data::fit_scaler(ds));
    gcan::model::EncodedStory story = state.preprocess(ds.stories[1]);
    auto loss_fn = [&](bool with_grad) {
        Tape tape;
        auto f = state.forward(tape, story);
        auto loss = tape.cross_entropy(f.y_hat, story.label);
        if (with_grad) tape.backward(loss);
        return tape.value(loss).v[0];
    };
    Rng pick(5);
    auto rep = gcan::num::grad_check(loss_fn, state.params(), 1e-3, 1e-4, 4, pick);
    double secs = now_seconds() - t0;
    std::ostringstream d;
    d << "max rel error " << rep.max_rel_error << " (worst " << rep.worst.param << "), "
      << secs << "s";
    return {rep.pass && secs < 60.0, d.str()};
}

// ---- criterion 2: overfit sanity -------------------------------------------

std::pair<bool, std::string> check_overfit() {
    Dataset ds = small_dataset(16, 9);
    GcanConfig cfg;
    cfg.epochs = 200;
    cfg.seed = 1;
    ModelState state = gcan::model::train_model(ds, cfg);
    double acc = gcan::harness::evaluate(state, ds).accuracy;
    std::ostringstream d;
    d << "train accuracy " << acc << " after " << cfg.epochs << " epochs";
    return {acc == 1.0, d.str()};
}

// ---- criterion 3: planted-signal detection ---------------------------------

std::pair<bool, std::string> check_planted_signal() {
    gcan::synth::GeneratorConfig g;  // defaults: 500 stories, strength 0.8
    g.n_stories = 700;               // 500 train / 200 test at fraction 5/7
    Dataset ds = gcan::synth::generate(g);
    GcanConfig cfg;
    cfg.train_fraction = 5.0 / 7.0;
    const int repeats = 20;
    const uint64_t base_seed = 100;
    gcan::harness::ExperimentReport rep =
        gcan::harness::run_experiment(ds, cfg, repeats, base_seed);
    double oracle = 0;
    for (int r = 0; r < repeats; ++r) {
        auto [train, test] = gcan::data::split(ds, cfg.train_fraction, base_seed + r);
        oracle += gcan::synth::oracle_baseline(train, test).accuracy / repeats;
    }
    std::ostringstream d;
    d << "mean accuracy " << rep.mean.accuracy << " (std " << rep.stddev.accuracy
      << "), oracle " << oracle << ", " << repeats << " repeats";
    return {rep.mean.accuracy >= 0.90 && rep.mean.accuracy >= oracle - 0.02, d.str()};
}

// ---- criterion 4: ablation ordering ----------------------------------------

std::pair<bool, std::string> check_ablation() {
    gcan::synth::GeneratorConfig g;  // default 500-story dataset
    Dataset ds = gcan::synth::generate(g);
    GcanConfig cfg;
    cfg.epochs = 10;  // signal is strong; reduced epochs keep the runtime sane
    auto rows = gcan::harness::ablation_suite(ds, cfg, 3, 200);
    double full = rows[0].report.mean.accuracy;
    double best_variant = 0;
    std::string best_name;
    for (size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].report.mean.accuracy > best_variant) {
            best_variant = rows[i].report.mean.accuracy;
            best_name = rows[i].name;
        }
    }
    std::ostringstream d;
    d << "FULL " << full << ", best variant " << best_name << " " << best_variant;
    return {full >= best_variant - 0.02, d.str()};
}

// ---- criterion 5: early detection ------------------------------------------

std::pair<bool, std::string> check_early_detection() {
    gcan::synth::GeneratorConfig g;
    Dataset ds = gcan::synth::generate(g);
    GcanConfig cfg;
    cfg.epochs = 10;
    auto rows = gcan::harness::early_detection_sweep(ds, cfg, {10, 40}, 3, 300);
    double a10 = rows[0].report.mean.accuracy;
    double a40 = rows[1].report.mean.accuracy;
    std::ostringstream d;
    d << "accuracy n=10: " << a10 << ", n=40: " << a40;
    return {std::fabs(a10 - a40) <= 0.10, d.str()};
}

// ---- criterion 6: attention invariants -------------------------------------

std::pair<bool, std::string> check_attention_invariants() {
    Dataset ds = small_dataset(100, 17);
    int passes = 0;
    double worst_sum_err = 0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        GcanConfig cfg = tiny_config();
        cfg.seed = 50 + seed;
        ModelState state(cfg, gcan::data::build_vocab(ds, 1), gcan::data::fit_scaler(ds));
        for (const auto& s : ds.stories) {
            gcan::model::Prediction p = state.predict(s);
            for (const auto* att : {&p.word_attention, &p.window_attention,
                                    &p.word_attention_graph, &p.user_attention_graph}) {
                double sum = 0;
                for (double x : *att) sum += x;
                worst_sum_err = std::max(worst_sum_err, std::fabs(sum - 1.0));
            }
            ++passes;
        }
    }
    bool sums_ok = worst_sum_err <= 1e-6;

    // graph-branch outputs invariant under user permutation
    GcanConfig cfg = tiny_config();
    ModelState state(cfg, gcan::data::build_vocab(ds, 1), gcan::data::fit_scaler(ds));
    Rng rng(77);
    double worst_perm_err = 0;
    for (int t = 0; t < 20; ++t) {
        gcan::model::EncodedStory enc = state.preprocess(ds.stories[t]);
        gcan::model::EncodedStory perm = enc;
        int n = cfg.num_users;
        for (int i = n; i > 1; --i) {
            int j = static_cast<int>(rng.below(i));
            std::swap(perm.users[i - 1], perm.users[j]);
            for (int c = 0; c < perm.X.cols; ++c) std::swap(perm.X.at(i - 1, c), perm.X.at(j, c));
        }
        perm.graph = gcan::enc::build_graph(perm.X);
        Tape t1, t2;
        auto a = state.forward(t1, enc);
        auto b = state.forward(t2, perm);
        for (int i = 0; i < cfg.embed_dim; ++i) {
            worst_perm_err = std::max(
                worst_perm_err, std::fabs(t1.value(a.s_hat1).v[i] - t2.value(b.s_hat1).v[i]));
        }
        for (int i = 0; i < cfg.gcn_dim; ++i) {
            worst_perm_err = std::max(
                worst_perm_err, std::fabs(t1.value(a.g_hat).v[i] - t2.value(b.g_hat).v[i]));
        }
    }
    bool perm_ok = worst_perm_err <= 1e-9;
    std::ostringstream d;
    d << passes << " forward passes, worst sum error " << worst_sum_err
      << "; worst permutation error " << worst_perm_err;
    return {sums_ok && perm_ok, d.str()};
}

// ---- criterion 7: explainability -------------------------------------------

std::pair<bool, std::string> check_explainability() {
    gcan::synth::GeneratorConfig g;
    g.n_stories = 700;
    Dataset ds = gcan::synth::generate(g);
    std::set<std::string> evidence(g.evidence_tokens.begin(), g.evidence_tokens.end());
    GcanConfig cfg;
    cfg.train_fraction = 5.0 / 7.0;
    cfg.seed = 100;
    auto [train, test] = gcan::data::split(ds, cfg.train_fraction, cfg.seed);
    ModelState state = gcan::model::train_model(train, cfg);

    int eligible = 0, hit = 0;
    for (const auto& s : test.stories) {
        if (s.label != 1) continue;
        if (state.predict(s).label != 1) continue;
        // only stories whose encoded window contains a planted token count
        bool has_evidence = false;
        for (size_t i = 0; i < s.tokens.size() && i < size_t(cfg.max_tweet_len); ++i) {
            if (evidence.count(s.tokens[i])) has_evidence = true;
        }
        if (!has_evidence) continue;
        ++eligible;
        gcan::explain::AttentionReport rep = gcan::explain::explain_story(state, s, 3);
        for (const auto& w : rep.top_words) {
            if (evidence.count(w.token)) {
                ++hit;
                break;
            }
        }
    }
    double ratio = eligible > 0 ? double(hit) / eligible : 0.0;
    std::ostringstream d;
    d << hit << "/" << eligible << " correctly-classified fake stories have a planted token "
      << "in the top-3 (" << ratio << ")";
    return {eligible > 0 && ratio >= 0.80, d.str()};
}

// ---- criterion 8: unit-level oracle equivalence ----------------------------

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double gru_oracle_error(Rng& rng) {
    gcan::enc::GruCell cell("g", 3, 4, rng);
    Tensor X = random_tensor(3, 4, rng);
    Tape tape;
    auto out = gcan::enc::gru_forward(tape, cell, tape.constant(X));
    int H = 4, T = 4, I = 3;
    std::vector<double> h(H, 0.0);
    double err = 0;
    for (int t = 0; t < T; ++t) {
        std::vector<double> z(H), r(H), cand(H), hn(H);
        for (int i = 0; i < H; ++i) {
            double az = cell.bz.value.v[i], ar = cell.br.value.v[i];
            for (int j = 0; j < I; ++j) {
                az += cell.Wz.value.at(i, j) * X.at(j, t);
                ar += cell.Wr.value.at(i, j) * X.at(j, t);
            }
            for (int j = 0; j < H; ++j) {
                az += cell.Uz.value.at(i, j) * h[j];
                ar += cell.Ur.value.at(i, j) * h[j];
            }
            z[i] = sigmoid(az);
            r[i] = sigmoid(ar);
        }
        for (int i = 0; i < H; ++i) {
            double ah = cell.bh.value.v[i];
            for (int j = 0; j < I; ++j) ah += cell.Wh.value.at(i, j) * X.at(j, t);
            for (int j = 0; j < H; ++j) ah += cell.Uh.value.at(i, j) * (r[j] * h[j]);
            cand[i] = std::tanh(ah);
        }
        for (int i = 0; i < H; ++i) hn[i] = (1.0 - z[i]) * h[i] + z[i] * cand[i];
        h = hn;
        for (int i = 0; i < H; ++i) err = std::max(err, std::fabs(tape.value(out).at(i, t) - h[i]));
    }
    return err;
}

double gcn_oracle_error(Rng& rng) {
    int n = 2 + static_cast<int>(rng.below(6)), g_dim = 3;
    Tensor X = random_tensor(n, 10, rng, 0.01, 1.0);
    gcan::enc::UserGraph graph = gcan::enc::build_graph(X);
    Tensor W0 = random_tensor(10, g_dim, rng);
    Tensor W1 = random_tensor(g_dim, g_dim, rng);
    Tape tape;
    auto out = gcan::enc::gcn_forward(tape, graph, tape.constant(X), tape.constant(W0),
                                      tape.constant(W1));
    auto matmul = [](const Tensor& A, const Tensor& B) {
        Tensor C(A.rows, B.cols);
        for (int i = 0; i < A.rows; ++i)
            for (int j = 0; j < B.cols; ++j)
                for (int k = 0; k < A.cols; ++k) C.at(i, j) += A.at(i, k) * B.at(k, j);
        return C;
    };
    auto relu = [](Tensor t) {
        for (double& x : t.v) x = std::max(0.0, x);
        return t;
    };
    Tensor H1 = relu(matmul(matmul(graph.A_norm, X), W0));
    Tensor H2 = relu(matmul(matmul(graph.A_norm, H1), W1));
    double err = 0;
    for (int i = 0; i < g_dim; ++i)
        for (int j = 0; j < n; ++j)
            err = std::max(err, std::fabs(tape.value(out).at(i, j) - H2.at(j, i)));
    return err;
}

double cosine_oracle_error(Rng& rng) {
    int n = 2 + static_cast<int>(rng.below(6));
    Tensor X = random_tensor(n, 10, rng, 0.01, 1.0);
    gcan::enc::UserGraph g = gcan::enc::build_graph(X);
    double err = 0;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            double expect;
            if (a == b) {
                expect = 1.0;
            } else {
                double dot = 0, na = 0, nb = 0;
                for (int j = 0; j < 10; ++j) {
                    dot += X.at(a, j) * X.at(b, j);
                    na += X.at(a, j) * X.at(a, j);
                    nb += X.at(b, j) * X.at(b, j);
                }
                expect = dot / std::sqrt(na * nb);
            }
            err = std::max(err, std::fabs(g.A.at(a, b) - expect));
        }
    }
    return err;
}

double coatt_oracle_error(Rng& rng) {
    int d = 2, p = 2, k = 2, m = 4, np = 3;
    gcan::coatt::CoAttentionParams pr("p", d, p, k, rng);
    Tensor S = random_tensor(d, m, rng);
    Tensor P = random_tensor(p, np, rng);
    Tape tape;
    auto out = gcan::coatt::coattend(tape, tape.constant(S), tape.constant(P), pr);

    auto F = std::vector<std::vector<double>>(m, std::vector<double>(np, 0.0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < np; ++j) {
            double s = 0;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < p; ++b)
                    s += S.at(a, i) * pr.W_affinity.value.at(a, b) * P.at(b, j);
            F[i][j] = std::tanh(s);
        }
    auto Hs = std::vector<std::vector<double>>(k, std::vector<double>(m, 0.0));
    auto Hp = std::vector<std::vector<double>>(k, std::vector<double>(np, 0.0));
    for (int r = 0; r < k; ++r) {
        for (int i = 0; i < m; ++i) {
            double s = 0;
            for (int a = 0; a < d; ++a) s += pr.W_source.value.at(r, a) * S.at(a, i);
            for (int j = 0; j < np; ++j) {
                double wp = 0;
                for (int b = 0; b < p; ++b) wp += pr.W_partner.value.at(r, b) * P.at(b, j);
                s += wp * F[i][j];
            }
            Hs[r][i] = std::tanh(s);
        }
        for (int j = 0; j < np; ++j) {
            double s = 0;
            for (int b = 0; b < p; ++b) s += pr.W_partner.value.at(r, b) * P.at(b, j);
            for (int i = 0; i < m; ++i) {
                double wsv = 0;
                for (int a = 0; a < d; ++a) wsv += pr.W_source.value.at(r, a) * S.at(a, i);
                s += wsv * F[i][j];
            }
            Hp[r][j] = std::tanh(s);
        }
    }
    auto softmax = [](std::vector<double> z) {
        double mx = z[0];
        for (double x : z) mx = std::max(mx, x);
        double sum = 0;
        for (double& x : z) {
            x = std::exp(x - mx);
            sum += x;
        }
        for (double& x : z) x /= sum;
        return z;
    };
    std::vector<double> zs(m, 0.0), zp(np, 0.0);
    for (int i = 0; i < m; ++i)
        for (int r = 0; r < k; ++r) zs[i] += pr.w_source.value.v[r] * Hs[r][i];
    for (int j = 0; j < np; ++j)
        for (int r = 0; r < k; ++r) zp[j] += pr.w_partner.value.v[r] * Hp[r][j];
    std::vector<double> a_s = softmax(zs), a_p = softmax(zp);
    std::vector<double> s_hat(d, 0.0), p_hat(p, 0.0);
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < m; ++i) s_hat[a] += a_s[i] * S.at(a, i);
    for (int b = 0; b < p; ++b)
        for (int j = 0; j < np; ++j) p_hat[b] += a_p[j] * P.at(b, j);

    double err = 0;
    for (int i = 0; i < m; ++i)
        err = std::max(err, std::fabs(tape.value(out.a_s).v[i] - a_s[i]));
    for (int j = 0; j < np; ++j)
        err = std::max(err, std::fabs(tape.value(out.a_p).v[j] - a_p[j]));
    for (int a = 0; a < d; ++a)
        err = std::max(err, std::fabs(tape.value(out.s_hat).v[a] - s_hat[a]));
    for (int b = 0; b < p; ++b)
        err = std::max(err, std::fabs(tape.value(out.p_hat).v[b] - p_hat[b]));
    return err;
}

std::pair<bool, std::string> check_unit_oracles() {
    Rng rng(2024);
    double gru = 0, gcn = 0, cosine = 0, coatt = 0;
    for (int i = 0; i < 100; ++i) {
        gru = std::max(gru, gru_oracle_error(rng));
        gcn = std::max(gcn, gcn_oracle_error(rng));
        cosine = std::max(cosine, cosine_oracle_error(rng));
        coatt = std::max(coatt, coatt_oracle_error(rng));
    }
    std::ostringstream d;
    d << "max errors over 100 instances: gru " << gru << ", gcn " << gcn << ", cosine "
      << cosine << ", coattention " << coatt;
    return {gru <= 1e-9 && gcn <= 1e-9 && cosine <= 1e-9 && coatt <= 1e-9, d.str()};
}

// ---- criterion 9: determinism ----------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::pair<bool, std::string> check_determinism() {
    Dataset ds = small_dataset(12, 13);
    GcanConfig cfg = tiny_config();
    cfg.epochs = 3;
    ModelState a = gcan::model::train_model(ds, cfg);
    ModelState b = gcan::model::train_model(ds, cfg);
    a.save("/tmp/gcan_accept_a.json");
    b.save("/tmp/gcan_accept_b.json");
    bool ckpt_ok = slurp("/tmp/gcan_accept_a.json") == slurp("/tmp/gcan_accept_b.json");

    gcan::harness::ExperimentReport r1 = gcan::harness::run_experiment(ds, cfg, 2, 5);
    gcan::harness::ExperimentReport r2 = gcan::harness::run_experiment(ds, cfg, 2, 5);
    bool report_ok = r1.per_repeat.size() == r2.per_repeat.size();
    for (size_t i = 0; report_ok && i < r1.per_repeat.size(); ++i) {
        report_ok = r1.per_repeat[i].accuracy == r2.per_repeat[i].accuracy &&
                    r1.per_repeat[i].f1 == r2.per_repeat[i].f1 &&
                    r1.per_repeat[i].tp == r2.per_repeat[i].tp &&
                    r1.per_repeat[i].fn == r2.per_repeat[i].fn;
    }

    std::string e1 = gcan::explain::render_report(
        gcan::explain::explain_story(a, ds.stories[0], 3), "json");
    std::string e2 = gcan::explain::render_report(
        gcan::explain::explain_story(b, ds.stories[0], 3), "json");
    bool explain_ok = e1 == e2;

    std::ostringstream d;
    d << "checkpoint bytes " << (ckpt_ok ? "identical" : "DIFFER") << ", report metrics "
      << (report_ok ? "identical" : "DIFFER") << ", explain bytes "
      << (explain_ok ? "identical" : "DIFFER");
    return {ckpt_ok && report_ok && explain_ok, d.str()};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<std::pair<bool, std::string>()> run;
    };
    const Criterion criteria[] = {
        {"gradient-correctness", check_gradients},
        {"overfit-sanity", check_overfit},
        {"planted-signal-detection", check_planted_signal},
        {"ablation-ordering", check_ablation},
        {"early-detection", check_early_detection},
        {"attention-invariants", check_attention_invariants},
        {"explainability", check_explainability},
        {"unit-oracle-equivalence", check_unit_oracles},
        {"determinism", check_determinism},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        double t0 = now_seconds();
        auto [ok, detail] = c.run();
        double secs = now_seconds() - t0;
        if (!ok) ++failures;
        std::printf("%s - %-26s %s [%.1fs]\n", ok ? "PASS" : "FAIL", c.name, detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    std::printf("%d/9 criteria passed\n", 9 - failures);
    return failures;
}
