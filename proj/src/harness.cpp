#include "gcan/harness.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

using nlohmann::json;

namespace gcan::harness {

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size() || predictions.empty()) {
        throw std::invalid_argument("compute_metrics: prediction/label size mismatch or empty");
    }
    Metrics m;
    for (size_t i = 0; i < predictions.size(); ++i) {
        int p = predictions[i], y = labels[i];
        if (p == 1 && y == 1) ++m.tp;
        else if (p == 1 && y == 0) ++m.fp;
        else if (p == 0 && y == 0) ++m.tn;
        else ++m.fn;
    }
    double n = static_cast<double>(predictions.size());
    m.accuracy = (m.tp + m.tn) / n;

    auto prf = [](double tp, double fp, double fn) {
        double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        return std::array<double, 3>{prec, rec, f1};
    };
    auto c1 = prf(m.tp, m.fp, m.fn);
    auto c0 = prf(m.tn, m.fn, m.fp);
    m.fake_precision = c1[0];
    m.fake_recall = c1[1];
    m.fake_f1 = c1[2];
    m.precision = (c0[0] + c1[0]) / 2.0;
    m.recall = (c0[1] + c1[1]) / 2.0;
    m.f1 = (c0[2] + c1[2]) / 2.0;
    return m;
}

Metrics evaluate(model::ModelState& state, const data::Dataset& test) {
    if (test.stories.empty()) throw std::invalid_argument("evaluate: empty test set");
    std::vector<int> preds, labels;
    preds.reserve(test.stories.size());
    for (const data::Story& s : test.stories) {
        preds.push_back(state.predict(s).label);
        labels.push_back(s.label);
    }
    return compute_metrics(preds, labels);
}

ExperimentReport aggregate(std::vector<Metrics> per_repeat) {
    ExperimentReport rep;
    rep.per_repeat = std::move(per_repeat);
    size_t n = rep.per_repeat.size();
    if (n == 0) return rep;
    auto fields = [](Metrics& m) {
        return std::array<double*, 7>{&m.accuracy, &m.precision, &m.recall, &m.f1,
                                      &m.fake_precision, &m.fake_recall, &m.fake_f1};
    };
    auto mean_f = fields(rep.mean);
    for (Metrics& m : rep.per_repeat) {
        auto f = fields(m);
        for (size_t k = 0; k < f.size(); ++k) *mean_f[k] += *f[k];
    }
    for (double* p : mean_f) *p /= static_cast<double>(n);
    auto sd_f = fields(rep.stddev);
    for (Metrics& m : rep.per_repeat) {
        auto f = fields(m);
        for (size_t k = 0; k < f.size(); ++k) {
            double d = *f[k] - *mean_f[k];
            *sd_f[k] += d * d;
        }
    }
    for (double* p : sd_f) *p = std::sqrt(*p / static_cast<double>(n));
    return rep;
}

ExperimentReport run_experiment(const data::Dataset& dataset, const model::GcanConfig& cfg,
                                int repeats, uint64_t base_seed) {
    if (repeats < 1) throw std::invalid_argument("run_experiment: repeats must be >= 1");
    auto t0 = std::chrono::steady_clock::now();
    std::vector<Metrics> per_repeat(static_cast<size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
        auto [train, test] = data::split(dataset, cfg.train_fraction, base_seed + r);
        model::GcanConfig c = cfg;
        c.seed = base_seed + r;
        model::ModelState state = model::train_model(train, c);
        per_repeat[static_cast<size_t>(r)] = evaluate(state, test);
    }
    ExperimentReport rep = aggregate(std::move(per_repeat));
    rep.base_seed = base_seed;
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::vector<SweepRow> early_detection_sweep(const data::Dataset& dataset,
                                            const model::GcanConfig& cfg,
                                            const std::vector<int>& n_values, int repeats,
                                            uint64_t base_seed) {
    std::vector<SweepRow> rows;
    for (int n : n_values) {
        model::GcanConfig c = cfg;
        c.num_users = n;
        if (n < c.filter_size) {
            throw std::invalid_argument("early_detection_sweep: n < filter_size");
        }
        rows.push_back({n, run_experiment(dataset, c, repeats, base_seed)});
    }
    return rows;
}

std::vector<AblationRow> ablation_suite(const data::Dataset& dataset,
                                        const model::GcanConfig& cfg, int repeats,
                                        uint64_t base_seed) {
    const std::pair<const char*, model::Variant> variants[] = {
        {"FULL", model::Variant::Full},
        {"GCAN-G", model::Variant::NoGraph},
        {"-A", model::Variant::NoCoattention},
        {"-R", model::Variant::NoGru},
        {"-G", model::Variant::NoGcn},
        {"-C", model::Variant::NoCnn},
        {"-S-A", model::Variant::NoSourceAndCoatt},
    };
    std::vector<AblationRow> rows;
    for (const auto& [name, var] : variants) {
        model::GcanConfig c = cfg;
        c.variant = var;
        rows.push_back({name, run_experiment(dataset, c, repeats, base_seed)});
    }
    return rows;
}

namespace {

json metrics_json(const Metrics& m) {
    return json{{"accuracy", m.accuracy},
                {"precision_macro", m.precision},
                {"recall_macro", m.recall},
                {"f1_macro", m.f1},
                {"precision_fake", m.fake_precision},
                {"recall_fake", m.fake_recall},
                {"f1_fake", m.fake_f1},
                {"confusion", {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}}}};
}

json report_json(const ExperimentReport& r) {
    json per = json::array();
    for (const Metrics& m : r.per_repeat) per.push_back(metrics_json(m));
    return json{{"repeats", r.per_repeat.size()},
                {"base_seed", r.base_seed},
                {"wall_seconds", r.wall_seconds},
                {"mean", metrics_json(r.mean)},
                {"stddev", metrics_json(r.stddev)},
                {"per_repeat", std::move(per)}};
}

}  // namespace

std::string metrics_to_json(const Metrics& m) { return metrics_json(m).dump(2); }
std::string report_to_json(const ExperimentReport& r) { return report_json(r).dump(2); }

std::string sweep_to_json(const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const SweepRow& r : rows) {
        arr.push_back(json{{"n", r.n}, {"report", report_json(r.report)}});
    }
    return arr.dump(2);
}

std::string ablation_to_json(const std::vector<AblationRow>& rows) {
    json arr = json::array();
    for (const AblationRow& r : rows) {
        arr.push_back(json{{"variant", r.name}, {"report", report_json(r.report)}});
    }
    return arr.dump(2);
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "   n   accuracy     std\n";
    double max_acc = 0;
    for (const SweepRow& r : rows) max_acc = std::max(max_acc, r.report.mean.accuracy);
    for (const SweepRow& r : rows) {
        char line[128];
        std::snprintf(line, sizeof(line), "%4d   %8.4f  %6.4f  ", r.n,
                      r.report.mean.accuracy, r.report.stddev.accuracy);
        out << line;
        int bars = max_acc > 0 ? static_cast<int>(40.0 * r.report.mean.accuracy / max_acc) : 0;
        for (int i = 0; i < bars; ++i) out << '#';
        out << "\n";
    }
    return out.str();
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out << "variant   accuracy  prec(M)  rec(M)   F1(M)\n";
    for (const AblationRow& r : rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-8s  %8.4f  %7.4f  %7.4f  %7.4f\n", r.name.c_str(),
                      r.report.mean.accuracy, r.report.mean.precision, r.report.mean.recall,
                      r.report.mean.f1);
        out << line;
    }
    return out.str();
}

}  // namespace gcan::harness
