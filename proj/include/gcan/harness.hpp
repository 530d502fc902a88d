#pragma once

#include "gcan/data.hpp"
#include "gcan/model.hpp"

#include <string>
#include <utility>
#include <vector>

namespace gcan::harness {

struct Metrics {
    double accuracy = 0;
    double precision = 0;  // macro over the two classes
    double recall = 0;
    double f1 = 0;
    double fake_precision = 0;  // class-1 metrics, reported for transparency
    double fake_recall = 0;
    double fake_f1 = 0;
    // confusion counts with class 1 (fake) as positive
    int tp = 0, fp = 0, tn = 0, fn = 0;
};

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels);

Metrics evaluate(model::ModelState& state, const data::Dataset& test);

struct ExperimentReport {
    std::vector<Metrics> per_repeat;
    Metrics mean;
    Metrics stddev;
    uint64_t base_seed = 0;
    double wall_seconds = 0;
};

ExperimentReport run_experiment(const data::Dataset& dataset, const model::GcanConfig& cfg,
                                int repeats, uint64_t base_seed);

struct SweepRow {
    int n = 0;
    ExperimentReport report;
};

ExperimentReport aggregate(std::vector<Metrics> per_repeat);

std::vector<SweepRow> early_detection_sweep(const data::Dataset& dataset,
                                            const model::GcanConfig& cfg,
                                            const std::vector<int>& n_values, int repeats,
                                            uint64_t base_seed);

struct AblationRow {
    std::string name;  // paper-style label: FULL, GCAN-G, -A, -R, -G, -C, -S-A
    ExperimentReport report;
};

std::vector<AblationRow> ablation_suite(const data::Dataset& dataset,
                                        const model::GcanConfig& cfg, int repeats,
                                        uint64_t base_seed);

// JSON + aligned-text rendering for the CLI.
std::string metrics_to_json(const Metrics& m);
std::string report_to_json(const ExperimentReport& r);
std::string sweep_to_json(const std::vector<SweepRow>& rows);
std::string ablation_to_json(const std::vector<AblationRow>& rows);
std::string sweep_table(const std::vector<SweepRow>& rows);
std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace gcan::harness
