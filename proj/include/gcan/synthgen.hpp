#pragma once

#include "gcan/data.hpp"

#include <string>
#include <vector>

namespace gcan::synth {

// Controls how strongly label-correlated signals are planted in tokens and
// user features. signal_strength 0 makes fake and real indistinguishable.
struct GeneratorConfig {
    int n_stories = 500;               // must be even (balanced labels)
    int vocab_size = 120;              // background tokens w000..w{V-1}
    double tokens_per_story = 13.0;    // mean story length
    int retweets_min = 8;
    int retweets_max = 30;
    double signal_strength = 0.8;      // in [0, 1]
    std::vector<std::string> evidence_tokens = {"breaking", "shocking", "exposed",
                                                "hoax", "leak", "urgent"};
    uint64_t seed = 42;

    void validate() const;
};

GeneratorConfig generator_config_from_json_file(const std::string& path);

data::Dataset generate(const GeneratorConfig& config);

struct OracleReport {
    double accuracy = 0;
    double precision = 0;  // macro
    double recall = 0;
    double f1 = 0;
};

// Regularized logistic classifier on bag-of-words + mean user features,
// trained by plain full-batch gradient descent. Independent of the tape
// machinery on purpose.
OracleReport oracle_baseline(const data::Dataset& train, const data::Dataset& test);

}  // namespace gcan::synth
