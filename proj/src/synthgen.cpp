#include "gcan/synthgen.hpp"

#include "gcan/tensor.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

using nlohmann::json;

namespace gcan::synth {

using gcan::num::Rng;

void GeneratorConfig::validate() const {
    if (n_stories < 2 || n_stories % 2 != 0) {
        throw std::invalid_argument("n_stories must be even and >= 2");
    }
    if (vocab_size < 2) throw std::invalid_argument("vocab_size must be >= 2");
    if (tokens_per_story < 3) throw std::invalid_argument("tokens_per_story must be >= 3");
    if (retweets_min < 1 || retweets_max < retweets_min) {
        throw std::invalid_argument("bad retweets_per_story range");
    }
    if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) {
        throw std::invalid_argument("signal_strength must be in [0,1]");
    }
    if (evidence_tokens.empty()) throw std::invalid_argument("evidence_tokens must be non-empty");
}

GeneratorConfig generator_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open generator config: " + path);
    json j = json::parse(in);
    GeneratorConfig c;
    for (const auto& [key, val] : j.items()) {
        if (key == "n_stories") c.n_stories = val.get<int>();
        else if (key == "vocab_size") c.vocab_size = val.get<int>();
        else if (key == "tokens_per_story") c.tokens_per_story = val.get<double>();
        else if (key == "retweets_min") c.retweets_min = val.get<int>();
        else if (key == "retweets_max") c.retweets_max = val.get<int>();
        else if (key == "signal_strength") c.signal_strength = val.get<double>();
        else if (key == "evidence_tokens") c.evidence_tokens = val.get<std::vector<std::string>>();
        else if (key == "seed") c.seed = val.get<uint64_t>();
        else throw std::invalid_argument("unknown generator config key: " + key);
    }
    c.validate();
    return c;
}

namespace {

std::string background_token(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%03d", i);
    return buf;
}

}  // namespace

data::Dataset generate(const GeneratorConfig& config) {
    config.validate();
    const double s = config.signal_strength;
    Rng rng(config.seed);

    data::Dataset ds;
    ds.seed = config.seed;
    ds.stories.reserve(static_cast<size_t>(config.n_stories));

    // Evidence-token probability per position; identical distributions at s=0.
    const double p_ev_base = 0.08;
    const double p_ev_fake = p_ev_base + 0.5 * s;
    const double p_ev_real = p_ev_base * (1.0 - s);

    for (int i = 0; i < config.n_stories; ++i) {
        int label = i % 2;  // exact balance
        bool fake = label == 1;
        data::Story story;
        story.story_id = "s" + std::to_string(i);
        story.label = label;

        int len = std::max(3, static_cast<int>(std::llround(
                                  rng.normal(config.tokens_per_story, 3.0))));
        double p_ev = fake ? p_ev_fake : p_ev_real;
        for (int t = 0; t < len; ++t) {
            if (rng.uniform() < p_ev) {
                story.tokens.push_back(
                    config.evidence_tokens[rng.below(config.evidence_tokens.size())]);
            } else {
                story.tokens.push_back(background_token(
                    static_cast<int>(rng.below(static_cast<uint64_t>(config.vocab_size)))));
            }
        }

        int k = config.retweets_min +
                static_cast<int>(rng.below(
                    static_cast<uint64_t>(config.retweets_max - config.retweets_min + 1)));
        double delay = 0.0;
        for (int j = 0; j < k; ++j) {
            data::UserRecord u;
            u.user_id = story.story_id + "_u" + std::to_string(j);
            double verified_p = fake ? 0.5 - 0.12 * s : 0.5 + 0.12 * s;
            u.is_verified = rng.uniform() < verified_p ? 1 : 0;
            double age_cap = fake ? 1000.0 * (1.0 - 0.3 * s) : 1000.0;
            u.account_age = rng.uniform(0.0, age_cap);
            double desc_cap = fake ? 20.0 * (1.0 - 0.3 * s) : 20.0;
            u.desc_word_count = std::floor(rng.uniform(0.0, desc_cap + 1.0));
            double direct_p = fake ? 0.5 + 0.15 * s : 0.5 - 0.15 * s;
            u.path_length = rng.uniform() < direct_p ? 1 : 2 + static_cast<double>(rng.below(3));
            // label-independent noise features
            u.screen_name_word_count = 1 + static_cast<double>(rng.below(3));
            u.follower_count = std::floor(rng.uniform(0.0, 5000.0));
            u.following_count = std::floor(rng.uniform(0.0, 2000.0));
            u.story_count = std::floor(rng.uniform(0.0, 800.0));
            u.geo_enabled = rng.uniform() < 0.5 ? 1 : 0;
            delay += rng.uniform(0.5, 30.0);
            u.retweet_delay = delay;
            story.retweets.push_back(std::move(u));
        }
        ds.stories.push_back(std::move(story));
    }
    return ds;
}

namespace {

struct OracleFeatures {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};

OracleFeatures featurize(const data::Dataset& ds,
                         const std::unordered_map<std::string, int>& vocab,
                         const data::FeatureScaler& scaler) {
    OracleFeatures out;
    int dim = static_cast<int>(vocab.size()) + data::UserRecord::kNumFeatures;
    for (const data::Story& s : ds.stories) {
        std::vector<double> f(static_cast<size_t>(dim), 0.0);
        for (const std::string& t : s.tokens) {
            auto it = vocab.find(t);
            if (it != vocab.end()) f[it->second] += 1.0;
        }
        gcan::num::Tensor X = data::apply_scaler(scaler, s.retweets);
        for (int j = 0; j < X.cols; ++j) {
            double mean = 0.0;
            for (int i = 0; i < X.rows; ++i) mean += X.at(i, j);
            f[vocab.size() + j] = mean / X.rows;
        }
        out.x.push_back(std::move(f));
        out.y.push_back(s.label);
    }
    return out;
}

}  // namespace

OracleReport oracle_baseline(const data::Dataset& train, const data::Dataset& test) {
    if (train.stories.empty() || test.stories.empty()) {
        throw std::invalid_argument("oracle_baseline: empty split");
    }
    std::unordered_map<std::string, int> vocab;
    for (const data::Story& s : train.stories) {
        for (const std::string& t : s.tokens) {
            vocab.emplace(t, static_cast<int>(vocab.size()));
        }
    }
    data::FeatureScaler scaler = data::fit_scaler(train);
    OracleFeatures tr = featurize(train, vocab, scaler);
    OracleFeatures te = featurize(test, vocab, scaler);

    size_t dim = tr.x[0].size();
    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    const double lr = 0.3, l2 = 1e-4;
    const int iters = 400;
    for (int it = 0; it < iters; ++it) {
        std::vector<double> gw(dim, 0.0);
        double gb = 0.0;
        for (size_t i = 0; i < tr.x.size(); ++i) {
            double z = b;
            for (size_t j = 0; j < dim; ++j) z += w[j] * tr.x[i][j];
            double p = 1.0 / (1.0 + std::exp(-z));
            double err = p - tr.y[i];
            for (size_t j = 0; j < dim; ++j) gw[j] += err * tr.x[i][j];
            gb += err;
        }
        double inv = 1.0 / static_cast<double>(tr.x.size());
        for (size_t j = 0; j < dim; ++j) w[j] -= lr * (gw[j] * inv + l2 * w[j]);
        b -= lr * gb * inv;
    }

    int conf[2][2] = {{0, 0}, {0, 0}};  // [label][pred]
    for (size_t i = 0; i < te.x.size(); ++i) {
        double z = b;
        for (size_t j = 0; j < dim; ++j) z += w[j] * te.x[i][j];
        int pred = z > 0.0 ? 1 : 0;
        conf[te.y[i]][pred] += 1;
    }
    auto prf = [&](int cls) {
        double tp = conf[cls][cls];
        double fp = conf[1 - cls][cls];
        double fn = conf[cls][1 - cls];
        double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        return std::array<double, 3>{prec, rec, f1};
    };
    auto m0 = prf(0), m1 = prf(1);
    OracleReport rep;
    rep.accuracy = static_cast<double>(conf[0][0] + conf[1][1]) /
                   static_cast<double>(te.x.size());
    rep.precision = (m0[0] + m1[0]) / 2.0;
    rep.recall = (m0[1] + m1[1]) / 2.0;
    rep.f1 = (m0[2] + m1[2]) / 2.0;
    return rep;
}

}  // namespace gcan::synth
