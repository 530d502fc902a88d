#pragma once

#include "gcan/tensor.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gcan::data {

// One retweeter with the 10 profile features, in fixed order.
struct UserRecord {
    std::string user_id;
    double desc_word_count = 0;
    double screen_name_word_count = 0;
    double follower_count = 0;
    double following_count = 0;
    double story_count = 0;
    double account_age = 0;
    double is_verified = 0;
    double geo_enabled = 0;
    double retweet_delay = 0;
    double path_length = 1;

    static constexpr int kNumFeatures = 10;
    double feature(int i) const;
    static const char* feature_name(int i);
    void validate() const;
};

struct Story {
    std::string story_id;
    std::vector<std::string> tokens;
    int label = 0;  // 0 = true, 1 = fake
    std::vector<UserRecord> retweets;
};

struct Dataset {
    std::vector<Story> stories;
    std::string source_path;
    uint64_t seed = 0;
};

// Loads one story per JSONL line. Malformed lines are skipped and described
// (with line numbers) in *diagnostics. Throws if the file is missing, empty,
// or yields no valid story.
Dataset load_jsonl(const std::string& path, std::vector<std::string>* diagnostics = nullptr);
void save_jsonl(const Dataset& ds, const std::string& path);

struct Vocabulary {
    static constexpr int kPad = 0;
    static constexpr int kUnknown = 1;
    std::unordered_map<std::string, int> index;  // token -> id >= 2

    int lookup(const std::string& token) const {
        auto it = index.find(token);
        return it == index.end() ? kUnknown : it->second;
    }
    int size() const { return static_cast<int>(index.size()) + 2; }
};

// Tokens with training-split frequency >= min_count get ids >= 2, assigned in
// first-appearance order so the mapping is stable under reload.
Vocabulary build_vocab(const Dataset& train, int min_count);

std::vector<int> encode_tokens(const Story& story, const Vocabulary& vocab, int max_len);

// First n users if there are at least n, otherwise cyclic repetition.
std::vector<UserRecord> fix_length(const std::vector<UserRecord>& retweets, int n);

struct FeatureScaler {
    std::array<double, UserRecord::kNumFeatures> fmin{};
    std::array<double, UserRecord::kNumFeatures> fmax{};
};

FeatureScaler fit_scaler(const Dataset& train);
// Row per user, min-max scaled into [0,1]; out-of-range values are clamped,
// constant features map to 0.
gcan::num::Tensor apply_scaler(const FeatureScaler& scaler, const std::vector<UserRecord>& records);

// Deterministic shuffle split; train gets ceil(fraction * N) stories.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, uint64_t seed);

}  // namespace gcan::data
