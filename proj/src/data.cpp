#include "gcan/data.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

using nlohmann::json;

namespace gcan::data {

double UserRecord::feature(int i) const {
    switch (i) {
        case 0: return desc_word_count;
        case 1: return screen_name_word_count;
        case 2: return follower_count;
        case 3: return following_count;
        case 4: return story_count;
        case 5: return account_age;
        case 6: return is_verified;
        case 7: return geo_enabled;
        case 8: return retweet_delay;
        case 9: return path_length;
    }
    throw std::out_of_range("UserRecord::feature: index " + std::to_string(i));
}

const char* UserRecord::feature_name(int i) {
    static const char* names[kNumFeatures] = {
        "desc_word_count", "screen_name_word_count", "follower_count", "following_count",
        "story_count",     "account_age",            "is_verified",    "geo_enabled",
        "retweet_delay",   "path_length"};
    if (i < 0 || i >= kNumFeatures) {
        throw std::out_of_range("UserRecord::feature_name: index " + std::to_string(i));
    }
    return names[i];
}

void UserRecord::validate() const {
    auto nonneg = [](double x, const char* f) {
        if (!(x >= 0)) throw std::invalid_argument(std::string(f) + " must be >= 0");
    };
    nonneg(desc_word_count, "desc_word_count");
    nonneg(screen_name_word_count, "screen_name_word_count");
    nonneg(follower_count, "follower_count");
    nonneg(following_count, "following_count");
    nonneg(story_count, "story_count");
    nonneg(account_age, "account_age");
    nonneg(retweet_delay, "retweet_delay");
    if (is_verified != 0 && is_verified != 1)
        throw std::invalid_argument("is_verified must be 0 or 1");
    if (geo_enabled != 0 && geo_enabled != 1)
        throw std::invalid_argument("geo_enabled must be 0 or 1");
    if (!(path_length >= 1)) throw std::invalid_argument("path_length must be >= 1");
}

namespace {

double require_number(const json& obj, const char* field) {
    if (!obj.contains(field)) throw std::invalid_argument(std::string("missing field \"") + field + "\"");
    const json& v = obj.at(field);
    if (!v.is_number()) throw std::invalid_argument(std::string("field \"") + field + "\" must be a number");
    return v.get<double>();
}

UserRecord parse_user(const json& obj) {
    if (!obj.is_object()) throw std::invalid_argument("retweet entry must be an object");
    if (!obj.contains("user_id") || !obj.at("user_id").is_string())
        throw std::invalid_argument("missing field \"user_id\"");
    UserRecord u;
    u.user_id = obj.at("user_id").get<std::string>();
    u.desc_word_count = require_number(obj, "desc_word_count");
    u.screen_name_word_count = require_number(obj, "screen_name_word_count");
    u.follower_count = require_number(obj, "follower_count");
    u.following_count = require_number(obj, "following_count");
    u.story_count = require_number(obj, "story_count");
    u.account_age = require_number(obj, "account_age");
    u.is_verified = require_number(obj, "is_verified");
    u.geo_enabled = require_number(obj, "geo_enabled");
    u.retweet_delay = require_number(obj, "retweet_delay");
    u.path_length = obj.contains("path_length") ? require_number(obj, "path_length") : 1.0;
    u.validate();
    return u;
}

Story parse_story(const json& obj) {
    if (!obj.is_object()) throw std::invalid_argument("line is not a JSON object");
    Story s;
    if (!obj.contains("story_id") || !obj.at("story_id").is_string())
        throw std::invalid_argument("missing field \"story_id\"");
    s.story_id = obj.at("story_id").get<std::string>();
    if (!obj.contains("label") || !obj.at("label").is_number_integer())
        throw std::invalid_argument("missing field \"label\"");
    s.label = obj.at("label").get<int>();
    if (s.label != 0 && s.label != 1)
        throw std::invalid_argument("field \"label\" must be 0 or 1");
    if (!obj.contains("tokens") || !obj.at("tokens").is_array() || obj.at("tokens").empty())
        throw std::invalid_argument("field \"tokens\" must be a non-empty array");
    for (const json& t : obj.at("tokens")) {
        if (!t.is_string()) throw std::invalid_argument("field \"tokens\" must contain strings");
        s.tokens.push_back(t.get<std::string>());
    }
    if (!obj.contains("retweets") || !obj.at("retweets").is_array() || obj.at("retweets").empty())
        throw std::invalid_argument("field \"retweets\" must be a non-empty array");
    for (const json& r : obj.at("retweets")) s.retweets.push_back(parse_user(r));
    return s;
}

}  // namespace

Dataset load_jsonl(const std::string& path, std::vector<std::string>* diagnostics) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    Dataset ds;
    ds.source_path = path;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    int lineno = 0;
    int nonblank = 0;
    auto report = [&](const std::string& msg) {
        std::string full = "line " + std::to_string(lineno) + ": " + msg;
        if (diagnostics) diagnostics->push_back(full);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ++nonblank;
        try {
            Story s = parse_story(json::parse(line));
            if (!seen_ids.insert(s.story_id).second)
                throw std::invalid_argument("duplicate story_id \"" + s.story_id + "\"");
            ds.stories.push_back(std::move(s));
        } catch (const json::parse_error& e) {
            report(std::string("invalid JSON: ") + e.what());
        } catch (const std::invalid_argument& e) {
            report(e.what());
        }
    }
    if (nonblank == 0) throw std::runtime_error("dataset file is empty: " + path);
    if (ds.stories.empty()) throw std::runtime_error("no valid stories in: " + path);
    return ds;
}

void save_jsonl(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    for (const Story& s : ds.stories) {
        json obj;
        obj["story_id"] = s.story_id;
        obj["label"] = s.label;
        obj["tokens"] = s.tokens;
        json rts = json::array();
        for (const UserRecord& u : s.retweets) {
            json r;
            r["user_id"] = u.user_id;
            for (int i = 0; i < UserRecord::kNumFeatures; ++i)
                r[UserRecord::feature_name(i)] = u.feature(i);
            rts.push_back(std::move(r));
        }
        obj["retweets"] = std::move(rts);
        out << obj.dump() << "\n";
    }
}

Vocabulary build_vocab(const Dataset& train, int min_count) {
    if (train.stories.empty()) throw std::invalid_argument("build_vocab: empty training set");
    std::unordered_map<std::string, int> freq;
    std::vector<std::string> order;
    for (const Story& s : train.stories) {
        for (const std::string& t : s.tokens) {
            if (freq[t]++ == 0) order.push_back(t);
        }
    }
    Vocabulary v;
    int next = 2;
    for (const std::string& t : order) {
        if (freq[t] >= min_count) v.index[t] = next++;
    }
    return v;
}

std::vector<int> encode_tokens(const Story& story, const Vocabulary& vocab, int max_len) {
    if (max_len < 1) throw std::invalid_argument("encode_tokens: max_len must be >= 1");
    std::vector<int> out(static_cast<size_t>(max_len), Vocabulary::kPad);
    int n = std::min<int>(max_len, static_cast<int>(story.tokens.size()));
    for (int i = 0; i < n; ++i) out[i] = vocab.lookup(story.tokens[i]);
    return out;
}

std::vector<UserRecord> fix_length(const std::vector<UserRecord>& retweets, int n) {
    if (retweets.empty()) throw std::invalid_argument("fix_length: empty retweet list");
    if (n < 1) throw std::invalid_argument("fix_length: n must be >= 1");
    std::vector<UserRecord> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(retweets[i % retweets.size()]);
    return out;
}

FeatureScaler fit_scaler(const Dataset& train) {
    FeatureScaler s;
    bool first = true;
    for (const Story& st : train.stories) {
        for (const UserRecord& u : st.retweets) {
            for (int i = 0; i < UserRecord::kNumFeatures; ++i) {
                double x = u.feature(i);
                if (first) {
                    s.fmin[i] = s.fmax[i] = x;
                } else {
                    s.fmin[i] = std::min(s.fmin[i], x);
                    s.fmax[i] = std::max(s.fmax[i], x);
                }
            }
            first = false;
        }
    }
    if (first) throw std::invalid_argument("fit_scaler: no user records in training set");
    return s;
}

gcan::num::Tensor apply_scaler(const FeatureScaler& scaler,
                               const std::vector<UserRecord>& records) {
    gcan::num::Tensor X(static_cast<int>(records.size()), UserRecord::kNumFeatures);
    for (size_t r = 0; r < records.size(); ++r) {
        for (int i = 0; i < UserRecord::kNumFeatures; ++i) {
            double span = scaler.fmax[i] - scaler.fmin[i];
            double x = span > 0 ? (records[r].feature(i) - scaler.fmin[i]) / span : 0.0;
            X.at(static_cast<int>(r), i) = std::clamp(x, 0.0, 1.0);
        }
    }
    return X;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split: train_fraction must be in (0,1)");
    size_t n = ds.stories.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    gcan::num::Rng rng(seed);
    for (size_t i = n; i > 1; --i) {  // Fisher-Yates with our own bounded ints
        size_t j = static_cast<size_t>(rng.below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    size_t n_train = static_cast<size_t>(std::ceil(train_fraction * static_cast<double>(n)));
    Dataset train, test;
    train.source_path = test.source_path = ds.source_path;
    train.seed = test.seed = seed;
    for (size_t i = 0; i < n; ++i) {
        (i < n_train ? train : test).stories.push_back(ds.stories[idx[i]]);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace gcan::data
