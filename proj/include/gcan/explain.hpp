#pragma once

#include "gcan/model.hpp"

#include <string>
#include <vector>

namespace gcan::explain {

struct WordWeight {
    std::string token;
    int position = 0;  // 0-based position in the source tweet
    double weight = 0;
};

struct UserWeight {
    int position = 0;  // 0-based position in the fixed-length retweet order
    std::string user_id;
    double weight = 0;
};

struct SuspiciousUser {
    int position = 0;
    std::string user_id;
    double weight = 0;
    data::UserRecord features;
};

// Explainability export built from the source-propagation co-attention pair.
struct AttentionReport {
    int report_version = 1;
    std::string story_id;
    int predicted_label = 0;
    std::array<double, 2> probs{};
    bool untrained = false;
    // CNN windows attend over window_size consecutive users; each window's
    // weight is spread uniformly over its positions, then renormalized.
    std::string user_weight_mapping = "uniform-window-spread";
    std::vector<WordWeight> word_weights;  // PAD excluded, descending weight
    std::vector<UserWeight> user_weights;  // one per retweet position
    std::vector<SuspiciousUser> top_suspicious_users;
    std::vector<WordWeight> top_words;  // top_k, PAD/UNKNOWN excluded
};

AttentionReport explain_story(model::ModelState& state, const data::Story& story, int top_k);

// format "json" is lossless; "text" renders a ranked word list and an ASCII
// heat strip over retweet positions.
std::string render_report(const AttentionReport& report, const std::string& format);

AttentionReport report_from_json(const std::string& text);

}  // namespace gcan::explain
