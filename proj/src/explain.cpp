#include "gcan/explain.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

using nlohmann::json;

namespace gcan::explain {

AttentionReport explain_story(model::ModelState& state, const data::Story& story, int top_k) {
    model::EncodedStory enc = state.preprocess(story);
    model::Prediction pred = state.predict(enc);
    if (pred.word_attention.empty() || pred.window_attention.empty()) {
        throw std::invalid_argument(
            "explain_story: variant " + model::variant_to_string(state.config().variant) +
            " has no source-propagation co-attention");
    }

    AttentionReport rep;
    rep.story_id = story.story_id;
    rep.predicted_label = pred.label;
    rep.probs = pred.probs;
    rep.untrained = !state.trained();

    // Word weights over non-PAD positions, renormalized after PAD filtering.
    double kept = 0.0;
    for (size_t i = 0; i < pred.word_attention.size(); ++i) {
        if (enc.token_ids[i] != data::Vocabulary::kPad) kept += pred.word_attention[i];
    }
    for (size_t i = 0; i < pred.word_attention.size(); ++i) {
        if (enc.token_ids[i] == data::Vocabulary::kPad) continue;
        WordWeight w;
        w.position = static_cast<int>(i);
        w.token = i < enc.tokens.size() ? enc.tokens[i] : "";
        w.weight = kept > 0 ? pred.word_attention[i] / kept : 0.0;
        rep.word_weights.push_back(std::move(w));
    }
    std::stable_sort(rep.word_weights.begin(), rep.word_weights.end(),
                     [](const WordWeight& a, const WordWeight& b) { return a.weight > b.weight; });
    for (const WordWeight& w : rep.word_weights) {
        if (static_cast<int>(rep.top_words.size()) >= top_k) break;
        if (enc.token_ids[w.position] == data::Vocabulary::kUnknown) continue;
        rep.top_words.push_back(w);
    }

    // Spread each CNN window's weight uniformly over its positions.
    int n = state.config().num_users;
    int window = state.config().filter_size;
    std::vector<double> user_w(static_cast<size_t>(n), 0.0);
    for (size_t t = 0; t < pred.window_attention.size(); ++t) {
        for (int r = 0; r < window; ++r) {
            user_w[t + r] += pred.window_attention[t] / window;
        }
    }
    double total = 0.0;
    for (double w : user_w) total += w;
    for (double& w : user_w) w = total > 0 ? w / total : 0.0;
    for (int i = 0; i < n; ++i) {
        rep.user_weights.push_back({i, enc.users[i].user_id, user_w[i]});
    }

    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return user_w[a] > user_w[b]; });
    for (int i = 0; i < std::min(top_k, n); ++i) {
        int pos = order[i];
        rep.top_suspicious_users.push_back({pos, enc.users[pos].user_id, user_w[pos],
                                            enc.users[pos]});
    }
    return rep;
}

namespace {

json user_record_json(const data::UserRecord& u) {
    json j{{"user_id", u.user_id}};
    for (int i = 0; i < data::UserRecord::kNumFeatures; ++i) {
        j[data::UserRecord::feature_name(i)] = u.feature(i);
    }
    return j;
}

data::UserRecord user_record_from_json(const json& j) {
    data::UserRecord u;
    u.user_id = j.at("user_id").get<std::string>();
    u.desc_word_count = j.at("desc_word_count").get<double>();
    u.screen_name_word_count = j.at("screen_name_word_count").get<double>();
    u.follower_count = j.at("follower_count").get<double>();
    u.following_count = j.at("following_count").get<double>();
    u.story_count = j.at("story_count").get<double>();
    u.account_age = j.at("account_age").get<double>();
    u.is_verified = j.at("is_verified").get<double>();
    u.geo_enabled = j.at("geo_enabled").get<double>();
    u.retweet_delay = j.at("retweet_delay").get<double>();
    u.path_length = j.at("path_length").get<double>();
    return u;
}

json report_json(const AttentionReport& r) {
    json words = json::array();
    for (const WordWeight& w : r.word_weights) {
        words.push_back({{"token", w.token}, {"position", w.position}, {"weight", w.weight}});
    }
    json top = json::array();
    for (const WordWeight& w : r.top_words) {
        top.push_back({{"token", w.token}, {"position", w.position}, {"weight", w.weight}});
    }
    json users = json::array();
    for (const UserWeight& u : r.user_weights) {
        users.push_back({{"position", u.position}, {"user_id", u.user_id}, {"weight", u.weight}});
    }
    json susp = json::array();
    for (const SuspiciousUser& u : r.top_suspicious_users) {
        susp.push_back({{"position", u.position},
                        {"user_id", u.user_id},
                        {"weight", u.weight},
                        {"features", user_record_json(u.features)}});
    }
    return json{{"report_version", r.report_version},
                {"story_id", r.story_id},
                {"predicted_label", r.predicted_label},
                {"probs", r.probs},
                {"untrained", r.untrained},
                {"user_weight_mapping", r.user_weight_mapping},
                {"word_weights", std::move(words)},
                {"top_words", std::move(top)},
                {"user_weights", std::move(users)},
                {"top_suspicious_users", std::move(susp)}};
}

}  // namespace

std::string render_report(const AttentionReport& report, const std::string& format) {
    if (format == "json") return report_json(report).dump(2);
    if (format != "text") throw std::invalid_argument("render_report: unknown format " + format);

    std::ostringstream out;
    out << "story " << report.story_id << ": predicted "
        << (report.predicted_label == 1 ? "FAKE" : "TRUE");
    char buf[64];
    std::snprintf(buf, sizeof(buf), " (p_true=%.4f, p_fake=%.4f)", report.probs[0],
                  report.probs[1]);
    out << buf;
    if (report.untrained) out << " [untrained]";
    out << "\n\nevidential words:\n";
    double max_w = report.word_weights.empty() ? 1.0 : report.word_weights.front().weight;
    for (const WordWeight& w : report.word_weights) {
        int stars = max_w > 0 ? static_cast<int>(std::lround(30.0 * w.weight / max_w)) : 0;
        std::snprintf(buf, sizeof(buf), "  %-16s %.4f ", w.token.c_str(), w.weight);
        out << buf;
        for (int i = 0; i < stars; ++i) out << '*';
        out << "\n";
    }
    out << "\nretweeter attention (propagation order):\n  ";
    static const char glyphs[] = " .:-=+*#%@";  // light -> dark
    double max_u = 0.0;
    for (const UserWeight& u : report.user_weights) max_u = std::max(max_u, u.weight);
    for (const UserWeight& u : report.user_weights) {
        int level = max_u > 0 ? static_cast<int>(std::lround(9.0 * u.weight / max_u)) : 0;
        out << glyphs[level];
    }
    out << "\n\ntop suspicious retweeters:\n";
    for (const SuspiciousUser& u : report.top_suspicious_users) {
        std::snprintf(buf, sizeof(buf), "  #%-3d %-20s w=%.4f", u.position,
                      u.user_id.c_str(), u.weight);
        out << buf << "  verified=" << u.features.is_verified
            << " account_age=" << u.features.account_age
            << " desc_words=" << u.features.desc_word_count
            << " path_len=" << u.features.path_length << "\n";
    }
    return out.str();
}

AttentionReport report_from_json(const std::string& text) {
    json j = json::parse(text);
    AttentionReport r;
    r.report_version = j.at("report_version").get<int>();
    r.story_id = j.at("story_id").get<std::string>();
    r.predicted_label = j.at("predicted_label").get<int>();
    r.probs = j.at("probs").get<std::array<double, 2>>();
    r.untrained = j.at("untrained").get<bool>();
    r.user_weight_mapping = j.at("user_weight_mapping").get<std::string>();
    for (const json& w : j.at("word_weights")) {
        r.word_weights.push_back({w.at("token").get<std::string>(), w.at("position").get<int>(),
                                  w.at("weight").get<double>()});
    }
    for (const json& w : j.at("top_words")) {
        r.top_words.push_back({w.at("token").get<std::string>(), w.at("position").get<int>(),
                               w.at("weight").get<double>()});
    }
    for (const json& u : j.at("user_weights")) {
        r.user_weights.push_back({u.at("position").get<int>(), u.at("user_id").get<std::string>(),
                                  u.at("weight").get<double>()});
    }
    for (const json& u : j.at("top_suspicious_users")) {
        r.top_suspicious_users.push_back({u.at("position").get<int>(),
                                          u.at("user_id").get<std::string>(),
                                          u.at("weight").get<double>(),
                                          user_record_from_json(u.at("features"))});
    }
    return r;
}

}  // namespace gcan::explain
