#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gcan/explain.hpp"
#include "gcan/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace gcan::explain;
using gcan::data::Dataset;
using gcan::data::Story;
using gcan::model::GcanConfig;
using gcan::model::ModelState;

namespace {

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

Dataset tiny_dataset(int n, uint64_t seed = 11) {
    gcan::synth::GeneratorConfig g;
    g.n_stories = n;
    g.retweets_min = 3;
    g.retweets_max = 8;
    g.seed = seed;
    return gcan::synth::generate(g);
}

ModelState make_state(const GcanConfig& cfg, const Dataset& ds) {
    return ModelState(cfg, gcan::data::build_vocab(ds, 1), gcan::data::fit_scaler(ds));
}

// Zero the source-propagation co-attention parameters so both attention
// vectors become uniform.
void zero_prop_coattention(ModelState& state) {
    for (auto* p : state.params()) {
        if (p->name.rfind("coatt_sc.", 0) == 0) {
            std::fill(p->value.v.begin(), p->value.v.end(), 0.0);
        }
    }
}

Story short_story(const Dataset& ds) {
    Story s = ds.stories[0];
    s.tokens.resize(3);  // forces PAD under max_tweet_len = 6
    return s;
}

}  // namespace

TEST_CASE("uniform attention: equal word weights after PAD filtering") {
    Dataset ds = tiny_dataset(4);
    ModelState state = make_state(tiny_config(), ds);
    zero_prop_coattention(state);
    Story s = short_story(ds);
    AttentionReport rep = explain_story(state, s, 3);
    REQUIRE(rep.word_weights.size() == 3);
    for (const WordWeight& w : rep.word_weights) {
        CHECK(w.weight == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    }
    CHECK(rep.untrained);
}

TEST_CASE("window size 1 maps window weights to users unchanged") {
    Dataset ds = tiny_dataset(4);
    GcanConfig cfg = tiny_config();
    cfg.filter_size = 1;
    ModelState state = make_state(cfg, ds);
    const Story& s = ds.stories[1];
    gcan::model::Prediction pred = state.predict(s);
    AttentionReport rep = explain_story(state, s, 3);
    REQUIRE(rep.user_weights.size() == pred.window_attention.size());
    for (size_t i = 0; i < rep.user_weights.size(); ++i) {
        CHECK(rep.user_weights[i].weight ==
              doctest::Approx(pred.window_attention[i]).epsilon(1e-12));
    }
}

TEST_CASE("weights are proper distributions") {
    Dataset ds = tiny_dataset(8);
    ModelState state = make_state(tiny_config(), ds);
    for (const Story& s : ds.stories) {
        AttentionReport rep = explain_story(state, s, 5);
        double wsum = 0, usum = 0;
        for (const WordWeight& w : rep.word_weights) {
            CHECK(w.weight >= 0.0);
            wsum += w.weight;
        }
        for (const UserWeight& u : rep.user_weights) {
            CHECK(u.weight >= 0.0);
            usum += u.weight;
        }
        CHECK(std::fabs(wsum - 1.0) < 1e-6);
        CHECK(std::fabs(usum - 1.0) < 1e-6);
    }
}

TEST_CASE("word ranking matches raw attention order (renormalization-invariant)") {
    Dataset ds = tiny_dataset(4);
    ModelState state = make_state(tiny_config(), ds);
    const Story& s = ds.stories[0];
    gcan::model::Prediction pred = state.predict(s);
    AttentionReport rep = explain_story(state, s, 3);
    // report order must be descending in the raw word attention too
    for (size_t i = 1; i < rep.word_weights.size(); ++i) {
        CHECK(pred.word_attention[rep.word_weights[i - 1].position] >=
              pred.word_attention[rep.word_weights[i].position]);
    }
}

TEST_CASE("report probabilities equal predict output exactly") {
    Dataset ds = tiny_dataset(4);
    ModelState state = make_state(tiny_config(), ds);
    const Story& s = ds.stories[2];
    gcan::model::Prediction pred = state.predict(s);
    AttentionReport rep = explain_story(state, s, 3);
    CHECK(rep.probs[0] == pred.probs[0]);
    CHECK(rep.probs[1] == pred.probs[1]);
    CHECK(rep.predicted_label == pred.label);
    CHECK(rep.story_id == s.story_id);
}

TEST_CASE("trained model clears the untrained flag") {
    Dataset ds = tiny_dataset(8);
    GcanConfig cfg = tiny_config();
    cfg.epochs = 1;
    ModelState state = gcan::model::train_model(ds, cfg);
    AttentionReport rep = explain_story(state, ds.stories[0], 3);
    CHECK_FALSE(rep.untrained);
}

TEST_CASE("variants without source-propagation co-attention are rejected") {
    Dataset ds = tiny_dataset(4);
    for (auto v : {gcan::model::Variant::NoCoattention, gcan::model::Variant::NoCnn,
                   gcan::model::Variant::NoSourceAndCoatt}) {
        GcanConfig cfg = tiny_config();
        cfg.variant = v;
        ModelState state = make_state(cfg, ds);
        CHECK_THROWS_AS(explain_story(state, ds.stories[0], 3), std::invalid_argument);
    }
}

TEST_CASE("JSON round-trip is lossless") {
    Dataset ds = tiny_dataset(4);
    ModelState state = make_state(tiny_config(), ds);
    AttentionReport a = explain_story(state, ds.stories[1], 3);
    AttentionReport b = report_from_json(render_report(a, "json"));
    CHECK(b.report_version == a.report_version);
    CHECK(b.story_id == a.story_id);
    CHECK(b.predicted_label == a.predicted_label);
    CHECK(b.probs == a.probs);
    CHECK(b.untrained == a.untrained);
    CHECK(b.user_weight_mapping == a.user_weight_mapping);
    REQUIRE(b.word_weights.size() == a.word_weights.size());
    for (size_t i = 0; i < a.word_weights.size(); ++i) {
        CHECK(b.word_weights[i].token == a.word_weights[i].token);
        CHECK(b.word_weights[i].position == a.word_weights[i].position);
        CHECK(b.word_weights[i].weight == a.word_weights[i].weight);
    }
    REQUIRE(b.user_weights.size() == a.user_weights.size());
    for (size_t i = 0; i < a.user_weights.size(); ++i) {
        CHECK(b.user_weights[i].user_id == a.user_weights[i].user_id);
        CHECK(b.user_weights[i].weight == a.user_weights[i].weight);
    }
    REQUIRE(b.top_suspicious_users.size() == a.top_suspicious_users.size());
    for (size_t i = 0; i < a.top_suspicious_users.size(); ++i) {
        CHECK(b.top_suspicious_users[i].user_id == a.top_suspicious_users[i].user_id);
        CHECK(b.top_suspicious_users[i].features.account_age ==
              a.top_suspicious_users[i].features.account_age);
    }
    // second render of the parsed report is byte-identical
    CHECK(render_report(b, "json") == render_report(a, "json"));
}

TEST_CASE("text rendering: heat strip length and darkest-first glyph") {
    AttentionReport rep;
    rep.story_id = "s1";
    rep.predicted_label = 1;
    rep.probs = {0.2, 0.8};
    rep.word_weights = {{"alpha", 0, 0.6}, {"beta", 1, 0.4}};
    rep.top_words = rep.word_weights;
    double w[] = {0.7, 0.1, 0.1, 0.05, 0.05};
    for (int i = 0; i < 5; ++i) rep.user_weights.push_back({i, "u" + std::to_string(i), w[i]});
    std::string text = render_report(rep, "text");
    CHECK(text.find("FAKE") != std::string::npos);
    CHECK(text.find("alpha") != std::string::npos);

    std::istringstream lines(text);
    std::string line, strip;
    bool next = false;
    while (std::getline(lines, line)) {
        if (next) {
            strip = line.substr(2);
            break;
        }
        next = line.rfind("retweeter attention", 0) == 0;
    }
    REQUIRE(strip.size() == 5);
    CHECK(strip[0] == '@');  // highest weight maps to the darkest glyph
    for (size_t i = 1; i < strip.size(); ++i) CHECK(strip[i] < strip[0]);
}

TEST_CASE("render_report rejects unknown formats") {
    AttentionReport rep;
    CHECK_THROWS_AS(render_report(rep, "xml"), std::invalid_argument);
}

TEST_CASE("top_words respects top_k and ordering") {
    Dataset ds = tiny_dataset(6);
    ModelState state = make_state(tiny_config(), ds);
    AttentionReport rep = explain_story(state, ds.stories[3], 2);
    CHECK(rep.top_words.size() <= 2);
    for (size_t i = 1; i < rep.top_words.size(); ++i) {
        CHECK(rep.top_words[i - 1].weight >= rep.top_words[i].weight);
    }
}
