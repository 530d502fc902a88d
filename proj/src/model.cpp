#include "gcan/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

using nlohmann::json;

namespace gcan::model {

using gcan::num::Act;
using gcan::num::AdamConfig;
using gcan::num::Rng;
using gcan::num::glorot_uniform;

Variant variant_from_string(const std::string& name) {
    if (name == "FULL") return Variant::Full;
    if (name == "NO_GRAPH" || name == "GCAN-G") return Variant::NoGraph;
    if (name == "NO_COATT" || name == "-A") return Variant::NoCoattention;
    if (name == "NO_GRU" || name == "-R") return Variant::NoGru;
    if (name == "NO_GCN" || name == "-G") return Variant::NoGcn;
    if (name == "NO_CNN" || name == "-C") return Variant::NoCnn;
    if (name == "NO_SOURCE_AND_COATT" || name == "-S-A") return Variant::NoSourceAndCoatt;
    throw std::invalid_argument("unknown variant: " + name);
}

std::string variant_to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "FULL";
        case Variant::NoGraph: return "NO_GRAPH";
        case Variant::NoCoattention: return "NO_COATT";
        case Variant::NoGru: return "NO_GRU";
        case Variant::NoGcn: return "NO_GCN";
        case Variant::NoCnn: return "NO_CNN";
        case Variant::NoSourceAndCoatt: return "NO_SOURCE_AND_COATT";
    }
    throw std::invalid_argument("bad variant enum");
}

void GcanConfig::validate() const {
    if (max_tweet_len < 1 || num_users < 1 || embed_dim < 1 || gcn_dim < 1 ||
        filter_size < 1 || attn_dim < 1 || head_hidden < 1) {
        throw std::invalid_argument("GcanConfig: all dimensions must be >= 1");
    }
    if (num_users < filter_size) {
        throw std::invalid_argument("GcanConfig: num_users must be >= filter_size");
    }
    if (epochs < 0 || batch_size < 1) {
        throw std::invalid_argument("GcanConfig: bad epochs/batch_size");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("GcanConfig: train_fraction must be in (0,1)");
    }
}

int ModelState::head_input_width() const {
    int d = cfg_.embed_dim, g = cfg_.gcn_dim;
    switch (cfg_.variant) {
        case Variant::Full:
        case Variant::NoCoattention: return 4 * d + g;  // [s1, g, s2, c, h]
        case Variant::NoGraph:
        case Variant::NoGcn: return 3 * d;              // [s2, c, h]
        case Variant::NoGru: return 3 * d + g;          // [s1, g, s2, c]
        case Variant::NoCnn: return 2 * d + g;          // [s1, g, h]
        case Variant::NoSourceAndCoatt: return 2 * d + g;  // [mean G, mean C, h]
    }
    throw std::invalid_argument("bad variant enum");
}

ModelState::ModelState(GcanConfig cfg, data::Vocabulary vocab, data::FeatureScaler scaler)
    : cfg_(cfg), vocab_(std::move(vocab)), scaler_(scaler) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    int d = cfg_.embed_dim, g = cfg_.gcn_dim, k = cfg_.attn_dim;
    int f = data::UserRecord::kNumFeatures;
    int cnn_cols = cfg_.num_users - cfg_.filter_size + 1;

    Ww_ = Parameter("embed.W", glorot_uniform(vocab_.size(), d, rng));
    bw_ = Parameter("embed.b", Tensor(d, 1));
    src_gru_ = enc::GruCell("src_gru", d, d, rng);
    prop_gru_ = enc::GruCell("prop_gru", f, d, rng);
    Wf_ = Parameter("cnn.W", glorot_uniform(d, cfg_.filter_size * f, rng));
    bf_ = Parameter("cnn.b", Tensor::full(d, 1, 0.1));  // small positive: keeps ReLU channels alive at init
    Wg0_ = Parameter("gcn.W0", glorot_uniform(f, g, rng));
    Wg1_ = Parameter("gcn.W1", glorot_uniform(g, g, rng));
    sg_ = coatt::CoAttentionParams("coatt_sg", d, g, k, rng);
    sc_ = coatt::CoAttentionParams("coatt_sc", d, d, k, rng);
    (void)cnn_cols;
    Wh1_ = Parameter("head.W1", glorot_uniform(head_input_width(), cfg_.head_hidden, rng));
    bh1_ = Parameter("head.b1", Tensor::full(1, cfg_.head_hidden, 0.1));
    Wh2_ = Parameter("head.W2", glorot_uniform(cfg_.head_hidden, 2, rng));
    bh2_ = Parameter("head.b2", Tensor(1, 2));
}

std::vector<Parameter*> ModelState::params() {
    std::vector<Parameter*> out = {&Ww_, &bw_};
    for (Parameter* p : src_gru_.params()) out.push_back(p);
    for (Parameter* p : prop_gru_.params()) out.push_back(p);
    out.push_back(&Wf_);
    out.push_back(&bf_);
    out.push_back(&Wg0_);
    out.push_back(&Wg1_);
    for (Parameter* p : sg_.params()) out.push_back(p);
    for (Parameter* p : sc_.params()) out.push_back(p);
    out.push_back(&Wh1_);
    out.push_back(&bh1_);
    out.push_back(&Wh2_);
    out.push_back(&bh2_);
    return out;
}

EncodedStory ModelState::preprocess(const data::Story& story) const {
    EncodedStory e;
    e.story_id = story.story_id;
    e.label = story.label;
    e.tokens = story.tokens;
    e.token_ids = data::encode_tokens(story, vocab_, cfg_.max_tweet_len);
    e.users = data::fix_length(story.retweets, cfg_.num_users);
    e.X = data::apply_scaler(scaler_, e.users);
    e.graph = enc::build_graph(e.X);
    return e;
}

ModelState::Forward ModelState::forward(Tape& tape, const EncodedStory& story) {
    if (static_cast<int>(story.token_ids.size()) != cfg_.max_tweet_len ||
        story.X.rows != cfg_.num_users) {
        throw std::invalid_argument("forward: story not preprocessed for this config");
    }
    const Variant var = cfg_.variant;
    const bool use_graph = var != Variant::NoGraph && var != Variant::NoGcn;
    const bool use_cnn = var != Variant::NoCnn;
    const bool use_gru = var != Variant::NoGru;
    const bool use_source = var != Variant::NoSourceAndCoatt;
    const bool use_coatt = var != Variant::NoCoattention && var != Variant::NoSourceAndCoatt;

    Forward out;
    Tape::Id S = -1;
    if (use_source) {
        Tape::Id V = enc::embed_source(tape, story.token_ids, tape.leaf(Ww_), tape.leaf(bw_));
        S = enc::gru_forward(tape, src_gru_, V);  // d x m
    }

    Tape::Id Xc = tape.constant(story.X);
    Tape::Id G = -1;
    if (use_graph) {
        G = enc::gcn_forward(tape, story.graph, Xc, tape.leaf(Wg0_), tape.leaf(Wg1_));  // g x n
    }
    Tape::Id C = -1;
    if (use_cnn) {
        C = enc::cnn_forward(tape, Xc, tape.leaf(Wf_), tape.leaf(bf_), cfg_.filter_size);
    }
    Tape::Id h = -1;
    if (use_gru) {
        Tape::Id Xt = tape.transpose(Xc);  // 10 x n
        h = tape.transpose(enc::gru_pool(tape, enc::gru_forward(tape, prop_gru_, Xt)));  // 1 x d
        out.h = h;
    }

    std::vector<Tape::Id> parts;
    if (use_graph) {
        if (use_coatt) {
            auto sg = coatt::coattend(tape, S, G, sg_);
            out.s_hat1 = sg.s_hat;
            out.g_hat = sg.p_hat;
            out.a_s_graph = sg.a_s;
            out.a_g = sg.a_p;
        } else if (use_source) {
            out.s_hat1 = tape.transpose(tape.mean_columns(S));
            out.g_hat = tape.transpose(tape.mean_columns(G));
        } else {
            out.g_hat = tape.transpose(tape.mean_columns(G));
        }
        if (out.s_hat1 != -1) parts.push_back(out.s_hat1);
        parts.push_back(out.g_hat);
    }
    if (use_cnn) {
        if (use_coatt) {
            auto sc = coatt::coattend(tape, S, C, sc_);
            out.s_hat2 = sc.s_hat;
            out.c_hat = sc.p_hat;
            out.a_s_prop = sc.a_s;
            out.a_c = sc.a_p;
        } else if (use_source) {
            out.s_hat2 = tape.transpose(tape.mean_columns(S));
            out.c_hat = tape.transpose(tape.mean_columns(C));
        } else {
            out.c_hat = tape.transpose(tape.mean_columns(C));
        }
        if (out.s_hat2 != -1) parts.push_back(out.s_hat2);
        parts.push_back(out.c_hat);
    }
    if (use_gru) parts.push_back(h);

    Tape::Id f = tape.concat_rows(parts);
    Tape::Id hidden = tape.activation(
        tape.add(tape.matmul(f, tape.leaf(Wh1_)), tape.leaf(bh1_)), Act::Relu);
    Tape::Id logits = tape.add(tape.matmul(hidden, tape.leaf(Wh2_)), tape.leaf(bh2_));
    out.y_hat = tape.softmax_row(logits);
    return out;
}

Prediction ModelState::predict(const EncodedStory& story) {
    Tape tape;
    Forward f = forward(tape, story);
    Prediction p;
    const Tensor& y = tape.value(f.y_hat);
    p.probs = {y.v[0], y.v[1]};
    p.label = y.v[1] > y.v[0] ? 1 : 0;
    auto grab = [&](Tape::Id id) {
        return id == -1 ? std::vector<double>{} : tape.value(id).v;
    };
    p.word_attention = grab(f.a_s_prop);
    p.window_attention = grab(f.a_c);
    p.word_attention_graph = grab(f.a_s_graph);
    p.user_attention_graph = grab(f.a_g);
    return p;
}

double ModelState::train_step(const std::vector<EncodedStory>& batch) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
    double total = 0.0;
    for (const EncodedStory& s : batch) {
        Tape tape;
        Forward f = forward(tape, s);
        Tape::Id loss = tape.cross_entropy(f.y_hat, s.label);
        total += tape.value(loss).v[0];
        tape.backward(loss);
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    auto ps = params();
    for (Parameter* p : ps) {
        for (double& g : p->grad.v) g *= inv;
    }
    AdamConfig adam;
    adam.learning_rate = cfg_.learning_rate;
    adam_step(ps, adam);
    return total * inv;
}

namespace {

json tensor_to_json(const Tensor& t) {
    return json{{"rows", t.rows}, {"cols", t.cols}, {"values", t.v}};
}

Tensor tensor_from_json(const json& j) {
    return Tensor(j.at("rows").get<int>(), j.at("cols").get<int>(),
                  j.at("values").get<std::vector<double>>());
}

json config_to_json(const GcanConfig& c) {
    return json{
        {"max_tweet_len", c.max_tweet_len}, {"num_users", c.num_users},
        {"embed_dim", c.embed_dim},         {"gcn_dim", c.gcn_dim},
        {"filter_size", c.filter_size},     {"attn_dim", c.attn_dim},
        {"head_hidden", c.head_hidden},     {"epochs", c.epochs},
        {"batch_size", c.batch_size},       {"min_count", c.min_count},
        {"learning_rate", c.learning_rate}, {"train_fraction", c.train_fraction},
        {"seed", c.seed},                   {"variant", variant_to_string(c.variant)}};
}

GcanConfig config_from_json(const json& j) {
    GcanConfig c;
    c.max_tweet_len = j.at("max_tweet_len").get<int>();
    c.num_users = j.at("num_users").get<int>();
    c.embed_dim = j.at("embed_dim").get<int>();
    c.gcn_dim = j.at("gcn_dim").get<int>();
    c.filter_size = j.at("filter_size").get<int>();
    c.attn_dim = j.at("attn_dim").get<int>();
    c.head_hidden = j.at("head_hidden").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.min_count = j.at("min_count").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.train_fraction = j.at("train_fraction").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    c.variant = variant_from_string(j.at("variant").get<std::string>());
    return c;
}

}  // namespace

void ModelState::save(const std::string& path) const {
    json j;
    j["format"] = "gcan-checkpoint";
    j["version"] = 1;
    j["trained"] = trained_;
    j["config"] = config_to_json(cfg_);
    json vocab = json::object();
    for (const auto& [tok, idx] : vocab_.index) vocab[tok] = idx;
    j["vocab"] = std::move(vocab);
    j["scaler"] = {{"min", scaler_.fmin}, {"max", scaler_.fmax}};
    json params_json = json::object();
    for (const Parameter* p : const_cast<ModelState*>(this)->params()) {
        params_json[p->name] = tensor_to_json(p->value);
    }
    j["params"] = std::move(params_json);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump();
}

ModelState ModelState::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    json j = json::parse(in);
    if (j.value("format", "") != "gcan-checkpoint") {
        throw std::runtime_error("not a gcan checkpoint: " + path);
    }
    GcanConfig cfg = config_from_json(j.at("config"));
    data::Vocabulary vocab;
    for (const auto& [tok, idx] : j.at("vocab").items()) vocab.index[tok] = idx.get<int>();
    data::FeatureScaler scaler;
    scaler.fmin = j.at("scaler").at("min").get<std::array<double, 10>>();
    scaler.fmax = j.at("scaler").at("max").get<std::array<double, 10>>();
    ModelState state(cfg, std::move(vocab), scaler);
    state.trained_ = j.value("trained", false);
    const json& params_json = j.at("params");
    for (Parameter* p : state.params()) {
        if (!params_json.contains(p->name)) {
            throw std::runtime_error("checkpoint missing parameter: " + p->name);
        }
        Tensor t = tensor_from_json(params_json.at(p->name));
        if (!t.same_shape(p->value)) {
            throw std::runtime_error("checkpoint shape mismatch for " + p->name + ": " +
                                     t.shape_str() + " vs " + p->value.shape_str());
        }
        p->value = std::move(t);
    }
    return state;
}

ModelState train_model(const data::Dataset& train, const GcanConfig& cfg,
                       std::vector<double>* epoch_losses) {
    cfg.validate();
    data::Vocabulary vocab = data::build_vocab(train, cfg.min_count);
    data::FeatureScaler scaler = data::fit_scaler(train);
    ModelState state(cfg, std::move(vocab), scaler);

    std::vector<EncodedStory> encoded;
    encoded.reserve(train.stories.size());
    for (const data::Story& s : train.stories) encoded.push_back(state.preprocess(s));

    Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<size_t> order(encoded.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = order.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(shuffle_rng.below(i));
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        int batches = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<EncodedStory> batch;
            for (size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i) {
                batch.push_back(encoded[order[i]]);
            }
            epoch_loss += state.train_step(batch);
            ++batches;
        }
        if (epoch_losses) epoch_losses->push_back(epoch_loss / std::max(1, batches));
    }
    state.mark_trained();
    return state;
}

}  // namespace gcan::model
