#pragma once

#include "gcan/coattention.hpp"
#include "gcan/data.hpp"
#include "gcan/encoders.hpp"
#include "gcan/tensor.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace gcan::model {

using gcan::num::Parameter;
using gcan::num::Tape;
using gcan::num::Tensor;

enum class Variant {
    Full,
    NoGraph,           // "GCAN-G": graph branch removed
    NoCoattention,     // "-A": attended vectors replaced by column means
    NoGru,             // "-R": sequential propagation vector removed
    NoGcn,             // "-G": graph branch removed
    NoCnn,             // "-C": CNN branch removed
    NoSourceAndCoatt,  // "-S-A": no source encoding, no co-attention
};

Variant variant_from_string(const std::string& name);
std::string variant_to_string(Variant v);

struct GcanConfig {
    int max_tweet_len = 16;   // m
    int num_users = 40;       // n
    int embed_dim = 32;       // d: word embedding / GRU / CNN output dim
    int gcn_dim = 32;         // g
    int filter_size = 3;      // lambda
    int attn_dim = 32;        // k
    int head_hidden = 32;
    int epochs = 50;
    int batch_size = 16;
    int min_count = 1;
    double learning_rate = 1e-3;
    double train_fraction = 0.7;
    uint64_t seed = 1;
    Variant variant = Variant::Full;

    void validate() const;
};

// A story after preprocessing: padded token ids, fixed-length scaled user
// features, and the cosine user graph.
struct EncodedStory {
    std::string story_id;
    int label = 0;
    std::vector<int> token_ids;              // length m
    std::vector<std::string> tokens;         // original tokens (pre-padding)
    Tensor X;                                // n x 10 scaled features
    std::vector<data::UserRecord> users;     // length n, after fix_length
    enc::UserGraph graph;
};

struct Prediction {
    std::array<double, 2> probs{0.5, 0.5};  // [p(true), p(fake)]
    int label = 0;
    // source-propagation pair (used for explainability)
    std::vector<double> word_attention;    // 1 x m
    std::vector<double> window_attention;  // 1 x (n - lambda + 1)
    // source-interaction pair (diagnostics)
    std::vector<double> word_attention_graph;  // 1 x m
    std::vector<double> user_attention_graph;  // 1 x n
};

class ModelState {
public:
    ModelState(GcanConfig cfg, data::Vocabulary vocab, data::FeatureScaler scaler);

    const GcanConfig& config() const { return cfg_; }
    const data::Vocabulary& vocab() const { return vocab_; }
    const data::FeatureScaler& scaler() const { return scaler_; }
    bool trained() const { return trained_; }
    void mark_trained() { trained_ = true; }

    std::vector<Parameter*> params();

    EncodedStory preprocess(const data::Story& story) const;

    struct Forward {
        Tape::Id y_hat = -1;
        Tape::Id a_s_graph = -1, a_g = -1;  // source-interaction attention
        Tape::Id a_s_prop = -1, a_c = -1;   // source-propagation attention
        Tape::Id s_hat1 = -1, g_hat = -1, s_hat2 = -1, c_hat = -1, h = -1;
    };
    Forward forward(Tape& tape, const EncodedStory& story);

    Prediction predict(const EncodedStory& story);
    Prediction predict(const data::Story& story) { return predict(preprocess(story)); }

    // Forward + backward per story, gradients averaged, one Adam step.
    // Returns the pre-update mean loss.
    double train_step(const std::vector<EncodedStory>& batch);

    void save(const std::string& path) const;
    static ModelState load(const std::string& path);

private:
    int head_input_width() const;

    GcanConfig cfg_;
    data::Vocabulary vocab_;
    data::FeatureScaler scaler_;
    bool trained_ = false;

    Parameter Ww_, bw_;                 // embedding: vocab x d, d x 1
    enc::GruCell src_gru_;              // d -> d
    enc::GruCell prop_gru_;             // 10 -> d
    Parameter Wf_, bf_;                 // CNN filters: d x (lambda*10), d x 1
    Parameter Wg0_, Wg1_;               // GCN: 10 x g, g x g
    coatt::CoAttentionParams sg_;       // source <-> graph
    coatt::CoAttentionParams sc_;       // source <-> CNN propagation
    Parameter Wh1_, bh1_, Wh2_, bh2_;   // prediction head
};

// Trains a model on `train` (fits vocabulary and scaler from it first).
ModelState train_model(const data::Dataset& train, const GcanConfig& cfg,
                       std::vector<double>* epoch_losses = nullptr);

}  // namespace gcan::model
