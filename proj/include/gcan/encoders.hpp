#pragma once

#include "gcan/tensor.hpp"

#include <vector>

namespace gcan::enc {

using gcan::num::Parameter;
using gcan::num::Rng;
using gcan::num::Tape;
using gcan::num::Tensor;

// Standard GRU cell (update gate z, reset gate r, candidate h~).
struct GruCell {
    int input_size = 0;
    int hidden_size = 0;
    Parameter Wz, Uz, bz;
    Parameter Wr, Ur, br;
    Parameter Wh, Uh, bh;

    GruCell() = default;
    GruCell(const std::string& prefix, int input, int hidden, Rng& rng);
    std::vector<Parameter*> params();
};

// Word embedding layer: column t = tanh(row of W for token t + bias).
Tape::Id embed_source(Tape& tape, const std::vector<int>& indices, Tape::Id W, Tape::Id b);

// Runs the recurrence over the columns of `inputs` (input_size x T) starting
// from h0 = 0 and returns all hidden states as hidden x T.
Tape::Id gru_forward(Tape& tape, GruCell& cell, Tape::Id inputs);

// Average pooling over time (columns).
Tape::Id gru_pool(Tape& tape, Tape::Id states);

// Valid 1-D convolution over user rows followed by ReLU; W is d x (window*f).
Tape::Id cnn_forward(Tape& tape, Tape::Id X, Tape::Id W, Tape::Id b, int window);

struct UserGraph {
    Tensor A;       // n x n cosine weights, unit diagonal
    Tensor A_norm;  // D^{-1/2} A D^{-1/2}
    Tensor degree;  // n x 1 row sums of A
};

// Fully connected cosine-similarity graph over scaled user feature rows.
// If any row is all-zero, a constant 1 feature is appended to every row
// before computing cosines so the similarity stays defined.
UserGraph build_graph(const Tensor& X);

// Two-layer GCN: relu(A~ relu(A~ X W0) W1), returned transposed as g x n.
Tape::Id gcn_forward(Tape& tape, const UserGraph& graph, Tape::Id X, Tape::Id W0, Tape::Id W1);

}  // namespace gcan::enc
