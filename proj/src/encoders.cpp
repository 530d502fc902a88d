#include "gcan/encoders.hpp"

#include <cmath>
#include <stdexcept>

namespace gcan::enc {

using gcan::num::Act;

GruCell::GruCell(const std::string& prefix, int input, int hidden, Rng& rng)
    : input_size(input),
      hidden_size(hidden),
      Wz(prefix + ".Wz", gcan::num::glorot_uniform(hidden, input, rng)),
      Uz(prefix + ".Uz", gcan::num::glorot_uniform(hidden, hidden, rng)),
      bz(prefix + ".bz", Tensor(hidden, 1)),
      Wr(prefix + ".Wr", gcan::num::glorot_uniform(hidden, input, rng)),
      Ur(prefix + ".Ur", gcan::num::glorot_uniform(hidden, hidden, rng)),
      br(prefix + ".br", Tensor(hidden, 1)),
      Wh(prefix + ".Wh", gcan::num::glorot_uniform(hidden, input, rng)),
      Uh(prefix + ".Uh", gcan::num::glorot_uniform(hidden, hidden, rng)),
      bh(prefix + ".bh", Tensor(hidden, 1)) {}

std::vector<Parameter*> GruCell::params() {
    return {&Wz, &Uz, &bz, &Wr, &Ur, &br, &Wh, &Uh, &bh};
}

Tape::Id embed_source(Tape& tape, const std::vector<int>& indices, Tape::Id W, Tape::Id b) {
    return tape.embed_tanh(indices, W, b);
}

Tape::Id gru_forward(Tape& tape, GruCell& cell, Tape::Id inputs) {
    const Tensor& X = tape.value(inputs);
    if (X.rows != cell.input_size) {
        throw std::invalid_argument("gru_forward: input rows " + std::to_string(X.rows) +
                                    " != cell input size " + std::to_string(cell.input_size));
    }
    int T = X.cols;
    Tape::Id Wz = tape.leaf(cell.Wz), Uz = tape.leaf(cell.Uz), bz = tape.leaf(cell.bz);
    Tape::Id Wr = tape.leaf(cell.Wr), Ur = tape.leaf(cell.Ur), br = tape.leaf(cell.br);
    Tape::Id Wh = tape.leaf(cell.Wh), Uh = tape.leaf(cell.Uh), bh = tape.leaf(cell.bh);

    Tape::Id h = tape.constant(Tensor(cell.hidden_size, 1));  // h0 = 0
    std::vector<Tape::Id> states;
    states.reserve(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) {
        Tape::Id x = tape.col(inputs, t);
        Tape::Id z = tape.activation(
            tape.add(tape.add(tape.matmul(Wz, x), tape.matmul(Uz, h)), bz), Act::Sigmoid);
        Tape::Id r = tape.activation(
            tape.add(tape.add(tape.matmul(Wr, x), tape.matmul(Ur, h)), br), Act::Sigmoid);
        Tape::Id cand = tape.activation(
            tape.add(tape.add(tape.matmul(Wh, x), tape.matmul(Uh, tape.hadamard(r, h))), bh),
            Act::Tanh);
        h = tape.add(tape.hadamard(tape.one_minus(z), h), tape.hadamard(z, cand));
        states.push_back(h);
    }
    return tape.concat_cols(states);
}

Tape::Id gru_pool(Tape& tape, Tape::Id states) { return tape.mean_columns(states); }

Tape::Id cnn_forward(Tape& tape, Tape::Id X, Tape::Id W, Tape::Id b, int window) {
    return tape.activation(tape.conv1d(X, W, b, window), Act::Relu);
}

UserGraph build_graph(const Tensor& X) {
    int n = X.rows;
    int f = X.cols;
    bool has_zero_row = false;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < f; ++j) s += X.at(i, j) * X.at(i, j);
        if (s == 0.0) has_zero_row = true;
    }
    // Append a constant 1 feature only when some row is all-zero after scaling.
    Tensor Xc = X;
    if (has_zero_row) {
        Tensor aug(n, f + 1);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < f; ++j) aug.at(i, j) = X.at(i, j);
            aug.at(i, f) = 1.0;
        }
        Xc = std::move(aug);
    }

    std::vector<double> norms(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < Xc.cols; ++j) s += Xc.at(i, j) * Xc.at(i, j);
        norms[i] = std::sqrt(s);
        if (norms[i] == 0.0) throw std::runtime_error("build_graph: zero-norm user row");
    }

    UserGraph g;
    g.A = Tensor(n, n);
    for (int a = 0; a < n; ++a) {
        g.A.at(a, a) = 1.0;
        for (int b = a + 1; b < n; ++b) {
            double dot = 0.0;
            for (int j = 0; j < Xc.cols; ++j) dot += Xc.at(a, j) * Xc.at(b, j);
            double w = dot / (norms[a] * norms[b]);
            g.A.at(a, b) = w;
            g.A.at(b, a) = w;
        }
    }
    g.degree = Tensor(n, 1);
    for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (int b = 0; b < n; ++b) s += g.A.at(a, b);
        g.degree.v[a] = s;
    }
    g.A_norm = Tensor(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            g.A_norm.at(a, b) = g.A.at(a, b) / std::sqrt(g.degree.v[a] * g.degree.v[b]);
        }
    }
    return g;
}

Tape::Id gcn_forward(Tape& tape, const UserGraph& graph, Tape::Id X, Tape::Id W0, Tape::Id W1) {
    Tape::Id An = tape.constant(graph.A_norm);
    Tape::Id H1 = tape.activation(tape.matmul(tape.matmul(An, X), W0), Act::Relu);
    Tape::Id H2 = tape.activation(tape.matmul(tape.matmul(An, H1), W1), Act::Relu);
    return tape.transpose(H2);
}

}  // namespace gcan::enc
