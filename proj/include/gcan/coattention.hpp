#pragma once

#include "gcan/tensor.hpp"

#include <string>
#include <vector>

namespace gcan::coatt {

using gcan::num::Parameter;
using gcan::num::Rng;
using gcan::num::Tape;

// Parameters for one co-attention between a source matrix S (d x m) and a
// partner matrix P (p x n'): affinity (d x p), projections to a shared k-dim
// attention space, and the two scoring vectors.
struct CoAttentionParams {
    int source_dim = 0;   // d
    int partner_dim = 0;  // p
    int attn_dim = 0;     // k
    Parameter W_affinity;  // d x p
    Parameter W_source;    // k x d
    Parameter W_partner;   // k x p
    Parameter w_source;    // 1 x k
    Parameter w_partner;   // 1 x k

    CoAttentionParams() = default;
    CoAttentionParams(const std::string& prefix, int d, int p, int k, Rng& rng);
    std::vector<Parameter*> params();
};

struct CoAttentionOutput {
    Tape::Id s_hat;  // 1 x d
    Tape::Id p_hat;  // 1 x p
    Tape::Id a_s;    // 1 x m
    Tape::Id a_p;    // 1 x n'
};

// F = tanh(S^T W P); H^s = tanh(Ws S + (Wp P) F^T); H^p = tanh(Wp P + (Ws S) F);
// attention rows via softmax, attended vectors via weighted column sums.
CoAttentionOutput coattend(Tape& tape, Tape::Id S, Tape::Id P, CoAttentionParams& params);

}  // namespace gcan::coatt
