#include "gcan/coattention.hpp"

#include <stdexcept>

namespace gcan::coatt {

using gcan::num::Act;
using gcan::num::glorot_uniform;

CoAttentionParams::CoAttentionParams(const std::string& prefix, int d, int p, int k, Rng& rng)
    : source_dim(d),
      partner_dim(p),
      attn_dim(k),
      W_affinity(prefix + ".W_affinity", glorot_uniform(d, p, rng)),
      W_source(prefix + ".W_source", glorot_uniform(k, d, rng)),
      W_partner(prefix + ".W_partner", glorot_uniform(k, p, rng)),
      w_source(prefix + ".w_source", glorot_uniform(1, k, rng)),
      w_partner(prefix + ".w_partner", glorot_uniform(1, k, rng)) {}

std::vector<Parameter*> CoAttentionParams::params() {
    return {&W_affinity, &W_source, &W_partner, &w_source, &w_partner};
}

CoAttentionOutput coattend(Tape& tape, Tape::Id S, Tape::Id P, CoAttentionParams& params) {
    const auto& Sv = tape.value(S);
    const auto& Pv = tape.value(P);
    if (Sv.rows != params.source_dim || Pv.rows != params.partner_dim) {
        throw std::invalid_argument("coattend: S " + Sv.shape_str() + " / P " + Pv.shape_str() +
                                    " inconsistent with params " +
                                    std::to_string(params.source_dim) + "/" +
                                    std::to_string(params.partner_dim));
    }

    Tape::Id Wa = tape.leaf(params.W_affinity);
    Tape::Id Ws = tape.leaf(params.W_source);
    Tape::Id Wp = tape.leaf(params.W_partner);
    Tape::Id ws = tape.leaf(params.w_source);
    Tape::Id wp = tape.leaf(params.w_partner);

    // F = tanh(S^T Wa P), m x n'
    Tape::Id F = tape.activation(tape.matmul(tape.matmul(tape.transpose(S), Wa), P), Act::Tanh);
    Tape::Id WsS = tape.matmul(Ws, S);  // k x m
    Tape::Id WpP = tape.matmul(Wp, P);  // k x n'
    Tape::Id Hs = tape.activation(tape.add(WsS, tape.matmul(WpP, tape.transpose(F))), Act::Tanh);
    Tape::Id Hp = tape.activation(tape.add(WpP, tape.matmul(WsS, F)), Act::Tanh);

    CoAttentionOutput out;
    out.a_s = tape.softmax_row(tape.matmul(ws, Hs));
    out.a_p = tape.softmax_row(tape.matmul(wp, Hp));
    out.s_hat = tape.matmul(out.a_s, tape.transpose(S));
    out.p_hat = tape.matmul(out.a_p, tape.transpose(P));
    return out;
}

}  // namespace gcan::coatt
