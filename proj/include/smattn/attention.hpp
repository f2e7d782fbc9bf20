#pragma once

#include "smattn/model.hpp"

namespace smattn {

// Sinusoidal positional encoding, L x d_pe. Under PeParity::position the
// sin/cos branch is selected by the parity of the position index i:
//   Z[i][j] = sin(i / 10000^(j/d_pe))      for even i
//   Z[i][j] = cos(i / 10000^((j-1)/d_pe))  for odd i
// Under PeParity::dimension the parity of the dimension index j selects
// the branch instead (the usual transformer convention).
NumArray positional_encoding(std::size_t length, std::size_t d_pe, PeParity parity);

// Row j = [Y[items[j]], Z[j]].
Var embed(Tape& tape, const ModelVars& vars, const std::vector<std::size_t>& items,
          const NumArray& pe);

struct ForwardOut {
    Var H;  // (L, d) causal representations; row j sees events 1..j only
    Var P;  // (L, L) attention weights of the last block, lower-triangular
    Var V;  // (L, d) value rows of the last block
};

// Masked causal self-attention stack: per block
//   P = masked_softmax_rows(Q K^T / sqrt(d)),  H = P V
// with strictly-upper-triangular scores masked out.
ForwardOut causal_attention(Tape& tape, const ModelConfig& cfg, const ModelVars& vars,
                            Var X);

// Convenience: positional encoding + embed + attention for one sequence.
ForwardOut forward_sequence(Tape& tape, const Model& model, const ModelVars& vars,
                            const std::vector<std::size_t>& items);

}  // namespace smattn
