#include "smattn/attention.hpp"

#include <cmath>

namespace smattn {

NumArray positional_encoding(std::size_t length, std::size_t d_pe, PeParity parity) {
    if (d_pe % 2 != 0) throw ConfigError("positional_encoding: d_pe must be even");
    if (length < 1) throw ConfigError("positional_encoding: length must be >= 1");
    NumArray z = NumArray::zeros({length, d_pe});
    const double d = static_cast<double>(d_pe);
    for (std::size_t i = 0; i < length; ++i)
        for (std::size_t j = 0; j < d_pe; ++j) {
            const bool use_sin = (parity == PeParity::position) ? i % 2 == 0 : j % 2 == 0;
            const double expo = use_sin ? static_cast<double>(j) / d
                                        : (static_cast<double>(j) - 1.0) / d;
            const double arg = static_cast<double>(i) / std::pow(10000.0, expo);
            z.at(i, j) = use_sin ? std::sin(arg) : std::cos(arg);
        }
    return z;
}

Var embed(Tape& tape, const ModelVars& vars, const std::vector<std::size_t>& items,
          const NumArray& pe) {
    if (pe.rows() != items.size())
        throw NumericError("embed: positional encoding rows != sequence length");
    const auto& table = tape.value(vars.Y);
    for (std::size_t i : items)
        if (i >= table.rows()) throw DataError("embed: item index out of range");
    Var rows = tape.gather_rows(vars.Y, items);
    Var z = tape.input(pe);
    return tape.concat_cols(rows, z);
}

namespace {

std::vector<std::uint8_t> causal_mask(std::size_t length) {
    std::vector<std::uint8_t> mask(length * length, 0);
    for (std::size_t i = 0; i < length; ++i)
        for (std::size_t j = 0; j <= i; ++j) mask[i * length + j] = 1;
    return mask;
}

}  // namespace

ForwardOut causal_attention(Tape& tape, const ModelConfig& cfg, const ModelVars& vars,
                            Var X) {
    const std::size_t length = tape.value(X).rows();
    const auto mask = causal_mask(length);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg.d));

    Var in = X;
    ForwardOut out;
    for (std::size_t b = 0; b < cfg.blocks; ++b) {
        Var q = tape.matmul(in, vars.Wq[b]);
        Var k = tape.matmul(in, vars.Wk[b]);
        Var v = tape.matmul(in, vars.Wv[b]);
        if (cfg.qkv_bias) {
            q = tape.add_row_broadcast(q, vars.bq[b]);
            k = tape.add_row_broadcast(k, vars.bk[b]);
            v = tape.add_row_broadcast(v, vars.bv[b]);
        }
        Var scores = tape.scale(tape.matmul(q, tape.transpose(k)), inv_sqrt_d);
        Var p = tape.masked_softmax_rows(scores, mask);
        Var h = tape.matmul(p, v);
        if (cfg.residual) h = tape.add(h, in);
        out.H = h;
        out.P = p;
        out.V = v;
        in = h;
    }
    return out;
}

ForwardOut forward_sequence(Tape& tape, const Model& model, const ModelVars& vars,
                            const std::vector<std::size_t>& items) {
    const NumArray pe =
        positional_encoding(items.size(), model.config.d_pe, model.config.pe_parity);
    Var x = embed(tape, vars, items, pe);
    return causal_attention(tape, model.config, vars, x);
}

}  // namespace smattn
