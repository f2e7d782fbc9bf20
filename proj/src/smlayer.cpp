#include "smattn/smlayer.hpp"

#include <algorithm>
#include <cmath>

namespace smattn {

AnchorCtx make_anchor(Tape& tape, const ModelVars& vars, Var h_row, double t_anchor) {
    AnchorCtx ctx;
    ctx.endo = tape.matmul(vars.WG, tape.transpose(h_row));
    ctx.t_anchor = t_anchor;
    return ctx;
}

AnchorCtx make_zero_anchor(Tape& tape, const Model& model, const ModelVars& vars,
                           double t_anchor) {
    Var zero = tape.input(NumArray::zeros({1, model.config.d}));
    return make_anchor(tape, vars, zero, t_anchor);
}

Var intensity_vector(Tape& tape, const Model& model, const ModelVars& vars,
                     const AnchorCtx& anchor, double t) {
    const auto& cfg = model.config;
    const double elapsed = t - anchor.t_anchor;
    if (elapsed < 0.0)
        throw ConfigError("intensity: query time precedes anchor time");
    if (cfg.force_constant_intensity > 0.0)
        return tape.input(NumArray::full({cfg.n_heads}, cfg.force_constant_intensity));

    Var pre_act = tape.add(anchor.endo, tape.scale(vars.bG, elapsed));
    Var g = tape.tanh_(pre_act);
    Var g_rows = tape.reshape(g, {cfg.n_heads, cfg.d_g});
    Var readout = tape.add(tape.row_sums(tape.mul(g_rows, vars.w)), vars.mu);
    return tape.scaled_softplus(readout, vars.phi);
}

std::vector<double> modulator_features(const Model& model, const std::vector<double>& h,
                                       double t, double t_anchor, std::size_t head) {
    const auto& cfg = model.config;
    if (h.size() != cfg.d) throw NumericError("modulator_features: bad h width");
    if (head >= cfg.n_heads) throw ConfigError("modulator_features: head out of range");
    const double elapsed = t - t_anchor;
    if (elapsed < 0.0)
        throw ConfigError("modulator_features: query time precedes anchor time");

    const auto& WG = model.params.get("WG");
    const auto& bG = model.params.get("bG");
    std::vector<double> g(cfg.d_g);
    for (std::size_t r = 0; r < cfg.d_g; ++r) {
        const std::size_t row = head * cfg.d_g + r;
        double s = 0.0;
        for (std::size_t c = 0; c < cfg.d; ++c) s += WG.at(row, c) * h[c];
        g[r] = std::tanh(s + bG.values[row] * elapsed);
    }
    return g;
}

double intensity(const Model& model, const std::vector<double>& h, double t,
                 double t_anchor, std::size_t head) {
    const auto& cfg = model.config;
    if (cfg.force_constant_intensity > 0.0) return cfg.force_constant_intensity;
    const auto g = modulator_features(model, h, t, t_anchor, head);
    const auto& w = model.params.get("w");
    const auto& mu = model.params.get("mu");
    const auto& rho = model.params.get("rho");
    double pre = mu.values[head];
    for (std::size_t r = 0; r < cfg.d_g; ++r) pre += w.at(head, r) * g[r];
    return scaled_softplus_value(pre, std::exp(rho.values[head]));
}

NumArray intensity_matrix(const Model& model, const EventSequence& seq,
                          const std::vector<double>& grid,
                          const std::vector<std::size_t>& heads) {
    if (seq.length() == 0) throw DataError("intensity_matrix: empty sequence");
    for (double t : grid)
        if (t < seq.times.front())
            throw ConfigError("intensity_matrix: grid time before first event");

    Tape tape;
    ModelVars vars = bind(tape, model);
    ForwardOut fwd = forward_sequence(tape, model, vars, seq.items);
    const NumArray& H = tape.value(fwd.H);

    NumArray out = NumArray::zeros({grid.size(), heads.size()});
    for (std::size_t g = 0; g < grid.size(); ++g) {
        // anchor = latest event with time <= grid time
        std::size_t anchor = 0;
        while (anchor + 1 < seq.length() && seq.times[anchor + 1] <= grid[g]) ++anchor;
        std::vector<double> h(model.config.d);
        for (std::size_t c = 0; c < model.config.d; ++c) h[c] = H.at(anchor, c);
        for (std::size_t k = 0; k < heads.size(); ++k)
            out.at(g, k) = intensity(model, h, grid[g], seq.times[anchor], heads[k]);
    }
    return out;
}

ScoreVars score_candidates(Tape& tape, const Model& model, const ModelVars& vars,
                           Var h_row, double t_anchor, double t_query,
                           const std::vector<std::size_t>& candidates) {
    if (candidates.empty()) throw ConfigError("score_candidates: empty candidate set");
    if (t_query < t_anchor)
        throw ConfigError("score_candidates: query time precedes anchor time");
    const auto& cfg = model.config;
    for (std::size_t c : candidates)
        if (c >= cfg.n_items) throw DataError("score_candidates: candidate out of range");

    Var b_rows = tape.gather_rows(vars.B, candidates);
    Var logits = tape.matmul(h_row, tape.transpose(b_rows));  // (1, C)
    std::vector<std::uint8_t> all(candidates.size(), 1);
    ScoreVars sv;
    sv.p = tape.reshape(tape.masked_softmax_rows(logits, all), {candidates.size()});
    if (cfg.plain) {
        sv.scores = sv.p;
        return sv;
    }
    Var lam_heads;
    if (cfg.force_constant_intensity > 0.0) {
        lam_heads = tape.input(NumArray::full({cfg.n_heads}, cfg.force_constant_intensity));
    } else {
        AnchorCtx anchor = make_anchor(tape, vars, h_row, t_anchor);
        lam_heads = intensity_vector(tape, model, vars, anchor, t_query);
    }
    std::vector<std::size_t> head_idx(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        head_idx[i] = model.head_of(candidates[i]);
    sv.lambda = tape.gather_elements(lam_heads, head_idx);
    sv.scores = tape.mul(sv.p, sv.lambda);
    return sv;
}

}  // namespace smattn
