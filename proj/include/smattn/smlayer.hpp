#pragma once

#include "smattn/attention.hpp"
#include "smattn/model.hpp"

namespace smattn {

// Per-anchor state for intensity evaluation. The endogenous product
// WG * h(t_anchor)^T is shared by every query inside the same inter-event
// interval; only the elapsed-time term varies.
struct AnchorCtx {
    Var endo;        // (K * d_g, 1)
    double t_anchor = 0.0;
};

// h_row is (1, d); pass the zero row for the empty-history anchor.
AnchorCtx make_anchor(Tape& tape, const ModelVars& vars, Var h_row, double t_anchor);

AnchorCtx make_zero_anchor(Tape& tape, const Model& model, const ModelVars& vars,
                           double t_anchor);

// Conditional intensity of every head at query time t >= anchor time:
//   lambda_k = f_k(w_k . tanh(WG_k h + bG_k (t - t_anchor)) + mu_k)
// with f_k the softplus scaled by phi_k. Returns a strictly positive (K)
// vector. Honors force_constant_intensity.
Var intensity_vector(Tape& tape, const Model& model, const ModelVars& vars,
                     const AnchorCtx& anchor, double t);

// ---- untaped evaluators (export/diagnostics path) ----

// g_k(t) = tanh(WG_k h + bG_k (t - t_anchor)); h has d entries.
std::vector<double> modulator_features(const Model& model, const std::vector<double>& h,
                                       double t, double t_anchor, std::size_t head);

double intensity(const Model& model, const std::vector<double>& h, double t,
                 double t_anchor, std::size_t head);

// Row per grid time, column per requested head; each entry is the
// intensity at that time anchored at the latest event <= the grid time.
// Grid times are in the sequence's normalized time unit and must be
// >= the first event time.
NumArray intensity_matrix(const Model& model, const EventSequence& seq,
                          const std::vector<double>& grid,
                          const std::vector<std::size_t>& heads);

// ---- scoring ----

struct ScoreVars {
    Var p;       // (C) base next-item distribution over the candidates
    Var lambda;  // (C) per-candidate intensities; invalid when plain
    Var scores;  // (C) ranking scores
};

// Base distribution p = softmax over candidates of h(t_anchor) . B_k, then
// scores = p * lambda evaluated at the query time (or p alone when the
// model is plain).
ScoreVars score_candidates(Tape& tape, const Model& model, const ModelVars& vars,
                           Var h_row, double t_anchor, double t_query,
                           const std::vector<std::size_t>& candidates);

}  // namespace smattn
