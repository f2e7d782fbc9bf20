#include "smattn/ctreg.hpp"

#include <cmath>

#include "smattn/log.hpp"
#include "smattn/rng.hpp"

namespace smattn {

IntegratorMethod parse_integrator(const std::string& s) {
    if (s == "monte_carlo" || s == "mc") return IntegratorMethod::monte_carlo;
    if (s == "trapezoid") return IntegratorMethod::trapezoid;
    throw ConfigError("unknown integrator '" + s + "'");
}

std::vector<double> mc_sample_times(double a, double b, std::size_t n, Rng& rng) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * rng.uniform01_open();
    return out;
}

RegVars build_regularizer(Tape& tape, const Model& model, const ModelVars& vars,
                          Var H, const EventSequence& seq,
                          const IntegratorConfig& integ) {
    const std::size_t L = seq.length();
    if (L == 0) throw DataError("regularizer: empty sequence");
    if (integ.mc_samples < 1) throw ConfigError("regularizer: mc_samples must be >= 1");

    Rng mc_rng(integ.seed);

    // Per-event intensity vectors lambda(t_j | H_j): the anchor is the
    // previous event; the first event conditions on the empty history via
    // a zero anchor representation at elapsed time zero.
    std::vector<Var> event_lambdas(L);
    std::vector<AnchorCtx> anchors(L);  // anchors[j] conditions event j
    for (std::size_t j = 0; j < L; ++j) {
        if (j == 0) {
            anchors[j] = make_zero_anchor(tape, model, vars, seq.times[0]);
        } else {
            Var h_row = tape.gather_rows(H, {j - 1});
            anchors[j] = make_anchor(tape, vars, h_row, seq.times[j - 1]);
        }
        event_lambdas[j] = intensity_vector(tape, model, vars, anchors[j], seq.times[j]);
    }

    RegVars out;
    for (std::size_t j = 0; j < L; ++j) {
        Var term = tape.log_(tape.element(event_lambdas[j], model.head_of(seq.items[j])));
        out.log_likelihood = j == 0 ? term : tape.add(out.log_likelihood, term);
    }

    if (L < 2) {
        log_warn("regularizer: single-event sequence for user %s, compensator is 0",
                 seq.user_id.c_str());
        out.total = out.log_likelihood;
        return out;
    }

    std::vector<Var> totals(L);  // total intensity at each event time
    if (integ.method == IntegratorMethod::trapezoid)
        for (std::size_t j = 0; j < L; ++j) totals[j] = tape.sum(event_lambdas[j]);

    Var comp;
    for (std::size_t j = 1; j < L; ++j) {
        const double dt = seq.times[j] - seq.times[j - 1];
        Var piece;
        if (integ.method == IntegratorMethod::trapezoid) {
            piece = tape.scale(tape.add(totals[j], totals[j - 1]), 0.5 * dt);
        } else {
            if (dt <= 0.0) continue;  // zero-length interval contributes nothing
            const auto samples =
                mc_sample_times(seq.times[j - 1], seq.times[j], integ.mc_samples, mc_rng);
            Var acc;
            for (std::size_t s = 0; s < samples.size(); ++s) {
                Var lam = intensity_vector(tape, model, vars, anchors[j], samples[s]);
                Var tot = tape.sum(lam);
                acc = s == 0 ? tot : tape.add(acc, tot);
            }
            piece = tape.scale(acc, dt / static_cast<double>(integ.mc_samples));
        }
        comp = comp.valid() ? tape.add(comp, piece) : piece;
    }
    if (!comp.valid()) {
        // all intervals were zero-length under the MC method
        comp = tape.input(NumArray::scalar(0.0));
    }
    out.compensator = comp;
    out.total = tape.sub(out.log_likelihood, comp);
    return out;
}

namespace {

RegVars regularizer_on_fresh_tape(Tape& tape, const Model& model,
                                  const EventSequence& seq,
                                  const IntegratorConfig& integ) {
    ModelVars vars = bind(tape, model);
    ForwardOut fwd = forward_sequence(tape, model, vars, seq.items);
    return build_regularizer(tape, model, vars, fwd.H, seq, integ);
}

}  // namespace

double event_loglik(const Model& model, const EventSequence& seq) {
    Tape tape;
    IntegratorConfig integ;  // method irrelevant; only the loglik is read
    RegVars rv = regularizer_on_fresh_tape(tape, model, seq, integ);
    const double v = tape.value(rv.log_likelihood).scalar_value();
    if (!std::isfinite(v)) throw NumericError("event_loglik: non-finite value");
    return v;
}

double integrate_mc(const Model& model, const EventSequence& seq,
                    std::size_t n_samples, std::uint64_t seed) {
    if (seq.length() < 2) {
        log_warn("integrate_mc: fewer than 2 events, returning 0");
        return 0.0;
    }
    Tape tape;
    IntegratorConfig integ{IntegratorMethod::monte_carlo, n_samples, seed};
    RegVars rv = regularizer_on_fresh_tape(tape, model, seq, integ);
    return tape.value(rv.compensator).scalar_value();
}

double integrate_trapezoid(const Model& model, const EventSequence& seq) {
    if (seq.length() < 2) {
        log_warn("integrate_trapezoid: fewer than 2 events, returning 0");
        return 0.0;
    }
    Tape tape;
    IntegratorConfig integ{IntegratorMethod::trapezoid, 1, 0};
    RegVars rv = regularizer_on_fresh_tape(tape, model, seq, integ);
    return tape.value(rv.compensator).scalar_value();
}

RegularizerValue regularizer_value(const Model& model, const EventSequence& seq,
                                   const IntegratorConfig& integ) {
    Tape tape;
    RegVars rv = regularizer_on_fresh_tape(tape, model, seq, integ);
    RegularizerValue out;
    out.log_likelihood = tape.value(rv.log_likelihood).scalar_value();
    out.compensator = rv.compensator.valid()
                          ? tape.value(rv.compensator).scalar_value()
                          : 0.0;
    out.total = tape.value(rv.total).scalar_value();
    if (!std::isfinite(out.total)) throw NumericError("regularizer: non-finite value");
    return out;
}

double mc_integral(const std::vector<double>& times, const IntensityPath& fn,
                   std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw ConfigError("mc_integral: n_samples must be >= 1");
    if (times.size() < 2) return 0.0;
    Rng rng(seed);
    double total = 0.0;
    for (std::size_t j = 1; j < times.size(); ++j) {
        const double dt = times[j] - times[j - 1];
        if (dt <= 0.0) continue;
        const auto samples = mc_sample_times(times[j - 1], times[j], n_samples, rng);
        double acc = 0.0;
        for (double t : samples) acc += fn(j, t);
        total += dt * acc / static_cast<double>(n_samples);
    }
    return total;
}

double trapezoid_integral(const std::vector<double>& times,
                          const std::vector<double>& endpoint_values) {
    if (times.size() != endpoint_values.size())
        throw NumericError("trapezoid_integral: size mismatch");
    if (times.size() < 2) return 0.0;
    double total = 0.0;
    for (std::size_t j = 1; j < times.size(); ++j)
        total += 0.5 * (times[j] - times[j - 1]) *
                 (endpoint_values[j] + endpoint_values[j - 1]);
    return total;
}

double simpson_integral(const std::vector<double>& times, const IntensityPath& fn,
                        std::size_t points) {
    if (times.size() < 2) return 0.0;
    const double span = times.back() - times.front();
    if (span <= 0.0) return 0.0;
    double total = 0.0;
    for (std::size_t j = 1; j < times.size(); ++j) {
        const double a = times[j - 1], b = times[j];
        if (b <= a) continue;
        // at least 2 panels per interval, proportional share of the budget
        std::size_t panels = static_cast<std::size_t>(
            std::ceil(static_cast<double>(points) * (b - a) / span / 2.0));
        panels = std::max<std::size_t>(panels, 1);
        const double h = (b - a) / static_cast<double>(2 * panels);
        double acc = fn(j, a) + fn(j, b);
        for (std::size_t i = 1; i < 2 * panels; ++i)
            acc += fn(j, a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
        total += acc * h / 3.0;
    }
    return total;
}

}  // namespace smattn
