#pragma once

#include <functional>

#include "smattn/rng.hpp"
#include "smattn/smlayer.hpp"

namespace smattn {

enum class IntegratorMethod { monte_carlo, trapezoid };

IntegratorMethod parse_integrator(const std::string& s);

struct IntegratorConfig {
    IntegratorMethod method = IntegratorMethod::trapezoid;
    std::size_t mc_samples = 5;  // per interval, >= 1
    std::uint64_t seed = 0;
};

struct RegularizerValue {
    double log_likelihood = 0.0;
    double compensator = 0.0;
    double total = 0.0;  // log_likelihood - compensator
};

// Taped regularizer pieces for one sequence. H is the forward
// representation of the same sequence. The j-th event term is
// log lambda_{k_j}(t_j | H_j), anchored at event j-1 (or the zero anchor
// for the first event), and the compensator integrates the total
// intensity over [t_1, t_L] with the same anchoring.
struct RegVars {
    Var log_likelihood;
    Var compensator;  // invalid when the sequence has a single event
    Var total;
};

RegVars build_regularizer(Tape& tape, const Model& model, const ModelVars& vars,
                          Var H, const EventSequence& seq,
                          const IntegratorConfig& integ);

// Standalone evaluations (each builds its own tape).
double event_loglik(const Model& model, const EventSequence& seq);
double integrate_mc(const Model& model, const EventSequence& seq,
                    std::size_t n_samples, std::uint64_t seed);
double integrate_trapezoid(const Model& model, const EventSequence& seq);
RegularizerValue regularizer_value(const Model& model, const EventSequence& seq,
                                   const IntegratorConfig& integ);

// ---- generic quadrature over a scalar intensity path ----
// fn(j, t) evaluates the total intensity at time t inside interval j,
// i.e. t in (times[j-1], times[j]].

using IntensityPath = std::function<double(std::size_t, double)>;

// Sum over intervals of length * mean of n samples at uniform open-interval
// positions. Consumes n draws per nonempty interval, in interval order.
double mc_integral(const std::vector<double>& times, const IntensityPath& fn,
                   std::size_t n_samples, std::uint64_t seed);

// Trapezoid over supplied endpoint values (one per event).
double trapezoid_integral(const std::vector<double>& times,
                          const std::vector<double>& endpoint_values);

// Composite Simpson over each interval with roughly `points` nodes total,
// for use as an independent fine-grid reference.
double simpson_integral(const std::vector<double>& times, const IntensityPath& fn,
                        std::size_t points);

// Uniform open-interval sample positions shared by the taped and untaped
// Monte Carlo paths.
std::vector<double> mc_sample_times(double a, double b, std::size_t n, Rng& rng);

}  // namespace smattn
