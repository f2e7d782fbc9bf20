#include "smattn/bound.hpp"

#include <cmath>

namespace smattn {

double empirical_rho(const std::vector<std::vector<double>>& rows, double epsilon) {
    if (rows.empty()) throw ConfigError("empirical_rho: empty sample set");
    if (epsilon < 0.0) throw ConfigError("empirical_rho: epsilon must be >= 0");
    std::size_t nonzero = 0;
    for (const auto& row : rows)
        for (double v : row)
            if (std::fabs(v) > epsilon) ++nonzero;
    return static_cast<double>(nonzero) / static_cast<double>(rows.size());
}

double empirical_mu(const std::vector<MuSample>& samples) {
    if (samples.empty()) throw ConfigError("empirical_mu: empty sample set");
    double mu = 0.0;
    for (const auto& s : samples) {
        if (s.vb.size() != s.p_row.size())
            throw NumericError("empirical_mu: row/VB size mismatch");
        for (std::size_t k = 0; k < s.p_row.size(); ++k) {
            if (s.item >= s.vb[k].size())
                throw NumericError("empirical_mu: item column out of range");
            mu = std::max(mu, std::fabs(s.p_row[k] * s.vb[k][s.item]));
        }
    }
    return mu;
}

BoundReport bound_complexity_term(const BoundInputs& in) {
    if (!(in.delta > 0.0 && in.delta < 1.0))
        throw ConfigError("bound: delta must be in (0, 1)");
    if (in.omega_size == 0) throw ConfigError("bound: omega must be nonempty");
    if (in.d == 0 || in.m == 0 || in.n == 0)
        throw ConfigError("bound: d, m, n must be positive");
    if (in.rho < 0.0 || in.mu < 0.0 || in.lipschitz < 0.0)
        throw ConfigError("bound: rho, mu, L must be nonnegative");

    const double mn = static_cast<double>(in.m) * static_cast<double>(in.n);
    const double inner = 48.0 * std::exp(1.0) * mn;
    const double log_inner = in.log2_capacity ? std::log2(inner) : std::log(inner);
    BoundReport report;
    report.capacity =
        static_cast<double>(in.d) * (static_cast<double>(in.m) + static_cast<double>(in.n)) *
        log_inner;

    const double omega = static_cast<double>(in.omega_size);
    report.complexity_term =
        in.lipschitz * in.mu *
            std::sqrt(report.capacity * in.rho * std::log(omega) / omega) +
        std::sqrt(std::log(1.0 / in.delta) / omega);
    return report;
}

}  // namespace smattn
