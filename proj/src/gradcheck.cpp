#include "smattn/gradcheck.hpp"

#include <cmath>

namespace smattn {

namespace {

double eval_scalar(const LossBuilder& builder, const ParamStore& params) {
    Tape tape;
    Var out = builder(tape, params);
    const double v = tape.value(out).scalar_value();
    if (!std::isfinite(v)) throw NumericError("grad_check: non-finite objective");
    return v;
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& builder, const ParamStore& params,
                           double eps) {
    if (!(eps >= 1e-7 && eps <= 1e-4))
        throw ConfigError("grad_check: eps must be in [1e-7, 1e-4]");

    Tape tape;
    Var out = builder(tape, params);
    if (!std::isfinite(tape.value(out).scalar_value()))
        throw NumericError("grad_check: non-finite objective");
    tape.backward(out);
    const auto grads = tape.param_grads();

    GradCheckReport report;
    ParamStore work = params;
    for (const auto& [name, grad] : grads) {
        NumArray& p = work.get(name);
        for (std::size_t i = 0; i < p.numel(); ++i) {
            const double saved = p.values[i];
            p.values[i] = saved + eps;
            const double fp = eval_scalar(builder, work);
            p.values[i] = saved - eps;
            const double fm = eval_scalar(builder, work);
            p.values[i] = saved;

            const double fd = (fp - fm) / (2.0 * eps);
            const double ad = grad.values[i];
            const double denom = std::max({std::fabs(ad), std::fabs(fd), 1e-4});
            const double rel = std::fabs(ad - fd) / denom;
            ++report.checked;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = name;
                report.worst_index = i;
                report.worst_ad = ad;
                report.worst_fd = fd;
            }
        }
    }
    return report;
}

}  // namespace smattn
