#pragma once

#include <functional>
#include <string>

#include "smattn/params.hpp"
#include "smattn/tape.hpp"

namespace smattn {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_ad = 0.0;
    double worst_fd = 0.0;
    std::size_t checked = 0;
};

// Builds the scalar objective on a tape, binding every entry of `params`
// as a named tape parameter. Must be deterministic in `params`.
using LossBuilder = std::function<Var(Tape&, const ParamStore&)>;

// Compares reverse-mode gradients against central finite differences,
// element by element over every parameter. eps must be in [1e-7, 1e-4].
// Relative error uses max(|ad|, |fd|, 1e-4) as the denominator so that
// near-zero gradients are compared absolutely.
GradCheckReport grad_check(const LossBuilder& builder, const ParamStore& params,
                           double eps);

}  // namespace smattn
