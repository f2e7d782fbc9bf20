#pragma once

#include <cstddef>
#include <vector>

#include "smattn/errors.hpp"

namespace smattn {

struct BoundInputs {
    double lipschitz = 1.0;  // Lipschitz constant of the loss
    double mu = 0.0;         // sup of |P_{u,k} (VB)_{k,i}| over the sample set
    double rho = 0.0;        // mean attention-row support size
    std::size_t omega_size = 0;
    double delta = 0.05;
    std::size_t d = 0;
    std::size_t m = 0;  // users
    std::size_t n = 0;  // items
    bool log2_capacity = false;  // capacity log base: natural by default
};

// Mean over sampled rows of the count of entries with |value| > epsilon.
double empirical_rho(const std::vector<std::vector<double>>& rows, double epsilon);

// Max over sampled (row, item) pairs of |P_k * (VB)_{k,item}| across
// positions k. Each sample pairs one attention row with the matching
// value-projection block (rows of V times B^T with B item-major) and one
// target item column.
struct MuSample {
    std::vector<double> p_row;             // attention weights, length Lc
    std::vector<std::vector<double>> vb;   // Lc x n_items
    std::size_t item = 0;
};
double empirical_mu(const std::vector<MuSample>& samples);

struct BoundReport {
    double capacity = 0.0;         // C = d (m + n) log(48 e m n)
    double complexity_term = 0.0;  // L mu sqrt(C rho ln|O| / |O|) + sqrt(ln(1/delta)/|O|)
};

BoundReport bound_complexity_term(const BoundInputs& inputs);

}  // namespace smattn
