#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "smattn/errors.hpp"

namespace smattn {

// rank is 1-based.
inline double hit_rate_at_k(std::size_t rank, std::size_t k) {
    if (rank < 1) throw ConfigError("hit_rate_at_k: rank must be >= 1");
    return rank <= k ? 1.0 : 0.0;
}

// Single relevant item, so the ideal DCG is 1.
inline double ndcg_at_k(std::size_t rank, std::size_t k) {
    if (rank < 1) throw ConfigError("ndcg_at_k: rank must be >= 1");
    if (rank > k) return 0.0;
    return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

// Candidate order by descending score, ties by ascending item index.
// Returns positions into `candidates`.
std::vector<std::size_t> rank_candidates(const std::vector<double>& scores,
                                         const std::vector<std::size_t>& candidates);

// 1-based rank of candidate `target_pos` under the same ordering rule,
// computed without a full sort.
std::size_t rank_of(const std::vector<double>& scores,
                    const std::vector<std::size_t>& candidates,
                    std::size_t target_pos);

}  // namespace smattn
