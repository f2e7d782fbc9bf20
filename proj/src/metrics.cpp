#include "smattn/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace smattn {

std::vector<std::size_t> rank_candidates(const std::vector<double>& scores,
                                         const std::vector<std::size_t>& candidates) {
    if (candidates.empty()) throw ConfigError("rank_candidates: empty candidate set");
    if (scores.size() != candidates.size())
        throw NumericError("rank_candidates: scores/candidates size mismatch");
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return candidates[a] < candidates[b];
    });
    return order;
}

std::size_t rank_of(const std::vector<double>& scores,
                    const std::vector<std::size_t>& candidates,
                    std::size_t target_pos) {
    if (target_pos >= candidates.size())
        throw ConfigError("rank_of: target position out of range");
    const double st = scores[target_pos];
    const std::size_t ti = candidates[target_pos];
    std::size_t rank = 1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i == target_pos) continue;
        if (scores[i] > st || (scores[i] == st && candidates[i] < ti)) ++rank;
    }
    return rank;
}

}  // namespace smattn
