#pragma once

#include <cstdint>
#include <vector>

#include "smattn/events.hpp"

namespace smattn {

// Homogeneous Poisson event times in (0, T], T in days.
std::vector<double> simulate_poisson(double rate, double horizon, std::uint64_t seed);

// Self-exciting process lambda(t) = mu + sum_i alpha exp(-beta (t - t_i)),
// simulated by Ogata thinning. Requires alpha < beta for stationarity.
std::vector<double> simulate_hawkes(double mu, double alpha, double beta,
                                    double horizon, std::uint64_t seed);

struct DriftRegime {
    double window_start = 0.0;  // days
    double window_end = 0.0;
    std::vector<std::size_t> categories;  // active category indices
    std::vector<double> rates;            // events/day per active category
};

struct DriftConfig {
    std::size_t users = 500;
    std::size_t items = 30;
    std::size_t categories = 6;
    double horizon = 100.0;  // days
    std::vector<DriftRegime> regimes;
    std::size_t min_events = 2;
    std::size_t max_retries = 20;

    // Items are partitioned into contiguous category blocks.
    std::size_t category_of(std::size_t item) const {
        const std::size_t per = (items + categories - 1) / categories;
        return item / per;
    }
    void validate() const;
};

// Per-user category-Poisson streams per regime window; items are uniform
// within the event's category. Emits integer-second timestamps so the
// output is identical in shape to ingested data. Users with fewer than
// min_events events are resampled up to max_retries times.
std::vector<Event> simulate_drifting_preferences(const DriftConfig& config,
                                                 std::uint64_t seed);

// Group-map rows (item id -> category) matching the drift generator ids.
std::vector<std::pair<std::string, std::string>> drift_group_map(
    const DriftConfig& config);

std::string drift_user_id(std::size_t u);
std::string drift_item_id(std::size_t i);

// Deterministic toy stream for gradient checks and special-case tests:
// `users` sequences of `seq_len` events over `items` items, with uniform
// random items and slightly jittered daily timestamps.
std::vector<Event> make_toy_events(std::size_t users, std::size_t seq_len,
                                   std::size_t items, std::uint64_t seed);

}  // namespace smattn
