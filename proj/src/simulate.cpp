#include "smattn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "smattn/rng.hpp"

namespace smattn {

std::vector<double> simulate_poisson(double rate, double horizon, std::uint64_t seed) {
    if (!(rate > 0.0)) throw ConfigError("simulate_poisson: rate must be > 0");
    if (!(horizon > 0.0)) throw ConfigError("simulate_poisson: horizon must be > 0");
    Rng rng(seed);
    std::vector<double> times;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(rate);
        if (t > horizon) break;
        times.push_back(t);
    }
    return times;
}

std::vector<double> simulate_hawkes(double mu, double alpha, double beta,
                                    double horizon, std::uint64_t seed) {
    if (!(mu > 0.0)) throw ConfigError("simulate_hawkes: mu must be > 0");
    if (alpha < 0.0) throw ConfigError("simulate_hawkes: alpha must be >= 0");
    if (!(beta > 0.0)) throw ConfigError("simulate_hawkes: beta must be > 0");
    if (alpha >= beta)
        throw ConfigError("simulate_hawkes: alpha < beta required for stationarity");
    if (!(horizon > 0.0)) throw ConfigError("simulate_hawkes: horizon must be > 0");

    Rng rng(seed);
    std::vector<double> times;
    // excitation state: sum of alpha * exp(-beta (t - t_i)) maintained
    // incrementally at the current time
    double excite = 0.0;
    double t = 0.0;
    for (;;) {
        const double lambda_bar = mu + excite;  // intensity only decays between events
        const double w = rng.exponential(lambda_bar);
        excite *= std::exp(-beta * w);
        t += w;
        if (t > horizon) break;
        const double lambda_t = mu + excite;
        if (rng.uniform01() * lambda_bar <= lambda_t) {
            times.push_back(t);
            excite += alpha;
        }
    }
    return times;
}

void DriftConfig::validate() const {
    if (users == 0 || items == 0 || categories == 0)
        throw ConfigError("drift: users, items and categories must be > 0");
    if (items < categories)
        throw ConfigError("drift: need at least one item per category");
    if (!(horizon > 0.0)) throw ConfigError("drift: horizon must be > 0");
    if (regimes.empty()) throw ConfigError("drift: at least one regime required");
    double cursor = 0.0;
    for (const auto& r : regimes) {
        if (r.window_start != cursor)
            throw ConfigError("drift: regime windows must partition [0, horizon]");
        if (!(r.window_end > r.window_start))
            throw ConfigError("drift: empty regime window");
        if (r.categories.size() != r.rates.size())
            throw ConfigError("drift: categories/rates size mismatch");
        for (std::size_t c : r.categories)
            if (c >= categories) throw ConfigError("drift: category out of range");
        for (double rate : r.rates)
            if (rate < 0.0) throw ConfigError("drift: rates must be >= 0");
        cursor = r.window_end;
    }
    if (cursor != horizon)
        throw ConfigError("drift: regime windows must end at the horizon");
}

std::string drift_user_id(std::size_t u) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "u%04zu", u);
    return buf;
}

std::string drift_item_id(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "i%03zu", i);
    return buf;
}

std::vector<std::pair<std::string, std::string>> drift_group_map(
    const DriftConfig& config) {
    std::vector<std::pair<std::string, std::string>> rows;
    rows.reserve(config.items);
    for (std::size_t i = 0; i < config.items; ++i)
        rows.emplace_back(drift_item_id(i),
                          "c" + std::to_string(config.category_of(i)));
    return rows;
}

std::vector<Event> simulate_drifting_preferences(const DriftConfig& config,
                                                 std::uint64_t seed) {
    config.validate();

    // items per category, for uniform item choice within a category
    std::vector<std::vector<std::size_t>> cat_items(config.categories);
    for (std::size_t i = 0; i < config.items; ++i)
        cat_items[config.category_of(i)].push_back(i);
    for (std::size_t c = 0; c < config.categories; ++c)
        if (cat_items[c].empty()) throw ConfigError("drift: empty category");

    std::vector<Event> events;
    for (std::size_t u = 0; u < config.users; ++u) {
        std::vector<std::pair<double, std::size_t>> stream;  // (day, item)
        bool ok = false;
        for (std::size_t attempt = 0; attempt <= config.max_retries; ++attempt) {
            Rng rng(mix_seed(seed, u * 1000003ULL + attempt));
            stream.clear();
            for (const auto& regime : config.regimes) {
                for (std::size_t ci = 0; ci < regime.categories.size(); ++ci) {
                    const double rate = regime.rates[ci];
                    if (rate <= 0.0) continue;
                    double t = regime.window_start;
                    for (;;) {
                        t += rng.exponential(rate);
                        if (t > regime.window_end) break;
                        const auto& pool = cat_items[regime.categories[ci]];
                        stream.emplace_back(t, pool[rng.below(pool.size())]);
                    }
                }
            }
            if (stream.size() >= config.min_events) {
                ok = true;
                break;
            }
        }
        if (!ok)
            throw DataError("drift: retry budget exhausted for user " + drift_user_id(u));
        std::sort(stream.begin(), stream.end());
        for (const auto& [day, item] : stream)
            events.push_back(Event{drift_user_id(u), drift_item_id(item),
                                   static_cast<std::int64_t>(std::llround(day * 86400.0))});
    }
    return events;
}

std::vector<Event> make_toy_events(std::size_t users, std::size_t seq_len,
                                   std::size_t items, std::uint64_t seed) {
    if (users == 0 || seq_len == 0 || items == 0)
        throw ConfigError("make_toy_events: counts must be > 0");
    std::vector<Event> events;
    for (std::size_t u = 0; u < users; ++u) {
        Rng rng(mix_seed(seed, 0xbeef + u));
        double day = 0.0;
        for (std::size_t j = 0; j < seq_len; ++j) {
            day += 0.25 + rng.uniform(0.0, 2.0);
            events.push_back(Event{drift_user_id(u),
                                   drift_item_id(rng.below(items)),
                                   static_cast<std::int64_t>(std::llround(day * 86400.0))});
        }
    }
    return events;
}

}  // namespace smattn
