#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "smattn/errors.hpp"

namespace smattn {

struct Event {
    std::string user_id;
    std::string item_id;
    std::int64_t timestamp = 0;  // seconds since epoch, >= 0

    bool operator==(const Event&) const = default;
};

// One user's time-ordered interactions. Times are stored as doubles;
// raw seconds straight after ingestion, days-from-first after
// normalize_time. item indices refer to a Vocabulary.
struct EventSequence {
    std::string user_id;
    std::vector<double> times;        // nondecreasing
    std::vector<std::size_t> items;   // same length as times

    std::size_t length() const { return times.size(); }
};

struct Vocabulary {
    std::vector<std::string> items;                       // index -> id
    std::unordered_map<std::string, std::size_t> index;   // id -> index
    std::vector<std::size_t> groups;                      // item index -> group; empty if none
    std::size_t group_count = 0;

    std::size_t size() const { return items.size(); }
    std::size_t lookup(const std::string& id) const {
        auto it = index.find(id);
        if (it == index.end()) throw DataError("Vocabulary: unknown item " + id);
        return it->second;
    }
    bool has_groups() const { return !groups.empty(); }
};

// Strong-generalization split: training users are used whole; each
// validation/test user contributes a context prefix plus a held-out last
// event. Users with a single event cannot provide a context and are kept
// out of the metric sets.
struct HoldoutUser {
    EventSequence context;
    double holdout_time = 0.0;
    std::size_t holdout_item = 0;
};

struct SplitPlan {
    std::vector<EventSequence> train;
    std::vector<HoldoutUser> validation;
    std::vector<HoldoutUser> test;
    std::vector<std::string> skipped;  // single-event holdout users
};

enum class EventFormat { csv, jsonl };

EventFormat parse_event_format(const std::string& name);

// CSV: "user_id,item_id,timestamp", optional header (detected by a
// non-numeric third field on the first line). JSONL: {"user","item","ts"}.
std::vector<Event> parse_events(std::istream& in, EventFormat format);
void write_events_csv(std::ostream& out, const std::vector<Event>& events);

// Iterative support filtering to a fixed point, then per-user assembly
// with a stable (timestamp, input order) sort. Item and user indices are
// assigned in sorted-id order for input-order independence.
std::pair<Vocabulary, std::vector<EventSequence>> build_sequences(
    const std::vector<Event>& events, std::size_t min_user_events,
    std::size_t min_item_count);

enum class TimeScheme { days_from_first };

EventSequence normalize_time(const EventSequence& seq,
                             TimeScheme scheme = TimeScheme::days_from_first);

struct SplitRatios {
    unsigned train = 8, validation = 1, test = 1;
};

SplitPlan split_strong_generalization(const std::vector<EventSequence>& sequences,
                                      SplitRatios ratios, std::uint64_t seed);

// "item_id,group_id" CSV; group ids are densified to [0, G) in sorted
// order. Every vocabulary item must be covered.
void load_group_map(std::istream& in, Vocabulary& vocab);

}  // namespace smattn
