#include "smattn/events.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "smattn/log.hpp"
#include "smattn/rng.hpp"

namespace smattn {

namespace {

bool is_integer_field(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

Event make_event(std::string user, std::string item, const std::string& ts_field,
                 std::size_t line_no) {
    if (!is_integer_field(ts_field))
        throw DataError("parse error at line " + std::to_string(line_no) +
                        ": bad timestamp '" + ts_field + "'");
    std::int64_t ts = 0;
    try {
        ts = std::stoll(ts_field);
    } catch (const std::exception&) {
        throw DataError("parse error at line " + std::to_string(line_no) +
                        ": timestamp out of range");
    }
    if (ts < 0)
        throw DataError("parse error at line " + std::to_string(line_no) +
                        ": negative timestamp");
    return Event{std::move(user), std::move(item), ts};
}

}  // namespace

EventFormat parse_event_format(const std::string& name) {
    if (name == "csv") return EventFormat::csv;
    if (name == "jsonl") return EventFormat::jsonl;
    throw ConfigError("unknown event format '" + name + "' (expected csv or jsonl)");
}

std::vector<Event> parse_events(std::istream& in, EventFormat format) {
    std::vector<Event> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (format == EventFormat::csv) {
            auto fields = split_csv_line(line);
            if (fields.size() != 3)
                throw DataError("parse error at line " + std::to_string(line_no) +
                                ": expected 3 fields, got " + std::to_string(fields.size()));
            if (line_no == 1 && !is_integer_field(fields[2])) continue;  // header
            events.push_back(make_event(fields[0], fields[1], fields[2], line_no));
        } else {
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("user") ||
                !j.contains("item") || !j.contains("ts"))
                throw DataError("parse error at line " + std::to_string(line_no) +
                                ": expected {\"user\",\"item\",\"ts\"}");
            if (!j["ts"].is_number_integer() || j["ts"].get<std::int64_t>() < 0)
                throw DataError("parse error at line " + std::to_string(line_no) +
                                ": ts must be a nonnegative integer");
            events.push_back(Event{j["user"].get<std::string>(),
                                   j["item"].get<std::string>(),
                                   j["ts"].get<std::int64_t>()});
        }
    }
    return events;
}

void write_events_csv(std::ostream& out, const std::vector<Event>& events) {
    out << "user_id,item_id,timestamp\n";
    for (const auto& e : events)
        out << e.user_id << ',' << e.item_id << ',' << e.timestamp << '\n';
}

std::pair<Vocabulary, std::vector<EventSequence>> build_sequences(
    const std::vector<Event>& events, std::size_t min_user_events,
    std::size_t min_item_count) {
    if (min_user_events < 1 || min_item_count < 1)
        throw ConfigError("build_sequences: thresholds must be >= 1");

    std::vector<char> alive(events.size(), 1);
    bool changed = true;
    while (changed) {
        changed = false;
        std::unordered_map<std::string, std::size_t> item_count;
        for (std::size_t i = 0; i < events.size(); ++i)
            if (alive[i]) ++item_count[events[i].item_id];
        for (std::size_t i = 0; i < events.size(); ++i)
            if (alive[i] && item_count[events[i].item_id] < min_item_count) {
                alive[i] = 0;
                changed = true;
            }
        std::unordered_map<std::string, std::size_t> user_count;
        for (std::size_t i = 0; i < events.size(); ++i)
            if (alive[i]) ++user_count[events[i].user_id];
        for (std::size_t i = 0; i < events.size(); ++i)
            if (alive[i] && user_count[events[i].user_id] < min_user_events) {
                alive[i] = 0;
                changed = true;
            }
    }

    std::set<std::string> item_ids;
    std::set<std::string> user_ids;
    for (std::size_t i = 0; i < events.size(); ++i)
        if (alive[i]) {
            item_ids.insert(events[i].item_id);
            user_ids.insert(events[i].user_id);
        }
    if (user_ids.empty())
        throw DataError("build_sequences: all data filtered out");

    Vocabulary vocab;
    for (const auto& id : item_ids) {
        vocab.index.emplace(id, vocab.items.size());
        vocab.items.push_back(id);
    }

    // (timestamp, original position) per user; the position gives the
    // stable tie-break for simultaneous events.
    std::map<std::string, std::vector<std::pair<std::int64_t, std::size_t>>> per_user;
    for (std::size_t i = 0; i < events.size(); ++i)
        if (alive[i]) per_user[events[i].user_id].emplace_back(events[i].timestamp, i);

    std::vector<EventSequence> sequences;
    sequences.reserve(per_user.size());
    for (auto& [user, recs] : per_user) {
        std::stable_sort(recs.begin(), recs.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        EventSequence seq;
        seq.user_id = user;
        seq.times.reserve(recs.size());
        seq.items.reserve(recs.size());
        for (const auto& [ts, pos] : recs) {
            seq.times.push_back(static_cast<double>(ts));
            seq.items.push_back(vocab.index.at(events[pos].item_id));
        }
        sequences.push_back(std::move(seq));
    }
    return {std::move(vocab), std::move(sequences)};
}

EventSequence normalize_time(const EventSequence& seq, TimeScheme scheme) {
    if (seq.length() == 0) throw DataError("normalize_time: empty sequence");
    (void)scheme;  // days_from_first is the only scheme
    EventSequence out = seq;
    const double t0 = seq.times.front();
    for (double& t : out.times) t = (t - t0) / 86400.0;
    return out;
}

SplitPlan split_strong_generalization(const std::vector<EventSequence>& sequences,
                                      SplitRatios ratios, std::uint64_t seed) {
    if (sequences.size() < 3)
        throw DataError("split: need at least 3 users");
    if (ratios.train == 0 || ratios.validation == 0 || ratios.test == 0)
        throw ConfigError("split: ratios must be positive");

    std::vector<std::size_t> order(sequences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Canonical order before shuffling so the plan depends only on the
    // user set and the seed, not on input order.
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sequences[a].user_id < sequences[b].user_id;
    });
    Rng rng(seed);
    rng.shuffle(order);

    const std::size_t m = sequences.size();
    const unsigned total = ratios.train + ratios.validation + ratios.test;
    const std::size_t n_val = m * ratios.validation / total;
    const std::size_t n_test = m * ratios.test / total;
    const std::size_t n_train = m - n_val - n_test;  // remainder goes to training

    SplitPlan plan;
    auto add_holdout = [&](std::vector<HoldoutUser>& dest, const EventSequence& seq) {
        if (seq.length() < 2) {
            log_warn("split: user %s has a single event; excluded from metrics",
                     seq.user_id.c_str());
            plan.skipped.push_back(seq.user_id);
            return;
        }
        HoldoutUser h;
        h.context.user_id = seq.user_id;
        h.context.times.assign(seq.times.begin(), seq.times.end() - 1);
        h.context.items.assign(seq.items.begin(), seq.items.end() - 1);
        h.holdout_time = seq.times.back();
        h.holdout_item = seq.items.back();
        dest.push_back(std::move(h));
    };

    for (std::size_t i = 0; i < m; ++i) {
        const EventSequence& seq = sequences[order[i]];
        if (i < n_train)
            plan.train.push_back(seq);
        else if (i < n_train + n_val)
            add_holdout(plan.validation, seq);
        else
            add_holdout(plan.test, seq);
    }
    return plan;
}

void load_group_map(std::istream& in, Vocabulary& vocab) {
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::string> raw;  // item id -> group label
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw DataError("group map: parse error at line " + std::to_string(line_no));
        if (line_no == 1 && fields[0] == "item_id") continue;  // header
        raw[fields[0]] = fields[1];
    }

    std::set<std::string> labels;
    for (const auto& id : vocab.items) {
        auto it = raw.find(id);
        if (it == raw.end())
            throw DataError("group map: item " + id + " has no group");
        labels.insert(it->second);
    }
    std::map<std::string, std::size_t> dense;
    for (const auto& l : labels) dense.emplace(l, dense.size());

    vocab.groups.resize(vocab.items.size());
    for (std::size_t i = 0; i < vocab.items.size(); ++i)
        vocab.groups[i] = dense.at(raw.at(vocab.items[i]));
    vocab.group_count = dense.size();
}

}  // namespace smattn
