#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "smattn/events.hpp"

using namespace smattn;

TEST_CASE("csv parsing") {
    std::istringstream in("u1,i3,1609459200\n");
    const auto events = parse_events(in, EventFormat::csv);
    REQUIRE(events.size() == 1);
    CHECK(events[0] == Event{"u1", "i3", 1609459200});

    std::istringstream empty("");
    CHECK(parse_events(empty, EventFormat::csv).empty());

    std::istringstream mixed(
        "u1,a,5\nu2,b,3\nu1,b,9\nu3,a,1\nu2,a,9\nu1,a,2\n");
    const auto six = parse_events(mixed, EventFormat::csv);
    REQUIRE(six.size() == 6);
    CHECK(six[0].user_id == "u1");
    CHECK(six[3] == Event{"u3", "a", 1});
    CHECK(six[5] == Event{"u1", "a", 2});
}

TEST_CASE("csv header autodetection and errors") {
    std::istringstream with_header("user_id,item_id,timestamp\nu1,i1,7\n");
    CHECK(parse_events(with_header, EventFormat::csv).size() == 1);

    std::istringstream bad("u1,i1,7\nu2,i2\n");
    CHECK_THROWS_WITH_AS(parse_events(bad, EventFormat::csv),
                         doctest::Contains("line 2"), DataError);

    std::istringstream negative("u1,i1,-5\n");
    CHECK_THROWS_AS(parse_events(negative, EventFormat::csv), DataError);

    CHECK_THROWS_AS(parse_event_format("xml"), ConfigError);
}

TEST_CASE("jsonl parsing") {
    std::istringstream in(
        "{\"user\":\"u1\",\"item\":\"i2\",\"ts\":120}\n"
        "{\"user\":\"u2\",\"item\":\"i9\",\"ts\":0}\n");
    const auto events = parse_events(in, EventFormat::jsonl);
    REQUIRE(events.size() == 2);
    CHECK(events[1] == Event{"u2", "i9", 0});

    std::istringstream bad("{\"user\":\"u1\"}\n");
    CHECK_THROWS_AS(parse_events(bad, EventFormat::jsonl), DataError);
}

TEST_CASE("event round trip") {
    std::vector<Event> events = {
        {"u1", "a", 5}, {"u1", "a", 5}, {"u2", "b", 0}, {"u3", "c", 123456789}};
    std::ostringstream out;
    write_events_csv(out, events);
    std::istringstream in(out.str());
    CHECK(parse_events(in, EventFormat::csv) == events);
}

namespace {

std::vector<Event> user_events(const std::string& user, std::size_t count,
                               const std::string& item = "x") {
    std::vector<Event> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back({user, item, static_cast<std::int64_t>(i * 10)});
    return out;
}

}  // namespace

TEST_CASE("build_sequences threshold boundaries") {
    auto five = user_events("u1", 5);
    auto [vocab5, seqs5] = build_sequences(five, 5, 1);
    CHECK(seqs5.size() == 1);
    CHECK(seqs5[0].length() == 5);

    auto four = user_events("u1", 4);
    CHECK_THROWS_AS(build_sequences(four, 5, 1), DataError);

    CHECK_THROWS_AS(build_sequences(five, 0, 1), ConfigError);
}

TEST_CASE("build_sequences cascaded filtering reaches a fixed point") {
    // u2 only has 2 events and is dropped; that pushes item b below its
    // threshold, which shrinks u1 below 3 events; u3 survives alone.
    std::vector<Event> events = {
        {"u1", "a", 1}, {"u1", "a", 2}, {"u1", "b", 3},
        {"u2", "b", 1}, {"u2", "c", 2},
        {"u3", "c", 1}, {"u3", "c", 2}, {"u3", "c", 3},
    };
    auto [vocab, seqs] = build_sequences(events, 3, 2);
    REQUIRE(seqs.size() == 1);
    CHECK(seqs[0].user_id == "u3");
    CHECK(seqs[0].length() == 3);
    REQUIRE(vocab.size() == 1);
    CHECK(vocab.items[0] == "c");
}

TEST_CASE("build_sequences post-conditions hold") {
    std::vector<Event> events;
    for (auto& e : user_events("u1", 6, "a")) events.push_back(e);
    for (auto& e : user_events("u2", 7, "b")) events.push_back(e);
    for (auto& e : user_events("u3", 2, "a")) events.push_back(e);
    auto [vocab, seqs] = build_sequences(events, 5, 3);
    std::vector<std::size_t> item_counts(vocab.size(), 0);
    for (const auto& seq : seqs) {
        CHECK(seq.length() >= 5);
        for (std::size_t i = 0; i < seq.length(); ++i) {
            if (i) CHECK(seq.times[i] >= seq.times[i - 1]);
            ++item_counts[seq.items[i]];
        }
    }
    for (std::size_t c : item_counts) CHECK(c >= 3);
}

TEST_CASE("stable tie-break for simultaneous events") {
    std::vector<Event> events = {
        {"u1", "a", 100}, {"u1", "b", 100}, {"u1", "c", 100},
        {"u1", "d", 100}, {"u1", "e", 100},
    };
    auto [vocab, seqs] = build_sequences(events, 5, 1);
    REQUIRE(seqs.size() == 1);
    // original file order preserved under equal timestamps
    CHECK(vocab.items[seqs[0].items[0]] == "a");
    CHECK(vocab.items[seqs[0].items[4]] == "e");
}

TEST_CASE("normalize_time") {
    EventSequence seq{"u", {0.0, 86400.0}, {0, 0}};
    const auto norm = normalize_time(seq);
    CHECK(norm.times == std::vector<double>{0.0, 1.0});

    EventSequence single{"u", {500.0}, {0}};
    CHECK(normalize_time(single).times == std::vector<double>{0.0});

    EventSequence ties{"u", {5.0, 5.0, 5.0}, {0, 0, 0}};
    CHECK(normalize_time(ties).times == std::vector<double>{0.0, 0.0, 0.0});
}

namespace {

std::vector<EventSequence> make_users(std::size_t count, std::size_t events_each = 3) {
    std::vector<EventSequence> out;
    for (std::size_t u = 0; u < count; ++u) {
        EventSequence seq;
        seq.user_id = "u" + std::to_string(100 + u);
        for (std::size_t j = 0; j < events_each; ++j) {
            seq.times.push_back(static_cast<double>(j));
            seq.items.push_back(j % 3);
        }
        out.push_back(std::move(seq));
    }
    return out;
}

}  // namespace

TEST_CASE("split sizes follow floor-then-remainder") {
    const auto plan10 = split_strong_generalization(make_users(10), {}, 42);
    CHECK(plan10.train.size() == 8);
    CHECK(plan10.validation.size() == 1);
    CHECK(plan10.test.size() == 1);

    // 12 users: floor(12/10) = 1 each to validation and test, rest to training
    const auto plan12 = split_strong_generalization(make_users(12), {}, 42);
    CHECK(plan12.train.size() == 10);
    CHECK(plan12.validation.size() == 1);
    CHECK(plan12.test.size() == 1);

    CHECK_THROWS_AS(split_strong_generalization(make_users(2), {}, 1), DataError);
}

TEST_CASE("split determinism and partition") {
    const auto users = make_users(20);
    const auto a = split_strong_generalization(users, {}, 7);
    const auto b = split_strong_generalization(users, {}, 7);
    REQUIRE(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i)
        CHECK(a.train[i].user_id == b.train[i].user_id);
    REQUIRE(a.test.size() == b.test.size());
    for (std::size_t i = 0; i < a.test.size(); ++i)
        CHECK(a.test[i].context.user_id == b.test[i].context.user_id);

    std::set<std::string> seen;
    for (const auto& s : a.train) seen.insert(s.user_id);
    for (const auto& h : a.validation) seen.insert(h.context.user_id);
    for (const auto& h : a.test) seen.insert(h.context.user_id);
    for (const auto& u : a.skipped) seen.insert(u);
    CHECK(seen.size() == users.size());
}

TEST_CASE("holdout reconstructs the original sequence") {
    const auto users = make_users(10, 4);
    const auto plan = split_strong_generalization(users, {}, 3);
    for (const auto& h : plan.test) {
        const auto it = std::find_if(users.begin(), users.end(), [&](const auto& s) {
            return s.user_id == h.context.user_id;
        });
        REQUIRE(it != users.end());
        CHECK(h.context.length() + 1 == it->length());
        CHECK(h.holdout_time == it->times.back());
        CHECK(h.holdout_item == it->items.back());
        for (std::size_t i = 0; i < h.context.length(); ++i) {
            CHECK(h.context.times[i] == it->times[i]);
            CHECK(h.context.items[i] == it->items[i]);
        }
    }
}

TEST_CASE("single-event holdout users are skipped with a warning") {
    auto users = make_users(10);
    for (auto& u : users) {  // make every candidate a single-event user
        u.times.resize(1);
        u.items.resize(1);
    }
    const auto plan = split_strong_generalization(users, {}, 5);
    CHECK(plan.validation.empty());
    CHECK(plan.test.empty());
    CHECK(plan.skipped.size() == 2);
    CHECK(plan.train.size() == 8);
}

TEST_CASE("group map loading") {
    Vocabulary vocab;
    vocab.items = {"a", "b", "c"};
    for (std::size_t i = 0; i < 3; ++i) vocab.index.emplace(vocab.items[i], i);

    std::istringstream in("item_id,group_id\na,g1\nb,g0\nc,g1\n");
    load_group_map(in, vocab);
    REQUIRE(vocab.has_groups());
    CHECK(vocab.group_count == 2);
    CHECK(vocab.groups[0] == vocab.groups[2]);
    CHECK(vocab.groups[0] != vocab.groups[1]);

    Vocabulary missing;
    missing.items = {"a", "zz"};
    missing.index = {{"a", 0}, {"zz", 1}};
    std::istringstream in2("a,g1\n");
    CHECK_THROWS_AS(load_group_map(in2, missing), DataError);
}
