#include <doctest.h>

#include <cmath>
#include <cstring>

#include "smattn/gradcheck.hpp"
#include "smattn/rng.hpp"
#include "smattn/smlayer.hpp"

using namespace smattn;

namespace {

Vocabulary make_vocab(std::size_t n, std::size_t groups = 0) {
    Vocabulary vocab;
    for (std::size_t i = 0; i < n; ++i) {
        vocab.items.push_back("i" + std::to_string(i));
        vocab.index.emplace(vocab.items.back(), i);
    }
    if (groups > 0) {
        vocab.group_count = groups;
        vocab.groups.resize(n);
        for (std::size_t i = 0; i < n; ++i) vocab.groups[i] = i % groups;
    }
    return vocab;
}

ModelConfig config_for(const Vocabulary& vocab, std::size_t d = 6,
                       HeadMode mode = HeadMode::item) {
    ModelConfig cfg;
    cfg.d = d;
    cfg.d_e = d / 2;
    cfg.d_pe = d - d / 2;
    cfg.d_g = d;
    cfg.head_mode = mode;
    cfg.resolve_heads(vocab);
    return cfg;
}

}  // namespace

TEST_CASE("modulator features at zero elapsed time") {
    const auto vocab = make_vocab(3);
    Model model = Model::init(config_for(vocab), 5);
    std::vector<double> h(model.config.d, 0.3);

    const auto g = modulator_features(model, h, 2.5, 2.5, 1);
    // exogenous term vanishes; compare against tanh(WG_k h) by hand
    const auto& WG = model.params.get("WG");
    for (std::size_t r = 0; r < model.config.d_g; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < model.config.d; ++c)
            s += WG.at(model.config.d_g + r, c) * h[c];
        CHECK(g[r] == doctest::Approx(std::tanh(s)).epsilon(1e-15));
    }
    CHECK_THROWS_AS(modulator_features(model, h, 2.0, 2.5, 1), ConfigError);
}

TEST_CASE("modulator features zero parameters give the zero vector") {
    const auto vocab = make_vocab(2);
    Model model = Model::init(config_for(vocab), 5);
    model.params.get("WG") = NumArray::zeros(model.params.get("WG").shape);
    model.params.get("bG") = NumArray::zeros(model.params.get("bG").shape);
    std::vector<double> h(model.config.d, 1.7);
    for (double v : modulator_features(model, h, 9.0, 1.0, 0)) CHECK(v == 0.0);
}

TEST_CASE("modulator features match a fixed hand computation") {
    // 1 head, d = d_g = 3, hand-picked values
    const auto vocab = make_vocab(1);
    ModelConfig cfg;
    cfg.d = 3;
    cfg.d_e = 2;
    cfg.d_pe = 2;
    cfg.d_g = 3;
    cfg.resolve_heads(vocab);
    // d_in is unused here; build params directly
    Model model = Model::init(cfg, 1);
    model.params.get("WG") =
        NumArray{{3, 3}, {0.1, 0.2, 0.3, -0.4, 0.5, -0.6, 0.7, -0.8, 0.9}};
    model.params.get("bG") = NumArray{{3, 1}, {0.05, -0.1, 0.2}};
    const std::vector<double> h = {1.0, -2.0, 0.5};
    const double elapsed = 2.0;

    const auto g = modulator_features(model, h, 3.0, 1.0, 0);
    const double a0 = 0.1 * 1.0 + 0.2 * -2.0 + 0.3 * 0.5 + 0.05 * elapsed;
    const double a1 = -0.4 * 1.0 + 0.5 * -2.0 + -0.6 * 0.5 + -0.1 * elapsed;
    const double a2 = 0.7 * 1.0 + -0.8 * -2.0 + 0.9 * 0.5 + 0.2 * elapsed;
    CHECK(g[0] == doctest::Approx(std::tanh(a0)).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(std::tanh(a1)).epsilon(1e-12));
    CHECK(g[2] == doctest::Approx(std::tanh(a2)).epsilon(1e-12));
}

TEST_CASE("intensity closed-form points") {
    const auto vocab = make_vocab(2);
    Model model = Model::init(config_for(vocab), 3);
    model.params.get("w") = NumArray::zeros(model.params.get("w").shape);
    std::vector<double> h(model.config.d, 0.4);

    // w = 0, mu = 0, phi = 1: softplus(0) = ln 2
    CHECK(intensity(model, h, 5.0, 1.0, 0) ==
          doctest::Approx(0.6931471805599453).epsilon(1e-15));

    // w = 0, mu = 3, phi = 1: frozen high-precision softplus value
    model.params.get("mu").values[1] = 3.0;
    CHECK(intensity(model, h, 5.0, 1.0, 1) ==
          doctest::Approx(3.0485873515737421).epsilon(1e-15));
}

TEST_CASE("intensity positivity over random draws") {
    Rng rng(40);
    const auto vocab = make_vocab(4);
    for (int rep = 0; rep < 100; ++rep) {
        Model model = Model::init(config_for(vocab), rng.next_u64());
        model.params.get("mu").values[0] = rng.uniform(-5.0, 5.0);
        model.params.get("rho").values[0] = rng.uniform(-2.0, 2.0);
        for (int draw = 0; draw < 100; ++draw) {
            std::vector<double> h(model.config.d);
            for (auto& v : h) v = rng.uniform(-3.0, 3.0);
            const double t0 = rng.uniform(0.0, 50.0);
            const double lam = intensity(model, h, t0 + rng.uniform(0.0, 10.0), t0,
                                         rng.below(4));
            CHECK(lam > 0.0);
            CHECK(std::isfinite(lam));
        }
    }
}

TEST_CASE("taped intensity vector agrees with the plain evaluator") {
    Rng rng(41);
    const auto vocab = make_vocab(5, 2);
    for (HeadMode mode : {HeadMode::item, HeadMode::group}) {
        Model model = Model::init(config_for(vocab, 6, mode), 77);
        std::vector<double> h(model.config.d);
        for (auto& v : h) v = rng.uniform(-1.0, 1.0);

        Tape tape;
        ModelVars vars = bind(tape, model);
        NumArray h_arr{{1, model.config.d}, std::vector<double>(h)};
        AnchorCtx anchor = make_anchor(tape, vars, tape.input(h_arr), 2.0);
        const auto& lam = tape.value(intensity_vector(tape, model, vars, anchor, 3.7));
        REQUIRE(lam.numel() == model.config.n_heads);
        for (std::size_t k = 0; k < model.config.n_heads; ++k)
            CHECK(lam.values[k] ==
                  doctest::Approx(intensity(model, h, 3.7, 2.0, k)).epsilon(1e-12));
    }
}

TEST_CASE("group mode with identity map equals item mode bit for bit") {
    const std::size_t n = 4;
    auto vocab = make_vocab(n);
    vocab.group_count = n;
    vocab.groups.resize(n);
    for (std::size_t i = 0; i < n; ++i) vocab.groups[i] = i;

    Model item_model = Model::init(config_for(vocab, 6, HeadMode::item), 50);
    Model group_model = Model::init(config_for(vocab, 6, HeadMode::group), 50);
    REQUIRE(item_model.params.size() == group_model.params.size());
    for (std::size_t p = 0; p < item_model.params.size(); ++p) {
        const auto& [name_a, val_a] = item_model.params.entries()[p];
        const auto& [name_b, val_b] = group_model.params.entries()[p];
        CHECK(name_a == name_b);
        CHECK(std::memcmp(val_a.values.data(), val_b.values.data(),
                          val_a.numel() * sizeof(double)) == 0);
    }
    std::vector<double> h(item_model.config.d, 0.25);
    for (std::size_t k = 0; k < n; ++k)
        CHECK(intensity(item_model, h, 4.0, 1.0, k) ==
              intensity(group_model, h, 4.0, 1.0, k));
}

namespace {

struct ScoredToy {
    Model model;
    EventSequence seq;
};

ScoredToy scored_toy(double force_const = 0.0, bool plain = false) {
    const auto vocab = make_vocab(5);
    ModelConfig cfg = config_for(vocab);
    cfg.force_constant_intensity = force_const;
    cfg.plain = plain;
    ScoredToy toy{Model::init(cfg, 123), {}};
    toy.seq.user_id = "u";
    toy.seq.times = {0.0, 1.0, 2.5};
    toy.seq.items = {0, 2, 4};
    return toy;
}

std::vector<double> toy_scores(const ScoredToy& toy,
                               const std::vector<std::size_t>& candidates,
                               double t_query) {
    Tape tape;
    ModelVars vars = bind(tape, toy.model);
    ForwardOut fwd = forward_sequence(tape, toy.model, vars, toy.seq.items);
    Var h_row = tape.gather_rows(fwd.H, {toy.seq.length() - 1});
    ScoreVars sv = score_candidates(tape, toy.model, vars, h_row, toy.seq.times.back(),
                                    t_query, candidates);
    return tape.value(sv.scores).values;
}

}  // namespace

TEST_CASE("constant modulation preserves the plain ranking and scales scores") {
    const double c = 2.5;
    auto forced = scored_toy(c);
    auto plain = scored_toy(0.0, true);
    const std::vector<std::size_t> candidates = {0, 1, 2, 3, 4};
    const auto s_forced = toy_scores(forced, candidates, 3.0);
    const auto s_plain = toy_scores(plain, candidates, 3.0);
    for (std::size_t i = 0; i < candidates.size(); ++i)
        CHECK(s_forced[i] == doctest::Approx(c * s_plain[i]).epsilon(1e-15));

    // full order invariance
    for (std::size_t i = 0; i < candidates.size(); ++i)
        for (std::size_t j = 0; j < candidates.size(); ++j)
            CHECK((s_forced[i] < s_forced[j]) == (s_plain[i] < s_plain[j]));

    // constant 1 is bit-identical to plain
    auto forced_one = scored_toy(1.0);
    const auto s_one = toy_scores(forced_one, candidates, 3.0);
    CHECK(std::memcmp(s_one.data(), s_plain.data(), s_one.size() * sizeof(double)) == 0);
}

TEST_CASE("a vanishing intensity annihilates the candidate score") {
    auto toy = scored_toy();
    // drive head 1's base rate deep negative: lambda underflows toward 0
    toy.model.params.get("w") = NumArray::zeros(toy.model.params.get("w").shape);
    toy.model.params.get("mu").values[1] = -80.0;
    const auto s = toy_scores(toy, {0, 1, 2}, 3.0);
    CHECK(s[1] < 1e-20);
    CHECK(s[0] > 0.0);
    CHECK(s[2] > 0.0);
}

TEST_CASE("modulated scores match an independent step-by-step evaluation") {
    auto toy = scored_toy();
    const std::vector<std::size_t> candidates = {1, 3, 4};
    const double t_query = 4.25;
    const auto got = toy_scores(toy, candidates, t_query);

    // independent pipeline: forward H (reuse tape values), then softmax of
    // h.B over candidates and per-candidate intensity, all in plain loops
    Tape tape;
    ModelVars vars = bind(tape, toy.model);
    ForwardOut fwd = forward_sequence(tape, toy.model, vars, toy.seq.items);
    const auto& H = tape.value(fwd.H);
    std::vector<double> h(toy.model.config.d);
    for (std::size_t c = 0; c < h.size(); ++c) h[c] = H.at(toy.seq.length() - 1, c);

    const auto& B = toy.model.params.get("B");
    std::vector<double> logits(candidates.size());
    double mx = -1e300;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < h.size(); ++c) s += h[c] * B.at(candidates[i], c);
        logits[i] = s;
        mx = std::max(mx, s);
    }
    double z = 0.0;
    for (double& l : logits) {
        l = std::exp(l - mx);
        z += l;
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double p = logits[i] / z;
        const double lam =
            intensity(toy.model, h, t_query, toy.seq.times.back(), candidates[i]);
        CHECK(got[i] == doctest::Approx(p * lam).epsilon(1e-12));
    }
}

TEST_CASE("score_candidates validates its inputs") {
    auto toy = scored_toy();
    Tape tape;
    ModelVars vars = bind(tape, toy.model);
    ForwardOut fwd = forward_sequence(tape, toy.model, vars, toy.seq.items);
    Var h_row = tape.gather_rows(fwd.H, {2});
    CHECK_THROWS_AS(
        score_candidates(tape, toy.model, vars, h_row, 2.5, 3.0, {}), ConfigError);
    CHECK_THROWS_AS(
        score_candidates(tape, toy.model, vars, h_row, 2.5, 1.0, {0}), ConfigError);
}

TEST_CASE("time sensitivity within an interval") {
    auto toy = scored_toy();
    std::vector<double> h(toy.model.config.d, 0.3);
    const double a = intensity(toy.model, h, 3.0, 2.5, 2);
    const double b = intensity(toy.model, h, 4.0, 2.5, 2);
    CHECK(a != b);
}

TEST_CASE("negative exogenous weights give nonincreasing intensity in elapsed time") {
    const auto vocab = make_vocab(1);
    Model model = Model::init(config_for(vocab, 4), 9);
    auto& bG = model.params.get("bG");
    for (double& v : bG.values) v = -std::fabs(v) - 0.01;
    auto& w = model.params.get("w");
    for (double& v : w.values) v = std::fabs(v) + 0.01;
    model.params.get("WG") = NumArray::zeros(model.params.get("WG").shape);

    std::vector<double> h(model.config.d, 0.0);
    double prev = intensity(model, h, 0.0, 0.0, 0);
    for (double dt = 0.5; dt <= 10.0; dt += 0.5) {
        const double lam = intensity(model, h, dt, 0.0, 0);
        CHECK(lam <= prev);
        prev = lam;
    }
}

TEST_CASE("intensity matrix anchors at the latest event") {
    auto toy = scored_toy();
    std::vector<std::size_t> heads = {0, 1, 2, 3, 4};

    // single event, grid at the event time: zero elapsed everywhere
    EventSequence single{"u", {1.0}, {2}};
    const auto m = intensity_matrix(toy.model, single, {1.0}, heads);
    CHECK(m.rows() == 1);
    CHECK(m.cols() == heads.size());

    // constant-parameter model: columns constant across equal elapsed times
    Model constant = toy.model;
    constant.params.get("WG") = NumArray::zeros(constant.params.get("WG").shape);
    constant.params.get("bG") = NumArray::zeros(constant.params.get("bG").shape);
    EventSequence seq{"u", {0.0, 1.0, 2.0}, {0, 1, 2}};
    const auto grid = std::vector<double>{0.25, 1.25, 2.25};
    const auto mm = intensity_matrix(constant, seq, grid, heads);
    for (std::size_t k = 0; k < heads.size(); ++k) {
        CHECK(mm.at(0, k) == mm.at(1, k));
        CHECK(mm.at(1, k) == mm.at(2, k));
    }

    CHECK_THROWS_AS(intensity_matrix(toy.model, seq, {-0.5}, heads), ConfigError);
}

TEST_CASE("modulated score gradients pass the finite-difference check") {
    auto toy = scored_toy();
    const std::vector<std::size_t> candidates = {0, 1, 3};
    auto builder = [&](Tape& tape, const ParamStore& ps) {
        Model work;
        work.config = toy.model.config;
        work.params = ps;
        ModelVars vars = bind(tape, work);
        ForwardOut fwd = forward_sequence(tape, work, vars, toy.seq.items);
        Var h_row = tape.gather_rows(fwd.H, {toy.seq.length() - 1});
        ScoreVars sv = score_candidates(tape, work, vars, h_row, toy.seq.times.back(),
                                        3.5, candidates);
        return tape.sum(tape.tanh_(sv.scores));
    };
    const auto report = grad_check(builder, toy.model.params, 1e-5);
    CHECK(report.max_rel_err < 1e-4);
}
