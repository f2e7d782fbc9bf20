#include <doctest.h>

#include <cmath>
#include <cstring>

#include "smattn/attention.hpp"
#include "smattn/gradcheck.hpp"
#include "smattn/rng.hpp"

using namespace smattn;

namespace {

ModelConfig small_config(std::size_t n_items, std::size_t d = 8) {
    ModelConfig cfg;
    cfg.d = d;
    cfg.d_e = d / 2;
    cfg.d_pe = d - d / 2;
    cfg.d_g = d;
    Vocabulary vocab;
    for (std::size_t i = 0; i < n_items; ++i) {
        vocab.items.push_back("i" + std::to_string(i));
        vocab.index.emplace(vocab.items.back(), i);
    }
    cfg.resolve_heads(vocab);
    return cfg;
}

std::vector<std::size_t> random_items(std::size_t length, std::size_t n, Rng& rng) {
    std::vector<std::size_t> items(length);
    for (auto& i : items) i = rng.below(n);
    return items;
}

}  // namespace

TEST_CASE("positional encoding values") {
    const auto z = positional_encoding(3, 2, PeParity::position);
    // position 0 is even: sin(0) = 0 everywhere
    CHECK(z.at(0, 0) == 0.0);
    CHECK(z.at(0, 1) == 0.0);
    // position 1 is odd: cos(1 / 10000^((j-1)/d)); at j=1 the exponent is 0
    CHECK(z.at(1, 1) == doctest::Approx(0.5403023058681397).epsilon(1e-15));
    for (double v : z.values) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(positional_encoding(3, 3, PeParity::position), ConfigError);
}

TEST_CASE("positional encoding dimension parity matches the usual convention") {
    const std::size_t d = 6;
    const auto z = positional_encoding(5, d, PeParity::dimension);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double expo = j % 2 == 0 ? double(j) / d : double(j - 1) / d;
            const double arg = double(i) / std::pow(10000.0, expo);
            const double want = j % 2 == 0 ? std::sin(arg) : std::cos(arg);
            CHECK(z.at(i, j) == doctest::Approx(want).epsilon(1e-15));
        }
}

TEST_CASE("embed concatenates item and positional rows") {
    ModelConfig cfg = small_config(4);
    Model model = Model::init(cfg, 1);
    const auto pe = positional_encoding(1, cfg.d_pe, cfg.pe_parity);

    Tape tape;
    ModelVars vars = bind(tape, model);
    Var x = embed(tape, vars, {2}, pe);
    const auto& X = tape.value(x);
    CHECK(X.rows() == 1);
    CHECK(X.cols() == cfg.d_e + cfg.d_pe);
    const auto& Y = model.params.get("Y");
    for (std::size_t c = 0; c < cfg.d_e; ++c) CHECK(X.at(0, c) == Y.at(2, c));
    for (std::size_t c = 0; c < cfg.d_pe; ++c) CHECK(X.at(0, cfg.d_e + c) == pe.at(0, c));

    CHECK_THROWS_AS(embed(tape, vars, {99}, pe), DataError);
}

TEST_CASE("embed with a zero table leaves only the positional part") {
    ModelConfig cfg = small_config(4);
    Model model = Model::init(cfg, 1);
    model.params.get("Y") = NumArray::zeros({4, cfg.d_e});
    const auto pe = positional_encoding(3, cfg.d_pe, cfg.pe_parity);
    Tape tape;
    ModelVars vars = bind(tape, model);
    const auto& X = tape.value(embed(tape, vars, {0, 1, 2}, pe));
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < cfg.d_e; ++c) CHECK(X.at(r, c) == 0.0);
}

TEST_CASE("causal attention point mass and symmetry") {
    ModelConfig cfg = small_config(5);
    Model model = Model::init(cfg, 2);

    Tape tape;
    ModelVars vars = bind(tape, model);
    ForwardOut one = forward_sequence(tape, model, vars, {3});
    CHECK(tape.value(one.P).values == std::vector<double>{1.0});
    const auto& H = tape.value(one.H);
    const auto& V = tape.value(one.V);
    for (std::size_t c = 0; c < cfg.d; ++c) CHECK(H.at(0, c) == V.at(0, c));

    // two identical events (same item, same positional row) split evenly
    Tape tape2;
    ModelVars vars2 = bind(tape2, model);
    const NumArray pe_same = NumArray::zeros({2, cfg.d_pe});
    Var x = embed(tape2, vars2, {3, 3}, pe_same);
    ForwardOut fwd = causal_attention(tape2, model.config, vars2, x);
    const auto& P = tape2.value(fwd.P);
    CHECK(P.at(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(P.at(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("causal attention matches a per-row oracle") {
    Rng rng(31);
    ModelConfig cfg = small_config(6);
    Model model = Model::init(cfg, 3);
    const auto items = random_items(4, 6, rng);

    Tape tape;
    ModelVars vars = bind(tape, model);
    const auto pe = positional_encoding(4, cfg.d_pe, cfg.pe_parity);
    Var xv = embed(tape, vars, items, pe);
    ForwardOut fwd = causal_attention(tape, model.config, vars, xv);

    // independent evaluation with plain loops
    const auto& X = tape.value(xv);
    auto project = [&](const NumArray& W) {
        NumArray out = NumArray::zeros({4, cfg.d});
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < cfg.d; ++j)
                for (std::size_t k = 0; k < X.cols(); ++k)
                    out.at(i, j) += X.at(i, k) * W.at(k, j);
        return out;
    };
    const NumArray q = project(model.params.get("Wq0"));
    const NumArray k = project(model.params.get("Wk0"));
    const NumArray v = project(model.params.get("Wv0"));
    const auto& H = tape.value(fwd.H);
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<double> row(i + 1);
        double mx = -1e300;
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < cfg.d; ++c) s += q.at(i, c) * k.at(j, c);
            row[j] = s / std::sqrt(double(cfg.d));
            mx = std::max(mx, row[j]);
        }
        double z = 0.0;
        for (double& s : row) {
            s = std::exp(s - mx);
            z += s;
        }
        for (std::size_t c = 0; c < cfg.d; ++c) {
            double h = 0.0;
            for (std::size_t j = 0; j <= i; ++j) h += row[j] / z * v.at(j, c);
            CHECK(H.at(i, c) == doctest::Approx(h).epsilon(1e-12));
        }
    }
}

TEST_CASE("causality: future perturbations leave earlier rows bit-identical") {
    Rng rng(77);
    ModelConfig cfg = small_config(8);
    Model model = Model::init(cfg, 4);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t length = 2 + rng.below(8);
        auto items = random_items(length, 8, rng);
        const std::size_t j = rng.below(length - 1);  // keep rows 0..j

        Tape t1;
        ModelVars v1 = bind(t1, model);
        ForwardOut f1 = forward_sequence(t1, model, v1, items);

        auto perturbed = items;
        for (std::size_t p = j + 1; p < length; ++p) perturbed[p] = rng.below(8);
        Tape t2;
        ModelVars v2 = bind(t2, model);
        ForwardOut f2 = forward_sequence(t2, model, v2, perturbed);

        const auto& H1 = t1.value(f1.H);
        const auto& H2 = t2.value(f2.H);
        const auto& P1 = t1.value(f1.P);
        const auto& P2 = t2.value(f2.P);
        for (std::size_t r = 0; r <= j; ++r) {
            CHECK(std::memcmp(&H1.values[r * cfg.d], &H2.values[r * cfg.d],
                              cfg.d * sizeof(double)) == 0);
            CHECK(std::memcmp(&P1.values[r * length], &P2.values[r * length],
                              length * sizeof(double)) == 0);
        }
    }
}

TEST_CASE("attention rows are stochastic and strictly causal") {
    Rng rng(12);
    ModelConfig cfg = small_config(7);
    Model model = Model::init(cfg, 9);
    const auto items = random_items(6, 7, rng);
    Tape tape;
    ModelVars vars = bind(tape, model);
    ForwardOut fwd = forward_sequence(tape, model, vars, items);
    const auto& P = tape.value(fwd.P);
    for (std::size_t r = 0; r < 6; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < 6; ++c) {
            if (c > r) CHECK(P.at(r, c) == 0.0);
            sum += P.at(r, c);
        }
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("swapping two distinct past items changes the last representation") {
    ModelConfig cfg = small_config(9);
    Model model = Model::init(cfg, 5);
    std::vector<std::size_t> items = {1, 4, 7, 2, 5};
    std::vector<std::size_t> swapped = {4, 1, 7, 2, 5};

    Tape t1, t2;
    ModelVars v1 = bind(t1, model);
    ModelVars v2 = bind(t2, model);
    const auto& h1 = t1.value(forward_sequence(t1, model, v1, items).H);
    const auto& h2 = t2.value(forward_sequence(t2, model, v2, swapped).H);
    bool differs = false;
    for (std::size_t c = 0; c < cfg.d; ++c)
        differs = differs || h1.at(4, c) != h2.at(4, c);
    CHECK(differs);
}

TEST_CASE("attention gradients pass the finite-difference check") {
    Rng rng(21);
    ModelConfig cfg = small_config(5, 6);
    Model model = Model::init(cfg, 6);
    const auto items = random_items(4, 5, rng);

    auto builder = [&](Tape& tape, const ParamStore& ps) {
        Model work;
        work.config = cfg;
        work.params = ps;
        ModelVars vars = bind(tape, work);
        ForwardOut fwd = forward_sequence(tape, work, vars, items);
        return tape.sum(tape.tanh_(fwd.H));
    };
    const auto report = grad_check(builder, model.params, 1e-5);
    CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("stacked blocks and residuals stay causal") {
    ModelConfig cfg = small_config(5);
    cfg.blocks = 2;
    cfg.residual = true;  // d_in == d here
    cfg.validate();
    Model model = Model::init(cfg, 8);

    std::vector<std::size_t> items = {0, 1, 2, 3};
    std::vector<std::size_t> perturbed = {0, 1, 2, 4};
    Tape t1, t2;
    ModelVars v1 = bind(t1, model);
    ModelVars v2 = bind(t2, model);
    const auto& h1 = t1.value(forward_sequence(t1, model, v1, items).H);
    const auto& h2 = t2.value(forward_sequence(t2, model, v2, perturbed).H);
    for (std::size_t r = 0; r < 3; ++r)
        CHECK(std::memcmp(&h1.values[r * cfg.d], &h2.values[r * cfg.d],
                          cfg.d * sizeof(double)) == 0);
}
