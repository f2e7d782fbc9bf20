#include <doctest.h>

#include <cmath>
#include <cstring>

#include "smattn/gradcheck.hpp"
#include "smattn/rng.hpp"
#include "smattn/tape.hpp"

using namespace smattn;

namespace {

NumArray random_array(std::vector<std::size_t> shape, Rng& rng, double lo = -2.0,
                      double hi = 2.0) {
    NumArray a = NumArray::zeros(std::move(shape));
    for (double& v : a.values) v = rng.uniform(lo, hi);
    return a;
}

// independent triple-loop product
NumArray matmul_oracle(const NumArray& a, const NumArray& b) {
    NumArray out = NumArray::zeros({a.rows(), b.cols()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(k, j);
            out.at(i, j) = s;
        }
    return out;
}

}  // namespace

TEST_CASE("matmul identity and hand cases") {
    Tape t;
    Var id = t.input(NumArray{{2, 2}, {1, 0, 0, 1}});
    Var v = t.input(NumArray{{2, 1}, {3, 4}});
    CHECK(t.value(t.matmul(id, v)).values == std::vector<double>{3, 4});

    Var a = t.input(NumArray{{1, 2}, {1, 2}});
    Var b = t.input(NumArray{{2, 1}, {3, 4}});
    CHECK(t.value(t.matmul(a, b)).values == std::vector<double>{11});
}

TEST_CASE("matmul matches triple-loop oracle") {
    Rng rng(11);
    NumArray a = random_array({5, 7}, rng);
    NumArray b = random_array({7, 3}, rng);
    Tape t;
    const NumArray& got = t.value(t.matmul(t.input(a), t.input(b)));
    const NumArray want = matmul_oracle(a, b);
    for (std::size_t i = 0; i < want.numel(); ++i)
        CHECK(got.values[i] == doctest::Approx(want.values[i]).epsilon(1e-12));
}

TEST_CASE("matmul shape mismatch") {
    Tape t;
    Var a = t.input(NumArray::zeros({2, 3}));
    Var b = t.input(NumArray::zeros({2, 3}));
    CHECK_THROWS_AS(t.matmul(a, b), NumericError);
}

TEST_CASE("masked softmax basics") {
    Tape t;
    Var s = t.input(NumArray{{1, 2}, {0, 0}});
    const auto& y = t.value(t.masked_softmax_rows(s, {1, 1}));
    CHECK(y.values[0] == doctest::Approx(0.5));
    CHECK(y.values[1] == doctest::Approx(0.5));

    Var s2 = t.input(NumArray{{1, 2}, {0.7, 123.0}});
    const auto& y2 = t.value(t.masked_softmax_rows(s2, {1, 0}));
    CHECK(y2.values[0] == 1.0);
    CHECK(y2.values[1] == 0.0);

    // direct exp-normalize oracle
    Var s3 = t.input(NumArray{{1, 3}, {1, 2, 3}});
    const auto& y3 = t.value(t.masked_softmax_rows(s3, {1, 1, 1}));
    const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(y3.values[i] ==
              doctest::Approx(std::exp(1.0 + static_cast<double>(i)) / z).epsilon(1e-12));
}

TEST_CASE("masked softmax row properties over random draws") {
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t rows = 1 + rng.below(4), cols = 1 + rng.below(6);
        NumArray s = random_array({rows, cols}, rng, -50.0, 50.0);
        std::vector<std::uint8_t> mask(rows * cols);
        for (std::size_t r = 0; r < rows; ++r) {
            bool any = false;
            for (std::size_t c = 0; c < cols; ++c) {
                mask[r * cols + c] = rng.uniform01() < 0.6;
                any = any || mask[r * cols + c];
            }
            if (!any) mask[r * cols + rng.below(cols)] = 1;
        }
        Tape t;
        const auto& y = t.value(t.masked_softmax_rows(t.input(s), mask));
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                if (!mask[r * cols + c]) {
                    CHECK(y.at(r, c) == 0.0);
                } else {
                    CHECK(y.at(r, c) > 0.0);
                    sum += y.at(r, c);
                }
            }
            CHECK(std::fabs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("masked softmax rejects fully masked rows") {
    Tape t;
    Var s = t.input(NumArray{{1, 2}, {0, 0}});
    CHECK_THROWS_AS(t.masked_softmax_rows(s, {0, 0}), NumericError);
}

TEST_CASE("scaled softplus values") {
    CHECK(scaled_softplus_value(0.0, 1.0) ==
          doctest::Approx(0.6931471805599453).epsilon(1e-15));
    CHECK(scaled_softplus_value(0.0, 2.0) ==
          doctest::Approx(1.3862943611198906).epsilon(1e-15));
    // high-precision evaluation, frozen
    CHECK(scaled_softplus_value(10.0, 1.0) ==
          doctest::Approx(10.000045398899217).epsilon(1e-15));

    Tape t;
    Var x = t.input(NumArray::scalar(0.0));
    Var phi = t.input(NumArray::scalar(-1.0));
    CHECK_THROWS_AS(t.scaled_softplus(x, phi), ConfigError);
}

TEST_CASE("scaled softplus positivity, monotonicity and sharp limit") {
    Rng rng(3);
    double prev = scaled_softplus_value(-10.0, 0.7);
    for (double x = -10.0; x <= 10.0; x += 0.25) {
        const double y = scaled_softplus_value(x, 0.7);
        CHECK(y > 0.0);
        CHECK(y >= prev);
        prev = y;
    }
    for (double x = -10.0; x <= 10.0; x += 0.5) {
        const double y = scaled_softplus_value(x, 1e-6);
        CHECK(std::fabs(y - std::max(x, 0.0)) < 1e-4);
    }
    for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform(-700.0, 700.0);
        const double phi = std::exp(rng.uniform(-3.0, 3.0));
        CHECK(scaled_softplus_value(x, phi) > 0.0);
        CHECK(std::isfinite(scaled_softplus_value(x, phi)));
    }
}

TEST_CASE("per-primitive gradients match finite differences") {
    Rng rng(17);

    // each case: (name, builder over a single 'x' parameter)
    struct Case {
        const char* name;
        std::vector<std::size_t> shape;
        std::function<Var(Tape&, Var)> build;
    };
    const std::vector<Case> cases = {
        {"tanh", {3, 2}, [](Tape& t, Var x) { return t.sum(t.tanh_(x)); }},
        {"exp", {4}, [](Tape& t, Var x) { return t.sum(t.exp_(x)); }},
        {"softplus", {5}, [](Tape& t, Var x) { return t.sum(t.softplus(x)); }},
        {"scale", {4}, [](Tape& t, Var x) { return t.sum(t.scale(x, -1.7)); }},
        {"transpose", {3, 4},
         [](Tape& t, Var x) { return t.sum(t.tanh_(t.transpose(x))); }},
        {"reshape", {2, 6},
         [](Tape& t, Var x) { return t.sum(t.tanh_(t.reshape(x, {3, 4}))); }},
        {"row_sums", {3, 4},
         [](Tape& t, Var x) { return t.sum(t.tanh_(t.row_sums(x))); }},
        {"gather", {6},
         [](Tape& t, Var x) {
             return t.sum(t.tanh_(t.gather_elements(x, {0, 2, 2, 5})));
         }},
        {"element", {4}, [](Tape& t, Var x) { return t.tanh_(t.element(x, 2)); }},
        {"softmax", {2, 4},
         [](Tape& t, Var x) {
             return t.sum(
                 t.tanh_(t.masked_softmax_rows(x, {1, 1, 0, 1, 1, 0, 1, 1})));
         }},
    };

    for (const auto& c : cases) {
        CAPTURE(c.name);
        ParamStore params;
        params.add("x", random_array(c.shape, rng));
        auto builder = [&](Tape& t, const ParamStore& ps) {
            return c.build(t, t.param("x", ps.get("x")));
        };
        const auto report = grad_check(builder, params, 1e-5);
        CHECK(report.max_rel_err < 1e-4);
    }

    // binary ops over two parameters
    struct Case2 {
        const char* name;
        std::vector<std::size_t> sa, sb;
        std::function<Var(Tape&, Var, Var)> build;
    };
    const std::vector<Case2> cases2 = {
        {"matmul", {3, 4}, {4, 2},
         [](Tape& t, Var a, Var b) { return t.sum(t.tanh_(t.matmul(a, b))); }},
        {"add", {3, 2}, {3, 2},
         [](Tape& t, Var a, Var b) { return t.sum(t.tanh_(t.add(a, b))); }},
        {"sub", {3, 2}, {3, 2},
         [](Tape& t, Var a, Var b) { return t.sum(t.tanh_(t.sub(a, b))); }},
        {"mul", {3, 2}, {3, 2},
         [](Tape& t, Var a, Var b) { return t.sum(t.tanh_(t.mul(a, b))); }},
        {"concat", {3, 2}, {3, 3},
         [](Tape& t, Var a, Var b) { return t.sum(t.tanh_(t.concat_cols(a, b))); }},
        {"row_broadcast", {3, 4}, {1, 4},
         [](Tape& t, Var a, Var b) {
             return t.sum(t.tanh_(t.add_row_broadcast(a, b)));
         }},
    };
    for (const auto& c : cases2) {
        CAPTURE(c.name);
        ParamStore params;
        params.add("a", random_array(c.sa, rng));
        params.add("b", random_array(c.sb, rng));
        auto builder = [&](Tape& t, const ParamStore& ps) {
            return c.build(t, t.param("a", ps.get("a")), t.param("b", ps.get("b")));
        };
        const auto report = grad_check(builder, params, 1e-5);
        CHECK(report.max_rel_err < 1e-4);
    }

    // scaled softplus: gradient w.r.t. both x and phi (phi via exp to stay positive)
    {
        ParamStore params;
        params.add("x", random_array({5}, rng));
        params.add("r", random_array({5}, rng, -1.0, 1.0));
        auto builder = [&](Tape& t, const ParamStore& ps) {
            Var x = t.param("x", ps.get("x"));
            Var r = t.param("r", ps.get("r"));
            return t.sum(t.scaled_softplus(x, t.exp_(r)));
        };
        const auto report = grad_check(builder, params, 1e-5);
        CHECK(report.max_rel_err < 1e-4);
    }

    // log over a positive-valued path
    {
        ParamStore params;
        params.add("x", random_array({4}, rng));
        auto builder = [&](Tape& t, const ParamStore& ps) {
            Var x = t.param("x", ps.get("x"));
            return t.sum(t.log_(t.softplus(x)));
        };
        const auto report = grad_check(builder, params, 1e-5);
        CHECK(report.max_rel_err < 1e-4);
    }
}

TEST_CASE("grad_check trivia") {
    // linear objective: all gradients exactly 1
    ParamStore params;
    params.add("x", NumArray{{3}, {0.3, -1.2, 2.0}});
    auto builder = [](Tape& t, const ParamStore& ps) {
        return t.sum(t.param("x", ps.get("x")));
    };
    const auto report = grad_check(builder, params, 1e-5);
    CHECK(report.max_rel_err < 1e-10);

    // softplus gradient at zero is exactly 1/2
    Tape t;
    Var x = t.param("x", NumArray::scalar(0.0));
    Var y = t.softplus(x);
    t.backward(y);
    CHECK(t.grad(x)[0] == 0.5);
}

TEST_CASE("log rejects non-positive input") {
    Tape t;
    Var x = t.input(NumArray::scalar(0.0));
    CHECK_THROWS_AS(t.log_(x), NumericError);
}

TEST_CASE("tape determinism and replay") {
    auto build = [](Tape& t, Rng rng) {
        Var a = t.param("a", random_array({4, 4}, rng));
        Var b = t.param("b", random_array({4, 4}, rng));
        Var m = t.matmul(a, t.tanh_(b));
        std::vector<std::uint8_t> mask(16, 1);
        Var y = t.sum(t.masked_softmax_rows(m, mask));
        t.backward(y);
        return y;
    };

    Tape t1, t2;
    Var y1 = build(t1, Rng(99));
    Var y2 = build(t2, Rng(99));
    CHECK(std::memcmp(&t1.value(y1).values[0], &t2.value(y2).values[0],
                      sizeof(double)) == 0);
    const auto g1 = t1.param_grads();
    const auto g2 = t2.param_grads();
    REQUIRE(g1.size() == g2.size());
    for (std::size_t i = 0; i < g1.size(); ++i) {
        CHECK(g1[i].first == g2[i].first);
        CHECK(std::memcmp(g1[i].second.values.data(), g2[i].second.values.data(),
                          g1[i].second.numel() * sizeof(double)) == 0);
    }
    CHECK(t1.replay_check());
}
