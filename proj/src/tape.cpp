#include "smattn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstring>
#include <utility>

namespace smattn {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw NumericError(msg);
}

}  // namespace

double scaled_softplus_value(double x, double phi) {
    const double u = x / phi;
    const double v = u > 30.0 ? x + phi * std::log1p(std::exp(-u))
                              : phi * std::log1p(std::exp(u));
    // deep negative inputs underflow; keep the output strictly positive
    return v > 0.0 ? v : std::numeric_limits<double>::min();
}

double scaled_softplus_dx(double x, double phi) {
    const double u = x / phi;
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

double scaled_softplus_dphi(double x, double phi) {
    const double u = x / phi;
    const double sp = u > 30.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
    return sp - u * scaled_softplus_dx(x, phi);
}

Var Tape::push(const char* op, std::int32_t a, std::int32_t b,
               std::function<void(Tape&, std::int32_t)> fwd,
               std::function<void(Tape&, std::int32_t)> bwd) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.forward = std::move(fwd);
    n.backward = std::move(bwd);
    nodes_.push_back(std::move(n));
    const auto id = static_cast<std::int32_t>(nodes_.size() - 1);
    nodes_[id].forward(*this, id);
    return Var{id};
}

std::vector<double>& Tape::grad_buf(std::int32_t id) {
    auto& n = nodes_[id];
    if (n.grad.empty()) n.grad.assign(n.value.numel(), 0.0);
    return n.grad;
}

Var Tape::input(NumArray v) {
    Node n;
    n.op = "input";
    n.value = std::move(v);
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::param(std::string name, NumArray v) {
    Node n;
    n.op = "param";
    n.value = std::move(v);
    n.name = std::move(name);
    nodes_.push_back(std::move(n));
    const auto id = static_cast<std::int32_t>(nodes_.size() - 1);
    params_.push_back(id);
    return Var{id};
}

Var Tape::matmul(Var av, Var bv) {
    const std::int32_t a = check(av), b = check(bv);
    const auto& A = nodes_[a].value;
    const auto& B = nodes_[b].value;
    if (A.ndim() != 2 || B.ndim() != 2 || A.cols() != B.rows())
        throw NumericError("matmul: inner extents mismatch " + A.shape_str() + " x " +
                           B.shape_str());
    auto fwd = [a, b](Tape& t, std::int32_t self) {
        const auto& A = t.nodes_[a].value;
        const auto& B = t.nodes_[b].value;
        const std::size_t r = A.rows(), k = A.cols(), c = B.cols();
        NumArray out = NumArray::zeros({r, c});
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double av = A.values[i * k + kk];
                if (av == 0.0) continue;
                const double* brow = &B.values[kk * c];
                double* orow = &out.values[i * c];
                for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
            }
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a, b](Tape& t, std::int32_t self) {
        const auto& A = t.nodes_[a].value;
        const auto& B = t.nodes_[b].value;
        const auto& G = t.nodes_[self].grad;
        const std::size_t r = A.rows(), k = A.cols(), c = B.cols();
        auto& ga = t.grad_buf(a);
        auto& gb = t.grad_buf(b);
        // dA = G * B^T
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t kk = 0; kk < k; ++kk) {
                double s = 0.0;
                const double* grow = &G[i * c];
                const double* brow = &B.values[kk * c];
                for (std::size_t j = 0; j < c; ++j) s += grow[j] * brow[j];
                ga[i * k + kk] += s;
            }
        // dB = A^T * G
        for (std::size_t kk = 0; kk < k; ++kk)
            for (std::size_t i = 0; i < r; ++i) {
                const double av = A.values[i * k + kk];
                if (av == 0.0) continue;
                const double* grow = &G[i * c];
                double* gbrow = &gb[kk * c];
                for (std::size_t j = 0; j < c; ++j) gbrow[j] += av * grow[j];
            }
    };
    return push("matmul", a, b, std::move(fwd), std::move(bwd));
}

Var Tape::transpose(Var av) {
    const std::int32_t a = check(av);
    require(nodes_[a].value.ndim() == 2, "transpose: rank-2 input required");
    auto fwd = [a](Tape& t, std::int32_t self) {
        const auto& A = t.nodes_[a].value;
        const std::size_t r = A.rows(), c = A.cols();
        NumArray out = NumArray::zeros({c, r});
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) out.values[j * r + i] = A.values[i * c + j];
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& A = t.nodes_[a].value;
        const std::size_t r = A.rows(), c = A.cols();
        auto& ga = t.grad_buf(a);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += G[j * r + i];
    };
    return push("transpose", a, -1, std::move(fwd), std::move(bwd));
}

Var Tape::add(Var av, Var bv) {
    const std::int32_t a = check(av), b = check(bv);
    require(nodes_[a].value.same_shape(nodes_[b].value), "add: shape mismatch");
    auto fwd = [a, b](Tape& t, std::int32_t self) {
        const auto& A = t.nodes_[a].value;
        const auto& B = t.nodes_[b].value;
        NumArray out{A.shape, A.values};
        for (std::size_t i = 0; i < out.numel(); ++i) out.values[i] += B.values[i];
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a, b](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        auto& ga = t.grad_buf(a);
        auto& gb = t.grad_buf(b);
        for (std::size_t i = 0; i < G.size(); ++i) {
            ga[i] += G[i];
            gb[i] += G[i];
        }
    };
    return push("add", a, b, std::move(fwd), std::move(bwd));
}

Var Tape::sub(Var av, Var bv) {
    const std::int32_t a = check(av), b = check(bv);
    require(nodes_[a].value.same_shape(nodes_[b].value), "sub: shape mismatch");
    auto fwd = [a, b](Tape& t, std::int32_t self) {
        const auto& A = t.nodes_[a].value;
        const auto& B = t.nodes_[b].value;
        NumArray out{A.shape, A.values};
        for (std::size_t i = 0; i < out.numel(); ++i) out.values[i] -= B.values[i];
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a, b](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        auto& ga = t.grad_buf(a);
        auto& gb = t.grad_buf(b);
        for (std::size_t i = 0; i < G.size(); ++i) {
            ga[i] += G[i];
            gb[i] -= G[i];
        }
    };
    return push("sub", a, b, std::move(fwd), std::move(bwd));
}

Var Tape::mul(Var av, Var bv) {
    const std::int32_t a = check(av), b = check(bv);
    require(nodes_[a].value.same_shape(nodes_[b].value), "mul: shape mismatch");
    auto fwd = [a, b](Tape& t, std::int32_t self) {
        const auto& A = t.nodes_[a].value;
        const auto& B = t.nodes_[b].value;
        NumArray out{A.shape, A.values};
        for (std::size_t i = 0; i < out.numel(); ++i) out.values[i] *= B.values[i];
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a, b](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& A = t.nodes_[a].value;
        const auto& B = t.nodes_[b].value;
        auto& ga = t.grad_buf(a);
        auto& gb = t.grad_buf(b);
        for (std::size_t i = 0; i < G.size(); ++i) {
            ga[i] += G[i] * B.values[i];
            gb[i] += G[i] * A.values[i];
        }
    };
    return push("mul", a, b, std::move(fwd), std::move(bwd));
}

Var Tape::scale(Var av, double c) {
    const std::int32_t a = check(av);
    auto fwd = [a, c](Tape& t, std::int32_t self) {
        NumArray out = t.nodes_[a].value;
        for (double& v : out.values) v *= c;
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a, c](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        auto& ga = t.grad_buf(a);
        for (std::size_t i = 0; i < G.size(); ++i) ga[i] += c * G[i];
    };
    return push("scale", a, -1, std::move(fwd), std::move(bwd));
}

Var Tape::add_row_broadcast(Var av, Var rv) {
    const std::int32_t a = check(av), r = check(rv);
    const auto& A = nodes_[a].value;
    const auto& R = nodes_[r].value;
    require(A.ndim() == 2 && R.ndim() == 2 && R.rows() == 1 && R.cols() == A.cols(),
            "add_row_broadcast: need (r,c) + (1,c)");
    auto fwd = [a, r](Tape& t, std::int32_t self) {
        const auto& A = t.nodes_[a].value;
        const auto& R = t.nodes_[r].value;
        NumArray out{A.shape, A.values};
        const std::size_t c = A.cols();
        for (std::size_t i = 0; i < A.rows(); ++i)
            for (std::size_t j = 0; j < c; ++j) out.values[i * c + j] += R.values[j];
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a, r](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& A = t.nodes_[a].value;
        const std::size_t c = A.cols();
        auto& ga = t.grad_buf(a);
        auto& gr = t.grad_buf(r);
        for (std::size_t i = 0; i < A.rows(); ++i)
            for (std::size_t j = 0; j < c; ++j) {
                ga[i * c + j] += G[i * c + j];
                gr[j] += G[i * c + j];
            }
    };
    return push("add_row_broadcast", a, r, std::move(fwd), std::move(bwd));
}

Var Tape::tanh_(Var av) {
    const std::int32_t a = check(av);
    auto fwd = [a](Tape& t, std::int32_t self) {
        NumArray out = t.nodes_[a].value;
        for (double& v : out.values) v = std::tanh(v);
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& Y = t.nodes_[self].value;
        auto& ga = t.grad_buf(a);
        for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i] * (1.0 - Y.values[i] * Y.values[i]);
    };
    return push("tanh", a, -1, std::move(fwd), std::move(bwd));
}

Var Tape::exp_(Var av) {
    const std::int32_t a = check(av);
    auto fwd = [a](Tape& t, std::int32_t self) {
        NumArray out = t.nodes_[a].value;
        for (double& v : out.values) v = std::exp(v);
        if (!out.all_finite()) throw NumericError("exp: overflow to non-finite");
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& Y = t.nodes_[self].value;
        auto& ga = t.grad_buf(a);
        for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i] * Y.values[i];
    };
    return push("exp", a, -1, std::move(fwd), std::move(bwd));
}

Var Tape::log_(Var av) {
    const std::int32_t a = check(av);
    auto fwd = [a](Tape& t, std::int32_t self) {
        NumArray out = t.nodes_[a].value;
        for (double& v : out.values) {
            if (!(v > 0.0)) throw NumericError("log: non-positive input");
            v = std::log(v);
        }
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& X = t.nodes_[a].value;
        auto& ga = t.grad_buf(a);
        for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i] / X.values[i];
    };
    return push("log", a, -1, std::move(fwd), std::move(bwd));
}

Var Tape::softplus(Var xv) {
    const std::int32_t x = check(xv);
    auto fwd = [x](Tape& t, std::int32_t self) {
        NumArray out = t.nodes_[x].value;
        for (double& v : out.values) v = scaled_softplus_value(v, 1.0);
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [x](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& X = t.nodes_[x].value;
        auto& gx = t.grad_buf(x);
        for (std::size_t i = 0; i < G.size(); ++i)
            gx[i] += G[i] * scaled_softplus_dx(X.values[i], 1.0);
    };
    return push("softplus", x, -1, std::move(fwd), std::move(bwd));
}

Var Tape::scaled_softplus(Var xv, Var phiv) {
    const std::int32_t x = check(xv), p = check(phiv);
    require(nodes_[x].value.same_shape(nodes_[p].value), "scaled_softplus: shape mismatch");
    auto fwd = [x, p](Tape& t, std::int32_t self) {
        const auto& X = t.nodes_[x].value;
        const auto& P = t.nodes_[p].value;
        NumArray out = X;
        for (std::size_t i = 0; i < out.numel(); ++i) {
            if (!(P.values[i] > 0.0))
                throw ConfigError("scaled_softplus: phi must be > 0");
            out.values[i] = scaled_softplus_value(X.values[i], P.values[i]);
        }
        if (!out.all_finite()) throw NumericError("scaled_softplus: non-finite output");
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [x, p](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& X = t.nodes_[x].value;
        const auto& P = t.nodes_[p].value;
        auto& gx = t.grad_buf(x);
        auto& gp = t.grad_buf(p);
        for (std::size_t i = 0; i < G.size(); ++i) {
            gx[i] += G[i] * scaled_softplus_dx(X.values[i], P.values[i]);
            gp[i] += G[i] * scaled_softplus_dphi(X.values[i], P.values[i]);
        }
    };
    return push("scaled_softplus", x, p, std::move(fwd), std::move(bwd));
}

Var Tape::masked_softmax_rows(Var sv, std::vector<std::uint8_t> mask) {
    const std::int32_t s = check(sv);
    const auto& S = nodes_[s].value;
    require(S.ndim() == 2, "masked_softmax_rows: rank-2 input required");
    require(mask.size() == S.numel(), "masked_softmax_rows: mask shape mismatch");
    auto fwd = [s, mask](Tape& t, std::int32_t self) {
        const auto& S = t.nodes_[s].value;
        const std::size_t r = S.rows(), c = S.cols();
        NumArray out = NumArray::zeros({r, c});
        for (std::size_t i = 0; i < r; ++i) {
            double m = -HUGE_VAL;
            for (std::size_t j = 0; j < c; ++j)
                if (mask[i * c + j] && S.values[i * c + j] > m) m = S.values[i * c + j];
            if (m == -HUGE_VAL)
                throw NumericError("masked_softmax_rows: fully masked row " + std::to_string(i));
            double z = 0.0;
            for (std::size_t j = 0; j < c; ++j)
                if (mask[i * c + j]) {
                    const double e = std::exp(S.values[i * c + j] - m);
                    out.values[i * c + j] = e;
                    z += e;
                }
            for (std::size_t j = 0; j < c; ++j)
                if (mask[i * c + j]) out.values[i * c + j] /= z;
        }
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [s, mask](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& Y = t.nodes_[self].value;
        const std::size_t r = Y.rows(), c = Y.cols();
        auto& gs = t.grad_buf(s);
        for (std::size_t i = 0; i < r; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < c; ++j)
                if (mask[i * c + j]) dot += G[i * c + j] * Y.values[i * c + j];
            for (std::size_t j = 0; j < c; ++j)
                if (mask[i * c + j])
                    gs[i * c + j] += Y.values[i * c + j] * (G[i * c + j] - dot);
        }
    };
    return push("masked_softmax_rows", s, -1, std::move(fwd), std::move(bwd));
}

Var Tape::concat_cols(Var av, Var bv) {
    const std::int32_t a = check(av), b = check(bv);
    const auto& A = nodes_[a].value;
    const auto& B = nodes_[b].value;
    require(A.ndim() == 2 && B.ndim() == 2 && A.rows() == B.rows(),
            "concat_cols: row counts differ");
    auto fwd = [a, b](Tape& t, std::int32_t self) {
        const auto& A = t.nodes_[a].value;
        const auto& B = t.nodes_[b].value;
        const std::size_t r = A.rows(), ca = A.cols(), cb = B.cols();
        NumArray out = NumArray::zeros({r, ca + cb});
        for (std::size_t i = 0; i < r; ++i) {
            std::copy_n(&A.values[i * ca], ca, &out.values[i * (ca + cb)]);
            std::copy_n(&B.values[i * cb], cb, &out.values[i * (ca + cb) + ca]);
        }
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a, b](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& A = t.nodes_[a].value;
        const auto& B = t.nodes_[b].value;
        const std::size_t r = A.rows(), ca = A.cols(), cb = B.cols();
        auto& ga = t.grad_buf(a);
        auto& gb = t.grad_buf(b);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < ca; ++j) ga[i * ca + j] += G[i * (ca + cb) + j];
            for (std::size_t j = 0; j < cb; ++j) gb[i * cb + j] += G[i * (ca + cb) + ca + j];
        }
    };
    return push("concat_cols", a, b, std::move(fwd), std::move(bwd));
}

Var Tape::gather_rows(Var tv, std::vector<std::size_t> idx) {
    const std::int32_t tb = check(tv);
    const auto& T = nodes_[tb].value;
    require(T.ndim() == 2, "gather_rows: rank-2 table required");
    for (std::size_t i : idx)
        if (i >= T.rows()) throw DataError("gather_rows: row index out of range");
    auto fwd = [tb, idx](Tape& t, std::int32_t self) {
        const auto& T = t.nodes_[tb].value;
        const std::size_t c = T.cols();
        NumArray out = NumArray::zeros({idx.size(), c});
        for (std::size_t i = 0; i < idx.size(); ++i)
            std::copy_n(&T.values[idx[i] * c], c, &out.values[i * c]);
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [tb, idx](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const std::size_t c = t.nodes_[tb].value.cols();
        auto& gt = t.grad_buf(tb);
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < c; ++j) gt[idx[i] * c + j] += G[i * c + j];
    };
    return push("gather_rows", tb, -1, std::move(fwd), std::move(bwd));
}

Var Tape::gather_elements(Var av, std::vector<std::size_t> idx) {
    const std::int32_t a = check(av);
    const auto& A = nodes_[a].value;
    for (std::size_t i : idx)
        if (i >= A.numel()) throw DataError("gather_elements: index out of range");
    auto fwd = [a, idx](Tape& t, std::int32_t self) {
        const auto& A = t.nodes_[a].value;
        NumArray out = NumArray::zeros({idx.size()});
        for (std::size_t i = 0; i < idx.size(); ++i) out.values[i] = A.values[idx[i]];
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a, idx](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        auto& ga = t.grad_buf(a);
        for (std::size_t i = 0; i < idx.size(); ++i) ga[idx[i]] += G[i];
    };
    return push("gather_elements", a, -1, std::move(fwd), std::move(bwd));
}

Var Tape::element(Var av, std::size_t i) {
    const std::int32_t a = check(av);
    require(i < nodes_[a].value.numel(), "element: index out of range");
    auto fwd = [a, i](Tape& t, std::int32_t self) {
        t.nodes_[self].value = NumArray::scalar(t.nodes_[a].value.values[i]);
    };
    auto bwd = [a, i](Tape& t, std::int32_t self) {
        t.grad_buf(a)[i] += t.nodes_[self].grad[0];
    };
    return push("element", a, -1, std::move(fwd), std::move(bwd));
}

Var Tape::row_sums(Var av) {
    const std::int32_t a = check(av);
    require(nodes_[a].value.ndim() == 2, "row_sums: rank-2 input required");
    auto fwd = [a](Tape& t, std::int32_t self) {
        const auto& A = t.nodes_[a].value;
        const std::size_t r = A.rows(), c = A.cols();
        NumArray out = NumArray::zeros({r});
        for (std::size_t i = 0; i < r; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) s += A.values[i * c + j];
            out.values[i] = s;
        }
        t.nodes_[self].value = std::move(out);
    };
    auto bwd = [a](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        const auto& A = t.nodes_[a].value;
        const std::size_t r = A.rows(), c = A.cols();
        auto& ga = t.grad_buf(a);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += G[i];
    };
    return push("row_sums", a, -1, std::move(fwd), std::move(bwd));
}

Var Tape::sum(Var av) {
    const std::int32_t a = check(av);
    auto fwd = [a](Tape& t, std::int32_t self) {
        double s = 0.0;
        for (double v : t.nodes_[a].value.values) s += v;
        t.nodes_[self].value = NumArray::scalar(s);
    };
    auto bwd = [a](Tape& t, std::int32_t self) {
        const double g = t.nodes_[self].grad[0];
        auto& ga = t.grad_buf(a);
        for (double& v : ga) v += g;
    };
    return push("sum", a, -1, std::move(fwd), std::move(bwd));
}

Var Tape::mean(Var a) {
    const double n = static_cast<double>(value(a).numel());
    return scale(sum(a), 1.0 / n);
}

Var Tape::reshape(Var av, std::vector<std::size_t> shape) {
    const std::int32_t a = check(av);
    require(NumArray::numel_of(shape) == nodes_[a].value.numel(),
            "reshape: element count mismatch");
    auto fwd = [a, shape](Tape& t, std::int32_t self) {
        t.nodes_[self].value = NumArray{shape, t.nodes_[a].value.values};
    };
    auto bwd = [a](Tape& t, std::int32_t self) {
        const auto& G = t.nodes_[self].grad;
        auto& ga = t.grad_buf(a);
        for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i];
    };
    return push("reshape", a, -1, std::move(fwd), std::move(bwd));
}

void Tape::backward(Var out) {
    const std::int32_t o = check(out);
    if (nodes_[o].value.numel() != 1)
        throw NumericError("backward: output must be a scalar");
    grad_buf(o)[0] = 1.0;
    for (std::int32_t i = o; i >= 0; --i) {
        auto& n = nodes_[i];
        if (!n.grad.empty() && n.backward) n.backward(*this, i);
    }
}

std::vector<std::pair<std::string, NumArray>> Tape::param_grads() const {
    std::vector<std::pair<std::string, NumArray>> out;
    out.reserve(params_.size());
    for (std::int32_t id : params_) {
        const auto& n = nodes_[id];
        NumArray g = NumArray::zeros(n.value.shape);
        if (!n.grad.empty()) g.values = n.grad;
        out.emplace_back(n.name, std::move(g));
    }
    return out;
}

bool Tape::replay_check() {
    bool ok = true;
    for (std::size_t i = 0; i < nodes_.size() && ok; ++i) {
        auto& n = nodes_[i];
        if (!n.forward) continue;
        NumArray saved = std::move(n.value);
        n.forward(*this, static_cast<std::int32_t>(i));
        ok = n.value.shape == saved.shape &&
             std::memcmp(n.value.values.data(), saved.values.data(),
                         saved.numel() * sizeof(double)) == 0;
        n.value = std::move(saved);
    }
    return ok;
}

}  // namespace smattn
