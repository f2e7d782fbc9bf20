#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smattn/numarray.hpp"

namespace smattn {

// Handle to a tape node.
struct Var {
    std::int32_t id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape over NumArray values. Each op appends a node holding
// the op name, the argument ids, the forward value, and two closures: one
// that recomputes the value from the arguments, one that pushes the node's
// gradient back into them. Nodes are executed strictly in creation order,
// forward and reverse, so two builds of the same graph are bit-identical.
//
// One tape per training step; single-threaded by contract. Parameters live
// outside the tape and are bound as named leaves each step.
class Tape {
public:
    struct Node {
        const char* op;
        std::int32_t a = -1, b = -1;
        NumArray value;
        std::vector<double> grad;  // lazily allocated, same numel as value
        std::function<void(Tape&, std::int32_t)> forward;   // null for leaves
        std::function<void(Tape&, std::int32_t)> backward;  // null for leaves
        std::string name;  // nonempty only for named parameters
    };

    // ---- leaves ----
    Var input(NumArray v);                    // constant, no name
    Var param(std::string name, NumArray v);  // named leaf; gradient of interest

    // ---- primitives ----
    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var add(Var a, Var b);   // same shape
    Var sub(Var a, Var b);   // same shape
    Var mul(Var a, Var b);   // elementwise, same shape
    Var scale(Var a, double c);
    Var add_row_broadcast(Var a, Var row);  // a:(r,c) + row:(1,c)
    Var tanh_(Var a);
    Var exp_(Var a);
    Var log_(Var a);          // requires strictly positive input
    Var softplus(Var x);      // log(1 + e^x), overflow-guarded
    Var scaled_softplus(Var x, Var phi);  // phi > 0 elementwise, same shape as x
    Var masked_softmax_rows(Var scores, std::vector<std::uint8_t> mask);
    Var concat_cols(Var a, Var b);
    Var gather_rows(Var table, std::vector<std::size_t> idx);
    Var gather_elements(Var a, std::vector<std::size_t> idx);  // rank-1 gather
    Var element(Var a, std::size_t i);  // single element as a scalar node
    Var row_sums(Var a);  // (r,c) -> (r)
    Var sum(Var a);       // -> scalar
    Var reshape(Var a, std::vector<std::size_t> shape);

    Var neg(Var a) { return scale(a, -1.0); }
    Var mean(Var a);

    // ---- execution ----
    const NumArray& value(Var v) const { return nodes_[check(v)].value; }
    void backward(Var scalar_output);

    // Gradient buffer of a node; empty if the reverse sweep never reached it.
    const std::vector<double>& grad(Var v) const { return nodes_[check(v)].grad; }

    // Gradients of all named parameters, zeros where untouched.
    std::vector<std::pair<std::string, NumArray>> param_grads() const;

    // Recompute every node from the recorded ops and verify the values are
    // bit-identical to the first pass. Restores the original values.
    bool replay_check();

    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::size_t i) const { return nodes_[i]; }

private:
    std::vector<Node> nodes_;
    std::vector<std::int32_t> params_;

    std::int32_t check(Var v) const {
        if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size())
            throw NumericError("Tape: invalid Var");
        return v.id;
    }
    Var push(const char* op, std::int32_t a, std::int32_t b,
             std::function<void(Tape&, std::int32_t)> fwd,
             std::function<void(Tape&, std::int32_t)> bwd);
    std::vector<double>& grad_buf(std::int32_t id);

    friend struct TapeOps;
};

// Scaled softplus at one point: f(x) = phi * log(1 + exp(x / phi)).
// Shared by the tape op and the plain (untaped) evaluators.
double scaled_softplus_value(double x, double phi);
// d/dx of the above = sigmoid(x / phi).
double scaled_softplus_dx(double x, double phi);
// d/dphi of the above.
double scaled_softplus_dphi(double x, double phi);

}  // namespace smattn
