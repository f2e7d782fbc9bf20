#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "smattn/errors.hpp"

namespace smattn {

// Dense row-major float64 array. Rank 1 and 2 cover everything the model
// needs; a scalar is stored as shape {1}. Values are treated as immutable
// once an op has produced them.
struct NumArray {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    NumArray() = default;
    NumArray(std::vector<std::size_t> s, std::vector<double> v)
        : shape(std::move(s)), values(std::move(v)) {
        if (numel_of(shape) != values.size())
            throw NumericError("NumArray: shape does not match value count");
    }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t e : s) n *= e;
        return s.empty() ? 0 : n;
    }

    static NumArray zeros(std::vector<std::size_t> s) {
        std::size_t n = numel_of(s);
        return NumArray(std::move(s), std::vector<double>(n, 0.0));
    }

    static NumArray full(std::vector<std::size_t> s, double v) {
        std::size_t n = numel_of(s);
        return NumArray(std::move(s), std::vector<double>(n, v));
    }

    static NumArray scalar(double v) { return NumArray({1}, {v}); }

    std::size_t numel() const { return values.size(); }
    std::size_t ndim() const { return shape.size(); }

    std::size_t rows() const {
        if (shape.size() != 2) throw NumericError("NumArray::rows: not rank 2");
        return shape[0];
    }
    std::size_t cols() const {
        if (shape.size() != 2) throw NumericError("NumArray::cols: not rank 2");
        return shape[1];
    }

    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

    double scalar_value() const {
        if (numel() != 1) throw NumericError("NumArray::scalar_value: not a scalar");
        return values[0];
    }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool same_shape(const NumArray& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + ")";
    }
};

}  // namespace smattn
