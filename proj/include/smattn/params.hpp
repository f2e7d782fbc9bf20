#pragma once

#include <string>
#include <utility>
#include <vector>

#include "smattn/numarray.hpp"

namespace smattn {

// Ordered name -> array registry for learnable parameters. Order is the
// registration order and fixes the initialization and update sequence.
class ParamStore {
public:
    NumArray& add(std::string name, NumArray v) {
        entries_.emplace_back(std::move(name), std::move(v));
        return entries_.back().second;
    }

    NumArray& get(const std::string& name) {
        for (auto& [n, v] : entries_)
            if (n == name) return v;
        throw NumericError("ParamStore: unknown parameter " + name);
    }
    const NumArray& get(const std::string& name) const {
        return const_cast<ParamStore*>(this)->get(name);
    }
    bool has(const std::string& name) const {
        for (auto& [n, v] : entries_)
            if (n == name) return true;
        return false;
    }

    std::vector<std::pair<std::string, NumArray>>& entries() { return entries_; }
    const std::vector<std::pair<std::string, NumArray>>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<std::pair<std::string, NumArray>> entries_;
};

}  // namespace smattn
