#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "tilegan/common.hpp"

namespace tilegan {

// Dense row-major matrix of doubles. Vectors are n x 1.
using tensor2 =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline bool all_finite(const tensor2& t) { return t.allFinite(); }

inline tensor2 zeros_like(const tensor2& t) {
    return tensor2::Zero(t.rows(), t.cols());
}

// Ordered, named parameter entries (weights and biases per layer).
// Flatten/unflatten is a bijection; block order is the identity of the set.
struct parameter_set {
    struct entry {
        std::string name;
        tensor2 value;
    };
    std::vector<entry> entries;

    std::size_t size() const { return entries.size(); }

    tensor2& operator[](std::size_t i) { return entries[i].value; }
    const tensor2& operator[](std::size_t i) const { return entries[i].value; }

    void add(std::string name, tensor2 value) {
        entries.push_back({std::move(name), std::move(value)});
    }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& b : entries) n += static_cast<std::size_t>(b.value.size());
        return n;
    }

    // row-major concatenation of all entries
    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(scalar_count());
        for (const auto& b : entries)
            out.insert(out.end(), b.value.data(), b.value.data() + b.value.size());
        return out;
    }

    // inverse of flatten; shapes are taken from *this
    void unflatten(const std::vector<double>& flat) {
        require(flat.size() == scalar_count(),
                "unflatten: length does not match parameter set");
        std::size_t off = 0;
        for (auto& b : entries) {
            std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
                      flat.begin() + static_cast<std::ptrdiff_t>(off) +
                          b.value.size(),
                      b.value.data());
            off += static_cast<std::size_t>(b.value.size());
        }
    }

    parameter_set zeros_clone() const {
        parameter_set out;
        for (const auto& b : entries)
            out.add(b.name, tensor2::Zero(b.value.rows(), b.value.cols()));
        return out;
    }

    bool same_shape(const parameter_set& other) const {
        if (entries.size() != other.entries.size()) return false;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].value.rows() != other.entries[i].value.rows() ||
                entries[i].value.cols() != other.entries[i].value.cols())
                return false;
        }
        return true;
    }
};

}  // namespace tilegan
