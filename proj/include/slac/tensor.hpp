#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace slac {

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major tensor. Rank 1 and 2 are what the encoder needs; rank-1
// tensors behave as 1 x n rows where a matrix is expected.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::initializer_list<std::size_t> s, double fill = 0.0)
        : shape(s), data(count(shape), fill) {}
    Tensor(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (count(shape) != data.size())
            throw EngineError("tensor shape/data length mismatch");
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t e : s) n *= e;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> s) {
        Tensor t;
        t.shape = std::move(s);
        t.data.assign(count(t.shape), 0.0);
        return t;
    }

    static Tensor scalar(double v) { return Tensor({std::size_t{1}, std::size_t{1}}, {v}); }

    static Tensor row(std::vector<double> v) {
        std::size_t n = v.size();
        return Tensor({std::size_t{1}, n}, std::move(v));
    }

    static Tensor matrix(std::size_t r, std::size_t c, std::vector<double> v) {
        return Tensor({r, c}, std::move(v));
    }

    std::size_t size() const { return data.size(); }

    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const {
        if (shape.size() == 1) return shape[0];
        return shape.size() >= 2 ? shape[1] : 1;
    }

    double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }
};

}  // namespace slac
