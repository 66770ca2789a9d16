#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace creepuq {

/// Dense row-major tensor of doubles. Rank 1 or 2 is all the engine needs.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), values(count(shape), 0.0) {}
    Tensor(std::vector<std::size_t> s, std::vector<double> v)
        : shape(std::move(s)), values(std::move(v)) {
        if (values.size() != count(shape))
            throw std::invalid_argument("Tensor: values length does not match shape");
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
    static Tensor vec(std::vector<double> v) {
        std::size_t n = v.size();
        return Tensor({n}, std::move(v));
    }

    std::size_t size() const { return values.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(std::size_t i, std::size_t j) { return values[i * cols() + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return s.empty() ? 0 : n;
    }
};

inline bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

inline std::string shape_string(const Tensor& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(t.shape[i]);
    }
    return s + ")";
}

}  // namespace creepuq
