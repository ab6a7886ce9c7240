#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace couta {

// Dense row-major array of 64-bit reals.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), values(numel_of(shape), 0.0) {}

    Tensor(std::vector<std::size_t> s, std::vector<double> v)
        : shape(std::move(s)), values(std::move(v)) {
        if (values.size() != numel_of(shape))
            throw std::invalid_argument("Tensor: values size " +
                                        std::to_string(values.size()) +
                                        " does not match shape product " +
                                        std::to_string(numel_of(shape)));
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    std::size_t numel() const { return values.size(); }

    std::size_t dim(std::size_t i) const {
        if (i >= shape.size())
            throw std::invalid_argument("Tensor::dim: axis out of range");
        return shape[i];
    }

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1},
                               [](std::size_t a, std::size_t b) { return a * b; });
    }
};

inline std::string shape_str(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

}  // namespace couta
