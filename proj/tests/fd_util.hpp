#pragma once

// Central finite-difference oracles used across the test suite. These stay
// independent of the tape's backward pass: they only re-run forward
// evaluations of a user-supplied scalar function.

#include <cmath>
#include <functional>
#include <vector>

#include "couta/network.hpp"
#include "couta/rng.hpp"
#include "couta/tensor.hpp"

namespace testutil {

inline constexpr double kFdStep = 1e-5;

// d(scalar f)/d(x[i]) for every element of x, by central differences.
inline std::vector<double> fd_grad(std::function<double(const couta::Tensor&)> f,
                                   couta::Tensor x, double step = kFdStep) {
    std::vector<double> g(x.numel());
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double orig = x[i];
        x[i] = orig + step;
        const double fp = f(x);
        x[i] = orig - step;
        const double fm = f(x);
        x[i] = orig;
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

// Numeric gradient of a scalar function of the whole parameter vector.
inline std::vector<std::vector<double>> fd_param_grads(
    couta::CoutaModel& model, const std::function<double()>& loss_fn,
    double step = kFdStep) {
    std::vector<std::vector<double>> grads;
    for (auto& p : model.parameters()) {
        std::vector<double> g(p.value.numel());
        for (std::size_t i = 0; i < p.value.numel(); ++i) {
            const double orig = p.value[i];
            p.value[i] = orig + step;
            const double fp = loss_fn();
            p.value[i] = orig - step;
            const double fm = loss_fn();
            p.value[i] = orig;
            g[i] = (fp - fm) / (2.0 * step);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

inline bool close(double a, double b, double abs_tol, double rel_tol) {
    const double diff = std::abs(a - b);
    return diff <= abs_tol || diff <= rel_tol * std::max(std::abs(a), std::abs(b));
}

inline couta::Tensor random_tensor(std::vector<std::size_t> shape, couta::Rng& rng,
                                   double lo = -1.0, double hi = 1.0) {
    couta::Tensor t(std::move(shape));
    for (auto& v : t.values) v = couta::uniform_real(rng, lo, hi);
    return t;
}

}  // namespace testutil
