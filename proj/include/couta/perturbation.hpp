#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "couta/data.hpp"
#include "couta/rng.hpp"

namespace couta {

// One of the fixed perturbation functions used to synthesize native anomaly
// examples: point (extreme value at the last observation), contextual
// (offset from the local mean), collective (a constant trailing segment).
struct PerturbationOp {
    PerturbKind kind = PerturbKind::Point;
    double gamma = 2.0;
    std::size_t k = 10;  // context length for the contextual op

    std::string name() const {
        switch (kind) {
            case PerturbKind::Point: return "point";
            case PerturbKind::Contextual: return "contextual";
            case PerturbKind::Collective: return "collective";
            default: return "none";
        }
    }
};

using PerturbationPool = std::vector<PerturbationOp>;

inline PerturbationPool default_pool() {
    return {
        {PerturbKind::Point, +2.0},     {PerturbKind::Point, -2.0},
        {PerturbKind::Contextual, +0.5}, {PerturbKind::Contextual, -0.5},
        {PerturbKind::Collective, 0.0},  {PerturbKind::Collective, 1.0},
    };
}

inline PerturbationPool pool_by_name(const std::string& name) {
    if (name == "full") return default_pool();
    PerturbationPool pool;
    for (const auto& op : default_pool()) {
        if (op.name() == name) pool.push_back(op);
    }
    if (pool.empty())
        throw std::invalid_argument("unknown perturbation pool '" + name +
                                    "' (expected full|point|contextual|collective)");
    return pool;
}

namespace detail {

// Uniformly random nonempty subset: size uniform in 1..D, then a uniform
// size-m combination.
inline std::vector<std::size_t> random_dim_subset(std::size_t d, Rng& rng) {
    const std::size_t m = 1 + uniform_index(rng, d);
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = i;
    shuffle_inplace(idx, rng);
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace detail

// Apply one perturbation to an l x D window. All entries outside the
// perturbed region are bit-identical to the input.
inline std::vector<double> perturb(const std::vector<double>& window, std::size_t l,
                                   std::size_t d, const PerturbationOp& op, Rng& rng) {
    if (window.size() != l * d)
        throw std::invalid_argument("perturb: window size != l*D");
    if (op.kind != PerturbKind::Point && l < 2)
        throw std::invalid_argument("perturb: contextual/collective ops need l >= 2");

    std::vector<double> out = window;
    const auto dims = detail::random_dim_subset(d, rng);

    switch (op.kind) {
        case PerturbKind::Point:
            for (std::size_t j : dims) out[(l - 1) * d + j] = op.gamma;
            break;
        case PerturbKind::Contextual: {
            const std::size_t ctx = std::min(op.k, l - 1);
            for (std::size_t j : dims) {
                double mean = 0.0;
                for (std::size_t t = l - 1 - ctx; t < l - 1; ++t) mean += window[t * d + j];
                mean /= static_cast<double>(ctx);
                out[(l - 1) * d + j] = mean + op.gamma;
            }
            break;
        }
        case PerturbKind::Collective: {
            const std::size_t w = std::max<std::size_t>(1, l / 2);
            const std::size_t m = 1 + uniform_index(rng, w);  // segment length in [1, w]
            for (std::size_t j : dims)
                for (std::size_t t = l - m; t < l; ++t) out[t * d + j] = op.gamma;
            break;
        }
        default:
            throw std::invalid_argument("perturb: invalid op kind");
    }
    return out;
}

// Draw ceil(beta * |S|) perturbed windows; base window and op are sampled
// uniformly with replacement.
inline WindowSet generate_native_anomalies(const WindowSet& originals, double beta,
                                           const PerturbationPool& pool, Rng& rng) {
    if (originals.empty())
        throw std::invalid_argument("generate_native_anomalies: empty original set");
    if (pool.empty())
        throw std::invalid_argument("generate_native_anomalies: empty perturbation pool");
    if (beta <= 0.0)
        throw std::invalid_argument("generate_native_anomalies: beta must be positive");

    const std::size_t count = static_cast<std::size_t>(
        std::ceil(beta * static_cast<double>(originals.size())));

    WindowSet out;
    out.length = originals.length;
    out.dims = originals.dims;
    out.stride = originals.stride;
    out.windows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t base = uniform_index(rng, originals.size());
        const PerturbationOp& op = pool[uniform_index(rng, pool.size())];
        out.windows.push_back(
            perturb(originals.windows[base], originals.length, originals.dims, op, rng));
        out.origins.push_back(originals.origins[base]);
        out.provenance.push_back(op.kind);
    }
    return out;
}

}  // namespace couta
