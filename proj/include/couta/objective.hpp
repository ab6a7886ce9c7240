#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "couta/autodiff.hpp"
#include "couta/network.hpp"

namespace couta {

// Per-batch values of the calibrated objective.
struct LossBreakdown {
    double l_umc = 0.0;
    double l_nac = 0.0;
    double total = 0.0;
    double alpha = 0.0;
    std::size_t original_count = 0;
    std::size_t perturbed_count = 0;
};

// Calibrated one-class term for a single pair of distances:
//   1/2 * exp(-(d - d~)^2) * (d + d~) + 1/2 * (d - d~)^2
inline double umc_term(double d, double dt) {
    if (d < 0.0 || dt < 0.0)
        throw std::invalid_argument("umc_term: distances must be nonnegative");
    const double u = (d - dt) * (d - dt);
    return 0.5 * std::exp(-u) * (d + dt) + 0.5 * u;
}

// Same expression on the tape; d and dt are [B] distance vectors, result is
// the batch mean (a scalar Var).
inline ad::Var umc_loss(ad::Graph& g, ad::Var d, ad::Var dt) {
    if (g.value(d).numel() == 0)
        throw std::invalid_argument("umc_loss: empty batch");
    ad::Var u = g.square(g.sub(d, dt));
    ad::Var weighted = g.mul(g.exp_(g.scale(u, -1.0)), g.add(d, dt));
    return g.mean(g.add(g.scale(weighted, 0.5), g.scale(u, 0.5)));
}

// Canonical one-class loss: mean squared distance to the center (the no-UMC
// ablation, head psi only).
inline ad::Var canonical_loss(ad::Graph& g, ad::Var d) {
    if (g.value(d).numel() == 0)
        throw std::invalid_argument("canonical_loss: empty batch");
    return g.mean(d);
}

// MSE regression of the classification head: originals to -1, perturbed
// windows to +1, averaged over the union.
inline ad::Var nac_loss(ad::Graph& g, std::optional<ad::Var> clf_orig,
                        std::optional<ad::Var> clf_pert) {
    const std::size_t n_orig = clf_orig ? g.value(*clf_orig).numel() : 0;
    const std::size_t n_pert = clf_pert ? g.value(*clf_pert).numel() : 0;
    if (n_orig + n_pert == 0)
        throw std::invalid_argument("nac_loss: both window sets are empty");

    ad::Var acc{};
    if (clf_orig && n_orig > 0)
        acc = g.sum(g.square(g.add_const(*clf_orig, 1.0)));  // (out - (-1))^2
    if (clf_pert && n_pert > 0) {
        ad::Var pos = g.sum(g.square(g.add_const(*clf_pert, -1.0)));
        acc = acc.valid() ? g.add(acc, pos) : pos;
    }
    return g.scale(acc, 1.0 / static_cast<double>(n_orig + n_pert));
}

// L = L_UMC + alpha * L_NAC
inline ad::Var joint_loss(ad::Graph& g, ad::Var umc, ad::Var nac, double alpha) {
    if (alpha < 0.0)
        throw std::invalid_argument("joint_loss: alpha must be nonnegative");
    return g.add(umc, g.scale(nac, alpha));
}

// Forward a mixed batch through the model and assemble the full objective.
// Returns the scalar loss Var; fills the breakdown.
inline ad::Var total_loss(ad::Graph& g, const CoutaModel::Bound& bound,
                          const Tensor& originals, const Tensor* perturbed, double alpha,
                          LossBreakdown& out) {
    if (alpha < 0.0)
        throw std::invalid_argument("total_loss: alpha must be nonnegative");
    EmbeddingBatch eo = bound.forward(originals);
    ad::Var d = g.sqdist_to(eo.z, bound.center());
    ad::Var dt = g.sqdist_to(eo.zp, bound.center());
    ad::Var umc = umc_loss(g, d, dt);

    std::optional<ad::Var> clf_pert;
    if (perturbed && perturbed->dim(0) > 0) {
        EmbeddingBatch ep = bound.forward(*perturbed);
        clf_pert = ep.clf;
    }
    ad::Var nac = nac_loss(g, eo.clf, clf_pert);
    ad::Var total = joint_loss(g, umc, nac, alpha);

    out.l_umc = g.value(umc)[0];
    out.l_nac = g.value(nac)[0];
    out.total = g.value(total)[0];
    out.alpha = alpha;
    out.original_count = originals.dim(0);
    out.perturbed_count = perturbed ? perturbed->dim(0) : 0;
    return total;
}

}  // namespace couta
