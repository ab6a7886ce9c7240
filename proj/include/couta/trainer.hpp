#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "couta/adam.hpp"
#include "couta/data.hpp"
#include "couta/network.hpp"
#include "couta/objective.hpp"
#include "couta/perturbation.hpp"
#include "couta/rng.hpp"

namespace couta {

struct TrainConfig {
    std::size_t window_len = 100;
    std::size_t stride = 1;
    std::size_t hidden = 16;
    std::size_t feature_dims = 16;  // H
    double alpha = 0.1;
    double beta = 0.2;
    double lr = 1e-4;
    std::size_t batch_size = 128;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;
    std::string pool = "full";  // full | point | contextual | collective
    bool regenerate_per_epoch = false;
    // ablation switches: no-UMC falls back to the canonical one-class loss
    // (head psi only), no-NAC drops the classification branch entirely
    bool use_umc = true;
    bool use_nac = true;

    void validate() const {
        if (window_len < 1 || stride < 1 || hidden < 1 || feature_dims < 1 ||
            batch_size < 1 || lr <= 0.0 || alpha < 0.0 || beta <= 0.0)
            throw std::invalid_argument("TrainConfig: all sizes/rates must be positive");
    }
};

struct TrainReport {
    std::vector<LossBreakdown> epoch_losses;
    double wall_seconds = 0.0;
};

struct TrainResult {
    CoutaModel model;
    NormalizationStats stats;
    TrainReport report;
};

namespace detail {

// One optimization step over a mixed batch, honoring the ablation switches.
inline LossBreakdown train_step(CoutaModel& model, Adam& opt, const Tensor& originals,
                                const Tensor* perturbed, const TrainConfig& cfg) {
    ad::Graph g;
    CoutaModel::Bound bound = model.bind(g);

    LossBreakdown bd;
    bd.alpha = cfg.use_nac ? cfg.alpha : 0.0;
    bd.original_count = originals.dim(0);
    bd.perturbed_count = perturbed ? perturbed->dim(0) : 0;

    EmbeddingBatch eo = bound.forward(originals);
    ad::Var d = g.sqdist_to(eo.z, model.center());
    ad::Var base;
    if (cfg.use_umc) {
        ad::Var dt = g.sqdist_to(eo.zp, model.center());
        base = umc_loss(g, d, dt);
    } else {
        base = canonical_loss(g, d);
    }
    bd.l_umc = g.value(base)[0];

    ad::Var total = base;
    if (cfg.use_nac) {
        std::optional<ad::Var> clf_pert;
        if (perturbed && perturbed->dim(0) > 0)
            clf_pert = bound.forward(*perturbed).clf;
        ad::Var nac = nac_loss(g, eo.clf, clf_pert);
        bd.l_nac = g.value(nac)[0];
        total = joint_loss(g, base, nac, cfg.alpha);
    }
    bd.total = g.value(total)[0];

    g.backward(total);
    std::vector<std::vector<double>> grads;
    grads.reserve(bound.leaves().size());
    for (ad::Var v : bound.leaves()) grads.push_back(g.grad(v));
    opt.step(model.parameters(), grads);
    return bd;
}

}  // namespace detail

// End-to-end training on an already-normalized window set. Deterministic
// given cfg.seed.
inline std::pair<CoutaModel, TrainReport> train_on_windows(const WindowSet& windows,
                                                           const TrainConfig& cfg) {
    cfg.validate();
    if (windows.empty()) throw std::invalid_argument("train: no training windows");

    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(cfg.seed);
    CoutaModel model(windows.dims, windows.length, cfg.hidden, cfg.feature_dims, rng);
    model.init_center(windows);

    const PerturbationPool pool = pool_by_name(cfg.pool);
    WindowSet generated;
    if (cfg.use_nac) generated = generate_native_anomalies(windows, cfg.beta, pool, rng);

    Adam opt(AdamConfig{cfg.lr});
    TrainReport report;

    std::vector<std::size_t> order(windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::size_t> pert_order(generated.size());
    for (std::size_t i = 0; i < pert_order.size(); ++i) pert_order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.use_nac && cfg.regenerate_per_epoch && epoch > 0) {
            generated = generate_native_anomalies(windows, cfg.beta, pool, rng);
            pert_order.resize(generated.size());
            for (std::size_t i = 0; i < pert_order.size(); ++i) pert_order[i] = i;
        }
        shuffle_inplace(order, rng);
        shuffle_inplace(pert_order, rng);

        LossBreakdown epoch_bd;
        epoch_bd.alpha = cfg.use_nac ? cfg.alpha : 0.0;
        std::size_t pert_cursor = 0;

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());
            std::vector<std::size_t> batch_idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(end));
            Tensor orig_batch = model.make_batch(windows, batch_idx);

            Tensor pert_batch;
            const Tensor* pert_ptr = nullptr;
            if (cfg.use_nac && pert_cursor < pert_order.size()) {
                // keep the per-batch class ratio at the global beta,
                // drawing from S' without replacement within the epoch
                std::size_t want = static_cast<std::size_t>(
                    std::llround(cfg.beta * static_cast<double>(batch_idx.size())));
                want = std::max<std::size_t>(want, 1);
                want = std::min(want, pert_order.size() - pert_cursor);
                std::vector<std::size_t> pidx(pert_order.begin() +
                                                  static_cast<std::ptrdiff_t>(pert_cursor),
                                              pert_order.begin() +
                                                  static_cast<std::ptrdiff_t>(pert_cursor + want));
                pert_cursor += want;
                pert_batch = model.make_batch(generated, pidx);
                pert_ptr = &pert_batch;
            }

            LossBreakdown bd = detail::train_step(model, opt, orig_batch, pert_ptr, cfg);
            epoch_bd.l_umc += bd.l_umc * static_cast<double>(bd.original_count);
            epoch_bd.l_nac += bd.l_nac * static_cast<double>(bd.original_count);
            epoch_bd.total += bd.total * static_cast<double>(bd.original_count);
            epoch_bd.original_count += bd.original_count;
            epoch_bd.perturbed_count += bd.perturbed_count;
        }
        const double n = static_cast<double>(epoch_bd.original_count);
        epoch_bd.l_umc /= n;
        epoch_bd.l_nac /= n;
        epoch_bd.total /= n;
        report.epoch_losses.push_back(epoch_bd);
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(model), std::move(report)};
}

// Full pipeline: fit the normalizer on the training split, window, train.
inline TrainResult train(const TimeSeriesDataset& train_set, const TrainConfig& cfg) {
    cfg.validate();
    TrainResult res;
    res.stats = fit_normalizer(train_set);
    TimeSeriesDataset normalized = apply_normalizer(train_set, res.stats, /*is_test=*/false);
    WindowSet windows = slide_windows(normalized, cfg.window_len, cfg.stride);
    auto [model, report] = train_on_windows(windows, cfg);
    res.model = std::move(model);
    res.report = std::move(report);
    return res;
}

}  // namespace couta
