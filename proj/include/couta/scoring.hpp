#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "couta/autodiff.hpp"
#include "couta/data.hpp"
#include "couta/network.hpp"

namespace couta {

// Per-timestamp anomaly scores; the first l-1 timestamps carry no window and
// are zero-padded.
struct AnomalyScoreSeries {
    std::vector<double> scores;
    std::size_t padding = 0;  // l - 1
};

struct EvalReport {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double threshold = 0.0;
    double auc_pr = 0.0;
};

// When `canonical` is set, score with the projection head alone (the no-UMC
// ablation); otherwise score = ||z - c|| + ||z' - c|| (unsquared norms).
inline AnomalyScoreSeries score_series(const CoutaModel& model, const TimeSeriesDataset& test,
                                       bool canonical = false,
                                       std::size_t batch_size = 256) {
    const std::size_t l = model.window_len();
    if (test.n < l)
        throw std::invalid_argument("score_series: test length " + std::to_string(test.n) +
                                    " < window length " + std::to_string(l));
    WindowSet ws = slide_windows(test, l, 1);

    AnomalyScoreSeries out;
    out.padding = l - 1;
    out.scores.assign(test.n, 0.0);

    for (std::size_t start = 0; start < ws.size(); start += batch_size) {
        const std::size_t end = std::min(start + batch_size, ws.size());
        std::vector<std::size_t> idx(end - start);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = start + i;

        ad::Graph g;
        CoutaModel::Bound b = model.bind(g);
        EmbeddingBatch e = b.forward(model.make_batch(ws, idx));
        ad::Var nz = g.norm_to(e.z, model.center());
        if (canonical) {
            const Tensor& vz = g.value(nz);
            for (std::size_t i = 0; i < idx.size(); ++i)
                out.scores[ws.origins[idx[i]]] = vz[i];
        } else {
            ad::Var nzp = g.norm_to(e.zp, model.center());
            const Tensor& vz = g.value(nz);
            const Tensor& vzp = g.value(nzp);
            for (std::size_t i = 0; i < idx.size(); ++i)
                out.scores[ws.origins[idx[i]]] = vz[i] + vzp[i];
        }
    }
    return out;
}

// Within each maximal contiguous run of label-1 timestamps, every score is
// raised to the run's maximum. Label-0 scores are untouched.
inline std::vector<double> point_adjust(const std::vector<double>& scores,
                                        const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("point_adjust: scores/labels length mismatch");
    std::vector<double> out = scores;
    std::size_t i = 0;
    while (i < out.size()) {
        if (labels[i] != 1) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double peak = out[i];
        while (j < out.size() && labels[j] == 1) peak = std::max(peak, out[j++]);
        for (std::size_t t = i; t < j; ++t) out[t] = peak;
        i = j;
    }
    return out;
}

namespace detail {

inline void count_at_threshold(const std::vector<double>& scores,
                               const std::vector<int>& labels, double thr,
                               std::size_t& tp, std::size_t& fp, std::size_t& fn) {
    tp = fp = fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= thr;
        if (pred && labels[i] == 1) ++tp;
        else if (pred && labels[i] == 0) ++fp;
        else if (!pred && labels[i] == 1) ++fn;
    }
}

inline std::size_t require_positives(const std::vector<double>& scores,
                                     const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("metrics: scores/labels length mismatch");
    std::size_t pos = 0;
    for (int v : labels) pos += static_cast<std::size_t>(v);
    if (pos == 0)
        throw std::invalid_argument("metrics: no positive labels, F1/AP undefined");
    return pos;
}

}  // namespace detail

// Sweep thresholds over the observed score values (predict anomalous when
// score >= threshold); ties in F1 go to the higher threshold.
inline EvalReport best_f1(const std::vector<double>& scores, const std::vector<int>& labels) {
    detail::require_positives(scores, labels);
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    EvalReport rep;
    rep.threshold = thresholds.back();
    for (double thr : thresholds) {
        std::size_t tp, fp, fn;
        detail::count_at_threshold(scores, labels, thr, tp, fp, fn);
        const double p = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double r = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        const double f1 = (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
        if (f1 >= rep.f1) {
            rep.f1 = f1;
            rep.precision = p;
            rep.recall = r;
            rep.threshold = thr;
        }
    }
    return rep;
}

// Average precision: sum of (R_i - R_{i-1}) * P_i over the threshold sweep in
// decreasing-score order (step-wise, no interpolation).
inline double auc_pr(const std::vector<double>& scores, const std::vector<int>& labels) {
    const std::size_t pos = detail::require_positives(scores, labels);

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, seen = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        // consume all points sharing one score value: a single operating point
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            tp += static_cast<std::size_t>(labels[order[j]]);
            ++seen;
            ++j;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

inline EvalReport evaluate(const std::vector<double>& adjusted_scores,
                           const std::vector<int>& labels) {
    EvalReport rep = best_f1(adjusted_scores, labels);
    rep.auc_pr = auc_pr(adjusted_scores, labels);
    return rep;
}

}  // namespace couta
