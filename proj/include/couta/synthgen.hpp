#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "couta/data.hpp"
#include "couta/rng.hpp"

namespace couta {

inline constexpr double kTwoPi = 6.283185307179586;

enum class SynthAnomalyType { Global, Contextual, Seasonal, Shapelet };

struct PlannedAnomaly {
    SynthAnomalyType type = SynthAnomalyType::Global;
    std::size_t position = 0;  // absolute timestamp of the segment start
    std::size_t length = 1;
};

struct BaseSignal {
    double freq = 0.02;  // cycles per step (period 50)
    double amp = 1.0;
    double phase = 0.0;
};

struct SynthSpec {
    std::size_t n = 1000;
    std::size_t dims = 2;
    double train_fraction = 0.4;
    double noise = 0.05;
    std::vector<BaseSignal> base;  // one per dimension; filled with defaults if empty
    std::vector<PlannedAnomaly> plan;

    std::size_t train_len() const {
        return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    }
};

struct SynthResult {
    TimeSeriesDataset train;
    TimeSeriesDataset test;              // with labels
    std::vector<double> clean_base;      // n x d, noise-free, anomaly-free
    std::vector<int> labels;             // full length n
};

namespace detail {

inline std::vector<BaseSignal> resolve_base(const SynthSpec& spec) {
    if (!spec.base.empty()) {
        if (spec.base.size() != spec.dims)
            throw std::invalid_argument("SynthSpec: base signal count != dims");
        return spec.base;
    }
    std::vector<BaseSignal> base(spec.dims);
    for (std::size_t j = 0; j < spec.dims; ++j) {
        base[j].freq = 0.02 * (1.0 + 0.5 * static_cast<double>(j));
        base[j].phase = 0.7 * static_cast<double>(j);
    }
    return base;
}

inline void validate_plan(const SynthSpec& spec) {
    const std::size_t split = spec.train_len();
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& a : spec.plan) {
        if (a.length < 1 || a.position < split || a.position + a.length > spec.n)
            throw std::invalid_argument(
                "SynthSpec: anomaly segment must lie entirely in the test region");
        spans.emplace_back(a.position, a.position + a.length);
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i].first < spans[i - 1].second)
            throw std::invalid_argument("SynthSpec: anomaly segments overlap");
}

// Anomalous replacement for the clean base value at timestamp t, dimension j.
inline double anomalous_value(const PlannedAnomaly& a, const BaseSignal& sig, std::size_t t,
                              std::size_t occurrence,
                              const std::vector<double>& clean, std::size_t dims,
                              std::size_t j) {
    const double td = static_cast<double>(t);
    switch (a.type) {
        case SynthAnomalyType::Global: {
            // spike far outside the signal range
            const double sign = (occurrence % 2 == 0) ? 1.0 : -1.0;
            const double sigma = sig.amp / std::sqrt(2.0);
            return sign * (sig.amp + 5.0 * sigma);
        }
        case SynthAnomalyType::Contextual: {
            // inside the global range but contradicting the local context:
            // the signal extreme opposite to the current base value
            const double base = clean[t * dims + j];
            return (base <= 0.0) ? sig.amp : -sig.amp;
        }
        case SynthAnomalyType::Seasonal:
            // frequency change over the segment
            return sig.amp * std::sin(kTwoPi * 3.0 * sig.freq * td + sig.phase);
        case SynthAnomalyType::Shapelet:
            // waveform replacement: square wave of equal amplitude
            return sig.amp *
                   ((std::sin(kTwoPi * sig.freq * td + sig.phase) >= 0.0) ? 1.0 : -1.0);
    }
    throw std::logic_error("anomalous_value: unreachable");
}

}  // namespace detail

// Deterministic synthetic series: per-dimension sinusoid plus Gaussian noise,
// with the planned anomalies written into the test region.
inline SynthResult generate(const SynthSpec& spec, Rng& rng) {
    if (spec.n < 2 || spec.dims < 1)
        throw std::invalid_argument("SynthSpec: need n >= 2 and dims >= 1");
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
        throw std::invalid_argument("SynthSpec: train_fraction must be in (0, 1)");
    detail::validate_plan(spec);
    const auto base = detail::resolve_base(spec);

    SynthResult res;
    res.clean_base.resize(spec.n * spec.dims);
    for (std::size_t t = 0; t < spec.n; ++t)
        for (std::size_t j = 0; j < spec.dims; ++j)
            res.clean_base[t * spec.dims + j] =
                base[j].amp * std::sin(kTwoPi * base[j].freq * static_cast<double>(t) +
                                       base[j].phase);

    std::vector<double> values = res.clean_base;
    res.labels.assign(spec.n, 0);
    for (std::size_t ai = 0; ai < spec.plan.size(); ++ai) {
        const auto& a = spec.plan[ai];
        for (std::size_t t = a.position; t < a.position + a.length; ++t) {
            res.labels[t] = 1;
            for (std::size_t j = 0; j < spec.dims; ++j)
                values[t * spec.dims + j] = detail::anomalous_value(
                    a, base[j], t, ai, res.clean_base, spec.dims, j);
        }
    }
    for (auto& v : values) v += gaussian(rng, 0.0, spec.noise);

    const std::size_t split = spec.train_len();
    res.train.n = split;
    res.train.d = spec.dims;
    res.train.split = Split::Train;
    res.train.obs.assign(values.begin(),
                         values.begin() + static_cast<std::ptrdiff_t>(split * spec.dims));

    res.test.n = spec.n - split;
    res.test.d = spec.dims;
    res.test.split = Split::Test;
    res.test.obs.assign(values.begin() + static_cast<std::ptrdiff_t>(split * spec.dims),
                        values.end());
    res.test.labels.assign(res.labels.begin() + static_cast<std::ptrdiff_t>(split),
                           res.labels.end());
    return res;
}

// The three benchmark flavors used throughout the test suite.
inline SynthSpec benchmark_spec(const std::string& kind, std::size_t n = 1000,
                                std::size_t dims = 2) {
    SynthSpec spec;
    spec.n = n;
    spec.dims = dims;
    if (kind == "point") {
        spec.plan = {{SynthAnomalyType::Global, 500, 1}, {SynthAnomalyType::Global, 575, 1},
                     {SynthAnomalyType::Global, 650, 1}, {SynthAnomalyType::Global, 775, 1},
                     {SynthAnomalyType::Global, 850, 1}, {SynthAnomalyType::Global, 975, 1}};
    } else if (kind == "pattern") {
        spec.plan = {{SynthAnomalyType::Seasonal, 480, 40},
                     {SynthAnomalyType::Shapelet, 600, 40},
                     {SynthAnomalyType::Seasonal, 750, 40},
                     {SynthAnomalyType::Shapelet, 880, 40}};
    } else if (kind == "pattern-varlen") {
        spec.plan = {{SynthAnomalyType::Seasonal, 460, 20},
                     {SynthAnomalyType::Shapelet, 560, 50},
                     {SynthAnomalyType::Seasonal, 680, 75},
                     {SynthAnomalyType::Shapelet, 820, 35}};
    } else {
        throw std::invalid_argument("benchmark_spec: unknown kind '" + kind +
                                    "' (expected point|pattern|pattern-varlen)");
    }
    return spec;
}

// Inject anomaly segments into the training region until the requested
// fraction of timestamps is contaminated. Returns the contamination mask;
// the mask is diagnostic only and never shown to the model.
inline std::vector<int> contaminate_train(TimeSeriesDataset& train, double ratio, Rng& rng) {
    if (ratio < 0.0 || ratio >= 0.5)
        throw std::invalid_argument("contaminate_train: ratio must be in [0, 0.5)");
    std::vector<int> mask(train.n, 0);
    if (ratio == 0.0) return mask;

    const std::size_t target =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(train.n)));
    if (target + 2 > train.n)
        throw std::invalid_argument("contaminate_train: ratio infeasible for series length");

    std::size_t contaminated = 0;
    std::size_t attempts = 0;
    while (contaminated < target) {
        if (++attempts > 10000)
            throw std::runtime_error("contaminate_train: cannot place enough segments");
        const std::size_t remaining = target - contaminated;
        std::size_t len = std::min<std::size_t>(remaining, 8 + uniform_index(rng, 13));
        if (len < 1) len = 1;
        if (len >= train.n) continue;
        const std::size_t pos = uniform_index(rng, train.n - len);
        bool clash = false;
        for (std::size_t t = pos; t < pos + len && !clash; ++t) clash = mask[t] != 0;
        if (clash) continue;

        // alternate between spike bursts and square-wave segments
        const bool spike = (attempts % 2 == 0);
        for (std::size_t t = pos; t < pos + len; ++t) {
            mask[t] = 1;
            for (std::size_t j = 0; j < train.d; ++j) {
                if (spike)
                    train.at(t, j) = ((t + j) % 2 == 0 ? 4.0 : -4.0);
                else
                    train.at(t, j) = (train.at(t, j) >= 0.0 ? 1.0 : -1.0);
            }
        }
        contaminated += len;
    }
    return mask;
}

}  // namespace couta
