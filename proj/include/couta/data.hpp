#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace couta {

enum class Split : std::uint8_t { Train, Test };

// Ordered N x D observation matrix with optional per-timestamp binary labels.
struct TimeSeriesDataset {
    std::size_t n = 0;  // length
    std::size_t d = 0;  // dimensionality
    std::vector<double> obs;        // row-major, n*d
    std::vector<int> labels;        // empty or length n, values in {0,1}
    Split split = Split::Train;

    double at(std::size_t t, std::size_t j) const { return obs[t * d + j]; }
    double& at(std::size_t t, std::size_t j) { return obs[t * d + j]; }
    bool has_labels() const { return !labels.empty(); }

    void validate() const {
        if (n < 1 || d < 1)
            throw std::invalid_argument("TimeSeriesDataset: N and D must be >= 1");
        if (obs.size() != n * d)
            throw std::invalid_argument("TimeSeriesDataset: observation size mismatch");
        if (!labels.empty() && labels.size() != n)
            throw std::invalid_argument("TimeSeriesDataset: label length != N");
    }
};

// Per-dimension min/max learned from the training split.
struct NormalizationStats {
    std::vector<double> min;
    std::vector<double> max;
    std::vector<bool> degenerate;  // max == min

    std::size_t dims() const { return min.size(); }
};

enum class PerturbKind : std::uint8_t { None, Point, Contextual, Collective };

// Sliding-window view materialized as l x D matrices.
struct WindowSet {
    std::vector<std::vector<double>> windows;  // each l*d, row-major
    std::size_t length = 0;  // l
    std::size_t dims = 0;    // d
    std::size_t stride = 1;  // r
    std::vector<std::size_t> origins;     // timestamp of each window's last row
    std::vector<PerturbKind> provenance;  // None for originals

    std::size_t size() const { return windows.size(); }
    bool empty() const { return windows.empty(); }
};

// CSV: header row required, numeric columns, optional integer column "label".
inline TimeSeriesDataset load_csv(const std::string& path, bool want_labels = false,
                                  Split split = Split::Train) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    std::ptrdiff_t label_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "label") label_col = static_cast<std::ptrdiff_t>(i);
    if (want_labels && label_col < 0)
        throw std::runtime_error("load_csv: labels requested but no 'label' column in " + path);

    TimeSeriesDataset ds;
    ds.split = split;
    ds.d = header.size() - (label_col >= 0 ? 1 : 0);
    if (ds.d == 0) throw std::runtime_error("load_csv: no data columns in " + path);

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        std::size_t data_col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col >= header.size())
                throw std::runtime_error("load_csv: row " + std::to_string(row) +
                                         " has more cells than the header");
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != cell.size())
                throw std::runtime_error("load_csv: unparsable cell at row " +
                                         std::to_string(row) + ", column " +
                                         std::to_string(col + 1) + ": '" + cell + "'");
            if (static_cast<std::ptrdiff_t>(col) == label_col) {
                if (v != 0.0 && v != 1.0)
                    throw std::runtime_error("load_csv: label at row " + std::to_string(row) +
                                             " is not 0/1");
                ds.labels.push_back(static_cast<int>(v));
            } else {
                ds.obs.push_back(v);
                ++data_col;
            }
            ++col;
        }
        if (col != header.size())
            throw std::runtime_error("load_csv: row " + std::to_string(row) +
                                     " has " + std::to_string(col) + " cells, expected " +
                                     std::to_string(header.size()));
        ++ds.n;
    }
    if (ds.n == 0) throw std::runtime_error("load_csv: no data rows in " + path);
    if (label_col < 0) ds.labels.clear();
    ds.validate();
    return ds;
}

inline NormalizationStats fit_normalizer(const TimeSeriesDataset& train) {
    train.validate();
    NormalizationStats st;
    st.min.assign(train.d, std::numeric_limits<double>::infinity());
    st.max.assign(train.d, -std::numeric_limits<double>::infinity());
    for (std::size_t t = 0; t < train.n; ++t)
        for (std::size_t j = 0; j < train.d; ++j) {
            const double v = train.at(t, j);
            st.min[j] = std::min(st.min[j], v);
            st.max[j] = std::max(st.max[j], v);
        }
    st.degenerate.resize(train.d);
    for (std::size_t j = 0; j < train.d; ++j) st.degenerate[j] = (st.max[j] == st.min[j]);
    return st;
}

// Min-max map fitted on the training split. Test values are first clipped to
// [min-4, max+4] in raw units, then mapped by the same affine transform.
// Degenerate dimensions map to 0.
inline TimeSeriesDataset apply_normalizer(const TimeSeriesDataset& ds,
                                          const NormalizationStats& st, bool is_test) {
    ds.validate();
    if (st.dims() != ds.d)
        throw std::invalid_argument("apply_normalizer: stats have " +
                                    std::to_string(st.dims()) + " dims, dataset has " +
                                    std::to_string(ds.d));
    TimeSeriesDataset out = ds;
    for (std::size_t t = 0; t < ds.n; ++t)
        for (std::size_t j = 0; j < ds.d; ++j) {
            if (st.degenerate[j]) {
                out.at(t, j) = 0.0;
                continue;
            }
            double v = ds.at(t, j);
            if (is_test) v = std::clamp(v, st.min[j] - 4.0, st.max[j] + 4.0);
            out.at(t, j) = (v - st.min[j]) / (st.max[j] - st.min[j]);
        }
    return out;
}

inline double denormalize_value(double v, const NormalizationStats& st, std::size_t j) {
    if (st.degenerate[j]) return st.min[j];
    return v * (st.max[j] - st.min[j]) + st.min[j];
}

inline WindowSet slide_windows(const TimeSeriesDataset& ds, std::size_t l, std::size_t r) {
    ds.validate();
    if (l < 1 || r < 1)
        throw std::invalid_argument("slide_windows: l and r must be >= 1");
    if (ds.n < l)
        throw std::invalid_argument("slide_windows: series length " + std::to_string(ds.n) +
                                    " < window length " + std::to_string(l) +
                                    "; use a smaller window");
    WindowSet ws;
    ws.length = l;
    ws.dims = ds.d;
    ws.stride = r;
    for (std::size_t t = 0; t + l <= ds.n; t += r) {
        std::vector<double> w(l * ds.d);
        std::copy(ds.obs.begin() + static_cast<std::ptrdiff_t>(t * ds.d),
                  ds.obs.begin() + static_cast<std::ptrdiff_t>((t + l) * ds.d), w.begin());
        ws.windows.push_back(std::move(w));
        ws.origins.push_back(t + l - 1);
        ws.provenance.push_back(PerturbKind::None);
    }
    return ws;
}

}  // namespace couta
