#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "couta/autodiff.hpp"
#include "couta/data.hpp"
#include "couta/rng.hpp"
#include "couta/tensor.hpp"

namespace couta {

inline constexpr double kLeakySlope = 0.01;

struct Parameter {
    std::string name;
    Tensor value;
};

// Embeddings of one batch: z through the projection head, z' through the
// bypass head, and the scalar classification output.
struct EmbeddingBatch {
    ad::Var z;    // [B, H]
    ad::Var zp;   // [B, H]
    ad::Var clf;  // [B, 1]
};

// TCN encoder (one residual block of two dilated causal convolutions),
// projection head with a bypass final layer, classification head, and a
// fixed hypersphere center. The bypass shares the head's first layer and
// differs only in the final affine layer.
class CoutaModel {
public:
    CoutaModel() = default;

    CoutaModel(std::size_t input_dims, std::size_t window_len, std::size_t hidden,
               std::size_t feature_dims, Rng& rng)
        : d_(input_dims), l_(window_len), hidden_(hidden), h_(feature_dims) {
        if (d_ < 1 || l_ < 1 || hidden_ < 1 || h_ < 1)
            throw std::invalid_argument("CoutaModel: all extents must be >= 1");
        add_conv("enc.conv1", hidden_, d_, 2, rng);
        add_conv("enc.conv2", hidden_, hidden_, 2, rng);
        if (d_ != hidden_) add_conv("enc.skip", hidden_, d_, 1, rng);
        add_affine("psi.w1", hidden_, hidden_, rng);
        add_affine("psi.w2", hidden_, h_, rng);
        add_affine("psi_bypass.w2", hidden_, h_, rng);
        add_affine("clf.w1", hidden_, hidden_, rng);
        add_affine("clf.w2", hidden_, 1, rng);
        center_ = Tensor({h_});
    }

    std::size_t input_dims() const { return d_; }
    std::size_t window_len() const { return l_; }
    std::size_t hidden_width() const { return hidden_; }
    std::size_t feature_dims() const { return h_; }

    std::vector<Parameter>& parameters() { return params_; }
    const std::vector<Parameter>& parameters() const { return params_; }

    const Tensor& center() const {
        if (!center_set_)
            throw std::logic_error("CoutaModel: hypersphere center not initialized");
        return center_;
    }
    bool has_center() const { return center_set_; }
    void set_center(Tensor c) {
        if (c.shape != std::vector<std::size_t>{h_})
            throw std::invalid_argument("set_center: expected shape [" + std::to_string(h_) + "]");
        center_ = std::move(c);
        center_set_ = true;
    }

    // Pack windows into a [B, l, D] batch tensor.
    Tensor make_batch(const WindowSet& ws, const std::vector<std::size_t>& indices) const {
        if (ws.length != l_ || ws.dims != d_)
            throw std::invalid_argument("make_batch: window shape " + std::to_string(ws.length) +
                                        "x" + std::to_string(ws.dims) + " does not match model " +
                                        std::to_string(l_) + "x" + std::to_string(d_));
        Tensor batch({indices.size(), l_, d_});
        for (std::size_t i = 0; i < indices.size(); ++i)
            std::copy(ws.windows[indices[i]].begin(), ws.windows[indices[i]].end(),
                      batch.values.begin() + static_cast<std::ptrdiff_t>(i * l_ * d_));
        return batch;
    }

    Tensor make_batch(const WindowSet& ws) const {
        std::vector<std::size_t> all(ws.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return make_batch(ws, all);
    }

    // Model parameters registered as leaves on one tape; forward passes on
    // that tape reuse the same leaves, so gradients of shared layers
    // accumulate across branches.
    class Bound {
    public:
        Bound(const CoutaModel& model, ad::Graph& g) : model_(&model), g_(&g) {
            leaves_.reserve(model.params_.size());
            for (const auto& p : model.params_) leaves_.push_back(g.leaf(p.value));
        }

        const std::vector<ad::Var>& leaves() const { return leaves_; }
        const Tensor& center() const { return model_->center(); }

        ad::Var encode(ad::Var x) const {
            ad::Graph& g = *g_;
            ad::Var h1 = g.leaky_relu(g.conv1d_causal(x, leaf("enc.conv1.w"),
                                                      leaf("enc.conv1.b"), 1), kLeakySlope);
            ad::Var h2 = g.conv1d_causal(h1, leaf("enc.conv2.w"), leaf("enc.conv2.b"), 2);
            ad::Var skip = (model_->d_ == model_->hidden_)
                               ? x
                               : g.conv1d_causal(x, leaf("enc.skip.w"), leaf("enc.skip.b"), 1);
            ad::Var block = g.leaky_relu(g.add(h2, skip), kLeakySlope);
            return g.last_timestep(block);  // [B, hidden]
        }

        EmbeddingBatch forward(const Tensor& batch) const {
            ad::Graph& g = *g_;
            ad::Var x = g.leaf(batch);
            ad::Var rep = encode(x);
            ad::Var shared =
                g.leaky_relu(g.affine(rep, leaf("psi.w1.w"), leaf("psi.w1.b")), kLeakySlope);
            EmbeddingBatch out;
            out.z = g.affine(shared, leaf("psi.w2.w"), leaf("psi.w2.b"));
            out.zp = g.affine(shared, leaf("psi_bypass.w2.w"), leaf("psi_bypass.w2.b"));
            ad::Var ch =
                g.leaky_relu(g.affine(rep, leaf("clf.w1.w"), leaf("clf.w1.b")), kLeakySlope);
            out.clf = g.affine(ch, leaf("clf.w2.w"), leaf("clf.w2.b"));
            return out;
        }

        // (d, d~): squared distances of both head outputs to the center.
        std::pair<ad::Var, ad::Var> distances(const Tensor& batch) const {
            EmbeddingBatch e = forward(batch);
            return {g_->sqdist_to(e.z, model_->center()), g_->sqdist_to(e.zp, model_->center())};
        }

    private:
        ad::Var leaf(const std::string& name) const {
            for (std::size_t i = 0; i < model_->params_.size(); ++i)
                if (model_->params_[i].name == name) return leaves_[i];
            throw std::logic_error("CoutaModel: no parameter named " + name);
        }

        const CoutaModel* model_;
        ad::Graph* g_;
        std::vector<ad::Var> leaves_;
    };

    Bound bind(ad::Graph& g) const { return Bound(*this, g); }

    // c = mean of psi(phi(s)) over all original training windows, computed
    // with the freshly initialized parameters.
    void init_center(const WindowSet& train_windows) {
        if (train_windows.empty())
            throw std::invalid_argument("init_center: empty window set");
        ad::Graph g;
        Bound b = bind(g);
        EmbeddingBatch e = b.forward(make_batch(train_windows));
        const Tensor& z = g.value(e.z);
        Tensor c({h_});
        for (std::size_t i = 0; i < train_windows.size(); ++i)
            for (std::size_t h = 0; h < h_; ++h) c[h] += z[i * h_ + h];
        for (auto& v : c.values) v /= static_cast<double>(train_windows.size());
        set_center(std::move(c));
    }

private:
    void add_affine(const std::string& name, std::size_t fin, std::size_t fout, Rng& rng) {
        Tensor w({fin, fout});
        const double bound = 1.0 / std::sqrt(static_cast<double>(fin));
        for (auto& v : w.values) v = uniform_real(rng, -bound, bound);
        params_.push_back({name + ".w", std::move(w)});
        params_.push_back({name + ".b", Tensor({fout})});
    }

    void add_conv(const std::string& name, std::size_t cout, std::size_t cin, std::size_t k,
                  Rng& rng) {
        Tensor w({cout, cin, k});
        const double bound = 1.0 / std::sqrt(static_cast<double>(cin * k));
        for (auto& v : w.values) v = uniform_real(rng, -bound, bound);
        params_.push_back({name + ".w", std::move(w)});
        params_.push_back({name + ".b", Tensor({cout})});
    }

    std::size_t d_ = 0, l_ = 0, hidden_ = 0, h_ = 0;
    std::vector<Parameter> params_;
    Tensor center_;
    bool center_set_ = false;
};

}  // namespace couta
