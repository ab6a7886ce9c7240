#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "couta/network.hpp"
#include "couta/tensor.hpp"

namespace couta {

// Adam with bias correction. lr defaults to 1e-4; beta/epsilon are the
// conventional values.
struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam() = default;
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    void step(std::vector<Parameter>& params,
              const std::vector<std::vector<double>>& grads) {
        if (params.size() != grads.size())
            throw std::invalid_argument("Adam::step: params/grads count mismatch");
        if (m_.empty()) {
            m_.resize(params.size());
            v_.resize(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) {
                m_[i].assign(params[i].value.numel(), 0.0);
                v_[i].assign(params[i].value.numel(), 0.0);
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& p = params[i].value.values;
            const auto& g = grads[i];
            if (g.size() != p.size())
                throw std::invalid_argument("Adam::step: gradient shape mismatch for " +
                                            params[i].name);
            for (std::size_t j = 0; j < p.size(); ++j) {
                m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g[j];
                v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g[j] * g[j];
                const double mhat = m_[i][j] / bc1;
                const double vhat = v_[i][j] / bc2;
                p[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

    long steps_taken() const { return t_; }

private:
    AdamConfig cfg_;
    std::vector<std::vector<double>> m_, v_;
    long t_ = 0;
};

}  // namespace couta
