#pragma once

#include <cmath>
#include <vector>

#include "slac/tensor.hpp"

namespace slac {

struct AdamConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Standard bias-corrected Adam. Moment tensors are kept per parameter in
// the order the parameters are registered; the step counter is shared.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void register_param(const Tensor& p) {
        m_.push_back(Tensor::zeros(p.shape));
        v_.push_back(Tensor::zeros(p.shape));
    }

    // params and grads are parallel arrays matching registration order
    void step(std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
        if (params.size() != m_.size() || grads.size() != m_.size())
            throw EngineError("adam: parameter count mismatch");
        ++t_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& p = *params[i];
            const Tensor& g = *grads[i];
            if (!p.same_shape(g) || !p.same_shape(m_[i]))
                throw EngineError("adam: shape mismatch");
            for (std::size_t j = 0; j < p.size(); ++j) {
                double gv = g.data[j];
                m_[i].data[j] = cfg_.beta1 * m_[i].data[j] + (1.0 - cfg_.beta1) * gv;
                v_[i].data[j] = cfg_.beta2 * v_[i].data[j] + (1.0 - cfg_.beta2) * gv * gv;
                double mhat = m_[i].data[j] / bc1;
                double vhat = v_[i].data[j] / bc2;
                p.data[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
            }
        }
    }

    const AdamConfig& config() const { return cfg_; }
    std::uint64_t step_count() const { return t_; }
    std::vector<Tensor>& first_moments() { return m_; }
    std::vector<Tensor>& second_moments() { return v_; }
    void restore_step_count(std::uint64_t t) { t_ = t; }

private:
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace slac
