#include "routedet/optimizer.hpp"

#include <cmath>

#include "routedet/common.hpp"

namespace routedet {

void AdamW::step(std::vector<double>& params, const std::vector<double>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        fail(ErrorCode::internal, "optimizer parameter shape mismatch");
    ++t_;
    double warm = warmup_steps_ > 0
                      ? std::min(1.0, static_cast<double>(t_) / static_cast<double>(warmup_steps_))
                      : 1.0;
    double lr_t = lr_ * warm;
    double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grads[i];
        v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grads[i] * grads[i];
        double m_hat = m_[i] / bc1;
        double v_hat = v_[i] / bc2;
        params[i] -= lr_t * (m_hat / (std::sqrt(v_hat) + kEps) + weight_decay_ * params[i]);
    }
}

}  // namespace routedet
