#pragma once

#include <cstddef>
#include <vector>

namespace routedet {

// Adam with bias-corrected moments, linear warmup and decoupled weight decay.
class AdamW {
  public:
    AdamW(std::size_t n_params, double lr, double weight_decay, int warmup_steps)
        : lr_(lr), weight_decay_(weight_decay), warmup_steps_(warmup_steps),
          m_(n_params, 0.0), v_(n_params, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grads);

  private:
    double lr_;
    double weight_decay_;
    int warmup_steps_;
    long t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;

    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;
};

}  // namespace routedet
