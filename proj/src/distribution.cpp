#include "routedet/distribution.hpp"

#include <cmath>

#include "routedet/common.hpp"

namespace routedet {

void CategoricalDistribution::validate() const {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) fail(ErrorCode::internal, "distribution entry is negative or NaN");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        fail(ErrorCode::internal, "distribution sums to " + fmt_double(sum) + ", expected 1");
}

double CategoricalDistribution::entropy() const {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

}  // namespace routedet
