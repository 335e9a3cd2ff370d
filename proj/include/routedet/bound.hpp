#pragma once

#include <functional>

#include "routedet/distribution.hpp"
#include "routedet/markov.hpp"

namespace routedet {

// 0.5 * sum_j |p_j - q_j|
double tv_distance(const CategoricalDistribution& p, const CategoricalDistribution& q);

// sum_j p_j ln(p_j / q_j) with 0 ln(0/q) = 0; errors when q_j = 0 < p_j
double kl_categorical(const CategoricalDistribution& p, const CategoricalDistribution& q);

// tv(p, q) <= sqrt(kl(p, q) / 2) within 1e-9
bool pinsker_check(const CategoricalDistribution& p, const CategoricalDistribution& q);

using SequenceStatistic = std::function<double(const TokenSequence&)>;

struct BoundReport {
    double gap = 0.0;    // |mu_star - mu_proxy|
    double tv = 0.0;     // total variation over the enumerated outcome space
    double kl = 0.0;     // sequence-level KL (total over the horizon, not a rate)
    double bound = 0.0;  // B * sqrt(2 * kl)
    double B = 1.0;
    bool holds = false;  // gap <= bound + 1e-9
    double slack = 0.0;  // bound - gap
};

// Evaluates the mismatch bound by exact enumeration of all length-`horizon`
// sequences: mu_star = E_src[T], mu_proxy = E_sur[T]. The statistic must
// already be clipped to [-B, B] by the caller; values outside are an error.
BoundReport mismatch_gap(const SequenceStatistic& statistic, double B, const MarkovModel& p_src,
                         const MarkovModel& p_sur, int horizon,
                         std::uint64_t cap = kDefaultEnumerationCap);

// B*sqrt(2 kl) + 2B*sqrt(ln(2/delta) / (2n))
double finite_sample_bound(double B, double kl, long long n, double delta);

}  // namespace routedet
