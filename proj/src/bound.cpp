#include "routedet/bound.hpp"

#include <cmath>

#include "routedet/common.hpp"

namespace routedet {

double tv_distance(const CategoricalDistribution& p, const CategoricalDistribution& q) {
    if (p.size() != q.size()) fail(ErrorCode::config, "tv_distance dimension mismatch");
    double sum = 0.0;
    for (std::size_t j = 0; j < p.probs.size(); ++j) sum += std::abs(p.probs[j] - q.probs[j]);
    return 0.5 * sum;
}

double kl_categorical(const CategoricalDistribution& p, const CategoricalDistribution& q) {
    if (p.size() != q.size()) fail(ErrorCode::config, "kl_categorical dimension mismatch");
    double kl = 0.0;
    for (std::size_t j = 0; j < p.probs.size(); ++j) {
        if (p.probs[j] == 0.0) continue;
        if (q.probs[j] == 0.0)
            fail(ErrorCode::config, "kl_categorical: q is zero where p is positive");
        kl += p.probs[j] * std::log(p.probs[j] / q.probs[j]);
    }
    return kl;
}

bool pinsker_check(const CategoricalDistribution& p, const CategoricalDistribution& q) {
    return tv_distance(p, q) <= std::sqrt(kl_categorical(p, q) / 2.0) + 1e-9;
}

BoundReport mismatch_gap(const SequenceStatistic& statistic, double B, const MarkovModel& p_src,
                         const MarkovModel& p_sur, int horizon, std::uint64_t cap) {
    if (!(B > 0.0)) fail(ErrorCode::config, "statistic bound B must be > 0");
    if (!(p_src.vocab() == p_sur.vocab()))
        fail(ErrorCode::config, "mismatch_gap requires a shared vocabulary");

    double mu_star = 0.0;
    double mu_proxy = 0.0;
    double abs_diff = 0.0;
    double kl = 0.0;

    TokenSequence x;
    x.label = Label::machine;
    enumerate_sequences(p_src.vocab().size(), horizon, cap, [&](std::span<const std::int32_t> ids) {
        double ps = std::exp(sequence_log_prob(p_src, ids));
        double pq = std::exp(sequence_log_prob(p_sur, ids));
        x.ids.assign(ids.begin(), ids.end());
        double t = statistic(x);
        if (std::abs(t) > B + 1e-12)
            fail(ErrorCode::config, "statistic value " + fmt_double(t) +
                                        " exceeds its declared bound B=" + fmt_double(B));
        mu_star += ps * t;
        mu_proxy += pq * t;
        abs_diff += std::abs(ps - pq);
        if (ps > 0.0) {
            if (pq == 0.0)
                fail(ErrorCode::config,
                     "surrogate assigns zero probability where the source does not");
            kl += ps * std::log(ps / pq);
        }
    });

    BoundReport r;
    r.B = B;
    r.gap = std::abs(mu_star - mu_proxy);
    r.tv = 0.5 * abs_diff;
    r.kl = (kl < 0.0 && kl > -1e-12) ? 0.0 : kl;
    r.bound = B * std::sqrt(2.0 * r.kl);
    r.slack = r.bound - r.gap;
    r.holds = r.gap <= r.bound + 1e-9;
    return r;
}

double finite_sample_bound(double B, double kl, long long n, double delta) {
    if (n < 1) fail(ErrorCode::config, "sample count must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::config, "delta must be in (0, 1)");
    if (kl < 0.0) fail(ErrorCode::config, "kl must be >= 0");
    if (!(B > 0.0)) fail(ErrorCode::config, "B must be > 0");
    return B * std::sqrt(2.0 * kl) +
           2.0 * B * std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

}  // namespace routedet
