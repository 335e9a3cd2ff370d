#include "routedet/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "routedet/common.hpp"

namespace routedet {

const std::vector<Criterion>& all_criteria() {
    static const std::vector<Criterion> order = {
        Criterion::likelihood, Criterion::entropy,         Criterion::rank,
        Criterion::log_rank,   Criterion::llr,             Criterion::fast_detect_gpt,
    };
    return order;
}

std::string criterion_name(Criterion c) {
    switch (c) {
        case Criterion::likelihood: return "likelihood";
        case Criterion::entropy: return "entropy";
        case Criterion::rank: return "rank";
        case Criterion::log_rank: return "log_rank";
        case Criterion::llr: return "llr";
        case Criterion::fast_detect_gpt: return "fast_detect_gpt";
    }
    fail(ErrorCode::internal, "unreachable criterion");
}

Criterion parse_criterion(const std::string& name) {
    for (Criterion c : all_criteria())
        if (criterion_name(c) == name) return c;
    fail(ErrorCode::config, "unknown criterion '" + name + "'");
}

int token_rank(const std::vector<double>& probs, std::int32_t token_id) {
    const double p = probs[static_cast<std::size_t>(token_id)];
    int rank = 1;
    for (std::size_t j = 0; j < probs.size(); ++j) {
        if (probs[j] > p) ++rank;
        else if (probs[j] == p && static_cast<std::int32_t>(j) < token_id) ++rank;
    }
    return rank;
}

namespace {

// Accumulators for one pass over the per-position conditionals; every
// criterion is a cheap function of these sums.
struct PassSums {
    std::size_t n = 0;
    double log_prob = 0.0;
    double entropy = 0.0;
    double rank = 0.0;
    double log_rank = 0.0;
    double mu = 0.0;       // sum of E[log p] under each conditional
    double sigma2 = 0.0;   // sum of Var[log p] under each conditional
};

constexpr double kVarianceFloor = 1e-12;

}  // namespace

static PassSums run_pass(const TokenSequence& x, const MarkovModel& surrogate) {
    PassSums s;
    for_each_position(surrogate, x,
                      [&](std::size_t, std::int32_t token, const std::vector<double>& probs,
                          double lp) {
                          ++s.n;
                          s.log_prob += lp;
                          double mu = 0.0, ex2 = 0.0, h = 0.0;
                          for (double p : probs) {
                              if (p <= 0.0) continue;
                              double l = std::log(p);
                              mu += p * l;
                              ex2 += p * l * l;
                              h -= p * l;
                          }
                          s.entropy += h;
                          s.mu += mu;
                          s.sigma2 += ex2 - mu * mu;
                          int r = token_rank(probs, token);
                          s.rank += r;
                          s.log_rank += std::log(static_cast<double>(r));
                      });
    return s;
}

static double criterion_from_sums(const PassSums& s, Criterion c) {
    const double n = static_cast<double>(s.n);
    switch (c) {
        case Criterion::likelihood: return s.log_prob / n;
        case Criterion::entropy: return -s.entropy / n;
        case Criterion::rank: return -s.rank / n;
        case Criterion::log_rank: return -s.log_rank / n;
        case Criterion::llr: return s.log_rank == 0.0 ? 0.0 : -s.log_prob / s.log_rank;
        case Criterion::fast_detect_gpt:
            return s.sigma2 < kVarianceFloor ? 0.0 : (s.log_prob - s.mu) / std::sqrt(s.sigma2);
    }
    fail(ErrorCode::internal, "unreachable criterion");
}

DetectionScore score(const TokenSequence& x, const MarkovModel& surrogate, Criterion criterion) {
    PassSums s = run_pass(x, surrogate);
    return DetectionScore{criterion_from_sums(s, criterion), criterion, ""};
}

std::vector<double> score_all_criteria(const TokenSequence& x, const MarkovModel& surrogate) {
    PassSums s = run_pass(x, surrogate);
    std::vector<double> out;
    out.reserve(all_criteria().size());
    for (Criterion c : all_criteria()) out.push_back(criterion_from_sums(s, c));
    return out;
}

DetectionScore likelihood_score(const TokenSequence& x, const MarkovModel& m) {
    return score(x, m, Criterion::likelihood);
}
DetectionScore entropy_score(const TokenSequence& x, const MarkovModel& m) {
    return score(x, m, Criterion::entropy);
}
DetectionScore rank_score(const TokenSequence& x, const MarkovModel& m) {
    return score(x, m, Criterion::rank);
}
DetectionScore log_rank_score(const TokenSequence& x, const MarkovModel& m) {
    return score(x, m, Criterion::log_rank);
}
DetectionScore llr_score(const TokenSequence& x, const MarkovModel& m) {
    return score(x, m, Criterion::llr);
}
DetectionScore fast_detect_gpt_score(const TokenSequence& x, const MarkovModel& m) {
    return score(x, m, Criterion::fast_detect_gpt);
}

RocResult auroc(const std::vector<double>& machine_scores,
                const std::vector<double>& human_scores) {
    if (machine_scores.empty() || human_scores.empty())
        fail(ErrorCode::config, "auroc requires non-empty score lists");

    struct Entry {
        double value;
        bool machine;
    };
    std::vector<Entry> all;
    all.reserve(machine_scores.size() + human_scores.size());
    for (double v : machine_scores) all.push_back({v, true});
    for (double v : human_scores) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });

    // rank sum with average ranks over tie groups
    double machine_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].value == all[i].value) ++j;
        double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (all[k].machine) machine_rank_sum += avg_rank;
        i = j;
    }
    const double nm = static_cast<double>(machine_scores.size());
    const double nh = static_cast<double>(human_scores.size());
    double u = machine_rank_sum - nm * (nm + 1.0) / 2.0;
    return RocResult{u / (nm * nh), machine_scores.size(), human_scores.size()};
}

void SurrogateRegistry::add(const std::string& id, MarkovModel model) {
    models_[id] = std::make_shared<const MarkovModel>(std::move(model));
}

const MarkovModel& SurrogateRegistry::get(const std::string& id) const {
    auto it = models_.find(id);
    if (it == models_.end())
        fail(ErrorCode::missing_artifact, "surrogate '" + id + "' is not registered");
    return *it->second;
}

std::vector<std::string> SurrogateRegistry::ids() const {
    std::vector<std::string> out;
    out.reserve(models_.size());
    for (const auto& [id, _] : models_) out.push_back(id);
    return out;
}

std::vector<double> score_pool(const TokenSequence& x, const std::vector<DetectorSpec>& pool,
                               const SurrogateRegistry& registry) {
    if (pool.empty()) fail(ErrorCode::config, "detector pool is empty");
    std::vector<double> s;
    s.reserve(pool.size());
    for (const auto& spec : pool)
        s.push_back(score(x, registry.get(spec.surrogate_id), spec.criterion).value);
    return s;
}

}  // namespace routedet
