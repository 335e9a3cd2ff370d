#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "routedet/markov.hpp"

namespace routedet {

// All six criteria share one orientation: larger = more machine-like.
// Entropy, Rank and LogRank are negated relative to their raw definitions.
enum class Criterion {
    likelihood,
    entropy,
    rank,
    log_rank,
    llr,
    fast_detect_gpt,
};

const std::vector<Criterion>& all_criteria();
std::string criterion_name(Criterion c);
Criterion parse_criterion(const std::string& name);

struct DetectorSpec {
    std::string surrogate_id;
    Criterion criterion = Criterion::fast_detect_gpt;

    std::string id() const { return criterion_name(criterion) + "@" + surrogate_id; }
};

struct DetectionScore {
    double value = 0.0;
    Criterion criterion = Criterion::likelihood;
    std::string surrogate_id;
};

DetectionScore likelihood_score(const TokenSequence& x, const MarkovModel& surrogate);
DetectionScore entropy_score(const TokenSequence& x, const MarkovModel& surrogate);
DetectionScore rank_score(const TokenSequence& x, const MarkovModel& surrogate);
DetectionScore log_rank_score(const TokenSequence& x, const MarkovModel& surrogate);
// log-likelihood / log-rank ratio; 0 when every rank is 1
DetectionScore llr_score(const TokenSequence& x, const MarkovModel& surrogate);
// analytic sampling-discrepancy form; 0 when the summed variance vanishes
DetectionScore fast_detect_gpt_score(const TokenSequence& x, const MarkovModel& surrogate);

DetectionScore score(const TokenSequence& x, const MarkovModel& surrogate, Criterion criterion);

// All six criteria from a single pass over the conditionals, in
// all_criteria() order.
std::vector<double> score_all_criteria(const TokenSequence& x, const MarkovModel& surrogate);

// 1-based rank of token_id in the descending-probability ordering of probs,
// ties broken by token index.
int token_rank(const std::vector<double>& probs, std::int32_t token_id);

struct RocResult {
    double auroc = 0.5;
    std::size_t n_machine = 0;
    std::size_t n_human = 0;
};

// Mann-Whitney statistic via rank sums: fraction of (machine, human) pairs
// with machine > human, ties counting one half.
RocResult auroc(const std::vector<double>& machine_scores, const std::vector<double>& human_scores);

// Immutable registry of surrogate models addressed by id.
class SurrogateRegistry {
  public:
    void add(const std::string& id, MarkovModel model);
    const MarkovModel& get(const std::string& id) const;
    bool contains(const std::string& id) const { return models_.count(id) > 0; }
    std::vector<std::string> ids() const;

  private:
    std::map<std::string, std::shared_ptr<const MarkovModel>> models_;
};

// s_k = score of detector k on x, in pool order.
std::vector<double> score_pool(const TokenSequence& x, const std::vector<DetectorSpec>& pool,
                               const SurrogateRegistry& registry);

}  // namespace routedet
