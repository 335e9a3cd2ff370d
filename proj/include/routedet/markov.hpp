#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "routedet/distribution.hpp"
#include "routedet/vocab.hpp"

namespace routedet {

// Order-k Markov model with add-alpha smoothing. Contexts shorter than k
// (sequence starts) are first-class: position i conditions on the last
// min(k, i) tokens, so joint probabilities over fixed-length sequences are
// properly normalized. Unseen contexts resolve to the smoothed uniform
// fallback. Models are immutable once built and safe for concurrent reads.
class MarkovModel {
  public:
    using ContextKey = std::uint64_t;

    static MarkovModel train(const Vocabulary& vocab, const std::vector<TokenSequence>& corpus,
                             int order, double alpha);

    // Builds a model from explicit conditional tables (no count provenance;
    // such a model cannot be saved). Used for synthetic ground-truth chains.
    static MarkovModel from_tables(
        const Vocabulary& vocab, int order, double alpha,
        const std::vector<std::pair<std::vector<std::int32_t>, CategoricalDistribution>>& rows);

    static MarkovModel load(const std::string& path);
    void save(const std::string& path) const;

    const Vocabulary& vocab() const { return vocab_; }
    int order() const { return order_; }
    double alpha() const { return alpha_; }
    bool has_counts() const { return has_counts_; }
    const std::map<ContextKey, std::vector<std::int64_t>>& counts() const { return counts_; }

    ContextKey context_key(std::span<const std::int32_t> context) const;

    CategoricalDistribution next_token_distribution(std::span<const std::int32_t> context) const;

    // Conditional for a packed key; falls back to smoothed uniform.
    const std::vector<double>& conditional(ContextKey key) const;

    bool operator==(const MarkovModel& other) const;

  private:
    int order_ = 0;
    double alpha_ = 0.5;
    Vocabulary vocab_;
    bool has_counts_ = true;
    std::map<ContextKey, std::vector<std::int64_t>> counts_;
    std::unordered_map<ContextKey, std::vector<double>> table_;
    std::vector<double> fallback_;

    void finalize_from_counts();
};

struct TokenPrediction {
    double log_prob;
    CategoricalDistribution dist;
};

// Per-position log p(x_i | x_<i) plus the full conditional at each position.
std::vector<TokenPrediction> sequence_log_probs(const MarkovModel& model, const TokenSequence& x);

// Streaming variant used by the detectors; avoids materializing every
// conditional. fn(position, token_id, conditional_probs, log_prob).
void for_each_position(
    const MarkovModel& model, const TokenSequence& x,
    const std::function<void(std::size_t, std::int32_t, const std::vector<double>&, double)>& fn);

double sequence_log_prob(const MarkovModel& model, std::span<const std::int32_t> ids);

struct SampleParams {
    int length = 0;
    double top_p = 1.0;
    double temperature = 1.0;
    std::uint64_t seed = 0;
};

// Nucleus sampling: temperature on logits first, then the smallest
// descending-probability prefix with mass >= top_p (ties by token index),
// renormalized. Returns the continuation only.
std::vector<std::int32_t> sample(const MarkovModel& model, std::span<const std::int32_t> prompt,
                                 const SampleParams& params);

inline constexpr std::uint64_t kDefaultEnumerationCap = 1ULL << 20;

// Visits every length-`horizon` sequence over a V-token alphabet in
// lexicographic order. Throws when V^horizon exceeds cap.
void enumerate_sequences(int vocab_size, int horizon, std::uint64_t cap,
                         const std::function<void(std::span<const std::int32_t>)>& fn);

// Exact per-token KL rate between two sequence models over a finite horizon:
// (1/h) * sum_x P_src(x) log(P_src(x)/P_sur(x)) over all length-h sequences.
double exact_kl(const MarkovModel& p_src, const MarkovModel& p_sur, int horizon,
                std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace routedet
