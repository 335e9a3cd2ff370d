#pragma once

#include <cstdint>
#include <vector>

#include "routedet/vocab.hpp"

namespace routedet {

struct FeatureConfig {
    std::vector<int> ngram_orders = {1, 2, 3};
    int hash_dim = 512;  // d_in
    int embed_dim = 64;  // d

    void validate() const;
};

// theta of the learnable projection: row-major embed_dim x hash_dim matrix.
struct EncoderParams {
    FeatureConfig config;
    std::vector<double> weights;

    double& w(int row, int col) { return weights[static_cast<std::size_t>(row) * config.hash_dim + col]; }
    double w(int row, int col) const {
        return weights[static_cast<std::size_t>(row) * config.hash_dim + col];
    }
};

// Hashed token n-gram counts (FNV-1a over the id bytes, bucket = hash mod
// hash_dim), scaled to unit L2 norm. Deterministic across platforms.
std::vector<double> featurize(const TokenSequence& x, const FeatureConfig& config);

// Raw bucket counts before normalization; featurize() is this, normalized.
std::vector<double> featurize_counts(const TokenSequence& x, const FeatureConfig& config);

// z = normalize(W * featurize(x)); unit L2 norm. Errors when W*f vanishes.
std::vector<double> embed(const TokenSequence& x, const EncoderParams& params);

std::vector<double> embed_features(const std::vector<double>& features, const EncoderParams& params);

// Gradient of an upstream loss with respect to W through normalize(W*f).
// Returns a row-major matrix of the same shape as weights.
std::vector<double> embed_backward(const std::vector<double>& features, const EncoderParams& params,
                                   const std::vector<double>& upstream_grad);

// In-place accumulation variant used by the training loop.
void embed_backward_accum(const std::vector<double>& features, const EncoderParams& params,
                          const std::vector<double>& upstream_grad, std::vector<double>& grad_w);

}  // namespace routedet
