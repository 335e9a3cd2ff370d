#include "routedet/encoder.hpp"

#include <cmath>
#include <cstring>

#include "routedet/common.hpp"
#include "routedet/rng.hpp"

namespace routedet {

void FeatureConfig::validate() const {
    if (ngram_orders.empty()) fail(ErrorCode::config, "ngram_orders must not be empty");
    for (int n : ngram_orders)
        if (n < 1) fail(ErrorCode::config, "ngram orders must be >= 1");
    if (embed_dim < 2) fail(ErrorCode::config, "embed_dim must be >= 2");
    if (hash_dim < embed_dim) fail(ErrorCode::config, "hash_dim must be >= embed_dim");
}

std::vector<double> featurize_counts(const TokenSequence& x, const FeatureConfig& config) {
    config.validate();
    if (x.ids.empty()) fail(ErrorCode::config, "cannot featurize an empty sequence");

    std::vector<double> counts(static_cast<std::size_t>(config.hash_dim), 0.0);
    unsigned char bytes[4 * 16];
    for (int n : config.ngram_orders) {
        if (static_cast<std::size_t>(n) > x.ids.size()) continue;
        if (n > 16) fail(ErrorCode::config, "ngram order too large");
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= x.ids.size(); ++i) {
            for (int j = 0; j < n; ++j) {
                std::uint32_t v = static_cast<std::uint32_t>(x.ids[i + static_cast<std::size_t>(j)]);
                bytes[4 * j + 0] = static_cast<unsigned char>(v & 0xff);
                bytes[4 * j + 1] = static_cast<unsigned char>((v >> 8) & 0xff);
                bytes[4 * j + 2] = static_cast<unsigned char>((v >> 16) & 0xff);
                bytes[4 * j + 3] = static_cast<unsigned char>((v >> 24) & 0xff);
            }
            std::uint64_t h = fnv1a64(bytes, static_cast<std::size_t>(4 * n));
            counts[h % static_cast<std::uint64_t>(config.hash_dim)] += 1.0;
        }
    }
    return counts;
}

std::vector<double> featurize(const TokenSequence& x, const FeatureConfig& config) {
    auto counts = featurize_counts(x, config);
    double norm2 = 0.0;
    for (double c : counts) norm2 += c * c;
    if (norm2 <= 0.0)
        fail(ErrorCode::config, "sequence shorter than every configured n-gram order");
    double inv = 1.0 / std::sqrt(norm2);
    for (double& c : counts) c *= inv;
    return counts;
}

std::vector<double> embed_features(const std::vector<double>& features,
                                   const EncoderParams& params) {
    const int d = params.config.embed_dim;
    const int d_in = params.config.hash_dim;
    if (static_cast<int>(features.size()) != d_in)
        fail(ErrorCode::config, "feature dimension mismatch");
    if (params.weights.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d_in))
        fail(ErrorCode::config, "weight matrix shape mismatch");

    std::vector<double> u(static_cast<std::size_t>(d), 0.0);
    for (int r = 0; r < d; ++r) {
        const double* row = params.weights.data() + static_cast<std::size_t>(r) * d_in;
        double acc = 0.0;
        for (int c = 0; c < d_in; ++c) acc += row[c] * features[static_cast<std::size_t>(c)];
        u[static_cast<std::size_t>(r)] = acc;
    }
    double norm2 = 0.0;
    for (double v : u) norm2 += v * v;
    if (norm2 <= 0.0) fail(ErrorCode::internal, "degenerate projection: W*f = 0");
    double inv = 1.0 / std::sqrt(norm2);
    for (double& v : u) v *= inv;
    return u;
}

std::vector<double> embed(const TokenSequence& x, const EncoderParams& params) {
    return embed_features(featurize(x, params.config), params);
}

void embed_backward_accum(const std::vector<double>& features, const EncoderParams& params,
                          const std::vector<double>& upstream_grad, std::vector<double>& grad_w) {
    const int d = params.config.embed_dim;
    const int d_in = params.config.hash_dim;
    if (grad_w.size() != params.weights.size()) fail(ErrorCode::internal, "gradient shape mismatch");

    // u = W f, z = u/|u|; dL/du = (g - (g.z) z)/|u| — normalization kills the
    // radial component of the upstream gradient
    std::vector<double> u(static_cast<std::size_t>(d), 0.0);
    for (int r = 0; r < d; ++r) {
        const double* row = params.weights.data() + static_cast<std::size_t>(r) * d_in;
        double acc = 0.0;
        for (int c = 0; c < d_in; ++c) acc += row[c] * features[static_cast<std::size_t>(c)];
        u[static_cast<std::size_t>(r)] = acc;
    }
    double norm2 = 0.0;
    for (double v : u) norm2 += v * v;
    if (norm2 <= 0.0) fail(ErrorCode::internal, "degenerate projection: W*f = 0");
    double norm = std::sqrt(norm2);

    double dot = 0.0;
    for (int r = 0; r < d; ++r) dot += upstream_grad[static_cast<std::size_t>(r)] * u[static_cast<std::size_t>(r)] / norm;

    for (int r = 0; r < d; ++r) {
        double gu = (upstream_grad[static_cast<std::size_t>(r)] - dot * u[static_cast<std::size_t>(r)] / norm) / norm;
        if (gu == 0.0) continue;
        double* grow = grad_w.data() + static_cast<std::size_t>(r) * d_in;
        for (int c = 0; c < d_in; ++c) grow[c] += gu * features[static_cast<std::size_t>(c)];
    }
}

std::vector<double> embed_backward(const std::vector<double>& features, const EncoderParams& params,
                                   const std::vector<double>& upstream_grad) {
    std::vector<double> grad(params.weights.size(), 0.0);
    embed_backward_accum(features, params, upstream_grad, grad);
    return grad;
}

}  // namespace routedet
