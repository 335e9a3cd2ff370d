#include <doctest.h>

#include <cmath>
#include <map>

#include "routedet/common.hpp"
#include "routedet/encoder.hpp"
#include "routedet/rng.hpp"

using namespace routedet;

namespace {

TokenSequence seq(std::vector<std::int32_t> ids) {
    TokenSequence s;
    s.ids = std::move(ids);
    s.label = Label::machine;
    return s;
}

TokenSequence random_seq(int vocab_size, int len, std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    TokenSequence s;
    for (int j = 0; j < len; ++j)
        s.ids.push_back(static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(vocab_size))));
    s.label = Label::machine;
    return s;
}

// independent FNV-1a from the published constants, for the dictionary oracle
std::uint64_t fnv_oracle(const std::vector<std::int32_t>& ngram) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto id : ngram) {
        std::uint32_t v = static_cast<std::uint32_t>(id);
        for (int b = 0; b < 4; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

EncoderParams random_params(const FeatureConfig& config, std::uint64_t rng_seed) {
    EncoderParams params;
    params.config = config;
    params.weights.resize(static_cast<std::size_t>(config.embed_dim) * config.hash_dim);
    Rng rng(rng_seed);
    for (auto& w : params.weights) w = rng.normal() * 0.3;
    return params;
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        da += a[i] * a[i];
        db += b[i] * b[i];
    }
    return std::sqrt(num) / std::max({std::sqrt(da), std::sqrt(db), 1e-12});
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("featurize is deterministic with unit norm") {
    FeatureConfig config;
    auto x = random_seq(8, 40, 42);
    auto a = featurize(x, config);
    auto b = featurize(x, config);
    CHECK(a == b);
    double norm2 = 0.0;
    for (double v : a) norm2 += v * v;
    CHECK(std::sqrt(norm2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bucket counts match a brute-force ngram dictionary") {
    FeatureConfig config;
    config.ngram_orders = {1, 2, 3};
    config.hash_dim = 64;
    config.embed_dim = 8;
    auto x = random_seq(6, 30, 77);

    std::map<std::vector<std::int32_t>, int> dictionary;
    for (int n : config.ngram_orders)
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= x.ids.size(); ++i)
            ++dictionary[std::vector<std::int32_t>(x.ids.begin() + static_cast<std::ptrdiff_t>(i),
                                                   x.ids.begin() + static_cast<std::ptrdiff_t>(i) + n)];
    std::vector<double> expected(64, 0.0);
    for (const auto& [ngram, count] : dictionary)
        expected[fnv_oracle(ngram) % 64] += count;

    CHECK(featurize_counts(x, config) == expected);
}

TEST_CASE("unigram features are length-normalized under concatenation") {
    FeatureConfig config;
    config.ngram_orders = {1};
    auto x = random_seq(5, 25, 99);
    TokenSequence doubled;
    doubled.ids = x.ids;
    doubled.ids.insert(doubled.ids.end(), x.ids.begin(), x.ids.end());
    doubled.label = Label::machine;
    auto a = featurize(x, config);
    auto b = featurize(doubled, config);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("featurize is permutation-sensitive through higher orders") {
    FeatureConfig config;
    auto a = featurize(seq({0, 1, 2, 3, 4}), config);
    auto b = featurize(seq({4, 3, 2, 1, 0}), config);
    CHECK(a != b);
}

TEST_CASE("featurize rejects empty and too-short inputs") {
    FeatureConfig config;
    CHECK_THROWS_AS(featurize(seq({}), config), Error);
    FeatureConfig trigram_only;
    trigram_only.ngram_orders = {3};
    CHECK_THROWS_AS(featurize(seq({0, 1}), trigram_only), Error);
}

TEST_CASE("identity-padded projection maps basis features to basis directions") {
    FeatureConfig config;
    config.hash_dim = 10;
    config.embed_dim = 4;
    EncoderParams params;
    params.config = config;
    params.weights.assign(40, 0.0);
    for (int r = 0; r < 4; ++r) params.w(r, r) = 1.0;

    std::vector<double> f(10, 0.0);
    f[2] = 1.0;
    auto z = embed_features(f, params);
    CHECK(z[2] == doctest::Approx(1.0));
    CHECK(z[0] == doctest::Approx(0.0));

    // features outside the identity block project to zero
    std::vector<double> dead(10, 0.0);
    dead[7] = 1.0;
    CHECK_THROWS_AS(embed_features(dead, params), Error);
}

TEST_CASE("embeddings are unit norm") {
    FeatureConfig config;
    config.hash_dim = 32;
    config.embed_dim = 6;
    auto params = random_params(config, 7);
    for (std::uint64_t t = 0; t < 20; ++t) {
        auto z = embed(random_seq(6, 20, 800 + t), params);
        double norm2 = 0.0;
        for (double v : z) norm2 += v * v;
        CHECK(std::sqrt(norm2) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("embed jacobian matches central finite differences") {
    FeatureConfig config;
    config.ngram_orders = {1, 2};
    config.hash_dim = 10;
    config.embed_dim = 4;
    const double h = 1e-5;

    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        auto params = random_params(config, 1000 + trial);
        auto x = random_seq(5, 12, 2000 + trial);
        auto f = featurize(x, config);

        for (int r = 0; r < config.embed_dim; ++r) {
            std::vector<double> upstream(static_cast<std::size_t>(config.embed_dim), 0.0);
            upstream[static_cast<std::size_t>(r)] = 1.0;
            auto analytic = embed_backward(f, params, upstream);

            std::vector<double> numeric(analytic.size());
            for (std::size_t w = 0; w < params.weights.size(); ++w) {
                auto plus = params;
                plus.weights[w] += h;
                auto minus = params;
                minus.weights[w] -= h;
                numeric[w] = (embed_features(f, plus)[static_cast<std::size_t>(r)] -
                              embed_features(f, minus)[static_cast<std::size_t>(r)]) /
                             (2.0 * h);
            }
            CHECK(rel_error(analytic, numeric) < 1e-5);
        }
    }
}

TEST_CASE("normalization kills radial upstream components") {
    FeatureConfig config;
    config.hash_dim = 16;
    config.embed_dim = 5;
    auto params = random_params(config, 11);
    auto x = random_seq(6, 15, 3000);
    auto f = featurize(x, config);
    auto z = embed_features(f, params);

    auto grad = embed_backward(f, params, z);  // upstream along z itself
    for (double g : grad) CHECK(std::abs(g) < 1e-12);

    std::vector<double> zero(static_cast<std::size_t>(config.embed_dim), 0.0);
    auto zgrad = embed_backward(f, params, zero);
    for (double g : zgrad) CHECK(g == 0.0);
}

TEST_CASE("degenerate projection errors") {
    FeatureConfig config;
    config.hash_dim = 8;
    config.embed_dim = 3;
    EncoderParams params;
    params.config = config;
    params.weights.assign(24, 0.0);
    std::vector<double> f(8, 0.5);
    CHECK_THROWS_AS(embed_features(f, params), Error);
}

TEST_CASE("bounded weights give bounded pre-normalization output") {
    FeatureConfig config;
    config.hash_dim = 12;
    config.embed_dim = 4;
    auto params = random_params(config, 23);
    double w_norm2 = 0.0;
    for (double w : params.weights) w_norm2 += w * w;
    for (std::uint64_t t = 0; t < 10; ++t) {
        auto f = featurize(random_seq(5, 10, 4000 + t), config);
        std::vector<double> u(4, 0.0);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 12; ++c) u[static_cast<std::size_t>(r)] += params.w(r, c) * f[static_cast<std::size_t>(c)];
        double u_norm2 = 0.0;
        for (double v : u) u_norm2 += v * v;
        CHECK(std::sqrt(u_norm2) <= std::sqrt(w_norm2) + 1e-9);
    }
}

}  // TEST_SUITE
