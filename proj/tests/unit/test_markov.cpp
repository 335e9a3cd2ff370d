#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "routedet/common.hpp"
#include "routedet/markov.hpp"
#include "routedet/rng.hpp"

using namespace routedet;

namespace {

TokenSequence seq(std::vector<std::int32_t> ids, const std::string& src = "t") {
    TokenSequence s;
    s.ids = std::move(ids);
    s.label = Label::machine;
    s.source_id = src;
    return s;
}

MarkovModel order0(const Vocabulary& vocab, std::vector<double> probs, double alpha = 0.5) {
    return MarkovModel::from_tables(vocab, 0, alpha, {{{}, CategoricalDistribution{std::move(probs)}}});
}

std::vector<TokenSequence> random_corpus(const Vocabulary& vocab, int n, int len, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TokenSequence> out;
    for (int i = 0; i < n; ++i) {
        TokenSequence s;
        for (int j = 0; j < len; ++j)
            s.ids.push_back(static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(vocab.size()))));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

TEST_SUITE("markov") {

TEST_CASE("add-alpha estimates from hand counts") {
    auto vocab = char_alphabet_prefix(2);
    auto m = MarkovModel::train(vocab, {seq({0, 0, 0})}, 0, 1.0);
    auto d = m.next_token_distribution({});
    CHECK(d.probs[0] == doctest::Approx(4.0 / 5.0).epsilon(1e-12));
    CHECK(d.probs[1] == doctest::Approx(1.0 / 5.0).epsilon(1e-12));

    // alpha -> 0+ recovers the empirical distribution
    auto tight = MarkovModel::train(vocab, {seq({0, 0, 0})}, 0, 1e-9);
    auto dt = tight.next_token_distribution({});
    CHECK(dt.probs[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(dt.probs[1] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("unseen context falls back to smoothed uniform") {
    auto vocab = char_alphabet_prefix(4);
    auto m = MarkovModel::train(vocab, {seq({0, 1})}, 1, 1.0);
    auto d = m.next_token_distribution(std::vector<std::int32_t>{3});
    for (double p : d.probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("retraining is deterministic") {
    auto vocab = char_alphabet_prefix(3);
    auto corpus = random_corpus(vocab, 10, 40, 7);
    auto a = MarkovModel::train(vocab, corpus, 2, 0.5);
    auto b = MarkovModel::train(vocab, corpus, 2, 0.5);
    CHECK(a == b);
}

TEST_CASE("order-0 ignores context") {
    auto vocab = char_alphabet_prefix(3);
    auto m = MarkovModel::train(vocab, random_corpus(vocab, 5, 30, 3), 0, 0.5);
    auto d1 = m.next_token_distribution({});
    auto d2 = m.next_token_distribution(std::vector<std::int32_t>{2, 1, 0});
    CHECK(d1.probs == d2.probs);
}

TEST_CASE("alternating corpus concentrates mass on the follower") {
    auto vocab = char_alphabet_prefix(2);
    auto m = MarkovModel::train(vocab, {seq({0, 1, 0, 1, 0, 1, 0, 1})}, 1, 1e-9);
    auto d = m.next_token_distribution(std::vector<std::int32_t>{1, 0});
    CHECK(d.probs[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("conditionals sum to one") {
    auto vocab = char_alphabet_prefix(5);
    auto m = MarkovModel::train(vocab, random_corpus(vocab, 8, 50, 11), 2, 0.5);
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::int32_t> ctx;
        for (int j = 0; j < static_cast<int>(rng.below(4)); ++j)
            ctx.push_back(static_cast<std::int32_t>(rng.below(5)));
        auto d = m.next_token_distribution(ctx);
        d.validate();
    }
}

TEST_CASE("uniform-fallback model scores every position at ln(1/V)") {
    auto vocab = char_alphabet_prefix(4);
    auto m = MarkovModel::from_tables(vocab, 1, 0.5, {});
    auto preds = sequence_log_probs(m, seq({0, 3, 2, 1, 1}));
    REQUIRE(preds.size() == 5);
    for (const auto& p : preds)
        CHECK(p.log_prob == doctest::Approx(std::log(0.25)).epsilon(1e-12));
}

TEST_CASE("log probs add up to the joint") {
    auto vocab = char_alphabet_prefix(3);
    auto m = MarkovModel::train(vocab, random_corpus(vocab, 6, 30, 17), 1, 0.5);
    auto x = seq({0, 2, 1, 1, 0});
    auto preds = sequence_log_probs(m, x);
    double total = 0.0;
    for (const auto& p : preds) total += p.log_prob;
    CHECK(total == doctest::Approx(sequence_log_prob(m, x.ids)).epsilon(1e-12));
}

TEST_CASE("joint probabilities over all length-3 sequences sum to one") {
    auto vocab = char_alphabet_prefix(2);
    auto m = MarkovModel::train(vocab, random_corpus(vocab, 6, 25, 19), 1, 0.5);
    double total = 0.0;
    enumerate_sequences(2, 3, 1000, [&](std::span<const std::int32_t> ids) {
        total += std::exp(sequence_log_prob(m, ids));
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("joint normalization holds for V*h <= 16") {
    struct Case { int v, h; };
    for (auto [v, h] : {Case{2, 8}, Case{4, 4}, Case{8, 2}}) {
        auto vocab = char_alphabet_prefix(v);
        auto m = MarkovModel::train(vocab, random_corpus(vocab, 6, 40, 23 + v), 2, 0.5);
        double total = 0.0;
        enumerate_sequences(v, h, 1 << 16, [&](std::span<const std::int32_t> ids) {
            total += std::exp(sequence_log_prob(m, ids));
        });
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("tiny top_p keeps only the argmax token") {
    auto vocab = char_alphabet_prefix(4);
    auto m = MarkovModel::train(vocab, random_corpus(vocab, 6, 60, 29), 1, 0.5);
    SampleParams params;
    params.length = 50;
    params.top_p = 1e-6;
    params.temperature = 1.0;
    params.seed = 5;
    auto out = sample(m, {}, params);
    std::vector<std::int32_t> ctx;
    for (auto token : out) {
        auto d = m.next_token_distribution(ctx);
        int argmax = 0;
        for (int t = 1; t < 4; ++t)
            if (d.probs[static_cast<std::size_t>(t)] > d.probs[static_cast<std::size_t>(argmax)])
                argmax = t;
        CHECK(token == argmax);
        ctx.push_back(token);
    }
}

TEST_CASE("sampling is deterministic under a fixed seed") {
    auto vocab = char_alphabet_prefix(5);
    auto m = MarkovModel::train(vocab, random_corpus(vocab, 6, 60, 31), 2, 0.5);
    SampleParams params;
    params.length = 64;
    params.top_p = 0.9;
    params.temperature = 0.8;
    params.seed = 99;
    auto a = sample(m, std::vector<std::int32_t>{1, 2}, params);
    auto b = sample(m, std::vector<std::int32_t>{1, 2}, params);
    CHECK(a == b);
    params.seed = 100;
    CHECK(a != sample(m, std::vector<std::int32_t>{1, 2}, params));
}

TEST_CASE("unbiased sampling matches the distribution") {
    auto vocab = char_alphabet_prefix(4);
    std::vector<double> probs = {0.1, 0.2, 0.3, 0.4};
    auto m = order0(vocab, probs);
    const int n = 100000;
    SampleParams params;
    params.length = n;
    params.top_p = 1.0;
    params.temperature = 1.0;
    params.seed = 42;
    auto out = sample(m, {}, params);
    std::vector<int> counts(4, 0);
    for (auto t : out) ++counts[static_cast<std::size_t>(t)];

    double chi2 = 0.0;
    for (int t = 0; t < 4; ++t) {
        double expected = probs[static_cast<std::size_t>(t)] * n;
        double freq = static_cast<double>(counts[static_cast<std::size_t>(t)]) / n;
        CHECK(std::abs(freq - probs[static_cast<std::size_t>(t)]) < 0.01);
        chi2 += (counts[static_cast<std::size_t>(t)] - expected) * (counts[static_cast<std::size_t>(t)] - expected) / expected;
    }
    // chi-square critical value, 3 dof, p = 0.001
    CHECK(chi2 < 16.266);
}

TEST_CASE("exact_kl of a model with itself is zero") {
    auto vocab = char_alphabet_prefix(3);
    auto m = MarkovModel::train(vocab, random_corpus(vocab, 5, 40, 37), 1, 0.5);
    CHECK(exact_kl(m, m, 5) == 0.0);
}

TEST_CASE("exact_kl matches the two-term hand evaluation") {
    auto vocab = char_alphabet_prefix(2);
    auto p = order0(vocab, {0.5, 0.5});
    auto q = order0(vocab, {0.9, 0.1});
    double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
    for (int h : {1, 3, 6})
        CHECK(exact_kl(p, q, h) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.5108256237659907).epsilon(1e-12));
}

TEST_CASE("exact_kl agrees with a Monte-Carlo estimate") {
    auto vocab = char_alphabet_prefix(3);
    auto src = MarkovModel::train(vocab, random_corpus(vocab, 6, 50, 41), 1, 0.5);
    auto sur = MarkovModel::train(vocab, random_corpus(vocab, 6, 50, 43), 1, 0.5);
    const int horizon = 4;
    double exact = exact_kl(src, sur, horizon);

    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        SampleParams params;
        params.length = horizon;
        params.seed = derive_seed(1234, "mc/" + std::to_string(i));
        auto ids = sample(src, {}, params);
        double ratio = (sequence_log_prob(src, ids) - sequence_log_prob(sur, ids)) / horizon;
        sum += ratio;
        sum2 += ratio * ratio;
    }
    double mean = sum / n;
    double var = (sum2 / n - mean * mean) / n;
    double se = std::sqrt(var);
    CHECK(std::abs(exact - mean) < 3.0 * se);
}

TEST_CASE("absolute continuity violations are reported") {
    auto vocab = char_alphabet_prefix(2);
    auto p = order0(vocab, {0.5, 0.5});
    auto q = order0(vocab, {1.0, 0.0});
    CHECK_THROWS_AS(exact_kl(p, q, 2), Error);
    // the other direction is fine: 0 * log(0/q) = 0
    CHECK(exact_kl(q, p, 2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("enumeration cap is enforced") {
    auto vocab = char_alphabet_prefix(4);
    auto m = order0(vocab, {0.25, 0.25, 0.25, 0.25});
    CHECK_THROWS_AS(exact_kl(m, m, 12, 1000), Error);
}

TEST_CASE("model persistence keeps counts and distributions") {
    auto vocab = char_alphabet_prefix(4);
    auto m = MarkovModel::train(vocab, random_corpus(vocab, 8, 60, 47), 2, 0.75);
    auto path = std::filesystem::temp_directory_path() / "routedet_model_test.json";
    m.save(path.string());
    auto loaded = MarkovModel::load(path.string());
    CHECK(m == loaded);
    auto ctx = std::vector<std::int32_t>{1, 2};
    CHECK(m.next_token_distribution(ctx).probs == loaded.next_token_distribution(ctx).probs);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(MarkovModel::load("/nonexistent/model.json"), Error);
    auto style = order0(vocab, {0.25, 0.25, 0.25, 0.25});
    CHECK_THROWS_AS(style.save(path.string()), Error);  // no count provenance
}

TEST_CASE("training rejects bad input") {
    auto vocab = char_alphabet_prefix(2);
    CHECK_THROWS_AS(MarkovModel::train(vocab, {}, 1, 0.5), Error);
    CHECK_THROWS_AS(MarkovModel::train(vocab, {seq({0, 5})}, 1, 0.5), Error);
    CHECK_THROWS_AS(MarkovModel::train(vocab, {seq({0, 1})}, 1, 0.0), Error);
}

}  // TEST_SUITE
