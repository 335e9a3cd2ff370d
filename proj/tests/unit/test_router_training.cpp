#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "routedet/common.hpp"
#include "routedet/router.hpp"
#include "routedet/rng.hpp"

using namespace routedet;

namespace {

struct Pool {
    Vocabulary vocab = char_alphabet_prefix(6);
    SurrogateRegistry registry;
    std::vector<DetectorSpec> classes;
    std::vector<std::string> ids = {"a", "b", "c"};

    Pool() {
        int favored = 0;
        for (const auto& id : ids) {
            std::vector<double> probs(6, 0.06);
            probs[static_cast<std::size_t>(favored)] = 0.7;
            favored += 2;
            registry.add(id, MarkovModel::from_tables(vocab, 0, 0.5,
                                                      {{{}, CategoricalDistribution{probs}}}));
            classes.push_back({id, Criterion::likelihood});
        }
    }

    std::vector<TokenSequence> corpus(const std::string& src, int count, int len,
                                      const std::string& tag) const {
        std::vector<TokenSequence> out;
        for (int i = 0; i < count; ++i) {
            SampleParams params;
            params.length = len;
            params.seed = derive_seed(777, tag + "/" + src + "/" + std::to_string(i));
            TokenSequence x;
            x.ids = sample(registry.get(src), {}, params);
            x.label = Label::machine;
            x.source_id = src;
            out.push_back(std::move(x));
        }
        return out;
    }
};

FeatureConfig small_features() {
    FeatureConfig f;
    f.ngram_orders = {1, 2};
    f.hash_dim = 64;
    f.embed_dim = 8;
    return f;
}

TrainConfig fast_config(std::uint64_t seed) {
    TrainConfig c;
    c.epochs = 6;
    c.batch_size = 16;
    c.warmup_steps = 20;
    c.seed = seed;
    return c;
}

RouterModel trained_stage1(const Pool& pool, std::uint64_t seed) {
    std::vector<TokenSequence> data;
    for (const auto& id : pool.ids)
        for (auto& x : pool.corpus(id, 120, 40, "s1")) data.push_back(std::move(x));
    return train_stage1(data, pool.classes, small_features(), RouterHyper{}, 0.1,
                        fast_config(seed), 4)
        .model;
}

std::vector<Stage2Item> stage2_data(const Pool& pool, const RouterModel& model, int per_source,
                                    const std::string& tag) {
    std::vector<Stage2Item> items;
    for (const auto& id : pool.ids) {
        for (auto& x : pool.corpus(id, per_source, 40, tag)) {
            Stage2Item item;
            item.scores = score_pool(x, model.bank.classes, pool.registry);
            item.x = std::move(x);
            items.push_back(std::move(item));
        }
    }
    return items;
}

double routing_accuracy(const RouterModel& model, const std::vector<TokenSequence>& data) {
    std::size_t hits = 0;
    for (const auto& x : data)
        if (model.bank.classes[static_cast<std::size_t>(route(x, model).class_index)].surrogate_id ==
            x.source_id)
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

double max_drift(const RouterModel& model) {
    double worst = 0.0;
    for (int i = 0; i < model.bank.num_classes(); ++i)
        for (int k = 0; k < model.bank.per_class; ++k) {
            const double* p = model.bank.prototypes.data() + model.bank.offset(i, k);
            const double* a = model.bank.anchors.data() + model.bank.offset(i, k);
            double acc = 0.0;
            for (int d = 0; d < model.bank.dim; ++d) acc += (p[d] - a[d]) * (p[d] - a[d]);
            worst = std::max(worst, std::sqrt(acc));
        }
    return worst;
}

}  // namespace

TEST_SUITE("router_training") {

TEST_CASE("huge anchor weight pins prototypes") {
    Pool pool;
    auto stage1 = trained_stage1(pool, 21);
    stage1.hyper.lambda_anchor = 1e6;
    auto items = stage2_data(pool, stage1, 40, "s2pin");
    auto result = train_stage2(stage1, items, fast_config(22));
    CHECK(max_drift(result.model) < 1e-3);
    CHECK(result.model.bank.anchors == stage1.bank.anchors);
}

TEST_CASE("stage 2 with one-hot targets keeps routing accuracy") {
    Pool pool;
    auto stage1 = trained_stage1(pool, 23);

    std::vector<TokenSequence> eval;
    for (const auto& id : pool.ids)
        for (auto& x : pool.corpus(id, 40, 40, "s2eval")) eval.push_back(std::move(x));
    double before = routing_accuracy(stage1, eval);

    std::vector<TokenSequence> texts;
    std::vector<std::vector<double>> targets;
    for (const auto& id : pool.ids) {
        std::size_t cls = 0;
        for (; cls < pool.ids.size(); ++cls)
            if (pool.ids[cls] == id) break;
        for (auto& x : pool.corpus(id, 60, 40, "s2onehot")) {
            std::vector<double> q(pool.ids.size(), 0.0);
            q[cls] = 1.0;
            texts.push_back(std::move(x));
            targets.push_back(std::move(q));
        }
    }
    auto result = train_stage2_with_targets(stage1, texts, targets, fast_config(24));
    double after = routing_accuracy(result.model, eval);
    CHECK(after >= before - 0.02);
}

TEST_CASE("stage-2 loss is non-increasing over epochs up to minibatch noise") {
    Pool pool;
    auto stage1 = trained_stage1(pool, 25);
    auto items = stage2_data(pool, stage1, 50, "s2curve");
    auto config = fast_config(26);
    config.epochs = 20;
    auto result = train_stage2(stage1, items, config);

    REQUIRE(result.log.size() == 20);
    int upticks = 0;
    for (std::size_t e = 1; e < result.log.size(); ++e) {
        CHECK(std::isfinite(result.log[e].loss.total));
        if (result.log[e].loss.total > result.log[e - 1].loss.total + 1e-12) ++upticks;
    }
    int allowed = static_cast<int>(std::ceil(0.05 * static_cast<double>(result.log.size() - 1)));
    CHECK(upticks <= allowed);
}

TEST_CASE("anchor drift shrinks monotonically as the anchor weight grows") {
    Pool pool;
    auto stage1 = trained_stage1(pool, 27);
    auto items = stage2_data(pool, stage1, 40, "s2grid");

    std::vector<double> drifts;
    for (double lambda : {0.1, 1.0, 10.0}) {
        auto start = stage1;
        start.hyper.lambda_anchor = lambda;
        auto result = train_stage2(start, items, fast_config(28));
        drifts.push_back(max_drift(result.model));
    }
    CHECK(drifts[0] > drifts[1]);
    CHECK(drifts[1] > drifts[2]);
}

TEST_CASE("stage-2 training is deterministic and leaves anchors untouched") {
    Pool pool;
    auto stage1 = trained_stage1(pool, 29);
    auto items = stage2_data(pool, stage1, 30, "s2det");
    auto a = train_stage2(stage1, items, fast_config(30));
    auto b = train_stage2(stage1, items, fast_config(30));
    CHECK(a.model.encoder.weights == b.model.encoder.weights);
    CHECK(a.model.bank.prototypes == b.model.bank.prototypes);
    CHECK(a.model.bank.anchors == stage1.bank.anchors);
    CHECK(a.model.score_mean == b.model.score_mean);
    CHECK(a.model.score_std == b.model.score_std);
}

TEST_CASE("stage-2 requires anchors and scores") {
    Pool pool;
    RouterModel bare = trained_stage1(pool, 31);
    bare.bank.anchors.clear();
    auto items = stage2_data(pool, trained_stage1(pool, 31), 10, "s2err");
    CHECK_THROWS_AS(train_stage2(bare, items, fast_config(32)), Error);
    CHECK_THROWS_AS(train_stage2(trained_stage1(pool, 31), {}, fast_config(32)), Error);
}

TEST_CASE("routing returns the matching prototype class and full diagnostics") {
    Pool pool;
    auto model = trained_stage1(pool, 33);
    auto x = pool.corpus("b", 1, 40, "routecase")[0];
    auto z = embed(x, model.encoder);
    // plant the embedding as a prototype of class 2
    std::copy(z.begin(), z.end(), model.bank.prototypes.begin() + static_cast<std::ptrdiff_t>(model.bank.offset(2, 1)));
    auto r = route(x, model);
    CHECK(r.class_index == 2);
    CHECK(r.distances[2] == doctest::Approx(0.0));
    REQUIRE(r.probs.size() == 3);
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < r.probs.size(); ++i)
        if (r.probs[i] > r.probs[argmax]) argmax = i;
    CHECK(static_cast<int>(argmax) == r.class_index);
}

TEST_CASE("route_and_score composes routing with detector scoring") {
    Pool pool;
    auto model = trained_stage1(pool, 35);
    for (int t = 0; t < 10; ++t) {
        auto x = pool.corpus(pool.ids[static_cast<std::size_t>(t) % 3], 1, 40,
                             "compose/" + std::to_string(t))[0];
        auto routed = route(x, model);
        auto direct = score(x, pool.registry.get(routed.detector.surrogate_id),
                            Criterion::fast_detect_gpt);
        auto composed = route_and_score(x, model, pool.registry, Criterion::fast_detect_gpt);
        CHECK(composed.value == direct.value);
        CHECK(composed.value ==
              route_and_score(x, model, pool.registry, Criterion::fast_detect_gpt).value);
    }
}

TEST_CASE("single-class router scores exactly like the fixed surrogate") {
    Pool pool;
    RouterModel model;
    model.tau = 0.1;
    model.encoder.config = small_features();
    Rng rng(36);
    model.encoder.weights.resize(static_cast<std::size_t>(64 * 8));
    for (auto& w : model.encoder.weights) w = rng.normal() * 0.2;
    model.bank.classes = {{"a", Criterion::log_rank}};
    model.bank.per_class = 2;
    model.bank.dim = 8;
    model.bank.prototypes.resize(16);
    for (auto& p : model.bank.prototypes) p = rng.normal() * 0.5;
    model.bank.anchors = model.bank.prototypes;

    auto x = pool.corpus("c", 1, 40, "single")[0];
    CHECK(route_and_score(x, model, pool.registry).value ==
          score(x, pool.registry.get("a"), Criterion::log_rank).value);
}

TEST_CASE("routing agrees with the exact-KL oracle on a separable pool") {
    Pool pool;
    auto model = trained_stage1(pool, 37);

    // the KL-optimal surrogate for each source, computed, not assumed
    std::vector<std::string> kl_choice;
    for (const auto& src : pool.ids) {
        double best = 1e300;
        std::string best_id;
        for (const auto& sur : pool.ids) {
            double kl = exact_kl(pool.registry.get(src), pool.registry.get(sur), 4);
            if (kl < best) {
                best = kl;
                best_id = sur;
            }
        }
        kl_choice.push_back(best_id);
    }

    std::size_t agree = 0, total = 0;
    for (std::size_t s = 0; s < pool.ids.size(); ++s) {
        for (const auto& x : pool.corpus(pool.ids[s], 60, 40, "kloracle")) {
            auto r = route(x, model);
            if (r.detector.surrogate_id == kl_choice[s]) ++agree;
            ++total;
        }
    }
    CHECK(static_cast<double>(agree) / static_cast<double>(total) > 0.85);
}

TEST_CASE("composite pools route to surrogate-criterion pairs") {
    Pool pool;
    std::vector<DetectorSpec> classes;
    for (const auto& id : pool.ids) {
        classes.push_back({id, Criterion::likelihood});
        classes.push_back({id, Criterion::entropy});
    }
    std::vector<TokenSequence> data;
    for (const auto& id : pool.ids)
        for (auto& x : pool.corpus(id, 60, 40, "composite")) data.push_back(std::move(x));
    auto result = train_stage1(data, classes, small_features(), RouterHyper{}, 0.1,
                               fast_config(38), 4, true);
    CHECK(result.model.bank.num_classes() == 6);
    auto x = pool.corpus("a", 1, 40, "composite-eval")[0];
    auto scored = route_and_score(x, result.model, pool.registry);  // pair's own criterion
    auto r = route(x, result.model);
    CHECK(scored.value ==
          score(x, pool.registry.get(r.detector.surrogate_id), r.detector.criterion).value);
}

}  // TEST_SUITE
