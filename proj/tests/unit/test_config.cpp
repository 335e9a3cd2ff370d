#include <doctest.h>

#include "routedet/common.hpp"
#include "routedet/config.hpp"

using namespace routedet;

TEST_SUITE("config") {

TEST_CASE("defaults parse and validate") {
    auto config = parse_config_text("[suite]\nseed = 7\n");
    CHECK(config.suite.seed == 7);
    CHECK(config.suite.seed_set);
    CHECK(config.suite.n_generators == 6);
    CHECK(config.suite.samples_per_cell == 500);
    CHECK(config.router.tau == 0.1);
    CHECK(config.router.criterion == Criterion::fast_detect_gpt);
    CHECK(config.train.epochs == 8);
    CHECK(config.encoder.hash_dim == 512);
    CHECK(config.score.criteria.size() == 6);
}

TEST_CASE("full file with comments round trips through json") {
    const char* text =
        "# experiment configuration\n"
        "[suite]\n"
        "seed = 42\n"
        "vocab_size = 12   # alphabet prefix\n"
        "n_generators = 3\n"
        "n_heldout = 2\n"
        "samples_per_cell = 50\n"
        "stage1_per_class = 40\n"
        "stage2_per_source = 20\n"
        "\n"
        "[score]\n"
        "criteria = likelihood, fast_detect_gpt\n"
        "\n"
        "[encoder]\n"
        "ngram_orders = 1,2\n"
        "hash_dim = 128\n"
        "embed_dim = 16\n"
        "\n"
        "[router]\n"
        "criterion = likelihood\n"
        "tau = 0.2\n"
        "\n"
        "[train]\n"
        "epochs = 4\n"
        "\n"
        "[eval]\n"
        "sweep_fractions = 0.5, 1.0\n";
    auto config = parse_config_text(text);
    CHECK(config.suite.vocab_size == 12);
    CHECK(config.score.criteria == std::vector<Criterion>{Criterion::likelihood,
                                                          Criterion::fast_detect_gpt});
    CHECK(config.encoder.hash_dim == 128);
    CHECK(config.router.tau == 0.2);
    CHECK(config.eval.sweep_fractions == std::vector<double>{0.5, 1.0});

    auto doc = config_to_json(config);
    auto back = config_from_json(doc);
    CHECK(config_to_json(back) == doc);
}

TEST_CASE("unknown keys and sections fail fast") {
    CHECK_THROWS_WITH_AS(parse_config_text("[suite]\nbogus = 1\n"),
                         doctest::Contains("unknown key 'bogus'"), Error);
    CHECK_THROWS_WITH_AS(parse_config_text("[nope]\nx = 1\n"),
                         doctest::Contains("unknown config section"), Error);
    CHECK_THROWS_AS(parse_config_text("orphan = 1\n"), Error);
}

TEST_CASE("validation errors name the offending field") {
    CHECK_THROWS_WITH_AS(parse_config_text("[suite]\nalpha = -0.5\n"),
                         doctest::Contains("[suite] alpha"), Error);
    CHECK_THROWS_WITH_AS(parse_config_text("[suite]\ntop_p = 1.5\n"),
                         doctest::Contains("top_p"), Error);
    CHECK_THROWS_WITH_AS(parse_config_text("[router]\ntau = 0\n"),
                         doctest::Contains("[router] tau"), Error);
    CHECK_THROWS_WITH_AS(parse_config_text("[score]\ncriteria = rank\n"),
                         doctest::Contains("[router] criterion"), Error);
}

TEST_CASE("type errors are reported with the field") {
    CHECK_THROWS_WITH_AS(parse_config_text("[suite]\nseed = abc\n"),
                         doctest::Contains("expected an integer"), Error);
    CHECK_THROWS_WITH_AS(parse_config_text("[router]\ncomposite_pool = maybe\n"),
                         doctest::Contains("expected true/false"), Error);
}

}  // TEST_SUITE
