#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "routedet/detectors.hpp"
#include "routedet/encoder.hpp"
#include "routedet/router.hpp"

namespace routedet {

struct SuiteConfig {
    std::uint64_t seed = 0;
    bool seed_set = false;
    int vocab_size = 16;
    int n_generators = 6;
    int n_heldout = 6;
    int generator_order = 2;
    int human_order = 3;
    double alpha = 0.5;
    double machine_concentration = 0.25;
    double human_concentration = 5.0;
    double heldout_blend = 0.3;
    int style_corpus_sequences = 200;
    int style_corpus_length = 256;
    int samples_per_cell = 500;
    int sequence_length = 128;
    int prompt_length = 30;
    double top_p = 0.96;
    double temperature = 1.0;
    int stage1_per_class = 200;
    int stage2_per_source = 100;
    int kl_horizon = 3;
    std::uint64_t enumeration_cap = 1ULL << 20;
};

struct ScoreConfig {
    std::vector<Criterion> criteria = all_criteria();
};

struct RouterConfig {
    int prototypes_per_class = 10;
    double tau = 0.1;
    RouterHyper hyper;
    Criterion criterion = Criterion::fast_detect_gpt;
    bool composite_pool = false;
};

struct EvalConfig {
    int bound_horizon = 3;
    double bound_clip = 8.0;
    std::vector<double> sweep_fractions = {0.1, 0.25, 0.5, 0.75, 1.0};
};

struct RunConfig {
    SuiteConfig suite;
    ScoreConfig score;
    FeatureConfig encoder;
    RouterConfig router;
    TrainConfig train;
    EvalConfig eval;

    void validate() const;  // errors name the offending section and field
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& doc);

}  // namespace routedet
