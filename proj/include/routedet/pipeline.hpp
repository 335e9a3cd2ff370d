#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace routedet {

// Directory-level pipeline steps behind the CLI and the C API. Every step is
// idempotent: identical inputs and seed produce byte-identical artifacts.

// Builds a suite from a config file. The root seed comes from the override
// when present, otherwise from [suite] seed; stochastic runs require one.
void gen_suite(const std::string& config_path, const std::string& out_dir,
               std::optional<std::uint64_t> seed_override, int workers);

// Scores the stage-2 and evaluation corpora against the surrogate pool.
// criteria_csv / pool_csv restrict the detector columns when non-empty.
void score_suite(const std::string& suite_dir, const std::string& criteria_csv,
                 const std::string& pool_csv, int workers);

enum class TrainStage { stage1 = 1, stage2 = 2, both = 3 };

// Trains the router. Stage 2 requires the stage-1 model (anchors) and the
// persisted stage-2 score table. out_path, when non-empty, receives a copy
// of the final model.
void train_router(const std::string& suite_dir, TrainStage stage, const std::string& out_path,
                  int workers);

// Writes one report family: matrix | summary | routed | sweep | histogram |
// bound | embed-dump. router_path defaults to the suite's trained router.
void eval_report(const std::string& suite_dir, const std::string& router_path,
                 const std::string& report_kind, const std::string& out_dir, int workers);

}  // namespace routedet
