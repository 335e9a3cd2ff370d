#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "routedet/bound.hpp"
#include "routedet/config.hpp"
#include "routedet/detectors.hpp"
#include "routedet/io.hpp"
#include "routedet/router.hpp"

namespace routedet {

// A self-contained synthetic benchmark: the known generator pool (sources
// that double as surrogates), extra held-out sources excluded from the
// router's class set, a higher-entropy human-proxy model, and the train/eval
// corpora sampled from them with disjoint seed streams.
struct Suite {
    RunConfig config;
    std::uint64_t root_seed = 0;
    Vocabulary vocab;
    std::vector<std::string> pool_ids;
    std::vector<std::string> heldout_ids;
    std::string human_id = "human";
    SurrogateRegistry registry;
    std::vector<TokenSequence> stage1;
    std::vector<TokenSequence> stage2;
    std::vector<TokenSequence> eval_machine;
    std::vector<TokenSequence> eval_human;

    std::vector<std::string> source_ids() const;  // pool + heldout
};

Suite build_suite(const RunConfig& config, std::uint64_t root_seed);

void save_suite(const Suite& suite, const std::string& dir);
Suite load_suite(const std::string& dir);

// Detector columns for a pool and criterion set, pool-major then criterion.
std::vector<DetectorSpec> detector_columns(const std::vector<std::string>& pool,
                                           const std::vector<Criterion>& criteria);

ScoreTable score_corpus(const std::vector<TokenSequence>& corpus, const SurrogateRegistry& registry,
                        const std::vector<DetectorSpec>& columns, int workers);

struct AffinityMatrix {
    Criterion criterion = Criterion::fast_detect_gpt;
    std::vector<std::string> source_ids;
    std::vector<std::string> surrogate_ids;
    std::vector<std::vector<double>> auroc;  // [source][surrogate]
};

// cell (i, j) = AUROC of the criterion under surrogate j, machine text from
// source i against the human-proxy corpus. Derived from score tables.
AffinityMatrix affinity_from_tables(const ScoreTable& machine, const ScoreTable& human,
                                    Criterion criterion, const std::vector<std::string>& sources,
                                    const std::vector<std::string>& surrogates);

AffinityMatrix affinity_matrix(const Suite& suite, Criterion criterion, int workers);

struct SummaryRow {
    Criterion criterion;
    double matched_mean = 0.0;
    double cross_mean = 0.0;
    double max_mean = 0.0;
    double min_mean = 0.0;
    double gap_mean = 0.0;  // mean over sources of (max - min) / max
};

struct SourceSummaryRow {
    Criterion criterion;
    std::string source;
    double matched = 0.0;
    double row_max = 0.0;
    double row_min = 0.0;
    double gap = 0.0;
};

struct MatrixSummary {
    SummaryRow totals;
    std::vector<SourceSummaryRow> per_source;
};

MatrixSummary matched_cross_summary(const AffinityMatrix& matrix);

struct RoutedScoreRow {
    int index = 0;
    std::string source_id;
    Label label = Label::machine;
    int routed_class = 0;
    std::string routed_id;
    double score = 0.0;
};

std::vector<RoutedScoreRow> routed_scores(const Suite& suite, const RouterModel& router,
                                          Criterion criterion, int workers);

struct RoutedVsFixedRow {
    std::string source;
    bool heldout = false;
    double routed = 0.0;
    double best_fixed = 0.0;
    double mean_fixed = 0.0;
    std::vector<double> fixed;  // one per pool surrogate
};

struct RoutedReport {
    Criterion criterion;
    std::vector<std::string> fixed_ids;
    std::vector<RoutedVsFixedRow> rows;
    double routed_mean = 0.0;       // mean over sources
    double routed_heldout = 0.0;    // mean over held-out sources only
    double best_fixed_mean = 0.0;
    double mean_fixed_mean = 0.0;
    double best_fixed_heldout = 0.0;
    double mean_fixed_heldout = 0.0;
};

RoutedReport routed_vs_fixed(const Suite& suite, const RouterModel& router, Criterion criterion,
                             int workers);

struct SweepPoint {
    double fraction = 0.0;
    std::size_t n_stage2 = 0;
    double routed_auroc = 0.0;  // mean over sources
};

// Retrains Stage 2 on a seed-controlled subsample per fraction and evaluates
// the routed AUROC. The fraction-1.0 point reproduces the full run exactly.
std::vector<SweepPoint> data_efficiency_sweep(const Suite& suite, const RouterModel& stage1,
                                              const std::vector<double>& fractions, int workers);

// Stage-2 training items for the suite: machine texts scored by the pool.
std::vector<Stage2Item> stage2_items(const Suite& suite, const RouterModel& stage1, int workers);

struct HistogramRow {
    std::string source;
    std::vector<std::size_t> counts;  // per router class
};

std::vector<HistogramRow> routing_distribution(const Suite& suite, const RouterModel& router,
                                               int workers);

// (embedding, label, source) rows for every eval text plus the prototypes.
void embedding_dump(const Suite& suite, const RouterModel& router, const std::string& path);

struct BoundRow {
    Criterion statistic;
    std::string source;
    std::string surrogate;
    BoundReport report;
};

// Mismatch-bound verification over the pool with every criterion clipped to
// [-B, B]; every row must hold.
std::vector<BoundRow> bound_report(const Suite& suite, int horizon, double clip_B);

}  // namespace routedet
