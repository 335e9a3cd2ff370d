#include "routedet/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "routedet/common.hpp"
#include "routedet/harness.hpp"
#include "routedet/rng.hpp"

namespace fs = std::filesystem;

namespace routedet {

namespace {

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string part;
    while (std::getline(ss, part, ',')) {
        while (!part.empty() && part.front() == ' ') part.erase(part.begin());
        while (!part.empty() && part.back() == ' ') part.pop_back();
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

fs::path scores_dir(const std::string& suite_dir) { return fs::path(suite_dir) / "scores"; }
fs::path router_dir(const std::string& suite_dir) { return fs::path(suite_dir) / "router"; }

std::string stage1_router_path(const std::string& suite_dir) {
    return (router_dir(suite_dir) / "router_stage1.json").string();
}
std::string final_router_path(const std::string& suite_dir) {
    return (router_dir(suite_dir) / "router.json").string();
}

std::vector<DetectorSpec> router_classes(const Suite& suite) {
    if (suite.config.router.composite_pool)
        return detector_columns(suite.pool_ids, suite.config.score.criteria);
    return detector_columns(suite.pool_ids, {suite.config.router.criterion});
}

void write_train_log(const std::string& path, const std::vector<EpochLog>& log) {
    Table table;
    table.header = {"epoch", "loss", "ce", "kl", "sep", "norm", "anchor"};
    for (const auto& entry : log) {
        table.rows.push_back({std::to_string(entry.epoch), fmt_double(entry.loss.total),
                              fmt_double(entry.loss.ce), fmt_double(entry.loss.kl),
                              fmt_double(entry.loss.sep), fmt_double(entry.loss.norm),
                              fmt_double(entry.loss.anchor)});
    }
    write_table(path, table);
}

ScoreTable load_scores(const std::string& suite_dir, const std::string& name,
                       const std::string& hint) {
    fs::path path = scores_dir(suite_dir) / name;
    if (!fs::exists(path)) fail(ErrorCode::missing_artifact, "missing " + path.string() + hint);
    return read_score_table(path.string());
}

}  // namespace

void gen_suite(const std::string& config_path, const std::string& out_dir,
               std::optional<std::uint64_t> seed_override, int workers) {
    (void)workers;  // suite generation is sequential by construction
    RunConfig config = parse_config_file(config_path);
    std::uint64_t seed;
    if (seed_override) {
        seed = *seed_override;
        config.suite.seed = seed;
        config.suite.seed_set = true;
    } else if (config.suite.seed_set) {
        seed = config.suite.seed;
    } else {
        fail(ErrorCode::config,
             "gen-suite needs a seed: pass --seed or set [suite] seed in the config");
    }
    Suite suite = build_suite(config, seed);
    save_suite(suite, out_dir);
}

void score_suite(const std::string& suite_dir, const std::string& criteria_csv,
                 const std::string& pool_csv, int workers) {
    Suite suite = load_suite(suite_dir);

    std::vector<Criterion> criteria = suite.config.score.criteria;
    if (!criteria_csv.empty()) {
        criteria.clear();
        for (const auto& name : split_csv(criteria_csv)) criteria.push_back(parse_criterion(name));
        if (criteria.empty()) fail(ErrorCode::config, "criteria list is empty");
    }
    std::vector<std::string> pool = suite.pool_ids;
    if (!pool_csv.empty()) {
        pool = split_csv(pool_csv);
        if (pool.empty()) fail(ErrorCode::config, "pool list is empty");
        for (const auto& id : pool) suite.registry.get(id);
    }

    auto columns = detector_columns(pool, criteria);
    fs::create_directories(scores_dir(suite_dir));
    write_score_table((scores_dir(suite_dir) / "stage2.tsv").string(),
                      score_corpus(suite.stage2, suite.registry, columns, workers));
    write_score_table((scores_dir(suite_dir) / "eval_machine.tsv").string(),
                      score_corpus(suite.eval_machine, suite.registry, columns, workers));
    write_score_table((scores_dir(suite_dir) / "eval_human.tsv").string(),
                      score_corpus(suite.eval_human, suite.registry, columns, workers));
}

void train_router(const std::string& suite_dir, TrainStage stage, const std::string& out_path,
                  int workers) {
    (void)workers;  // training is single-writer; scoring for stage 2 is read from disk
    Suite suite = load_suite(suite_dir);
    fs::create_directories(router_dir(suite_dir));

    std::optional<RouterModel> stage1_model;
    if (stage == TrainStage::stage1 || stage == TrainStage::both) {
        TrainConfig train = suite.config.train;
        train.seed = derive_seed(suite.root_seed, "train/stage1");
        auto result = train_stage1(suite.stage1, router_classes(suite), suite.config.encoder,
                                   suite.config.router.hyper, suite.config.router.tau, train,
                                   suite.config.router.prototypes_per_class,
                                   suite.config.router.composite_pool);
        result.model.save(stage1_router_path(suite_dir));
        write_train_log((router_dir(suite_dir) / "train_log_stage1.tsv").string(), result.log);
        stage1_model = std::move(result.model);
        if (stage == TrainStage::stage1 && !out_path.empty()) stage1_model->save(out_path);
    }

    if (stage == TrainStage::stage2 || stage == TrainStage::both) {
        if (!stage1_model) {
            if (!fs::exists(stage1_router_path(suite_dir)))
                fail(ErrorCode::pipeline_order,
                     "stage 2 requires a stage-1 router; run train-router --stage 1 first");
            stage1_model = RouterModel::load(stage1_router_path(suite_dir));
        }
        if (!stage1_model->bank.has_anchors())
            fail(ErrorCode::pipeline_order, "stage-1 router has no anchors");

        ScoreTable table = load_scores(suite_dir, "stage2.tsv", " (run score first)");
        if (table.rows.size() != suite.stage2.size())
            fail(ErrorCode::config, "stage-2 score table does not match the stage-2 corpus");

        const auto& classes = stage1_model->bank.classes;
        std::vector<int> columns;
        for (const auto& spec : classes) {
            int col = table.column(spec.id());
            if (col < 0)
                fail(ErrorCode::missing_artifact,
                     "stage-2 score table lacks column " + spec.id() + "; rerun score");
            columns.push_back(col);
        }

        std::vector<Stage2Item> items(suite.stage2.size());
        for (std::size_t i = 0; i < suite.stage2.size(); ++i) {
            const auto& row = table.rows[i];
            if (row.label != Label::machine)
                fail(ErrorCode::config, "stage-2 data must be machine-labeled");
            items[i].x = suite.stage2[i];
            for (int col : columns) items[i].scores.push_back(row.scores[static_cast<std::size_t>(col)]);
        }

        TrainConfig train = suite.config.train;
        train.seed = derive_seed(suite.root_seed, "train/stage2");
        auto result = train_stage2(*stage1_model, items, train);
        result.model.save(final_router_path(suite_dir));
        write_train_log((router_dir(suite_dir) / "train_log_stage2.tsv").string(), result.log);
        if (!out_path.empty()) result.model.save(out_path);
    }
}

void eval_report(const std::string& suite_dir, const std::string& router_path,
                 const std::string& report_kind, const std::string& out_dir, int workers) {
    Suite suite = load_suite(suite_dir);
    fs::path reports = out_dir.empty() ? fs::path(suite_dir) / "reports" : fs::path(out_dir);
    fs::create_directories(reports);

    auto load_router = [&](const std::string& fallback) {
        std::string path = router_path.empty() ? fallback : router_path;
        if (!fs::exists(path))
            fail(ErrorCode::missing_artifact, "no router model at " + path + " (run train-router)");
        return RouterModel::load(path);
    };

    if (report_kind == "matrix" || report_kind == "summary") {
        ScoreTable machine = load_scores(suite_dir, "eval_machine.tsv", " (run score first)");
        ScoreTable human = load_scores(suite_dir, "eval_human.tsv", " (run score first)");
        if (report_kind == "matrix") {
            for (Criterion crit : suite.config.score.criteria) {
                auto matrix = affinity_from_tables(machine, human, crit, suite.pool_ids,
                                                   suite.pool_ids);
                Table table;
                table.header = {"source"};
                for (const auto& sur : matrix.surrogate_ids) table.header.push_back(sur);
                for (std::size_t i = 0; i < matrix.source_ids.size(); ++i) {
                    std::vector<std::string> row = {matrix.source_ids[i]};
                    for (double v : matrix.auroc[i]) row.push_back(fmt_double(v));
                    table.rows.push_back(std::move(row));
                }
                write_table((reports / ("affinity_" + criterion_name(crit) + ".tsv")).string(),
                            table);
            }
        } else {
            Table totals;
            totals.header = {"criterion", "matched_mean", "cross_mean", "max_mean", "min_mean",
                             "gap_mean"};
            Table sources;
            sources.header = {"criterion", "source", "matched", "row_max", "row_min", "gap"};
            for (Criterion crit : suite.config.score.criteria) {
                auto matrix = affinity_from_tables(machine, human, crit, suite.pool_ids,
                                                   suite.pool_ids);
                auto summary = matched_cross_summary(matrix);
                totals.rows.push_back({criterion_name(crit), fmt_double(summary.totals.matched_mean),
                                       fmt_double(summary.totals.cross_mean),
                                       fmt_double(summary.totals.max_mean),
                                       fmt_double(summary.totals.min_mean),
                                       fmt_double(summary.totals.gap_mean)});
                for (const auto& row : summary.per_source)
                    sources.rows.push_back({criterion_name(crit), row.source, fmt_double(row.matched),
                                            fmt_double(row.row_max), fmt_double(row.row_min),
                                            fmt_double(row.gap)});
            }
            write_table((reports / "summary.tsv").string(), totals);
            write_table((reports / "summary_sources.tsv").string(), sources);
        }
        return;
    }

    if (report_kind == "routed") {
        RouterModel router = load_router(final_router_path(suite_dir));
        Criterion crit = suite.config.router.criterion;
        auto report = routed_vs_fixed(suite, router, crit, workers);

        Table table;
        table.header = {"source", "heldout", "routed", "best_fixed", "mean_fixed"};
        for (const auto& id : report.fixed_ids) table.header.push_back("fixed@" + id);
        for (const auto& row : report.rows) {
            std::vector<std::string> cells = {row.source, row.heldout ? "1" : "0",
                                              fmt_double(row.routed), fmt_double(row.best_fixed),
                                              fmt_double(row.mean_fixed)};
            for (double v : row.fixed) cells.push_back(fmt_double(v));
            table.rows.push_back(std::move(cells));
        }
        write_table((reports / "routed_vs_fixed.tsv").string(), table);

        auto per_text = routed_scores(suite, router, crit, workers);
        Table scores;
        scores.header = {"index", "source_id", "label", "routed_class", "routed_id", "score"};
        for (const auto& row : per_text)
            scores.rows.push_back({std::to_string(row.index), row.source_id, label_name(row.label),
                                   std::to_string(row.routed_class), row.routed_id,
                                   fmt_double(row.score)});
        write_table((reports / "scores_routed.tsv").string(), scores);
        return;
    }

    if (report_kind == "sweep") {
        RouterModel stage1 = load_router(stage1_router_path(suite_dir));
        auto curve = data_efficiency_sweep(suite, stage1, suite.config.eval.sweep_fractions, workers);
        Table table;
        table.header = {"fraction", "n_stage2", "routed_auroc"};
        for (const auto& point : curve)
            table.rows.push_back({fmt_double(point.fraction), std::to_string(point.n_stage2),
                                  fmt_double(point.routed_auroc)});
        write_table((reports / "sweep.tsv").string(), table);
        return;
    }

    if (report_kind == "histogram") {
        RouterModel router = load_router(final_router_path(suite_dir));
        auto rows = routing_distribution(suite, router, workers);
        Table table;
        table.header = {"source"};
        for (const auto& spec : router.bank.classes) table.header.push_back(spec.id());
        for (const auto& row : rows) {
            std::vector<std::string> cells = {row.source};
            for (auto c : row.counts) cells.push_back(std::to_string(c));
            table.rows.push_back(std::move(cells));
        }
        write_table((reports / "routing_histogram.tsv").string(), table);
        return;
    }

    if (report_kind == "bound") {
        auto rows = bound_report(suite, suite.config.eval.bound_horizon,
                                 suite.config.eval.bound_clip);
        Table table;
        table.header = {"statistic", "source", "surrogate", "B",     "gap",
                        "tv",        "kl",     "bound",     "slack", "holds"};
        for (const auto& row : rows)
            table.rows.push_back({criterion_name(row.statistic), row.source, row.surrogate,
                                  fmt_double(row.report.B), fmt_double(row.report.gap),
                                  fmt_double(row.report.tv), fmt_double(row.report.kl),
                                  fmt_double(row.report.bound), fmt_double(row.report.slack),
                                  row.report.holds ? "1" : "0"});
        write_table((reports / "bound_report.tsv").string(), table);
        return;
    }

    if (report_kind == "embed-dump") {
        RouterModel router = load_router(final_router_path(suite_dir));
        embedding_dump(suite, router, (reports / "embeddings.tsv").string());
        return;
    }

    fail(ErrorCode::config, "unknown report kind '" + report_kind +
                                "' (expected matrix|summary|routed|sweep|histogram|bound|embed-dump)");
}

}  // namespace routedet
