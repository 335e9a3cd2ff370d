// Command-line front end for batch experiments. Links the C API only; exit
// codes mirror rd_* status values: 0 ok, 2 config/usage, 3 missing artifact,
// 4 pipeline-order violation.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "routedet.h"

namespace {

int finish(int status) {
    if (status != RD_OK) std::fprintf(stderr, "routedet: %s\n", rd_last_error());
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surrogate-routed zero-shot machine-text detection"};
    app.require_subcommand(1);

    int workers = 1;
    app.add_option("--workers", workers, "worker threads for scoring and evaluation")
        ->envname("ROUTEDET_WORKERS");

    std::string config_path, out_path, suite_dir, router_path, report_kind, criteria, pool;
    long long seed = -1;
    std::string stage = "both";

    auto* gen = app.add_subcommand("gen-suite", "build generator pool, corpora and manifest");
    gen->add_option("--config", config_path, "experiment config file")
        ->required()
        ->envname("ROUTEDET_CONFIG");
    gen->add_option("--out", out_path, "suite output directory")
        ->required()
        ->envname("ROUTEDET_OUT");
    gen->add_option("--seed", seed, "root seed (overrides [suite] seed)")->envname("ROUTEDET_SEED");

    auto* score = app.add_subcommand("score", "score corpora against the surrogate pool");
    score->add_option("--suite", suite_dir, "suite directory")->required()->envname("ROUTEDET_SUITE");
    score->add_option("--criteria", criteria, "comma-separated criteria subset");
    score->add_option("--pool", pool, "comma-separated surrogate subset");

    auto* train = app.add_subcommand("train-router", "train the prototype router");
    train->add_option("--suite", suite_dir, "suite directory")->required()->envname("ROUTEDET_SUITE");
    train->add_option("--stage", stage, "training stage: 1, 2 or both")
        ->check(CLI::IsMember({"1", "2", "both"}));
    train->add_option("--out", out_path, "extra copy of the trained model")->envname("ROUTEDET_OUT");

    auto* eval = app.add_subcommand("eval", "emit report tables");
    eval->add_option("--suite", suite_dir, "suite directory")->required()->envname("ROUTEDET_SUITE");
    eval->add_option("--router", router_path, "router model file (default: suite router)");
    eval->add_option("--report", report_kind,
                     "matrix | summary | routed | sweep | histogram | bound | embed-dump")
        ->required();
    eval->add_option("--out", out_path, "report output directory (default: suite/reports)")
        ->envname("ROUTEDET_OUT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return RD_ERR_CONFIG;
    }

    if (gen->parsed())
        return finish(rd_gen_suite(config_path.c_str(), out_path.c_str(), seed, workers));
    if (score->parsed())
        return finish(rd_score(suite_dir.c_str(), criteria.c_str(), pool.c_str(), workers));
    if (train->parsed()) {
        int stage_num = stage == "1" ? 1 : stage == "2" ? 2 : 3;
        return finish(rd_train_router(suite_dir.c_str(), stage_num,
                                      out_path.empty() ? nullptr : out_path.c_str(), workers));
    }
    if (eval->parsed())
        return finish(rd_eval(suite_dir.c_str(), router_path.empty() ? nullptr : router_path.c_str(),
                              report_kind.c_str(), out_path.empty() ? nullptr : out_path.c_str(),
                              workers));
    return RD_ERR_CONFIG;
}
