#include "routedet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "routedet/common.hpp"
#include "routedet/rng.hpp"

namespace fs = std::filesystem;

namespace routedet {

namespace {

constexpr const char* kManifestTag = "routedet-suite/1";

using StyleRows = std::vector<std::pair<std::vector<std::int32_t>, CategoricalDistribution>>;

// One conditional row per context of every length 0..order, drawn from a
// symmetric Dirichlet. Low concentration gives peaked, generator-specific
// structure; high concentration gives the flat high-entropy human proxy.
StyleRows random_style(int vocab_size, int order, double concentration, Rng& rng) {
    StyleRows rows;
    rows.emplace_back(std::vector<std::int32_t>{},
                      CategoricalDistribution{rng.dirichlet(static_cast<std::size_t>(vocab_size),
                                                            concentration)});
    for (int len = 1; len <= order; ++len) {
        enumerate_sequences(vocab_size, len, 1ULL << 26, [&](std::span<const std::int32_t> ctx) {
            rows.emplace_back(std::vector<std::int32_t>(ctx.begin(), ctx.end()),
                              CategoricalDistribution{rng.dirichlet(
                                  static_cast<std::size_t>(vocab_size), concentration)});
        });
    }
    return rows;
}

StyleRows blend_style(const StyleRows& base, double weight, double concentration, Rng& rng) {
    StyleRows rows = base;
    for (auto& [ctx, dist] : rows) {
        auto fresh = rng.dirichlet(dist.probs.size(), concentration);
        for (std::size_t j = 0; j < dist.probs.size(); ++j)
            dist.probs[j] = (1.0 - weight) * dist.probs[j] + weight * fresh[j];
    }
    return rows;
}

MarkovModel style_model(const Vocabulary& vocab, int order, double alpha, const StyleRows& rows) {
    return MarkovModel::from_tables(vocab, order, alpha, rows);
}

// Train a generator the way the protocol demands: sample a style corpus from
// the ground-truth chain, then fit the add-alpha model on it.
MarkovModel train_generator(const Vocabulary& vocab, const MarkovModel& style, int order,
                            const SuiteConfig& cfg, std::uint64_t root, const std::string& id) {
    std::vector<TokenSequence> corpus(static_cast<std::size_t>(cfg.style_corpus_sequences));
    for (int j = 0; j < cfg.style_corpus_sequences; ++j) {
        SampleParams params;
        params.length = cfg.style_corpus_length;
        params.top_p = 1.0;
        params.temperature = 1.0;
        params.seed = derive_seed(root, "stylecorpus/" + id + "/" + std::to_string(j));
        corpus[static_cast<std::size_t>(j)].ids = sample(style, {}, params);
        corpus[static_cast<std::size_t>(j)].label = Label::machine;
        corpus[static_cast<std::size_t>(j)].source_id = id;
    }
    return MarkovModel::train(vocab, corpus, order, cfg.alpha);
}

TokenSequence make_text(const MarkovModel& model, std::span<const std::int32_t> prompt, int total_len,
                        double top_p, double temperature, std::uint64_t seed,
                        const std::string& source_id, Label label) {
    TokenSequence out;
    out.source_id = source_id;
    out.label = label;
    out.ids.assign(prompt.begin(), prompt.end());
    SampleParams params;
    params.length = total_len - static_cast<int>(prompt.size());
    params.top_p = top_p;
    params.temperature = temperature;
    params.seed = seed;
    auto cont = sample(model, prompt, params);
    out.ids.insert(out.ids.end(), cont.begin(), cont.end());
    return out;
}

std::vector<std::int32_t> human_prompt(const MarkovModel& human, int length, std::uint64_t seed) {
    SampleParams params;
    params.length = length;
    params.top_p = 1.0;
    params.temperature = 1.0;
    params.seed = seed;
    return sample(human, {}, params);
}

}  // namespace

std::vector<std::string> Suite::source_ids() const {
    std::vector<std::string> out = pool_ids;
    out.insert(out.end(), heldout_ids.begin(), heldout_ids.end());
    return out;
}

Suite build_suite(const RunConfig& config, std::uint64_t root_seed) {
    config.validate();
    const auto& cfg = config.suite;

    Suite suite;
    suite.config = config;
    suite.root_seed = root_seed;
    suite.vocab = char_alphabet_prefix(cfg.vocab_size);

    std::vector<StyleRows> machine_styles;
    for (int i = 0; i < cfg.n_generators; ++i) {
        std::string id = "gen_" + std::to_string(i);
        Rng rng(derive_seed(root_seed, "style/" + id));
        machine_styles.push_back(
            random_style(cfg.vocab_size, cfg.generator_order, cfg.machine_concentration, rng));
        auto style = style_model(suite.vocab, cfg.generator_order, cfg.alpha, machine_styles.back());
        suite.registry.add(id, train_generator(suite.vocab, style, cfg.generator_order, cfg,
                                               root_seed, id));
        suite.pool_ids.push_back(id);
    }

    {
        Rng rng(derive_seed(root_seed, "style/human"));
        auto rows = random_style(cfg.vocab_size, cfg.human_order, cfg.human_concentration, rng);
        auto style = style_model(suite.vocab, cfg.human_order, cfg.alpha, rows);
        suite.registry.add(suite.human_id,
                           train_generator(suite.vocab, style, cfg.human_order, cfg, root_seed,
                                           suite.human_id));
    }

    // held-out sources: perturbations of the known generators, standing in
    // for black-box models with an open-source relative in the pool
    for (int i = 0; i < cfg.n_heldout; ++i) {
        std::string id = "heldout_" + std::to_string(i);
        Rng rng(derive_seed(root_seed, "style/" + id));
        auto rows = blend_style(machine_styles[static_cast<std::size_t>(i % cfg.n_generators)],
                                cfg.heldout_blend, cfg.machine_concentration, rng);
        auto style = style_model(suite.vocab, cfg.generator_order, cfg.alpha, rows);
        suite.registry.add(id, train_generator(suite.vocab, style, cfg.generator_order, cfg,
                                               root_seed, id));
        suite.heldout_ids.push_back(id);
    }

    const MarkovModel& human = suite.registry.get(suite.human_id);

    // Stage 1: known generators only, three conditioning regimes per class
    for (const auto& id : suite.pool_ids) {
        const MarkovModel& gen = suite.registry.get(id);
        for (int j = 0; j < cfg.stage1_per_class; ++j) {
            int regime = j % 3;
            std::vector<std::int32_t> prompt;
            if (regime > 0) {
                int plen = regime == 1 ? cfg.prompt_length
                                       : std::min(2 * cfg.prompt_length, cfg.sequence_length - 1);
                if (plen > 0)
                    prompt = human_prompt(
                        human, plen,
                        derive_seed(root_seed, "stage1/prompt/" + id + "/" + std::to_string(j)));
            }
            suite.stage1.push_back(make_text(
                gen, prompt, cfg.sequence_length, cfg.top_p, cfg.temperature,
                derive_seed(root_seed, "stage1/text/" + id + "/" + std::to_string(j)), id,
                Label::machine));
        }
    }

    // Stage 2: machine text from every source, known and held-out; the
    // targets come from pool scores, not labels
    for (const auto& id : suite.source_ids()) {
        const MarkovModel& gen = suite.registry.get(id);
        for (int j = 0; j < cfg.stage2_per_source; ++j) {
            auto prompt = cfg.prompt_length > 0
                              ? human_prompt(human, cfg.prompt_length,
                                             derive_seed(root_seed, "stage2/prompt/" + id + "/" +
                                                                        std::to_string(j)))
                              : std::vector<std::int32_t>{};
            suite.stage2.push_back(make_text(
                gen, prompt, cfg.sequence_length, cfg.top_p, cfg.temperature,
                derive_seed(root_seed, "stage2/text/" + id + "/" + std::to_string(j)), id,
                Label::machine));
        }
    }

    // evaluation: shared human prompts, one continuation per source, plus an
    // equal-sized human corpus (human text is not nucleus-truncated)
    std::vector<std::vector<std::int32_t>> prompts(static_cast<std::size_t>(cfg.samples_per_cell));
    for (int j = 0; j < cfg.samples_per_cell; ++j)
        prompts[static_cast<std::size_t>(j)] =
            cfg.prompt_length > 0
                ? human_prompt(human, cfg.prompt_length,
                               derive_seed(root_seed, "eval/prompt/" + std::to_string(j)))
                : std::vector<std::int32_t>{};
    for (const auto& id : suite.source_ids()) {
        const MarkovModel& gen = suite.registry.get(id);
        for (int j = 0; j < cfg.samples_per_cell; ++j) {
            suite.eval_machine.push_back(make_text(
                gen, prompts[static_cast<std::size_t>(j)], cfg.sequence_length, cfg.top_p,
                cfg.temperature, derive_seed(root_seed, "eval/text/" + id + "/" + std::to_string(j)),
                id, Label::machine));
        }
    }
    for (int j = 0; j < cfg.samples_per_cell; ++j) {
        suite.eval_human.push_back(make_text(
            human, {}, cfg.sequence_length, 1.0, 1.0,
            derive_seed(root_seed, "eval/human/" + std::to_string(j)), suite.human_id,
            Label::human));
    }
    return suite;
}

void save_suite(const Suite& suite, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "models");
    fs::create_directories(fs::path(dir) / "corpora");

    nlohmann::json manifest;
    manifest["format"] = kManifestTag;
    manifest["root_seed"] = suite.root_seed;
    manifest["config"] = config_to_json(suite.config);
    manifest["pool_ids"] = suite.pool_ids;
    manifest["heldout_ids"] = suite.heldout_ids;
    manifest["human_id"] = suite.human_id;
    std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
    if (!out) fail(ErrorCode::internal, "cannot write manifest in " + dir);
    out << manifest.dump(1) << "\n";

    auto model_path = [&](const std::string& id) {
        return (fs::path(dir) / "models" / (id + ".json")).string();
    };
    for (const auto& id : suite.pool_ids) suite.registry.get(id).save(model_path(id));
    for (const auto& id : suite.heldout_ids) suite.registry.get(id).save(model_path(id));
    suite.registry.get(suite.human_id).save(model_path(suite.human_id));

    write_corpus((fs::path(dir) / "corpora" / "stage1.jsonl").string(), suite.vocab, suite.stage1);
    write_corpus((fs::path(dir) / "corpora" / "stage2.jsonl").string(), suite.vocab, suite.stage2);
    write_corpus((fs::path(dir) / "corpora" / "eval_machine.jsonl").string(), suite.vocab,
                 suite.eval_machine);
    write_corpus((fs::path(dir) / "corpora" / "eval_human.jsonl").string(), suite.vocab,
                 suite.eval_human);
}

Suite load_suite(const std::string& dir) {
    fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in)
        fail(ErrorCode::missing_artifact,
             "no suite manifest at " + manifest_path.string() + " (run gen-suite first)");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const std::exception& e) {
        fail(ErrorCode::config, "malformed manifest: " + std::string(e.what()));
    }
    if (manifest.value("format", "") != kManifestTag)
        fail(ErrorCode::config, "unexpected manifest format tag");

    Suite suite;
    suite.root_seed = manifest.at("root_seed").get<std::uint64_t>();
    suite.config = config_from_json(manifest.at("config"));
    suite.pool_ids = manifest.at("pool_ids").get<std::vector<std::string>>();
    suite.heldout_ids = manifest.at("heldout_ids").get<std::vector<std::string>>();
    suite.human_id = manifest.at("human_id").get<std::string>();
    suite.vocab = char_alphabet_prefix(suite.config.suite.vocab_size);

    auto model_path = [&](const std::string& id) {
        return (fs::path(dir) / "models" / (id + ".json")).string();
    };
    for (const auto& id : suite.pool_ids) suite.registry.add(id, MarkovModel::load(model_path(id)));
    for (const auto& id : suite.heldout_ids)
        suite.registry.add(id, MarkovModel::load(model_path(id)));
    suite.registry.add(suite.human_id, MarkovModel::load(model_path(suite.human_id)));

    suite.stage1 = read_corpus((fs::path(dir) / "corpora" / "stage1.jsonl").string(), suite.vocab);
    suite.stage2 = read_corpus((fs::path(dir) / "corpora" / "stage2.jsonl").string(), suite.vocab);
    suite.eval_machine =
        read_corpus((fs::path(dir) / "corpora" / "eval_machine.jsonl").string(), suite.vocab);
    suite.eval_human =
        read_corpus((fs::path(dir) / "corpora" / "eval_human.jsonl").string(), suite.vocab);
    return suite;
}

std::vector<DetectorSpec> detector_columns(const std::vector<std::string>& pool,
                                           const std::vector<Criterion>& criteria) {
    std::vector<DetectorSpec> out;
    for (const auto& id : pool)
        for (Criterion c : criteria) out.push_back({id, c});
    return out;
}

ScoreTable score_corpus(const std::vector<TokenSequence>& corpus, const SurrogateRegistry& registry,
                        const std::vector<DetectorSpec>& columns, int workers) {
    if (columns.empty()) fail(ErrorCode::config, "no detector columns requested");
    ScoreTable table;
    for (const auto& spec : columns) table.detector_ids.push_back(spec.id());

    // group the columns by surrogate so one conditional pass serves every
    // criterion of that surrogate
    std::vector<std::string> surrogates;
    std::vector<std::pair<std::size_t, std::size_t>> column_map;  // (surrogate idx, criterion idx)
    for (const auto& spec : columns) {
        std::size_t s = 0;
        for (; s < surrogates.size(); ++s)
            if (surrogates[s] == spec.surrogate_id) break;
        if (s == surrogates.size()) {
            registry.get(spec.surrogate_id);  // fail fast on unregistered ids
            surrogates.push_back(spec.surrogate_id);
        }
        std::size_t c = 0;
        for (; c < all_criteria().size(); ++c)
            if (all_criteria()[c] == spec.criterion) break;
        column_map.emplace_back(s, c);
    }

    table.rows.resize(corpus.size());
    parallel_for(corpus.size(), workers, [&](std::size_t i) {
        ScoreRow row;
        row.index = static_cast<int>(i);
        row.source_id = corpus[i].source_id;
        row.label = corpus[i].label;
        std::vector<std::vector<double>> per_surrogate(surrogates.size());
        for (std::size_t s = 0; s < surrogates.size(); ++s)
            per_surrogate[s] = score_all_criteria(corpus[i], registry.get(surrogates[s]));
        row.scores.reserve(columns.size());
        for (auto [s, c] : column_map) row.scores.push_back(per_surrogate[s][c]);
        table.rows[i] = std::move(row);
    });
    return table;
}

AffinityMatrix affinity_from_tables(const ScoreTable& machine, const ScoreTable& human,
                                    Criterion criterion, const std::vector<std::string>& sources,
                                    const std::vector<std::string>& surrogates) {
    AffinityMatrix matrix;
    matrix.criterion = criterion;
    matrix.source_ids = sources;
    matrix.surrogate_ids = surrogates;
    matrix.auroc.assign(sources.size(), std::vector<double>(surrogates.size(), 0.0));

    for (std::size_t j = 0; j < surrogates.size(); ++j) {
        std::string column_id = DetectorSpec{surrogates[j], criterion}.id();
        int mc = machine.column(column_id);
        int hc = human.column(column_id);
        if (mc < 0 || hc < 0)
            fail(ErrorCode::missing_artifact, "score tables lack column " + column_id);
        std::vector<double> human_scores;
        human_scores.reserve(human.rows.size());
        for (const auto& row : human.rows) human_scores.push_back(row.scores[static_cast<std::size_t>(hc)]);
        for (std::size_t i = 0; i < sources.size(); ++i) {
            std::vector<double> machine_scores;
            for (const auto& row : machine.rows)
                if (row.source_id == sources[i])
                    machine_scores.push_back(row.scores[static_cast<std::size_t>(mc)]);
            if (machine_scores.empty())
                fail(ErrorCode::missing_artifact, "no machine scores for source " + sources[i]);
            matrix.auroc[i][j] = auroc(machine_scores, human_scores).auroc;
        }
    }
    return matrix;
}

AffinityMatrix affinity_matrix(const Suite& suite, Criterion criterion, int workers) {
    auto columns = detector_columns(suite.pool_ids, {criterion});
    ScoreTable machine = score_corpus(suite.eval_machine, suite.registry, columns, workers);
    ScoreTable human = score_corpus(suite.eval_human, suite.registry, columns, workers);
    return affinity_from_tables(machine, human, criterion, suite.pool_ids, suite.pool_ids);
}

MatrixSummary matched_cross_summary(const AffinityMatrix& matrix) {
    const std::size_t n = matrix.source_ids.size();
    if (n == 0 || matrix.surrogate_ids.size() != n)
        fail(ErrorCode::config, "matched/cross summary requires a square affinity matrix");

    MatrixSummary out;
    out.totals.criterion = matrix.criterion;
    double diag = 0.0, off = 0.0, max_sum = 0.0, min_sum = 0.0, gap_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = matrix.auroc[i];
        double row_max = *std::max_element(row.begin(), row.end());
        double row_min = *std::min_element(row.begin(), row.end());
        double gap = row_max > 0.0 ? (row_max - row_min) / row_max : 0.0;
        diag += row[i];
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) off += row[j];
        max_sum += row_max;
        min_sum += row_min;
        gap_sum += gap;
        out.per_source.push_back(
            {matrix.criterion, matrix.source_ids[i], row[i], row_max, row_min, gap});
    }
    out.totals.matched_mean = diag / static_cast<double>(n);
    out.totals.cross_mean = n > 1 ? off / static_cast<double>(n * (n - 1)) : 0.0;
    out.totals.max_mean = max_sum / static_cast<double>(n);
    out.totals.min_mean = min_sum / static_cast<double>(n);
    out.totals.gap_mean = gap_sum / static_cast<double>(n);
    return out;
}

std::vector<RoutedScoreRow> routed_scores(const Suite& suite, const RouterModel& router,
                                          Criterion criterion, int workers) {
    std::vector<const TokenSequence*> texts;
    for (const auto& t : suite.eval_machine) texts.push_back(&t);
    for (const auto& t : suite.eval_human) texts.push_back(&t);

    std::vector<RoutedScoreRow> rows(texts.size());
    parallel_for(texts.size(), workers, [&](std::size_t i) {
        const TokenSequence& x = *texts[i];
        RouteResult r = route(x, router);
        DetectionScore s = score(x, suite.registry.get(r.detector.surrogate_id), criterion);
        RoutedScoreRow row;
        row.index = static_cast<int>(i);
        row.source_id = x.source_id;
        row.label = x.label;
        row.routed_class = r.class_index;
        row.routed_id = r.detector.surrogate_id;
        row.score = s.value;
        rows[i] = std::move(row);
    });
    return rows;
}

RoutedReport routed_vs_fixed(const Suite& suite, const RouterModel& router, Criterion criterion,
                             int workers) {
    RoutedReport report;
    report.criterion = criterion;
    report.fixed_ids = suite.pool_ids;

    auto routed = routed_scores(suite, router, criterion, workers);
    auto columns = detector_columns(suite.pool_ids, {criterion});
    ScoreTable fixed_machine = score_corpus(suite.eval_machine, suite.registry, columns, workers);
    ScoreTable fixed_human = score_corpus(suite.eval_human, suite.registry, columns, workers);

    std::vector<double> routed_human;
    for (const auto& row : routed)
        if (row.label == Label::human) routed_human.push_back(row.score);

    double routed_sum = 0.0, routed_heldout_sum = 0.0;
    double best_sum = 0.0, mean_sum = 0.0, best_heldout_sum = 0.0, mean_heldout_sum = 0.0;
    std::size_t n_heldout = 0;

    auto sources = suite.source_ids();
    for (const auto& src : sources) {
        RoutedVsFixedRow row;
        row.source = src;
        row.heldout =
            std::find(suite.heldout_ids.begin(), suite.heldout_ids.end(), src) != suite.heldout_ids.end();

        std::vector<double> routed_machine;
        for (const auto& r : routed)
            if (r.label == Label::machine && r.source_id == src) routed_machine.push_back(r.score);
        row.routed = auroc(routed_machine, routed_human).auroc;

        for (const auto& sur : suite.pool_ids) {
            std::string column_id = DetectorSpec{sur, criterion}.id();
            int mc = fixed_machine.column(column_id);
            int hc = fixed_human.column(column_id);
            std::vector<double> ms, hs;
            for (const auto& r : fixed_machine.rows)
                if (r.source_id == src) ms.push_back(r.scores[static_cast<std::size_t>(mc)]);
            for (const auto& r : fixed_human.rows) hs.push_back(r.scores[static_cast<std::size_t>(hc)]);
            row.fixed.push_back(auroc(ms, hs).auroc);
        }
        row.best_fixed = *std::max_element(row.fixed.begin(), row.fixed.end());
        row.mean_fixed = std::accumulate(row.fixed.begin(), row.fixed.end(), 0.0) /
                         static_cast<double>(row.fixed.size());

        routed_sum += row.routed;
        best_sum += row.best_fixed;
        mean_sum += row.mean_fixed;
        if (row.heldout) {
            routed_heldout_sum += row.routed;
            best_heldout_sum += row.best_fixed;
            mean_heldout_sum += row.mean_fixed;
            ++n_heldout;
        }
        report.rows.push_back(std::move(row));
    }
    const double n_src = static_cast<double>(report.rows.size());
    report.routed_mean = routed_sum / n_src;
    report.best_fixed_mean = best_sum / n_src;
    report.mean_fixed_mean = mean_sum / n_src;
    if (n_heldout > 0) {
        report.routed_heldout = routed_heldout_sum / static_cast<double>(n_heldout);
        report.best_fixed_heldout = best_heldout_sum / static_cast<double>(n_heldout);
        report.mean_fixed_heldout = mean_heldout_sum / static_cast<double>(n_heldout);
    }
    return report;
}

std::vector<Stage2Item> stage2_items(const Suite& suite, const RouterModel& stage1, int workers) {
    const auto& classes = stage1.bank.classes;
    std::vector<Stage2Item> items(suite.stage2.size());
    parallel_for(suite.stage2.size(), workers, [&](std::size_t i) {
        items[i].x = suite.stage2[i];
        items[i].scores = score_pool(suite.stage2[i], classes, suite.registry);
    });
    return items;
}

namespace {

double routed_auroc_mean(const Suite& suite, const RouterModel& router, Criterion criterion,
                         int workers) {
    auto routed = routed_scores(suite, router, criterion, workers);
    std::vector<double> human;
    for (const auto& r : routed)
        if (r.label == Label::human) human.push_back(r.score);
    double sum = 0.0;
    auto sources = suite.source_ids();
    for (const auto& src : sources) {
        std::vector<double> machine;
        for (const auto& r : routed)
            if (r.label == Label::machine && r.source_id == src) machine.push_back(r.score);
        sum += auroc(machine, human).auroc;
    }
    return sum / static_cast<double>(sources.size());
}

}  // namespace

std::vector<SweepPoint> data_efficiency_sweep(const Suite& suite, const RouterModel& stage1,
                                              const std::vector<double>& fractions, int workers) {
    if (!stage1.bank.has_anchors())
        fail(ErrorCode::pipeline_order, "sweep requires a Stage-1 router with anchors");
    auto items = stage2_items(suite, stage1, workers);

    TrainConfig train = suite.config.train;
    train.seed = derive_seed(suite.root_seed, "train/stage2");

    std::vector<SweepPoint> curve;
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        double fraction = fractions[fi];
        if (!(fraction > 0.0 && fraction <= 1.0))
            fail(ErrorCode::config, "sweep fraction must be in (0, 1]");
        std::size_t m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(items.size())));
        if (m == 0) fail(ErrorCode::config, "sweep fraction yields an empty subsample");

        // seed-controlled subsample, restored to corpus order so the full
        // fraction reproduces the plain Stage-2 run bit-exactly
        std::vector<std::size_t> idx(items.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(derive_seed(suite.root_seed, "sweep/" + std::to_string(fi)));
        rng.shuffle(idx);
        idx.resize(m);
        std::sort(idx.begin(), idx.end());
        std::vector<Stage2Item> subset;
        subset.reserve(m);
        for (auto i : idx) subset.push_back(items[i]);

        auto result = train_stage2(stage1, subset, train);
        double value = routed_auroc_mean(suite, result.model, suite.config.router.criterion, workers);
        curve.push_back({fraction, m, value});
    }
    return curve;
}

std::vector<HistogramRow> routing_distribution(const Suite& suite, const RouterModel& router,
                                               int workers) {
    std::vector<int> routed(suite.eval_machine.size());
    parallel_for(suite.eval_machine.size(), workers,
                 [&](std::size_t i) { routed[i] = route(suite.eval_machine[i], router).class_index; });

    std::vector<HistogramRow> rows;
    for (const auto& src : suite.source_ids()) {
        HistogramRow row;
        row.source = src;
        row.counts.assign(static_cast<std::size_t>(router.bank.num_classes()), 0);
        for (std::size_t i = 0; i < suite.eval_machine.size(); ++i)
            if (suite.eval_machine[i].source_id == src)
                ++row.counts[static_cast<std::size_t>(routed[i])];
        rows.push_back(std::move(row));
    }
    return rows;
}

void embedding_dump(const Suite& suite, const RouterModel& router, const std::string& path) {
    Table table;
    table.header = {"kind", "source_id", "label"};
    for (int a = 0; a < router.bank.dim; ++a) table.header.push_back("e" + std::to_string(a));

    auto add_text_row = [&](const TokenSequence& x) {
        auto z = embed(x, router.encoder);
        std::vector<std::string> row = {"text", x.source_id, label_name(x.label)};
        for (double v : z) row.push_back(fmt_double(v));
        table.rows.push_back(std::move(row));
    };
    for (const auto& x : suite.eval_machine) add_text_row(x);
    for (const auto& x : suite.eval_human) add_text_row(x);

    for (int i = 0; i < router.bank.num_classes(); ++i) {
        for (int k = 0; k < router.bank.per_class; ++k) {
            std::vector<std::string> row = {
                "prototype", router.bank.classes[static_cast<std::size_t>(i)].id(), "-"};
            const double* p = router.bank.prototypes.data() + router.bank.offset(i, k);
            for (int a = 0; a < router.bank.dim; ++a) row.push_back(fmt_double(p[a]));
            table.rows.push_back(std::move(row));
        }
    }
    write_table(path, table);
}

std::vector<BoundRow> bound_report(const Suite& suite, int horizon, double clip_B) {
    std::vector<BoundRow> rows;
    for (Criterion crit : suite.config.score.criteria) {
        for (const auto& sur : suite.pool_ids) {
            const MarkovModel& sur_model = suite.registry.get(sur);
            SequenceStatistic stat = [&sur_model, crit, clip_B](const TokenSequence& x) {
                double v = score(x, sur_model, crit).value;
                return std::clamp(v, -clip_B, clip_B);
            };
            for (const auto& src : suite.pool_ids) {
                BoundRow row;
                row.statistic = crit;
                row.source = src;
                row.surrogate = sur;
                row.report = mismatch_gap(stat, clip_B, suite.registry.get(src), sur_model, horizon,
                                          suite.config.suite.enumeration_cap);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

}  // namespace routedet
