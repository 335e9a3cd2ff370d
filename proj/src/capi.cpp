#include "routedet.h"

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "routedet/common.hpp"
#include "routedet/harness.hpp"
#include "routedet/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

int set_error(routedet::ErrorCode code, const std::string& what) {
    g_last_error = what;
    return static_cast<int>(code);
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return RD_OK;
    } catch (const routedet::Error& e) {
        return set_error(e.code(), e.what());
    } catch (const std::exception& e) {
        return set_error(routedet::ErrorCode::internal, e.what());
    }
}

int require(bool cond, const char* what) {
    if (cond) return RD_OK;
    return set_error(routedet::ErrorCode::config, what);
}

std::string text_or_empty(const char* s) { return s ? std::string(s) : std::string(); }

}  // namespace

struct rd_model {
    routedet::MarkovModel model;
};

struct rd_router {
    routedet::RouterModel model;
    routedet::SurrogateRegistry registry;
    routedet::Vocabulary vocab;
};

extern "C" {

const char* rd_version(void) { return "1.0.0"; }

const char* rd_last_error(void) { return g_last_error.c_str(); }

int rd_gen_suite(const char* config_path, const char* out_dir, long long seed, int workers) {
    if (require(config_path && out_dir, "config_path and out_dir are required")) return RD_ERR_CONFIG;
    return guarded([&] {
        std::optional<std::uint64_t> seed_override;
        if (seed >= 0) seed_override = static_cast<std::uint64_t>(seed);
        routedet::gen_suite(config_path, out_dir, seed_override, workers);
    });
}

int rd_score(const char* suite_dir, const char* criteria, const char* pool, int workers) {
    if (require(suite_dir != nullptr, "suite_dir is required")) return RD_ERR_CONFIG;
    return guarded([&] {
        routedet::score_suite(suite_dir, text_or_empty(criteria), text_or_empty(pool), workers);
    });
}

int rd_train_router(const char* suite_dir, int stage, const char* out_path, int workers) {
    if (require(suite_dir != nullptr, "suite_dir is required")) return RD_ERR_CONFIG;
    if (require(stage >= 1 && stage <= 3, "stage must be 1, 2, or 3 (both)")) return RD_ERR_CONFIG;
    return guarded([&] {
        routedet::train_router(suite_dir, static_cast<routedet::TrainStage>(stage),
                               text_or_empty(out_path), workers);
    });
}

int rd_eval(const char* suite_dir, const char* router_path, const char* report_kind,
            const char* out_dir, int workers) {
    if (require(suite_dir && report_kind, "suite_dir and report_kind are required"))
        return RD_ERR_CONFIG;
    return guarded([&] {
        routedet::eval_report(suite_dir, text_or_empty(router_path), report_kind,
                              text_or_empty(out_dir), workers);
    });
}

int rd_model_open(const char* path, rd_model** out) {
    if (require(path && out, "path and out are required")) return RD_ERR_CONFIG;
    return guarded([&] {
        auto handle = std::make_unique<rd_model>();
        handle->model = routedet::MarkovModel::load(path);
        *out = handle.release();
    });
}

void rd_model_close(rd_model* model) { delete model; }

int rd_model_vocab_size(const rd_model* model) {
    return model ? model->model.vocab().size() : 0;
}

int rd_model_order(const rd_model* model) { return model ? model->model.order() : -1; }

int rd_model_score(const rd_model* surrogate, const char* text, const char* criterion,
                   double* out_score) {
    if (require(surrogate && text && criterion && out_score,
                "surrogate, text, criterion and out_score are required"))
        return RD_ERR_CONFIG;
    return guarded([&] {
        auto crit = routedet::parse_criterion(criterion);
        auto x = routedet::tokenize_text(surrogate->model.vocab(), text, routedet::Label::machine);
        *out_score = routedet::score(x, surrogate->model, crit).value;
    });
}

int rd_model_sample(const rd_model* model, const char* prompt, int length, double top_p,
                    double temperature, unsigned long long seed, char* out, size_t out_size) {
    if (require(model && out, "model and out are required")) return RD_ERR_CONFIG;
    if (require(out_size >= static_cast<size_t>(length) + 1, "output buffer too small"))
        return RD_ERR_CONFIG;
    return guarded([&] {
        std::vector<std::int32_t> prompt_ids;
        if (prompt && *prompt) {
            auto seq = routedet::tokenize_text(model->model.vocab(), prompt,
                                               routedet::Label::machine);
            prompt_ids = std::move(seq.ids);
        }
        routedet::SampleParams params;
        params.length = length;
        params.top_p = top_p;
        params.temperature = temperature;
        params.seed = seed;
        auto ids = routedet::sample(model->model, prompt_ids, params);
        routedet::TokenSequence seq;
        seq.ids = std::move(ids);
        std::string text = routedet::render_text(model->model.vocab(), seq);
        std::snprintf(out, out_size, "%s", text.c_str());
    });
}

int rd_model_exact_kl(const rd_model* p_src, const rd_model* p_sur, int horizon, double* out_kl) {
    if (require(p_src && p_sur && out_kl, "p_src, p_sur and out_kl are required"))
        return RD_ERR_CONFIG;
    return guarded([&] { *out_kl = routedet::exact_kl(p_src->model, p_sur->model, horizon); });
}

int rd_router_open(const char* router_path, const char* suite_dir, rd_router** out) {
    if (require(router_path && suite_dir && out, "router_path, suite_dir and out are required"))
        return RD_ERR_CONFIG;
    return guarded([&] {
        auto handle = std::make_unique<rd_router>();
        handle->model = routedet::RouterModel::load(router_path);
        routedet::Suite suite = routedet::load_suite(suite_dir);
        handle->vocab = suite.vocab;
        handle->registry = std::move(suite.registry);
        for (const auto& spec : handle->model.bank.classes)
            handle->registry.get(spec.surrogate_id);  // fail fast on missing surrogates
        *out = handle.release();
    });
}

void rd_router_close(rd_router* router) { delete router; }

int rd_router_num_classes(const rd_router* router) {
    return router ? router->model.bank.num_classes() : 0;
}

int rd_router_class_id(const rd_router* router, int index, char* out, size_t out_size) {
    if (require(router && out, "router and out are required")) return RD_ERR_CONFIG;
    if (require(index >= 0 && index < router->model.bank.num_classes(), "class index out of range"))
        return RD_ERR_CONFIG;
    return guarded([&] {
        std::string id = router->model.bank.classes[static_cast<std::size_t>(index)].id();
        if (out_size < id.size() + 1)
            routedet::fail(routedet::ErrorCode::config, "output buffer too small");
        std::snprintf(out, out_size, "%s", id.c_str());
    });
}

int rd_router_route(const rd_router* router, const char* text, int* out_class) {
    if (require(router && text && out_class, "router, text and out_class are required"))
        return RD_ERR_CONFIG;
    return guarded([&] {
        auto x = routedet::tokenize_text(router->vocab, text, routedet::Label::machine);
        *out_class = routedet::route(x, router->model).class_index;
    });
}

int rd_router_score(const rd_router* router, const char* text, const char* criterion,
                    double* out_score) {
    if (require(router && text && out_score, "router, text and out_score are required"))
        return RD_ERR_CONFIG;
    return guarded([&] {
        auto x = routedet::tokenize_text(router->vocab, text, routedet::Label::machine);
        std::optional<routedet::Criterion> crit;
        if (criterion && *criterion) crit = routedet::parse_criterion(criterion);
        *out_score = routedet::route_and_score(x, router->model, router->registry, crit).value;
    });
}

}  // extern "C"
