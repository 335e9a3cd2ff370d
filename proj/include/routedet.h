/* routedet: machine-text detection with surrogate routing.
 *
 * C interface over the core library: opaque handles, status codes, and the
 * batch pipeline steps (gen-suite, score, train-router, eval). Status codes
 * double as CLI exit codes. On failure, rd_last_error() describes the
 * problem for the calling thread.
 */
#ifndef ROUTEDET_H
#define ROUTEDET_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
    RD_OK = 0,
    RD_ERR_INTERNAL = 1,
    RD_ERR_CONFIG = 2,
    RD_ERR_MISSING_ARTIFACT = 3,
    RD_ERR_PIPELINE_ORDER = 4
};

const char* rd_version(void);

/* Message for the last failing call on this thread; empty when none. */
const char* rd_last_error(void);

/* ---- batch pipeline ---------------------------------------------------- */

/* Builds suite artifacts (models, corpora, manifest) under out_dir.
 * seed < 0 takes the seed from the config file. */
int rd_gen_suite(const char* config_path, const char* out_dir, long long seed, int workers);

/* Scores the persisted corpora against the surrogate pool. criteria and
 * pool are comma-separated lists; NULL or "" means the configured set. */
int rd_score(const char* suite_dir, const char* criteria, const char* pool, int workers);

/* stage: 1, 2, or 3 for both. out_path (optional) receives a copy of the
 * final model; the canonical files live under <suite>/router/. */
int rd_train_router(const char* suite_dir, int stage, const char* out_path, int workers);

/* report_kind: matrix | summary | routed | sweep | histogram | bound |
 * embed-dump. router_path and out_dir may be NULL for the defaults. */
int rd_eval(const char* suite_dir, const char* router_path, const char* report_kind,
            const char* out_dir, int workers);

/* ---- models ------------------------------------------------------------ */

typedef struct rd_model rd_model;

int rd_model_open(const char* path, rd_model** out);
void rd_model_close(rd_model* model);
int rd_model_vocab_size(const rd_model* model);
int rd_model_order(const rd_model* model);

/* Scores text (character-level tokenization against the model vocabulary)
 * under one detection criterion: likelihood | entropy | rank | log_rank |
 * llr | fast_detect_gpt. Larger scores are more machine-like. */
int rd_model_score(const rd_model* surrogate, const char* text, const char* criterion,
                   double* out_score);

/* Nucleus sampling continuation of `length` tokens; prompt may be NULL.
 * out receives NUL-terminated text and needs length+1 bytes. */
int rd_model_sample(const rd_model* model, const char* prompt, int length, double top_p,
                    double temperature, unsigned long long seed, char* out, size_t out_size);

/* Exact per-token KL rate between two models over a finite horizon. */
int rd_model_exact_kl(const rd_model* p_src, const rd_model* p_sur, int horizon, double* out_kl);

/* ---- router ------------------------------------------------------------ */

typedef struct rd_router rd_router;

/* Opens a trained router; suite_dir supplies the surrogate model files. */
int rd_router_open(const char* router_path, const char* suite_dir, rd_router** out);
void rd_router_close(rd_router* router);
int rd_router_num_classes(const rd_router* router);
int rd_router_class_id(const rd_router* router, int index, char* out, size_t out_size);

/* Nearest-prototype routing; writes the winning class index. */
int rd_router_route(const rd_router* router, const char* text, int* out_class);

/* Routes text and scores it with the selected surrogate. criterion NULL
 * uses the routed detector's own criterion. */
int rd_router_score(const rd_router* router, const char* text, const char* criterion,
                    double* out_score);

#ifdef __cplusplus
}
#endif

#endif /* ROUTEDET_H */
