#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "routedet/detectors.hpp"
#include "routedet/encoder.hpp"
#include "routedet/markov.hpp"

namespace routedet {

// K learnable prototypes per detector class, plus the optional frozen copy
// taken at the end of Stage 1 ("anchors").
struct PrototypeBank {
    std::vector<DetectorSpec> classes;
    int per_class = 10;  // K
    int dim = 64;        // d
    std::vector<double> prototypes;  // N*K*d row-major
    std::vector<double> anchors;     // empty until Stage 1 converges

    int num_classes() const { return static_cast<int>(classes.size()); }
    bool has_anchors() const { return !anchors.empty(); }
    std::size_t offset(int cls, int k) const {
        return (static_cast<std::size_t>(cls) * per_class + static_cast<std::size_t>(k)) *
               static_cast<std::size_t>(dim);
    }
    void validate() const;
};

struct RouterHyper {
    double margin = 0.5;
    double lambda_sep = 1e-3;
    double lambda_norm = 1e-4;
    double lambda_anchor = 1.0;
    double t_target = 1.0;
    // auxiliary cross-entropy against argmax(Q) in Stage 2; off by default
    double lambda_ce_aux = 0.0;
};

struct TrainConfig {
    int epochs = 8;
    int batch_size = 32;
    double lr_stage1 = 1e-2;
    double lr_stage2 = 5e-3;
    int warmup_steps = 200;
    double weight_decay = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RouterModel {
    EncoderParams encoder;
    PrototypeBank bank;
    double tau = 0.1;
    RouterHyper hyper;
    // per-detector standardization stats from the Stage-2 training corpus
    std::vector<double> score_mean;
    std::vector<double> score_std;
    bool composite_pool = false;

    void save(const std::string& path) const;
    static RouterModel load(const std::string& path);
};

struct AffinityDistribution {
    std::vector<double> probs;
    std::vector<double> distances;
};

// d_i = min_k |z - p_{i,k}|; nearest_k records the achieving prototype
// (lowest index on ties), which is where the subgradient flows.
void class_distances(const std::vector<double>& z, const PrototypeBank& bank,
                     std::vector<double>& distances, std::vector<int>& nearest_k);
std::vector<double> class_distances(const std::vector<double>& z, const PrototypeBank& bank);

// P_i = softmax(-d_i / tau), computed with max subtraction.
AffinityDistribution class_probabilities(const std::vector<double>& distances, double tau);

struct LossValue {
    double total = 0.0;
    double ce = 0.0;
    double kl = 0.0;
    double sep = 0.0;
    double norm = 0.0;
    double anchor = 0.0;
};

struct LossGrads {
    LossValue value;
    std::vector<double> grad_prototypes;         // same shape as bank.prototypes
    std::vector<std::vector<double>> grad_z;     // per batch item
};

// L_1 = L_CE + lambda_sep*L_sep + lambda_norm*L_norm over a batch of labeled
// embeddings. Gradients flow to each class's nearest prototype only.
LossGrads stage1_loss(const std::vector<std::vector<double>>& z, const std::vector<int>& labels,
                      const PrototypeBank& bank, const RouterHyper& hyper, double tau);

// Soft-target form of the Stage-1 objective; used by composite pools where a
// text's source matches several (surrogate, criterion) classes.
LossGrads stage1_loss_targets(const std::vector<std::vector<double>>& z,
                              const std::vector<std::vector<double>>& targets,
                              const PrototypeBank& bank, const RouterHyper& hyper, double tau);

// Q_i = softmax(s_hat_i / T) with s_hat the per-detector z-scored score
// vector; detectors with non-positive std contribute 0.
AffinityDistribution build_target_distribution(const std::vector<double>& scores,
                                               const std::vector<double>& mean,
                                               const std::vector<double>& stddev, double t_target);

// L_2 = L_KL + lambda_anchor*L_anchor + lambda_sep*L_sep + lambda_norm*L_norm
// (+ optional auxiliary CE against argmax Q). Requires anchors.
LossGrads stage2_loss(const std::vector<std::vector<double>>& z,
                      const std::vector<std::vector<double>>& targets, const PrototypeBank& bank,
                      const RouterHyper& hyper, double tau);

struct EpochLog {
    int epoch = 0;
    LossValue loss;  // full-dataset loss at the end of the epoch
};

struct TrainResult {
    RouterModel model;
    std::vector<EpochLog> log;
};

// Stage 1: joint AdamW on W and prototypes over white-box labeled texts;
// prototypes are copied into anchors on completion.
TrainResult train_stage1(const std::vector<TokenSequence>& data,
                         const std::vector<DetectorSpec>& classes, const FeatureConfig& features,
                         const RouterHyper& hyper, double tau, const TrainConfig& config,
                         int prototypes_per_class = 10, bool composite_pool = false);

struct Stage2Item {
    TokenSequence x;
    std::vector<double> scores;  // one per pool detector, in class order
};

// Stage 2: computes per-detector standardization stats over the data,
// persists them in the model, builds targets and optimizes L_2.
TrainResult train_stage2(const RouterModel& model, const std::vector<Stage2Item>& data,
                         const TrainConfig& config);

// Variant with caller-supplied target distributions (stats untouched).
TrainResult train_stage2_with_targets(const RouterModel& model,
                                      const std::vector<TokenSequence>& texts,
                                      const std::vector<std::vector<double>>& targets,
                                      const TrainConfig& config);

struct RouteResult {
    int class_index = 0;
    DetectorSpec detector;
    std::vector<double> distances;
    std::vector<double> probs;
};

// Nearest-prototype query: k* = argmin_i d_i, ties to the lowest class index.
RouteResult route(const TokenSequence& x, const RouterModel& model);

// Scores x with the routed class's surrogate under the given criterion, or
// under the routed detector's own criterion when none is given.
DetectionScore route_and_score(const TokenSequence& x, const RouterModel& model,
                               const SurrogateRegistry& registry,
                               std::optional<Criterion> criterion = std::nullopt);

}  // namespace routedet
