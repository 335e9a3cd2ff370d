#include "routedet/router.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include <json.hpp>

#include "routedet/common.hpp"
#include "routedet/optimizer.hpp"
#include "routedet/rng.hpp"

namespace routedet {

namespace {

constexpr const char* kFormatTag = "routedet-router/1";
constexpr double kDistanceFloor = 1e-12;

}  // namespace

void PrototypeBank::validate() const {
    if (classes.empty()) fail(ErrorCode::config, "prototype bank has no classes");
    if (per_class < 1) fail(ErrorCode::config, "per_class must be >= 1");
    if (dim < 2) fail(ErrorCode::config, "prototype dimension must be >= 2");
    std::size_t expect = static_cast<std::size_t>(num_classes()) * per_class * dim;
    if (prototypes.size() != expect) fail(ErrorCode::config, "prototype tensor shape mismatch");
    if (!anchors.empty() && anchors.size() != expect)
        fail(ErrorCode::config, "anchor tensor shape mismatch");
    for (std::size_t i = 0; i < classes.size(); ++i)
        for (std::size_t j = i + 1; j < classes.size(); ++j)
            if (classes[i].id() == classes[j].id())
                fail(ErrorCode::config, "duplicate class id '" + classes[i].id() + "'");
}

void TrainConfig::validate() const {
    if (epochs < 1) fail(ErrorCode::config, "epochs must be >= 1");
    if (batch_size < 1) fail(ErrorCode::config, "batch_size must be >= 1");
    if (!(lr_stage1 > 0.0) || !(lr_stage2 > 0.0))
        fail(ErrorCode::config, "learning rates must be > 0");
    if (warmup_steps < 0) fail(ErrorCode::config, "warmup_steps must be >= 0");
    if (weight_decay < 0.0) fail(ErrorCode::config, "weight_decay must be >= 0");
}

void class_distances(const std::vector<double>& z, const PrototypeBank& bank,
                     std::vector<double>& distances, std::vector<int>& nearest_k) {
    const int n = bank.num_classes();
    const int d = bank.dim;
    if (static_cast<int>(z.size()) != d) fail(ErrorCode::config, "embedding dimension mismatch");
    distances.assign(static_cast<std::size_t>(n), 0.0);
    nearest_k.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_k = 0;
        for (int k = 0; k < bank.per_class; ++k) {
            const double* p = bank.prototypes.data() + bank.offset(i, k);
            double acc = 0.0;
            for (int a = 0; a < d; ++a) {
                double diff = z[static_cast<std::size_t>(a)] - p[a];
                acc += diff * diff;
            }
            double dist = std::sqrt(acc);
            if (dist < best) {
                best = dist;
                best_k = k;
            }
        }
        distances[static_cast<std::size_t>(i)] = best;
        nearest_k[static_cast<std::size_t>(i)] = best_k;
    }
}

std::vector<double> class_distances(const std::vector<double>& z, const PrototypeBank& bank) {
    std::vector<double> distances;
    std::vector<int> nearest;
    class_distances(z, bank, distances, nearest);
    return distances;
}

AffinityDistribution class_probabilities(const std::vector<double>& distances, double tau) {
    if (!(tau > 0.0)) fail(ErrorCode::config, "tau must be > 0");
    if (distances.empty()) fail(ErrorCode::config, "empty distance vector");
    AffinityDistribution out;
    out.distances = distances;
    out.probs.resize(distances.size());
    double min_d = *std::min_element(distances.begin(), distances.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        out.probs[i] = std::exp(-(distances[i] - min_d) / tau);
        sum += out.probs[i];
    }
    for (auto& p : out.probs) p /= sum;
    return out;
}

namespace {

// Soft-target distance loss shared by both stages: mean over the batch of
// sum_i Q_i ln(Q_i / P_i) up to the entropy of Q, with gradient (Q - P)/tau
// routed through each class's nearest prototype only.
void accumulate_distance_grads(const PrototypeBank& bank, const std::vector<double>& z,
                               const std::vector<double>& distances,
                               const std::vector<int>& nearest_k,
                               const std::vector<double>& dloss_ddist,
                               std::vector<double>& grad_prototypes, std::vector<double>& grad_z) {
    const int d = bank.dim;
    for (int i = 0; i < bank.num_classes(); ++i) {
        double coef = dloss_ddist[static_cast<std::size_t>(i)];
        if (coef == 0.0) continue;
        double dist = distances[static_cast<std::size_t>(i)];
        if (dist < kDistanceFloor) continue;  // subgradient 0 at the cone tip
        std::size_t off = bank.offset(i, nearest_k[static_cast<std::size_t>(i)]);
        const double* p = bank.prototypes.data() + off;
        double* gp = grad_prototypes.data() + off;
        for (int a = 0; a < d; ++a) {
            double dir = (z[static_cast<std::size_t>(a)] - p[a]) / dist;
            grad_z[static_cast<std::size_t>(a)] += coef * dir;
            gp[a] -= coef * dir;
        }
    }
}

// margin separation over ordered cross-class prototype pairs, Z = N(N-1)K^2
void add_separation_term(const PrototypeBank& bank, const RouterHyper& hyper, LossGrads& out) {
    const int n = bank.num_classes();
    if (n < 2) return;
    const int kk = bank.per_class;
    const int d = bank.dim;
    const double z_norm = static_cast<double>(n) * (n - 1) * kk * kk;
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            for (int k = 0; k < kk; ++k) {
                const double* pi = bank.prototypes.data() + bank.offset(i, k);
                double* gi = out.grad_prototypes.data() + bank.offset(i, k);
                for (int l = 0; l < kk; ++l) {
                    const double* pj = bank.prototypes.data() + bank.offset(j, l);
                    double acc = 0.0;
                    for (int a = 0; a < d; ++a) {
                        double diff = pi[a] - pj[a];
                        acc += diff * diff;
                    }
                    double dist = std::sqrt(acc);
                    double h = hyper.margin - dist;
                    if (h <= 0.0) continue;
                    loss += h * h / z_norm;
                    if (dist < kDistanceFloor) continue;
                    double coef = -2.0 * h / (z_norm * dist) * hyper.lambda_sep;
                    for (int a = 0; a < d; ++a) gi[a] += coef * (pi[a] - pj[a]);
                }
            }
        }
    }
    out.value.sep = loss;
    out.value.total += hyper.lambda_sep * loss;
}

void add_norm_term(const PrototypeBank& bank, const RouterHyper& hyper, LossGrads& out) {
    double loss = 0.0;
    for (std::size_t i = 0; i < bank.prototypes.size(); ++i) {
        loss += bank.prototypes[i] * bank.prototypes[i];
        out.grad_prototypes[i] += 2.0 * hyper.lambda_norm * bank.prototypes[i];
    }
    out.value.norm = loss;
    out.value.total += hyper.lambda_norm * loss;
}

void add_anchor_term(const PrototypeBank& bank, const RouterHyper& hyper, LossGrads& out) {
    double loss = 0.0;
    for (std::size_t i = 0; i < bank.prototypes.size(); ++i) {
        double diff = bank.prototypes[i] - bank.anchors[i];
        loss += diff * diff;
        out.grad_prototypes[i] += 2.0 * hyper.lambda_anchor * diff;
    }
    out.value.anchor = loss;
    out.value.total += hyper.lambda_anchor * loss;
}

}  // namespace

LossGrads stage1_loss_targets(const std::vector<std::vector<double>>& z,
                              const std::vector<std::vector<double>>& targets,
                              const PrototypeBank& bank, const RouterHyper& hyper, double tau) {
    bank.validate();
    if (z.empty() || z.size() != targets.size())
        fail(ErrorCode::config, "stage1_loss batch shape mismatch");
    const int n = bank.num_classes();

    LossGrads out;
    out.grad_prototypes.assign(bank.prototypes.size(), 0.0);
    out.grad_z.assign(z.size(), std::vector<double>(static_cast<std::size_t>(bank.dim), 0.0));

    const double inv_b = 1.0 / static_cast<double>(z.size());
    double ce = 0.0;
    std::vector<double> distances;
    std::vector<int> nearest;
    std::vector<double> dloss(static_cast<std::size_t>(n));
    for (std::size_t item = 0; item < z.size(); ++item) {
        const auto& q = targets[item];
        if (static_cast<int>(q.size()) != n) fail(ErrorCode::config, "target dimension mismatch");
        class_distances(z[item], bank, distances, nearest);
        auto aff = class_probabilities(distances, tau);
        for (int i = 0; i < n; ++i) {
            double qi = q[static_cast<std::size_t>(i)];
            if (qi > 0.0) ce += -qi * std::log(aff.probs[static_cast<std::size_t>(i)]);
            dloss[static_cast<std::size_t>(i)] =
                (qi - aff.probs[static_cast<std::size_t>(i)]) / tau * inv_b;
        }
        accumulate_distance_grads(bank, z[item], distances, nearest, dloss, out.grad_prototypes,
                                  out.grad_z[item]);
    }
    out.value.ce = ce * inv_b;
    out.value.total = out.value.ce;

    add_separation_term(bank, hyper, out);
    add_norm_term(bank, hyper, out);
    return out;
}

LossGrads stage1_loss(const std::vector<std::vector<double>>& z, const std::vector<int>& labels,
                      const PrototypeBank& bank, const RouterHyper& hyper, double tau) {
    if (z.size() != labels.size()) fail(ErrorCode::config, "stage1_loss batch shape mismatch");
    std::vector<std::vector<double>> targets(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= bank.num_classes())
            fail(ErrorCode::config, "label out of range");
        targets[i].assign(static_cast<std::size_t>(bank.num_classes()), 0.0);
        targets[i][static_cast<std::size_t>(labels[i])] = 1.0;
    }
    return stage1_loss_targets(z, targets, bank, hyper, tau);
}

AffinityDistribution build_target_distribution(const std::vector<double>& scores,
                                               const std::vector<double>& mean,
                                               const std::vector<double>& stddev, double t_target) {
    if (scores.size() != mean.size() || scores.size() != stddev.size())
        fail(ErrorCode::config, "target distribution stats shape mismatch");
    if (scores.empty()) fail(ErrorCode::config, "empty score vector");
    if (!(t_target > 0.0)) fail(ErrorCode::config, "target temperature must be > 0");
    std::vector<double> standardized(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        standardized[i] = stddev[i] > 0.0 ? (scores[i] - mean[i]) / stddev[i] : 0.0;
    double max_s = *std::max_element(standardized.begin(), standardized.end());
    AffinityDistribution out;
    out.distances.assign(scores.size(), 0.0);
    out.probs.resize(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out.probs[i] = std::exp((standardized[i] - max_s) / t_target);
        sum += out.probs[i];
    }
    for (auto& p : out.probs) p /= sum;
    return out;
}

LossGrads stage2_loss(const std::vector<std::vector<double>>& z,
                      const std::vector<std::vector<double>>& targets, const PrototypeBank& bank,
                      const RouterHyper& hyper, double tau) {
    bank.validate();
    if (!bank.has_anchors())
        fail(ErrorCode::pipeline_order, "stage2_loss requires anchors from a completed Stage 1");
    if (z.empty() || z.size() != targets.size())
        fail(ErrorCode::config, "stage2_loss batch shape mismatch");
    const int n = bank.num_classes();

    LossGrads out;
    out.grad_prototypes.assign(bank.prototypes.size(), 0.0);
    out.grad_z.assign(z.size(), std::vector<double>(static_cast<std::size_t>(bank.dim), 0.0));

    const double inv_b = 1.0 / static_cast<double>(z.size());
    double kl = 0.0;
    double ce_aux = 0.0;
    std::vector<double> distances;
    std::vector<int> nearest;
    std::vector<double> dloss(static_cast<std::size_t>(n));
    for (std::size_t item = 0; item < z.size(); ++item) {
        const auto& q = targets[item];
        if (static_cast<int>(q.size()) != n) fail(ErrorCode::config, "target dimension mismatch");
        class_distances(z[item], bank, distances, nearest);
        auto aff = class_probabilities(distances, tau);
        for (int i = 0; i < n; ++i) {
            double qi = q[static_cast<std::size_t>(i)];
            if (qi > 0.0) kl += qi * std::log(qi / aff.probs[static_cast<std::size_t>(i)]);
            dloss[static_cast<std::size_t>(i)] =
                (qi - aff.probs[static_cast<std::size_t>(i)]) / tau * inv_b;
        }
        if (hyper.lambda_ce_aux > 0.0) {
            int y = 0;
            for (int i = 1; i < n; ++i)
                if (q[static_cast<std::size_t>(i)] > q[static_cast<std::size_t>(y)]) y = i;
            ce_aux += -std::log(aff.probs[static_cast<std::size_t>(y)]);
            for (int i = 0; i < n; ++i) {
                double indicator = (i == y) ? 1.0 : 0.0;
                dloss[static_cast<std::size_t>(i)] += hyper.lambda_ce_aux *
                                                      (indicator - aff.probs[static_cast<std::size_t>(i)]) /
                                                      tau * inv_b;
            }
        }
        accumulate_distance_grads(bank, z[item], distances, nearest, dloss, out.grad_prototypes,
                                  out.grad_z[item]);
    }
    out.value.kl = kl * inv_b;
    out.value.ce = ce_aux * inv_b;
    out.value.total = out.value.kl + hyper.lambda_ce_aux * out.value.ce;

    add_anchor_term(bank, hyper, out);
    add_separation_term(bank, hyper, out);
    add_norm_term(bank, hyper, out);
    return out;
}

namespace {

void xavier_fill(Rng& rng, std::vector<double>& out, double fan_sum) {
    double a = std::sqrt(6.0 / fan_sum);
    for (auto& v : out) v = (2.0 * rng.uniform() - 1.0) * a;
}

// Mini-batch AdamW loop shared by both stages. loss_fn(z, batch_indices,
// bank) must return the loss and gradients at the current parameters.
template <typename LossFn>
std::vector<EpochLog> run_training(RouterModel& model,
                                   const std::vector<std::vector<double>>& features, double lr,
                                   const TrainConfig& config, const char* shuffle_tag,
                                   const LossFn& loss_fn) {
    AdamW opt_w(model.encoder.weights.size(), lr, config.weight_decay, config.warmup_steps);
    AdamW opt_p(model.bank.prototypes.size(), lr, 0.0, config.warmup_steps);

    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<EpochLog> log;
    std::vector<double> grad_w(model.encoder.weights.size());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(
            derive_seed(config.seed, std::string(shuffle_tag) + "/epoch/" + std::to_string(epoch)));
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
            std::vector<std::vector<double>> z(batch.size());
            for (std::size_t b = 0; b < batch.size(); ++b)
                z[b] = embed_features(features[batch[b]], model.encoder);

            LossGrads grads = loss_fn(z, batch, model.bank);

            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            for (std::size_t b = 0; b < batch.size(); ++b)
                embed_backward_accum(features[batch[b]], model.encoder, grads.grad_z[b], grad_w);

            opt_w.step(model.encoder.weights, grad_w);
            opt_p.step(model.bank.prototypes, grads.grad_prototypes);
        }

        std::vector<std::vector<double>> z_all(features.size());
        for (std::size_t i = 0; i < features.size(); ++i)
            z_all[i] = embed_features(features[i], model.encoder);
        std::vector<std::size_t> all(features.size());
        std::iota(all.begin(), all.end(), 0);
        LossGrads full = loss_fn(z_all, all, model.bank);
        log.push_back({epoch, full.value});
    }
    return log;
}

}  // namespace

TrainResult train_stage1(const std::vector<TokenSequence>& data,
                         const std::vector<DetectorSpec>& classes, const FeatureConfig& features,
                         const RouterHyper& hyper, double tau, const TrainConfig& config,
                         int prototypes_per_class, bool composite_pool) {
    config.validate();
    features.validate();
    if (classes.size() < 2) fail(ErrorCode::config, "stage 1 requires at least 2 classes");
    if (data.empty()) fail(ErrorCode::config, "stage 1 training data is empty");
    if (!(tau > 0.0)) fail(ErrorCode::config, "tau must be > 0");
    if (prototypes_per_class < 1) fail(ErrorCode::config, "prototypes_per_class must be >= 1");

    // soft targets: one-hot normally, uniform over the matching classes when
    // a composite pool lists one surrogate under several criteria
    const int n = static_cast<int>(classes.size());
    std::vector<std::vector<double>> targets(data.size());
    std::map<std::string, int> surrogate_samples;
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::vector<int> matching;
        for (int c = 0; c < n; ++c)
            if (classes[static_cast<std::size_t>(c)].surrogate_id == data[i].source_id)
                matching.push_back(c);
        if (matching.empty())
            fail(ErrorCode::config,
                 "training text from '" + data[i].source_id + "' matches no router class");
        targets[i].assign(static_cast<std::size_t>(n), 0.0);
        for (int c : matching)
            targets[i][static_cast<std::size_t>(c)] = 1.0 / static_cast<double>(matching.size());
        ++surrogate_samples[data[i].source_id];
    }
    for (const auto& spec : classes) {
        auto it = surrogate_samples.find(spec.surrogate_id);
        int have = it == surrogate_samples.end() ? 0 : it->second;
        if (have < prototypes_per_class)
            fail(ErrorCode::config, "class '" + spec.surrogate_id + "' has " +
                                        std::to_string(have) + " samples but K=" +
                                        std::to_string(prototypes_per_class) + " prototypes");
    }

    RouterModel model;
    model.tau = tau;
    model.hyper = hyper;
    model.composite_pool = composite_pool;
    model.encoder.config = features;
    model.encoder.weights.resize(static_cast<std::size_t>(features.embed_dim) *
                                 static_cast<std::size_t>(features.hash_dim));
    model.bank.classes = classes;
    model.bank.per_class = prototypes_per_class;
    model.bank.dim = features.embed_dim;
    model.bank.prototypes.resize(static_cast<std::size_t>(n) * prototypes_per_class *
                                 features.embed_dim);

    {
        Rng init_w(derive_seed(config.seed, "stage1/init/encoder"));
        xavier_fill(init_w, model.encoder.weights,
                    static_cast<double>(features.hash_dim + features.embed_dim));
        Rng init_p(derive_seed(config.seed, "stage1/init/prototypes"));
        xavier_fill(init_p, model.bank.prototypes,
                    static_cast<double>(features.embed_dim + n * prototypes_per_class));
    }

    std::vector<std::vector<double>> feats(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) feats[i] = featurize(data[i], features);

    auto loss_fn = [&](const std::vector<std::vector<double>>& z,
                       const std::vector<std::size_t>& batch, const PrototypeBank& bank) {
        std::vector<std::vector<double>> batch_targets(batch.size());
        for (std::size_t b = 0; b < batch.size(); ++b) batch_targets[b] = targets[batch[b]];
        return stage1_loss_targets(z, batch_targets, bank, hyper, tau);
    };
    auto log = run_training(model, feats, config.lr_stage1, config, "stage1", loss_fn);

    model.bank.anchors = model.bank.prototypes;
    return TrainResult{std::move(model), std::move(log)};
}

TrainResult train_stage2_with_targets(const RouterModel& start,
                                      const std::vector<TokenSequence>& texts,
                                      const std::vector<std::vector<double>>& targets,
                                      const TrainConfig& config) {
    config.validate();
    if (!start.bank.has_anchors())
        fail(ErrorCode::pipeline_order, "stage 2 requires anchors from a completed Stage 1");
    if (texts.empty() || texts.size() != targets.size())
        fail(ErrorCode::config, "stage 2 data is empty or shape-mismatched");

    RouterModel model = start;
    std::vector<std::vector<double>> feats(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) feats[i] = featurize(texts[i], model.encoder.config);

    auto loss_fn = [&](const std::vector<std::vector<double>>& z,
                       const std::vector<std::size_t>& batch, const PrototypeBank& bank) {
        std::vector<std::vector<double>> batch_targets(batch.size());
        for (std::size_t b = 0; b < batch.size(); ++b) batch_targets[b] = targets[batch[b]];
        return stage2_loss(z, batch_targets, bank, model.hyper, model.tau);
    };
    auto log = run_training(model, feats, config.lr_stage2, config, "stage2", loss_fn);
    return TrainResult{std::move(model), std::move(log)};
}

TrainResult train_stage2(const RouterModel& start, const std::vector<Stage2Item>& data,
                         const TrainConfig& config) {
    if (!start.bank.has_anchors())
        fail(ErrorCode::pipeline_order, "stage 2 requires anchors from a completed Stage 1");
    if (data.empty()) fail(ErrorCode::config, "stage 2 data is empty");
    const int n = start.bank.num_classes();

    // per-detector standardization over the training corpus, persisted with
    // the model so inference-time targets stay comparable
    std::vector<double> mean(static_cast<std::size_t>(n), 0.0);
    std::vector<double> stddev(static_cast<std::size_t>(n), 0.0);
    for (const auto& item : data) {
        if (static_cast<int>(item.scores.size()) != n)
            fail(ErrorCode::config, "stage 2 score vector length mismatch");
        for (int i = 0; i < n; ++i) mean[static_cast<std::size_t>(i)] += item.scores[static_cast<std::size_t>(i)];
    }
    for (auto& m : mean) m /= static_cast<double>(data.size());
    for (const auto& item : data)
        for (int i = 0; i < n; ++i) {
            double d = item.scores[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)];
            stddev[static_cast<std::size_t>(i)] += d * d;
        }
    for (auto& s : stddev) s = std::sqrt(s / static_cast<double>(data.size()));

    std::vector<TokenSequence> texts(data.size());
    std::vector<std::vector<double>> targets(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        texts[i] = data[i].x;
        targets[i] =
            build_target_distribution(data[i].scores, mean, stddev, start.hyper.t_target).probs;
    }

    RouterModel seeded = start;
    seeded.score_mean = std::move(mean);
    seeded.score_std = std::move(stddev);
    return train_stage2_with_targets(seeded, texts, targets, config);
}

RouteResult route(const TokenSequence& x, const RouterModel& model) {
    model.bank.validate();
    auto z = embed(x, model.encoder);
    RouteResult out;
    out.distances = class_distances(z, model.bank);
    auto aff = class_probabilities(out.distances, model.tau);
    out.probs = std::move(aff.probs);
    out.class_index = 0;
    for (int i = 1; i < model.bank.num_classes(); ++i)
        if (out.distances[static_cast<std::size_t>(i)] <
            out.distances[static_cast<std::size_t>(out.class_index)])
            out.class_index = i;
    out.detector = model.bank.classes[static_cast<std::size_t>(out.class_index)];
    return out;
}

DetectionScore route_and_score(const TokenSequence& x, const RouterModel& model,
                               const SurrogateRegistry& registry,
                               std::optional<Criterion> criterion) {
    RouteResult r = route(x, model);
    Criterion crit = criterion.value_or(r.detector.criterion);
    DetectionScore s = score(x, registry.get(r.detector.surrogate_id), crit);
    s.surrogate_id = r.detector.surrogate_id;
    return s;
}

void RouterModel::save(const std::string& path) const {
    nlohmann::json doc;
    doc["format"] = kFormatTag;
    doc["tau"] = tau;
    doc["composite_pool"] = composite_pool;
    doc["encoder"] = {
        {"ngram_orders", encoder.config.ngram_orders},
        {"hash_dim", encoder.config.hash_dim},
        {"embed_dim", encoder.config.embed_dim},
        {"weights", encoder.weights},
    };
    doc["hyper"] = {
        {"margin", hyper.margin},
        {"lambda_sep", hyper.lambda_sep},
        {"lambda_norm", hyper.lambda_norm},
        {"lambda_anchor", hyper.lambda_anchor},
        {"t_target", hyper.t_target},
        {"lambda_ce_aux", hyper.lambda_ce_aux},
    };
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& spec : bank.classes)
        classes.push_back({{"surrogate", spec.surrogate_id}, {"criterion", criterion_name(spec.criterion)}});
    doc["bank"] = {
        {"classes", classes},
        {"per_class", bank.per_class},
        {"dim", bank.dim},
        {"prototypes", bank.prototypes},
        {"anchors", bank.anchors},
    };
    doc["score_stats"] = {{"mean", score_mean}, {"std", score_std}};
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::internal, "cannot write router file " + path);
    out << doc.dump(1) << "\n";
}

RouterModel RouterModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::missing_artifact, "cannot open router file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail(ErrorCode::config, "malformed router file " + path + ": " + e.what());
    }
    if (doc.value("format", "") != kFormatTag)
        fail(ErrorCode::config, "unexpected router format tag in " + path);

    RouterModel m;
    m.tau = doc.at("tau").get<double>();
    m.composite_pool = doc.at("composite_pool").get<bool>();
    const auto& enc = doc.at("encoder");
    m.encoder.config.ngram_orders = enc.at("ngram_orders").get<std::vector<int>>();
    m.encoder.config.hash_dim = enc.at("hash_dim").get<int>();
    m.encoder.config.embed_dim = enc.at("embed_dim").get<int>();
    m.encoder.weights = enc.at("weights").get<std::vector<double>>();
    const auto& hy = doc.at("hyper");
    m.hyper.margin = hy.at("margin").get<double>();
    m.hyper.lambda_sep = hy.at("lambda_sep").get<double>();
    m.hyper.lambda_norm = hy.at("lambda_norm").get<double>();
    m.hyper.lambda_anchor = hy.at("lambda_anchor").get<double>();
    m.hyper.t_target = hy.at("t_target").get<double>();
    m.hyper.lambda_ce_aux = hy.at("lambda_ce_aux").get<double>();
    const auto& bank = doc.at("bank");
    for (const auto& cls : bank.at("classes"))
        m.bank.classes.push_back(
            {cls.at("surrogate").get<std::string>(), parse_criterion(cls.at("criterion").get<std::string>())});
    m.bank.per_class = bank.at("per_class").get<int>();
    m.bank.dim = bank.at("dim").get<int>();
    m.bank.prototypes = bank.at("prototypes").get<std::vector<double>>();
    m.bank.anchors = bank.at("anchors").get<std::vector<double>>();
    m.score_mean = doc.at("score_stats").at("mean").get<std::vector<double>>();
    m.score_std = doc.at("score_stats").at("std").get<std::vector<double>>();
    m.bank.validate();
    return m;
}

}  // namespace routedet
