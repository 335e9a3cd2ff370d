#include "routedet/markov.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "routedet/common.hpp"
#include "routedet/rng.hpp"

namespace routedet {

namespace {

constexpr const char* kFormatTag = "routedet-markov/1";

void check_ids(const Vocabulary& vocab, std::span<const std::int32_t> ids) {
    for (auto id : ids) {
        if (id < 0 || id >= vocab.size())
            fail(ErrorCode::config, "token id " + std::to_string(id) + " out of range for V=" +
                                        std::to_string(vocab.size()));
    }
}

std::string key_to_string(std::span<const std::int32_t> context) {
    std::string out;
    for (std::size_t i = 0; i < context.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(context[i]);
    }
    return out;
}

std::vector<std::int32_t> parse_context_string(const std::string& s) {
    std::vector<std::int32_t> out;
    if (s.empty()) return out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string part = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        out.push_back(static_cast<std::int32_t>(std::stol(part)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace

MarkovModel::ContextKey MarkovModel::context_key(std::span<const std::int32_t> context) const {
    std::size_t len = std::min<std::size_t>(context.size(), static_cast<std::size_t>(order_));
    ContextKey key = 1;  // leading sentinel digit disambiguates context lengths
    const auto base = static_cast<ContextKey>(vocab_.size());
    for (std::size_t i = context.size() - len; i < context.size(); ++i)
        key = key * base + static_cast<ContextKey>(context[i]);
    return key;
}

MarkovModel MarkovModel::train(const Vocabulary& vocab, const std::vector<TokenSequence>& corpus,
                               int order, double alpha) {
    if (corpus.empty()) fail(ErrorCode::config, "training corpus is empty");
    if (order < 0) fail(ErrorCode::config, "order must be >= 0");
    if (!(alpha > 0.0)) fail(ErrorCode::config, "alpha must be > 0");

    MarkovModel m;
    m.order_ = order;
    m.alpha_ = alpha;
    m.vocab_ = vocab;
    m.has_counts_ = true;

    const std::size_t v = static_cast<std::size_t>(vocab.size());
    for (const auto& seq : corpus) {
        if (seq.ids.empty()) fail(ErrorCode::config, "corpus contains an empty sequence");
        check_ids(vocab, seq.ids);
        for (std::size_t i = 0; i < seq.ids.size(); ++i) {
            std::size_t ctx_len = std::min<std::size_t>(i, static_cast<std::size_t>(order));
            ContextKey key = m.context_key({seq.ids.data() + i - ctx_len, ctx_len});
            auto& row = m.counts_[key];
            if (row.empty()) row.assign(v, 0);
            ++row[static_cast<std::size_t>(seq.ids[i])];
        }
    }
    m.finalize_from_counts();
    return m;
}

MarkovModel MarkovModel::from_tables(
    const Vocabulary& vocab, int order, double alpha,
    const std::vector<std::pair<std::vector<std::int32_t>, CategoricalDistribution>>& rows) {
    if (order < 0) fail(ErrorCode::config, "order must be >= 0");
    if (!(alpha > 0.0)) fail(ErrorCode::config, "alpha must be > 0");

    MarkovModel m;
    m.order_ = order;
    m.alpha_ = alpha;
    m.vocab_ = vocab;
    m.has_counts_ = false;
    for (const auto& [context, dist] : rows) {
        if (static_cast<int>(context.size()) > order)
            fail(ErrorCode::config, "table context longer than model order");
        check_ids(vocab, context);
        if (dist.size() != vocab.size())
            fail(ErrorCode::config, "table row dimension does not match vocabulary");
        dist.validate();
        m.table_[m.context_key(context)] = dist.probs;
    }
    m.fallback_.assign(static_cast<std::size_t>(vocab.size()), 1.0 / vocab.size());
    return m;
}

void MarkovModel::finalize_from_counts() {
    const std::size_t v = static_cast<std::size_t>(vocab_.size());
    table_.clear();
    table_.reserve(counts_.size());
    for (const auto& [key, row] : counts_) {
        std::int64_t total = std::accumulate(row.begin(), row.end(), std::int64_t{0});
        std::vector<double> probs(v);
        double denom = static_cast<double>(total) + alpha_ * static_cast<double>(v);
        for (std::size_t t = 0; t < v; ++t)
            probs[t] = (static_cast<double>(row[t]) + alpha_) / denom;
        table_[key] = std::move(probs);
    }
    fallback_.assign(v, 1.0 / static_cast<double>(v));
}

const std::vector<double>& MarkovModel::conditional(ContextKey key) const {
    auto it = table_.find(key);
    return it == table_.end() ? fallback_ : it->second;
}

CategoricalDistribution MarkovModel::next_token_distribution(
    std::span<const std::int32_t> context) const {
    check_ids(vocab_, context);
    return CategoricalDistribution{conditional(context_key(context))};
}

bool MarkovModel::operator==(const MarkovModel& other) const {
    return order_ == other.order_ && alpha_ == other.alpha_ && vocab_ == other.vocab_ &&
           has_counts_ == other.has_counts_ && counts_ == other.counts_;
}

void MarkovModel::save(const std::string& path) const {
    if (!has_counts_)
        fail(ErrorCode::config, "model built from explicit tables has no count provenance to save");
    nlohmann::json doc;
    doc["format"] = kFormatTag;
    doc["order"] = order_;
    doc["alpha"] = alpha_;
    doc["vocab"] = vocab_.tokens();
    nlohmann::json counts = nlohmann::json::object();
    // keys serialized as the context token ids, so retraining provenance
    // survives a round trip
    std::vector<std::int32_t> ctx;
    for (const auto& [key, row] : counts_) {
        ctx.clear();
        ContextKey k = key;
        const auto base = static_cast<ContextKey>(vocab_.size());
        while (k > 1) {
            ctx.push_back(static_cast<std::int32_t>(k % base));
            k /= base;
        }
        std::reverse(ctx.begin(), ctx.end());
        counts[key_to_string(ctx)] = row;
    }
    doc["counts"] = std::move(counts);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::internal, "cannot write model file " + path);
    out << doc.dump(1) << "\n";
}

MarkovModel MarkovModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::missing_artifact, "cannot open model file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail(ErrorCode::config, "malformed model file " + path + ": " + e.what());
    }
    if (doc.value("format", "") != kFormatTag)
        fail(ErrorCode::config, "unexpected model format tag in " + path);

    MarkovModel m;
    m.order_ = doc.at("order").get<int>();
    m.alpha_ = doc.at("alpha").get<double>();
    m.vocab_ = Vocabulary(doc.at("vocab").get<std::vector<std::string>>());
    m.has_counts_ = true;
    const std::size_t v = static_cast<std::size_t>(m.vocab_.size());
    for (const auto& [key_str, row_json] : doc.at("counts").items()) {
        auto ctx = parse_context_string(key_str);
        check_ids(m.vocab_, ctx);
        if (static_cast<int>(ctx.size()) > m.order_)
            fail(ErrorCode::config, "context longer than order in " + path);
        auto row = row_json.get<std::vector<std::int64_t>>();
        if (row.size() != v) fail(ErrorCode::config, "count row dimension mismatch in " + path);
        m.counts_[m.context_key(ctx)] = std::move(row);
    }
    m.finalize_from_counts();
    return m;
}

void for_each_position(
    const MarkovModel& model, const TokenSequence& x,
    const std::function<void(std::size_t, std::int32_t, const std::vector<double>&, double)>& fn) {
    if (x.ids.empty()) fail(ErrorCode::config, "cannot score an empty sequence");
    check_ids(model.vocab(), x.ids);
    const int order = model.order();
    for (std::size_t i = 0; i < x.ids.size(); ++i) {
        std::size_t ctx_len = std::min<std::size_t>(i, static_cast<std::size_t>(order));
        auto key = model.context_key({x.ids.data() + i - ctx_len, ctx_len});
        const auto& probs = model.conditional(key);
        double p = probs[static_cast<std::size_t>(x.ids[i])];
        fn(i, x.ids[i], probs, p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity());
    }
}

std::vector<TokenPrediction> sequence_log_probs(const MarkovModel& model, const TokenSequence& x) {
    std::vector<TokenPrediction> out;
    out.reserve(x.ids.size());
    for_each_position(model, x,
                      [&](std::size_t, std::int32_t, const std::vector<double>& probs, double lp) {
                          out.push_back({lp, CategoricalDistribution{probs}});
                      });
    return out;
}

double sequence_log_prob(const MarkovModel& model, std::span<const std::int32_t> ids) {
    TokenSequence x;
    x.ids.assign(ids.begin(), ids.end());
    double total = 0.0;
    for_each_position(model, x, [&](std::size_t, std::int32_t, const std::vector<double>&,
                                    double lp) { total += lp; });
    return total;
}

std::vector<std::int32_t> sample(const MarkovModel& model, std::span<const std::int32_t> prompt,
                                 const SampleParams& params) {
    if (params.length <= 0) fail(ErrorCode::config, "sample length must be > 0");
    if (!(params.top_p > 0.0 && params.top_p <= 1.0))
        fail(ErrorCode::config, "top_p must be in (0, 1]");
    if (!(params.temperature > 0.0)) fail(ErrorCode::config, "temperature must be > 0");
    check_ids(model.vocab(), prompt);

    const int v = model.vocab().size();
    Rng rng(params.seed);

    std::vector<std::int32_t> context(prompt.begin(), prompt.end());
    std::vector<std::int32_t> out;
    out.reserve(static_cast<std::size_t>(params.length));

    std::vector<double> scaled(static_cast<std::size_t>(v));
    std::vector<int> idx(static_cast<std::size_t>(v));

    for (int step = 0; step < params.length; ++step) {
        const auto& probs = model.conditional(model.context_key(context));

        // temperature on logits, then renormalize
        if (params.temperature == 1.0) {
            std::copy(probs.begin(), probs.end(), scaled.begin());
        } else {
            double max_log = -std::numeric_limits<double>::infinity();
            for (int t = 0; t < v; ++t)
                if (probs[static_cast<std::size_t>(t)] > 0.0)
                    max_log = std::max(max_log, std::log(probs[static_cast<std::size_t>(t)]));
            double sum = 0.0;
            for (int t = 0; t < v; ++t) {
                double p = probs[static_cast<std::size_t>(t)];
                scaled[static_cast<std::size_t>(t)] =
                    p > 0.0 ? std::exp((std::log(p) - max_log) / params.temperature) : 0.0;
                sum += scaled[static_cast<std::size_t>(t)];
            }
            for (auto& s : scaled) s /= sum;
        }

        // nucleus: smallest descending-probability prefix with mass >= top_p,
        // ties broken by token index
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            double pa = scaled[static_cast<std::size_t>(a)];
            double pb = scaled[static_cast<std::size_t>(b)];
            if (pa != pb) return pa > pb;
            return a < b;
        });
        std::size_t kept = idx.size();
        double mass = 0.0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            mass += scaled[static_cast<std::size_t>(idx[j])];
            if (mass >= params.top_p) {
                kept = j + 1;
                break;
            }
        }
        double kept_mass = 0.0;
        for (std::size_t j = 0; j < kept; ++j) kept_mass += scaled[static_cast<std::size_t>(idx[j])];

        double u = rng.uniform() * kept_mass;
        double acc = 0.0;
        std::int32_t chosen = idx[kept - 1];
        for (std::size_t j = 0; j < kept; ++j) {
            acc += scaled[static_cast<std::size_t>(idx[j])];
            if (u < acc) {
                chosen = idx[j];
                break;
            }
        }
        out.push_back(chosen);
        context.push_back(chosen);
    }
    return out;
}

void enumerate_sequences(int vocab_size, int horizon, std::uint64_t cap,
                         const std::function<void(std::span<const std::int32_t>)>& fn) {
    if (horizon < 1) fail(ErrorCode::config, "horizon must be >= 1");
    double total = std::pow(static_cast<double>(vocab_size), horizon);
    if (total > static_cast<double>(cap))
        fail(ErrorCode::config, "enumeration of V^h = " + fmt_double(total) +
                                    " sequences exceeds cap " + std::to_string(cap));
    std::vector<std::int32_t> x(static_cast<std::size_t>(horizon), 0);
    for (;;) {
        fn(x);
        int pos = horizon - 1;
        while (pos >= 0) {
            if (++x[static_cast<std::size_t>(pos)] < vocab_size) break;
            x[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
}

double exact_kl(const MarkovModel& p_src, const MarkovModel& p_sur, int horizon,
                std::uint64_t cap) {
    if (!(p_src.vocab() == p_sur.vocab()))
        fail(ErrorCode::config, "exact_kl requires a shared vocabulary");
    if (horizon < 1) fail(ErrorCode::config, "horizon must be >= 1");
    const int v = p_src.vocab().size();
    double total = std::pow(static_cast<double>(v), horizon);
    if (total > static_cast<double>(cap))
        fail(ErrorCode::config, "enumeration of V^h = " + fmt_double(total) +
                                    " sequences exceeds cap " + std::to_string(cap));

    double kl_total = 0.0;
    std::vector<std::int32_t> prefix;
    prefix.reserve(static_cast<std::size_t>(horizon));

    // depth-first over the sequence tree with incremental log probabilities;
    // subtrees with zero source mass are pruned (0 * log 0 = 0)
    std::function<void(int, double, double)> walk = [&](int depth, double lp_src, double lp_sur) {
        if (depth == horizon) {
            kl_total += std::exp(lp_src) * (lp_src - lp_sur);
            return;
        }
        const auto& src_probs = p_src.conditional(p_src.context_key(prefix));
        const auto& sur_probs = p_sur.conditional(p_sur.context_key(prefix));
        for (int t = 0; t < v; ++t) {
            double ps = src_probs[static_cast<std::size_t>(t)];
            if (ps == 0.0) continue;
            double pq = sur_probs[static_cast<std::size_t>(t)];
            if (pq == 0.0)
                fail(ErrorCode::config,
                     "surrogate assigns zero probability where the source does not "
                     "(absolute continuity violated)");
            prefix.push_back(t);
            walk(depth + 1, lp_src + std::log(ps), lp_sur + std::log(pq));
            prefix.pop_back();
        }
    };
    walk(0, 0.0, 0.0);

    double rate = kl_total / static_cast<double>(horizon);
    if (rate < 0.0 && rate > -1e-12) rate = 0.0;
    return rate;
}

}  // namespace routedet
