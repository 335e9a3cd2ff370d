#include "routedet/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "routedet/common.hpp"

namespace routedet {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void bad_field(const std::string& section, const std::string& key,
                            const std::string& why) {
    fail(ErrorCode::config, "[" + section + "] " + key + ": " + why);
}

long long to_int(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long long out = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        bad_field(section, key, "expected an integer, got '" + v + "'");
    }
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        bad_field(section, key, "expected a number, got '" + v + "'");
    }
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_field(section, key, "expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

struct Assigner {
    RunConfig& config;

    void assign(const std::string& section, const std::string& key, const std::string& value) {
        if (section == "suite") return assign_suite(key, value);
        if (section == "score") return assign_score(key, value);
        if (section == "encoder") return assign_encoder(key, value);
        if (section == "router") return assign_router(key, value);
        if (section == "train") return assign_train(key, value);
        if (section == "eval") return assign_eval(key, value);
        fail(ErrorCode::config, "unknown config section [" + section + "]");
    }

    void assign_suite(const std::string& key, const std::string& v) {
        auto& s = config.suite;
        if (key == "seed") {
            s.seed = static_cast<std::uint64_t>(to_int("suite", key, v));
            s.seed_set = true;
        } else if (key == "vocab_size") s.vocab_size = static_cast<int>(to_int("suite", key, v));
        else if (key == "n_generators") s.n_generators = static_cast<int>(to_int("suite", key, v));
        else if (key == "n_heldout") s.n_heldout = static_cast<int>(to_int("suite", key, v));
        else if (key == "generator_order") s.generator_order = static_cast<int>(to_int("suite", key, v));
        else if (key == "human_order") s.human_order = static_cast<int>(to_int("suite", key, v));
        else if (key == "alpha") s.alpha = to_double("suite", key, v);
        else if (key == "machine_concentration") s.machine_concentration = to_double("suite", key, v);
        else if (key == "human_concentration") s.human_concentration = to_double("suite", key, v);
        else if (key == "heldout_blend") s.heldout_blend = to_double("suite", key, v);
        else if (key == "style_corpus_sequences") s.style_corpus_sequences = static_cast<int>(to_int("suite", key, v));
        else if (key == "style_corpus_length") s.style_corpus_length = static_cast<int>(to_int("suite", key, v));
        else if (key == "samples_per_cell") s.samples_per_cell = static_cast<int>(to_int("suite", key, v));
        else if (key == "sequence_length") s.sequence_length = static_cast<int>(to_int("suite", key, v));
        else if (key == "prompt_length") s.prompt_length = static_cast<int>(to_int("suite", key, v));
        else if (key == "top_p") s.top_p = to_double("suite", key, v);
        else if (key == "temperature") s.temperature = to_double("suite", key, v);
        else if (key == "stage1_per_class") s.stage1_per_class = static_cast<int>(to_int("suite", key, v));
        else if (key == "stage2_per_source") s.stage2_per_source = static_cast<int>(to_int("suite", key, v));
        else if (key == "kl_horizon") s.kl_horizon = static_cast<int>(to_int("suite", key, v));
        else if (key == "enumeration_cap") s.enumeration_cap = static_cast<std::uint64_t>(to_int("suite", key, v));
        else fail(ErrorCode::config, "unknown key '" + key + "' in section [suite]");
    }

    void assign_score(const std::string& key, const std::string& v) {
        if (key == "criteria") {
            config.score.criteria.clear();
            for (const auto& name : split_list(v)) config.score.criteria.push_back(parse_criterion(name));
            if (config.score.criteria.empty()) bad_field("score", key, "list must not be empty");
        } else {
            fail(ErrorCode::config, "unknown key '" + key + "' in section [score]");
        }
    }

    void assign_encoder(const std::string& key, const std::string& v) {
        auto& e = config.encoder;
        if (key == "ngram_orders") {
            e.ngram_orders.clear();
            for (const auto& part : split_list(v))
                e.ngram_orders.push_back(static_cast<int>(to_int("encoder", key, part)));
        } else if (key == "hash_dim") e.hash_dim = static_cast<int>(to_int("encoder", key, v));
        else if (key == "embed_dim") e.embed_dim = static_cast<int>(to_int("encoder", key, v));
        else fail(ErrorCode::config, "unknown key '" + key + "' in section [encoder]");
    }

    void assign_router(const std::string& key, const std::string& v) {
        auto& r = config.router;
        if (key == "prototypes_per_class") r.prototypes_per_class = static_cast<int>(to_int("router", key, v));
        else if (key == "tau") r.tau = to_double("router", key, v);
        else if (key == "margin") r.hyper.margin = to_double("router", key, v);
        else if (key == "lambda_sep") r.hyper.lambda_sep = to_double("router", key, v);
        else if (key == "lambda_norm") r.hyper.lambda_norm = to_double("router", key, v);
        else if (key == "lambda_anchor") r.hyper.lambda_anchor = to_double("router", key, v);
        else if (key == "t_target") r.hyper.t_target = to_double("router", key, v);
        else if (key == "lambda_ce_aux") r.hyper.lambda_ce_aux = to_double("router", key, v);
        else if (key == "criterion") r.criterion = parse_criterion(v);
        else if (key == "composite_pool") r.composite_pool = to_bool("router", key, v);
        else fail(ErrorCode::config, "unknown key '" + key + "' in section [router]");
    }

    void assign_train(const std::string& key, const std::string& v) {
        auto& t = config.train;
        if (key == "epochs") t.epochs = static_cast<int>(to_int("train", key, v));
        else if (key == "batch_size") t.batch_size = static_cast<int>(to_int("train", key, v));
        else if (key == "lr_stage1") t.lr_stage1 = to_double("train", key, v);
        else if (key == "lr_stage2") t.lr_stage2 = to_double("train", key, v);
        else if (key == "warmup_steps") t.warmup_steps = static_cast<int>(to_int("train", key, v));
        else if (key == "weight_decay") t.weight_decay = to_double("train", key, v);
        else fail(ErrorCode::config, "unknown key '" + key + "' in section [train]");
    }

    void assign_eval(const std::string& key, const std::string& v) {
        auto& e = config.eval;
        if (key == "bound_horizon") e.bound_horizon = static_cast<int>(to_int("eval", key, v));
        else if (key == "bound_clip") e.bound_clip = to_double("eval", key, v);
        else if (key == "sweep_fractions") {
            e.sweep_fractions.clear();
            for (const auto& part : split_list(v))
                e.sweep_fractions.push_back(to_double("eval", key, part));
            if (e.sweep_fractions.empty()) bad_field("eval", key, "list must not be empty");
        } else fail(ErrorCode::config, "unknown key '" + key + "' in section [eval]");
    }
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    Assigner assigner{config};
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(ErrorCode::config, "malformed section header at line " + std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::config, "expected key = value at line " + std::to_string(line_no));
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            fail(ErrorCode::config, "key '" + key + "' appears before any [section]");
        assigner.assign(section, key, value);
    }
    config.validate();
    return config;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::missing_artifact, "cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void RunConfig::validate() const {
    const auto& s = suite;
    if (s.vocab_size < 2 || s.vocab_size > 28)
        fail(ErrorCode::config, "[suite] vocab_size must be in [2, 28]");
    if (s.n_generators < 2) fail(ErrorCode::config, "[suite] n_generators must be >= 2");
    if (s.n_heldout < 0) fail(ErrorCode::config, "[suite] n_heldout must be >= 0");
    if (s.generator_order < 0) fail(ErrorCode::config, "[suite] generator_order must be >= 0");
    if (s.human_order < 0) fail(ErrorCode::config, "[suite] human_order must be >= 0");
    if (!(s.alpha > 0.0)) fail(ErrorCode::config, "[suite] alpha must be > 0");
    if (!(s.machine_concentration > 0.0))
        fail(ErrorCode::config, "[suite] machine_concentration must be > 0");
    if (!(s.human_concentration > 0.0))
        fail(ErrorCode::config, "[suite] human_concentration must be > 0");
    if (s.heldout_blend < 0.0 || s.heldout_blend > 1.0)
        fail(ErrorCode::config, "[suite] heldout_blend must be in [0, 1]");
    if (s.style_corpus_sequences < 1)
        fail(ErrorCode::config, "[suite] style_corpus_sequences must be >= 1");
    if (s.style_corpus_length < 1)
        fail(ErrorCode::config, "[suite] style_corpus_length must be >= 1");
    if (s.samples_per_cell < 1) fail(ErrorCode::config, "[suite] samples_per_cell must be >= 1");
    if (s.sequence_length < 2) fail(ErrorCode::config, "[suite] sequence_length must be >= 2");
    if (s.prompt_length < 0 || s.prompt_length >= s.sequence_length)
        fail(ErrorCode::config, "[suite] prompt_length must be in [0, sequence_length)");
    if (!(s.top_p > 0.0 && s.top_p <= 1.0))
        fail(ErrorCode::config, "[suite] top_p must be in (0, 1]");
    if (!(s.temperature > 0.0)) fail(ErrorCode::config, "[suite] temperature must be > 0");
    if (s.stage1_per_class < 1) fail(ErrorCode::config, "[suite] stage1_per_class must be >= 1");
    if (s.stage2_per_source < 1) fail(ErrorCode::config, "[suite] stage2_per_source must be >= 1");
    if (s.kl_horizon < 1) fail(ErrorCode::config, "[suite] kl_horizon must be >= 1");
    if (s.enumeration_cap < 2) fail(ErrorCode::config, "[suite] enumeration_cap must be >= 2");

    encoder.validate();

    const auto& r = router;
    if (r.prototypes_per_class < 1)
        fail(ErrorCode::config, "[router] prototypes_per_class must be >= 1");
    if (!(r.tau > 0.0)) fail(ErrorCode::config, "[router] tau must be > 0");
    if (r.hyper.margin < 0.0) fail(ErrorCode::config, "[router] margin must be >= 0");
    if (r.hyper.lambda_sep < 0.0) fail(ErrorCode::config, "[router] lambda_sep must be >= 0");
    if (r.hyper.lambda_norm < 0.0) fail(ErrorCode::config, "[router] lambda_norm must be >= 0");
    if (r.hyper.lambda_anchor < 0.0)
        fail(ErrorCode::config, "[router] lambda_anchor must be >= 0");
    if (!(r.hyper.t_target > 0.0)) fail(ErrorCode::config, "[router] t_target must be > 0");
    if (r.hyper.lambda_ce_aux < 0.0)
        fail(ErrorCode::config, "[router] lambda_ce_aux must be >= 0");
    bool found = false;
    for (Criterion c : score.criteria)
        if (c == r.criterion) found = true;
    if (!found)
        fail(ErrorCode::config, "[router] criterion must be listed in [score] criteria");

    train.validate();

    const auto& e = eval;
    if (e.bound_horizon < 1) fail(ErrorCode::config, "[eval] bound_horizon must be >= 1");
    if (!(e.bound_clip > 0.0)) fail(ErrorCode::config, "[eval] bound_clip must be > 0");
    for (double f : e.sweep_fractions)
        if (!(f > 0.0 && f <= 1.0))
            fail(ErrorCode::config, "[eval] sweep_fractions entries must be in (0, 1]");
}

nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json doc;
    doc["suite"] = {
        {"seed", c.suite.seed},
        {"seed_set", c.suite.seed_set},
        {"vocab_size", c.suite.vocab_size},
        {"n_generators", c.suite.n_generators},
        {"n_heldout", c.suite.n_heldout},
        {"generator_order", c.suite.generator_order},
        {"human_order", c.suite.human_order},
        {"alpha", c.suite.alpha},
        {"machine_concentration", c.suite.machine_concentration},
        {"human_concentration", c.suite.human_concentration},
        {"heldout_blend", c.suite.heldout_blend},
        {"style_corpus_sequences", c.suite.style_corpus_sequences},
        {"style_corpus_length", c.suite.style_corpus_length},
        {"samples_per_cell", c.suite.samples_per_cell},
        {"sequence_length", c.suite.sequence_length},
        {"prompt_length", c.suite.prompt_length},
        {"top_p", c.suite.top_p},
        {"temperature", c.suite.temperature},
        {"stage1_per_class", c.suite.stage1_per_class},
        {"stage2_per_source", c.suite.stage2_per_source},
        {"kl_horizon", c.suite.kl_horizon},
        {"enumeration_cap", c.suite.enumeration_cap},
    };
    std::vector<std::string> crit_names;
    for (Criterion cr : c.score.criteria) crit_names.push_back(criterion_name(cr));
    doc["score"] = {{"criteria", crit_names}};
    doc["encoder"] = {
        {"ngram_orders", c.encoder.ngram_orders},
        {"hash_dim", c.encoder.hash_dim},
        {"embed_dim", c.encoder.embed_dim},
    };
    doc["router"] = {
        {"prototypes_per_class", c.router.prototypes_per_class},
        {"tau", c.router.tau},
        {"margin", c.router.hyper.margin},
        {"lambda_sep", c.router.hyper.lambda_sep},
        {"lambda_norm", c.router.hyper.lambda_norm},
        {"lambda_anchor", c.router.hyper.lambda_anchor},
        {"t_target", c.router.hyper.t_target},
        {"lambda_ce_aux", c.router.hyper.lambda_ce_aux},
        {"criterion", criterion_name(c.router.criterion)},
        {"composite_pool", c.router.composite_pool},
    };
    doc["train"] = {
        {"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"lr_stage1", c.train.lr_stage1},
        {"lr_stage2", c.train.lr_stage2},
        {"warmup_steps", c.train.warmup_steps},
        {"weight_decay", c.train.weight_decay},
    };
    doc["eval"] = {
        {"bound_horizon", c.eval.bound_horizon},
        {"bound_clip", c.eval.bound_clip},
        {"sweep_fractions", c.eval.sweep_fractions},
    };
    return doc;
}

RunConfig config_from_json(const nlohmann::json& doc) {
    RunConfig c;
    const auto& s = doc.at("suite");
    c.suite.seed = s.at("seed").get<std::uint64_t>();
    c.suite.seed_set = s.at("seed_set").get<bool>();
    c.suite.vocab_size = s.at("vocab_size").get<int>();
    c.suite.n_generators = s.at("n_generators").get<int>();
    c.suite.n_heldout = s.at("n_heldout").get<int>();
    c.suite.generator_order = s.at("generator_order").get<int>();
    c.suite.human_order = s.at("human_order").get<int>();
    c.suite.alpha = s.at("alpha").get<double>();
    c.suite.machine_concentration = s.at("machine_concentration").get<double>();
    c.suite.human_concentration = s.at("human_concentration").get<double>();
    c.suite.heldout_blend = s.at("heldout_blend").get<double>();
    c.suite.style_corpus_sequences = s.at("style_corpus_sequences").get<int>();
    c.suite.style_corpus_length = s.at("style_corpus_length").get<int>();
    c.suite.samples_per_cell = s.at("samples_per_cell").get<int>();
    c.suite.sequence_length = s.at("sequence_length").get<int>();
    c.suite.prompt_length = s.at("prompt_length").get<int>();
    c.suite.top_p = s.at("top_p").get<double>();
    c.suite.temperature = s.at("temperature").get<double>();
    c.suite.stage1_per_class = s.at("stage1_per_class").get<int>();
    c.suite.stage2_per_source = s.at("stage2_per_source").get<int>();
    c.suite.kl_horizon = s.at("kl_horizon").get<int>();
    c.suite.enumeration_cap = s.at("enumeration_cap").get<std::uint64_t>();
    c.score.criteria.clear();
    for (const auto& name : doc.at("score").at("criteria"))
        c.score.criteria.push_back(parse_criterion(name.get<std::string>()));
    const auto& e = doc.at("encoder");
    c.encoder.ngram_orders = e.at("ngram_orders").get<std::vector<int>>();
    c.encoder.hash_dim = e.at("hash_dim").get<int>();
    c.encoder.embed_dim = e.at("embed_dim").get<int>();
    const auto& r = doc.at("router");
    c.router.prototypes_per_class = r.at("prototypes_per_class").get<int>();
    c.router.tau = r.at("tau").get<double>();
    c.router.hyper.margin = r.at("margin").get<double>();
    c.router.hyper.lambda_sep = r.at("lambda_sep").get<double>();
    c.router.hyper.lambda_norm = r.at("lambda_norm").get<double>();
    c.router.hyper.lambda_anchor = r.at("lambda_anchor").get<double>();
    c.router.hyper.t_target = r.at("t_target").get<double>();
    c.router.hyper.lambda_ce_aux = r.at("lambda_ce_aux").get<double>();
    c.router.criterion = parse_criterion(r.at("criterion").get<std::string>());
    c.router.composite_pool = r.at("composite_pool").get<bool>();
    const auto& t = doc.at("train");
    c.train.epochs = t.at("epochs").get<int>();
    c.train.batch_size = t.at("batch_size").get<int>();
    c.train.lr_stage1 = t.at("lr_stage1").get<double>();
    c.train.lr_stage2 = t.at("lr_stage2").get<double>();
    c.train.warmup_steps = t.at("warmup_steps").get<int>();
    c.train.weight_decay = t.at("weight_decay").get<double>();
    const auto& ev = doc.at("eval");
    c.eval.bound_horizon = ev.at("bound_horizon").get<int>();
    c.eval.bound_clip = ev.at("bound_clip").get<double>();
    c.eval.sweep_fractions = ev.at("sweep_fractions").get<std::vector<double>>();
    c.validate();
    return c;
}

}  // namespace routedet
