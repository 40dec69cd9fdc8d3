#include "stacksl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "stacksl/errors.hpp"
#include "stacksl/rng.hpp"

namespace stacksl {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + want);
}

double parse_double(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end || std::isnan(out)) bad_value(key, v, "a number");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) bad_value(key, v, "a non-negative integer");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v, "a boolean");
}

template <typename E>
E parse_enum(const std::string& key, const std::string& v,
             std::initializer_list<std::pair<const char*, E>> options) {
    std::string names;
    for (const auto& [name, e] : options) {
        if (v == name) return e;
        names += names.empty() ? name : std::string("|") + name;
    }
    bad_value(key, v, names.c_str());
}

struct KeySpec {
    ConfigKey key;
    std::function<void(ExperimentConfig&, const std::string&)> apply;
};

const std::vector<KeySpec>& key_specs() {
    using C = ExperimentConfig;
    static const std::vector<KeySpec> specs = {
        {{"horizon", "20000", "number of rounds T"},
         [](C& c, const std::string& v) { c.horizon = parse_u64("horizon", v); }},
        {{"dim", "20", "feature dimension d"},
         [](C& c, const std::string& v) { c.dim = parse_u64("dim", v); }},
        {{"budget_fraction", "0.1", "label budget fraction beta in (0,1]; B = floor(beta*T)"},
         [](C& c, const std::string& v) { c.budget_fraction = parse_double("budget_fraction", v); }},
        {{"seed", "0", "master seed; run i uses derive_seed(seed, i)"},
         [](C& c, const std::string& v) { c.master_seed = parse_u64("seed", v); }},
        {{"seeds", "1", "number of seeded runs"},
         [](C& c, const std::string& v) { c.num_seeds = parse_u64("seeds", v); }},
        {{"learner.kind", "llf", "stacksl | llf | random-gate"},
         [](C& c, const std::string& v) {
             c.learner = parse_enum<LearnerKind>("learner.kind", v,
                                                 {{"stacksl", LearnerKind::StackSL},
                                                  {"llf", LearnerKind::LLF},
                                                  {"random-gate", LearnerKind::RandomGate}});
         }},
        {{"learner.mode", "ridge-ucb", "ridge-ucb | sgd-ce"},
         [](C& c, const std::string& v) {
             c.mode = parse_enum<LearnerMode>("learner.mode", v,
                                              {{"ridge-ucb", LearnerMode::RidgeUcb},
                                               {"sgd-ce", LearnerMode::SgdCe}});
         }},
        {{"learner.c", "1.0", "LLF confidence scale c; epsilon_t = c/sqrt(1+q)"},
         [](C& c, const std::string& v) { c.c = parse_double("learner.c", v); }},
        {{"learner.eta", "0.05", "learning rate (sgd-ce)"},
         [](C& c, const std::string& v) { c.eta = parse_double("learner.eta", v); }},
        {{"learner.lambda_kl", "0.7", "KL weight"},
         [](C& c, const std::string& v) { c.lambda_kl = parse_double("learner.lambda_kl", v); }},
        {{"learner.rho", "5.0", "loss clip level; 'inf' disables clipping"},
         [](C& c, const std::string& v) { c.rho = parse_double("learner.rho", v); }},
        {{"learner.ema_alpha", "none", "EMA coefficient for the KL reference; 'none' = previous iterate"},
         [](C& c, const std::string& v) {
             if (v == "none") c.ema_alpha.reset();
             else c.ema_alpha = parse_double("learner.ema_alpha", v);
         }},
        {{"ridge.lambda", "1.0", "ridge regularizer lambda_ridge"},
         [](C& c, const std::string& v) { c.lambda_ridge = parse_double("ridge.lambda", v); }},
        {{"ridge.refactor_interval", "512", "full inverse recomputation every R Gram updates"},
         [](C& c, const std::string& v) { c.refactor_interval = parse_u64("ridge.refactor_interval", v); }},
        {{"truth.sigma", "0.1", "feedback noise scale sigma"},
         [](C& c, const std::string& v) { c.sigma = parse_double("truth.sigma", v); }},
        {{"truth.noise", "gaussian", "gaussian | bounded-uniform"},
         [](C& c, const std::string& v) {
             c.noise = parse_enum<NoiseKind>("truth.noise", v,
                                             {{"gaussian", NoiseKind::Gaussian},
                                              {"bounded-uniform", NoiseKind::BoundedUniform}});
         }},
        {{"confidence.delta", "0.05", "confidence level delta in (0,1)"},
         [](C& c, const std::string& v) { c.delta = parse_double("confidence.delta", v); }},
        {{"confidence.norm_bound", "1.0", "S: bound on ||theta*||; theta* is drawn on this sphere"},
         [](C& c, const std::string& v) { c.norm_bound = parse_double("confidence.norm_bound", v); }},
        {{"confidence.feature_bound", "1.0", "L: bound on ||phi||; must be >= 1 (features are unit vectors)"},
         [](C& c, const std::string& v) { c.feature_bound = parse_double("confidence.feature_bound", v); }},
        {{"confidence.schedule", "theory", "theory | constant radius schedule"},
         [](C& c, const std::string& v) {
             c.schedule = parse_enum<RadiusSchedule>("confidence.schedule", v,
                                                     {{"theory", RadiusSchedule::Theory},
                                                      {"constant", RadiusSchedule::Constant}});
         }},
        {{"confidence.beta", "1.0", "radius used when confidence.schedule = constant"},
         [](C& c, const std::string& v) { c.constant_radius = parse_double("confidence.beta", v); }},
        {{"follower.strategy", "hard-negative", "random | hard-negative | margin-adversarial"},
         [](C& c, const std::string& v) {
             c.follower = parse_enum<FollowerStrategy>(
                 "follower.strategy", v,
                 {{"random", FollowerStrategy::Random},
                  {"hard-negative", FollowerStrategy::HardNegative},
                  {"margin-adversarial", FollowerStrategy::MarginAdversarial}});
         }},
        {{"follower.k", "4", "number of challenging wrong candidates"},
         [](C& c, const std::string& v) { c.k = parse_u64("follower.k", v); }},
        {{"follower.pool_size", "10", "candidates sampled per round (M)"},
         [](C& c, const std::string& v) { c.pool_size = parse_u64("follower.pool_size", v); }},
        {{"debug.inverted_gate", "false", "non-canonical gate direction: query when Delta <= epsilon"},
         [](C& c, const std::string& v) { c.inverted_gate = parse_bool("debug.inverted_gate", v); }},
        {{"debug.corrupt_inverse", "0", "fault injection: add this to V_inv(0,0) after the first update"},
         [](C& c, const std::string& v) { c.corrupt_inverse = parse_double("debug.corrupt_inverse", v); }},
        {{"debug.audit_inverse", "false", "record max|V*V_inv - I| every round"},
         [](C& c, const std::string& v) { c.audit_inverse = parse_bool("debug.audit_inverse", v); }},
    };
    return specs;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& s : key_specs()) out.push_back(s.key);
        return out;
    }();
    return keys;
}

void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& s : key_specs()) {
        if (s.key.name == key) {
            s.apply(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

void ExperimentConfig::validate() const {
    const auto fail = [](const std::string& key, const std::string& why) {
        throw ConfigError("config key '" + key + "': " + why);
    };
    if (dim < 1) fail("dim", "must be >= 1");
    if (!(budget_fraction > 0.0 && budget_fraction <= 1.0)) fail("budget_fraction", "must lie in (0, 1]");
    if (!(c >= 0.0) || !std::isfinite(c)) fail("learner.c", "must be finite and >= 0");
    if (!(eta > 0.0) || !std::isfinite(eta)) fail("learner.eta", "must be finite and > 0");
    if (!(lambda_kl >= 0.0) || !std::isfinite(lambda_kl)) fail("learner.lambda_kl", "must be finite and >= 0");
    if (!(rho > 0.0)) fail("learner.rho", "must be > 0 (use 'inf' to disable clipping)");
    if (ema_alpha && !(*ema_alpha >= 0.0 && *ema_alpha <= 1.0)) fail("learner.ema_alpha", "must lie in [0, 1]");
    if (!(lambda_ridge > 0.0) || !std::isfinite(lambda_ridge)) fail("ridge.lambda", "must be finite and > 0");
    if (refactor_interval < 1) fail("ridge.refactor_interval", "must be >= 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail("truth.sigma", "must be finite and >= 0");
    if (!(delta > 0.0 && delta < 1.0)) fail("confidence.delta", "must lie in (0, 1)");
    if (!(norm_bound > 0.0) || !std::isfinite(norm_bound)) fail("confidence.norm_bound", "must be finite and > 0");
    if (!(feature_bound >= 1.0) || !std::isfinite(feature_bound))
        fail("confidence.feature_bound", "must be finite and >= 1 (features are unit vectors)");
    if (schedule == RadiusSchedule::Constant && !(constant_radius >= 0.0)) fail("confidence.beta", "must be >= 0");
    if (pool_size < 2) fail("follower.pool_size", "must be >= 2");
    if (follower != FollowerStrategy::Random) {
        if (k < 1) fail("follower.k", "must be >= 1 for hard-negative and margin-adversarial");
        if (pool_size < k + 1) fail("follower.pool_size", "must be >= follower.k + 1");
    }
    if (num_seeds < 1) fail("seeds", "must be >= 1");
}

double ExperimentConfig::effective_budget_fraction() const {
    return learner == LearnerKind::StackSL ? 1.0 : budget_fraction;
}

std::uint64_t ExperimentConfig::budget() const {
    const double exact = effective_budget_fraction() * static_cast<double>(horizon);
    double b = std::floor(exact);
    // 0.29 * 100 = 28.999999999999996; treat such products as the intended integer.
    if (b + 1.0 - exact < 1e-9 * std::max(1.0, exact)) b += 1.0;
    return std::min<std::uint64_t>(horizon, static_cast<std::uint64_t>(b));
}

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
    std::vector<std::uint64_t> out;
    out.reserve(num_seeds);
    for (std::size_t i = 0; i < num_seeds; ++i) out.push_back(derive_seed(master_seed, i));
    return out;
}

ConfidenceConfig ExperimentConfig::confidence() const {
    ConfidenceConfig cc;
    cc.sigma = sigma;
    cc.delta = delta;
    cc.feature_bound = feature_bound;
    cc.norm_bound = norm_bound;
    cc.lambda_ridge = lambda_ridge;
    cc.c = c;
    cc.schedule = schedule;
    cc.constant_radius = constant_radius;
    return cc;
}

FollowerConfig ExperimentConfig::follower_config() const {
    return {follower, k, pool_size, dim};
}

LearnerConfig ExperimentConfig::learner_config() const {
    LearnerConfig lc;
    lc.mode = mode;
    lc.eta = eta;
    lc.lambda_kl = lambda_kl;
    lc.rho = rho;
    lc.ema_alpha = ema_alpha;
    lc.budget = budget();
    lc.query_probability = effective_budget_fraction();
    lc.refactor_interval = refactor_interval;
    lc.confidence = confidence();
    lc.inverted_gate = inverted_gate;
    lc.audit_inverse = audit_inverse;
    return lc;
}

ConfigGrid parse_config_text(const std::string& text) {
    ConfigGrid grid;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(content).substr(0, eq));
        const std::string rest = trim(std::string_view(content).substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        std::vector<std::string> values;
        std::string_view sv(rest);
        while (true) {
            const auto comma = sv.find(',');
            values.push_back(trim(sv.substr(0, comma)));
            if (values.back().empty())
                throw ConfigError("config key '" + key + "': empty value");
            if (comma == std::string_view::npos) break;
            sv.remove_prefix(comma + 1);
        }
        // Unknown keys are rejected before any run starts.
        ExperimentConfig probe;
        for (const auto& v : values) apply_config_value(probe, key, v);
        for (const auto& [k, _] : grid)
            if (k == key) throw ConfigError("config key '" + key + "' given twice");
        grid.emplace_back(key, std::move(values));
    }
    return grid;
}

ConfigGrid read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::vector<ExperimentConfig> expand_grid(const ConfigGrid& grid) {
    std::vector<ExperimentConfig> out{ExperimentConfig{}};
    for (const auto& [key, values] : grid) {
        std::vector<ExperimentConfig> next;
        next.reserve(out.size() * values.size());
        for (const auto& base : out) {
            for (const auto& v : values) {
                ExperimentConfig c = base;
                apply_config_value(c, key, v);
                next.push_back(std::move(c));
            }
        }
        out = std::move(next);
    }
    for (const auto& c : out) c.validate();
    return out;
}

ExperimentConfig config_from_grid(const ConfigGrid& grid) {
    for (const auto& [key, values] : grid)
        if (values.size() != 1)
            throw ConfigError("config key '" + key + "' has " + std::to_string(values.size()) +
                              " values; only 'sweep' accepts lists");
    return expand_grid(grid).front();
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace stacksl
