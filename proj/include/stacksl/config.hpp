#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stacksl/confidence.hpp"
#include "stacksl/environment.hpp"
#include "stacksl/learners.hpp"

namespace stacksl {

// Declarative description of one run family (one config, several seeds).
struct ExperimentConfig {
    std::uint64_t horizon = 20000;  // T
    std::size_t dim = 20;           // d
    double budget_fraction = 0.1;   // B = floor(beta * T)

    LearnerKind learner = LearnerKind::LLF;
    LearnerMode mode = LearnerMode::RidgeUcb;
    double c = 1.0;
    double eta = 0.05;
    double lambda_kl = 0.7;
    double rho = 5.0;
    std::optional<double> ema_alpha;

    double lambda_ridge = 1.0;
    std::size_t refactor_interval = kDefaultRefactorInterval;

    double sigma = 0.1;
    NoiseKind noise = NoiseKind::Gaussian;
    double delta = 0.05;
    double norm_bound = 1.0;     // S
    double feature_bound = 1.0;  // L
    RadiusSchedule schedule = RadiusSchedule::Theory;
    double constant_radius = 1.0;

    FollowerStrategy follower = FollowerStrategy::HardNegative;
    std::size_t k = 4;
    std::size_t pool_size = 10;

    std::uint64_t master_seed = 0;
    std::size_t num_seeds = 1;

    bool inverted_gate = false;
    double corrupt_inverse = 0.0;
    bool audit_inverse = false;

    // Throws ConfigError naming the offending key.
    void validate() const;

    // StackSL is full feedback and always runs with B = T.
    double effective_budget_fraction() const;
    std::uint64_t budget() const;
    // derive_seed(master_seed, i) for i < num_seeds
    std::vector<std::uint64_t> seeds() const;

    ConfidenceConfig confidence() const;
    FollowerConfig follower_config() const;
    LearnerConfig learner_config() const;
};

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string doc;
};

// Every accepted key with its default, in documentation order.
const std::vector<ConfigKey>& config_keys();

// Applies one key=value; throws ConfigError for unknown keys or unparsable values.
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Raw parse of the flat `key = value` format. `#` starts a comment. A value may be a
// comma-separated list, which makes the key a sweep axis.
using ConfigGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;
ConfigGrid parse_config_text(const std::string& text);
ConfigGrid read_config_file(const std::string& path);

// Cartesian product over list-valued keys, first key varying slowest. Each result is validated.
std::vector<ExperimentConfig> expand_grid(const ConfigGrid& grid);

// Requires every key to be single-valued.
ExperimentConfig config_from_grid(const ConfigGrid& grid);

std::string format_double(double v);

}  // namespace stacksl
