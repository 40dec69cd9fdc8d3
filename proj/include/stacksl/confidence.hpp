#pragma once

#include <cstdint>
#include <span>

#include "stacksl/linalg.hpp"

namespace stacksl {

enum class RadiusSchedule { Theory, Constant };

struct ConfidenceConfig {
    double sigma = 0.1;
    double delta = 0.05;
    double feature_bound = 1.0;  // L
    double norm_bound = 1.0;     // S
    double lambda_ridge = 1.0;
    double c = 1.0;
    RadiusSchedule schedule = RadiusSchedule::Theory;
    double constant_radius = 1.0;  // used when schedule == Constant

    void validate() const;  // throws ConfigError
};

// beta_t = sigma * sqrt(d log(1 + t L^2 / (lambda d)) + 2 log(1/delta)) + sqrt(lambda) S,
// or the configured constant.
double radius(const ConfidenceConfig& cfg, std::uint64_t t, std::size_t d);

double ucb(const Vector& theta, const GramState& gram, const Vector& phi, double beta_t);
double lcb(const Vector& theta, const GramState& gram, const Vector& phi, double beta_t);

// Delta_t = max UCB - min LCB
double pool_width(std::span<const double> ucbs, std::span<const double> lcbs);

// epsilon_t = c / sqrt(1 + q)
double llf_threshold(double c, std::uint64_t queries);

enum class GateAction { Query, Skip };

struct GateDecision {
    GateAction action;
    double width;
    double threshold;
    bool query() const { return action == GateAction::Query; }
};

// Query iff width > threshold and q < budget. Ties skip.
GateDecision gate(double width, double threshold, std::uint64_t queries, std::uint64_t budget);

// Debug only: queries iff width <= threshold and q < budget.
GateDecision gate_inverted_debug(double width, double threshold, std::uint64_t queries,
                                 std::uint64_t budget);

}  // namespace stacksl
