#include "stacksl/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stacksl/errors.hpp"

namespace stacksl {

void ConfidenceConfig::validate() const {
    if (!(sigma >= 0.0)) throw ConfigError("truth.sigma must be >= 0");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("confidence.delta must lie in (0, 1)");
    if (!(feature_bound > 0.0)) throw ConfigError("confidence.feature_bound must be > 0");
    if (!(norm_bound > 0.0)) throw ConfigError("confidence.norm_bound must be > 0");
    if (!(lambda_ridge > 0.0)) throw ConfigError("ridge.lambda must be > 0");
    if (!(c >= 0.0)) throw ConfigError("learner.c must be >= 0");
    if (schedule == RadiusSchedule::Constant && !(constant_radius >= 0.0))
        throw ConfigError("confidence.beta must be >= 0");
}

double radius(const ConfidenceConfig& cfg, std::uint64_t t, std::size_t d) {
    if (cfg.schedule == RadiusSchedule::Constant) return cfg.constant_radius;
    const double dd = static_cast<double>(d);
    const double L2 = cfg.feature_bound * cfg.feature_bound;
    const double growth = dd * std::log1p(static_cast<double>(t) * L2 / (cfg.lambda_ridge * dd));
    const double conf = 2.0 * std::log(1.0 / cfg.delta);
    return cfg.sigma * std::sqrt(growth + conf) + std::sqrt(cfg.lambda_ridge) * cfg.norm_bound;
}

double ucb(const Vector& theta, const GramState& gram, const Vector& phi, double beta_t) {
    expects(theta.size() == phi.size(), "ucb: dimension mismatch");
    return theta.dot(phi) + beta_t * gram.mahalanobis_norm(phi);
}

double lcb(const Vector& theta, const GramState& gram, const Vector& phi, double beta_t) {
    expects(theta.size() == phi.size(), "lcb: dimension mismatch");
    return theta.dot(phi) - beta_t * gram.mahalanobis_norm(phi);
}

double pool_width(std::span<const double> ucbs, std::span<const double> lcbs) {
    expects(!ucbs.empty(), "pool_width: empty candidate set");
    expects(ucbs.size() == lcbs.size(), "pool_width: ucb/lcb length mismatch");
    const double hi = *std::max_element(ucbs.begin(), ucbs.end());
    const double lo = *std::min_element(lcbs.begin(), lcbs.end());
    return hi - lo;
}

double llf_threshold(double c, std::uint64_t queries) {
    return c / std::sqrt(1.0 + static_cast<double>(queries));
}

GateDecision gate(double width, double threshold, std::uint64_t queries, std::uint64_t budget) {
    if (queries > budget)
        throw ContractViolation("gate: query counter " + std::to_string(queries) +
                                " exceeds budget " + std::to_string(budget));
    const bool open = width > threshold && queries < budget;
    return {open ? GateAction::Query : GateAction::Skip, width, threshold};
}

GateDecision gate_inverted_debug(double width, double threshold, std::uint64_t queries,
                                 std::uint64_t budget) {
    if (queries > budget) throw ContractViolation("gate: query counter exceeds budget");
    const bool open = width <= threshold && queries < budget;
    return {open ? GateAction::Query : GateAction::Skip, width, threshold};
}

}  // namespace stacksl
