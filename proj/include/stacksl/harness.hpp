#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stacksl/config.hpp"
#include "stacksl/learners.hpp"

namespace stacksl {

struct RegretSeries {
    double total = 0.0;
    std::vector<double> cumulative;  // running prefix sums
};

RegretSeries compute_regret(const Trace& trace);

// Least-squares slope of log R(t) against log t over rounds t_lo..t_hi (1-based, inclusive).
// Rounds with zero cumulative regret are skipped.
double loglog_slope(const std::vector<double>& cumulative, std::uint64_t t_lo, std::uint64_t t_hi);

// sum_t ||phi_t||^2_{V_{t-1}^{-1}} over the chosen actions
double elliptical_potential_sum(const Trace& trace);
// 2 d log(1 + T L^2 / (lambda d))
double elliptical_potential_bound(std::size_t d, std::uint64_t rounds, double feature_bound,
                                  double lambda_ridge);

struct SummaryRow {
    std::string learner;
    double beta = 0.0;
    double c = 0.0;
    double lambda_kl = 0.0;
    std::string mode;
    std::string seed;  // decimal seed, or "aggregate" / "aggregate_se"
    double regret_per_T = 0.0;
    double queries_per_T = 0.0;
    std::optional<double> mean_raw_loss;
    std::optional<double> max_raw_loss;
    std::optional<double> mean_clipped_loss;
    std::optional<double> max_clipped_loss;
    double wall_time_ms = 0.0;
};

SummaryRow summarize(const ExperimentConfig& config, std::uint64_t seed, const Trace& trace,
                     double wall_time_ms);

// Median row and standard-error-of-the-mean row over one config's seeds.
struct AggregateRow {
    std::size_t config_index = 0;
    SummaryRow median;
    SummaryRow std_error;
};

AggregateRow aggregate(std::size_t config_index, const std::vector<SummaryRow>& rows);

struct RunResult {
    std::size_t config_index = 0;
    std::size_t seed_index = 0;
    std::uint64_t run_id = 0;
    std::uint64_t seed = 0;
    SummaryRow summary;
    Trace trace;  // empty unless SweepOptions::keep_traces
};

struct SweepOptions {
    std::size_t workers = 1;
    bool keep_traces = false;
};

struct SweepResult {
    std::vector<RunResult> runs;            // ordered by (config index, seed index)
    std::vector<AggregateRow> aggregates;   // one per config
};

class SweepError : public std::runtime_error {
public:
    SweepError(std::size_t config_index, std::uint64_t seed, const std::string& what);
    std::size_t config_index;
    std::uint64_t seed;
};

// Runs every (config, seed) pair, possibly concurrently. Output order and values do not
// depend on the worker count.
SweepResult sweep(const std::vector<ExperimentConfig>& grid, const SweepOptions& options = {});

struct ClipStudyResult {
    SummaryRow with_clip;
    SummaryRow without_clip;
    double clip_fraction = 0.0;        // share of queried rounds with raw loss >= rho (clipped run)
    std::uint64_t rounds_over_rho = 0;
};

// Same seeds run with the configured rho and with clipping disabled; loss statistics are
// pooled over all queried rounds of all seeds. Requires sgd-ce mode.
ClipStudyResult clip_study(const ExperimentConfig& config, std::size_t workers = 1);

struct CalibrationResult {
    double c = 0.0;
    std::uint64_t target = 0;
    std::uint64_t realized_queries = 0;
    bool converged = false;  // false: bracket failure, `c` is the best value found
    int evaluations = 0;
    double warmup_median_width = 0.0;
};

// Bisection on the LLF scale c so that realized queries land within 10% of the target.
CalibrationResult calibrate_c(const ExperimentConfig& config, std::uint64_t target_queries,
                              std::uint64_t warmup_rounds, double kappa = 1.0);

struct InvariantCheck {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double limit = 0.0;
    std::string detail;
};

struct InvariantReport {
    std::vector<InvariantCheck> checks;
    bool all_passed() const;
};

struct ValidateOptions {
    std::size_t coverage_seeds = 20;
    std::uint64_t coverage_horizon = 5000;
    std::uint64_t reduction_horizon = 2000;
    std::size_t gradient_instances = 100;
    std::size_t workers = 1;
};

InvariantReport validate_invariants(const ExperimentConfig& config, const ValidateOptions& options = {});

// Max relative error of loss_gradient against central differences over random instances
// (d = 5, |C| = 4, rho kept at least 1e-3 away from the raw loss).
double gradient_check(std::uint64_t seed, std::size_t instances, double step = 1e-5);

}  // namespace stacksl
