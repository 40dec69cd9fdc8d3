#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "stacksl/confidence.hpp"
#include "stacksl/environment.hpp"
#include "stacksl/linalg.hpp"
#include "stacksl/model.hpp"
#include "stacksl/rng.hpp"

namespace stacksl {

enum class LearnerKind { StackSL, LLF, RandomGate };
enum class LearnerMode { SgdCe, RidgeUcb };

std::string_view to_string(LearnerKind kind);
std::string_view to_string(LearnerMode mode);

struct LearnerConfig {
    LearnerMode mode = LearnerMode::RidgeUcb;
    double eta = 0.05;
    double lambda_kl = 0.7;
    double rho = 5.0;
    // Reference policy: previous iterate when unset, otherwise EMA with this alpha.
    std::optional<double> ema_alpha;
    std::uint64_t budget = 0;       // B
    double query_probability = 0.0;  // random-gate Bernoulli rate
    std::size_t refactor_interval = kDefaultRefactorInterval;
    ConfidenceConfig confidence;
    bool inverted_gate = false;      // debug only
    bool audit_inverse = false;      // record V*V_inv - I residual each round
};

struct LearnerState {
    LearnerState(std::size_t d, LearnerConfig config);

    LearnerConfig config;
    Params params;
    Params ref_params;
    // Confidence tracking: every round, chosen action.
    GramState gram;
    // Ridge estimator over queried rounds only (ridge-ucb mode).
    GramState estimator;
    std::uint64_t queries = 0;
};

struct RoundRecord {
    std::uint64_t t = 0;  // 1-based
    std::size_t chosen = 0;
    std::size_t optimal = 0;
    bool queried = false;
    std::uint64_t queries = 0;  // q after this round
    double width = 0.0;         // Delta_t
    double threshold = 0.0;     // epsilon_t
    std::optional<double> raw_loss;
    std::optional<double> clipped_loss;
    double inst_regret = 0.0;

    // Audit data; not part of the detail CSV.
    double chosen_norm_sq = 0.0;  // ||phi_chosen||^2 in V_{t-1}^{-1}
    std::size_t set_size = 0;
    std::size_t uncovered = 0;    // candidates whose true score fell outside [LCB, UCB]
    double inverse_residual = 0.0;

    bool operator==(const RoundRecord&) const = default;
};

using Trace = std::vector<RoundRecord>;

// Generator streams a learner consumes during a round.
struct LearnerStreams {
    Rng noise;
    Rng gate;
};

// Full feedback: UCB selection, label every round.
RoundRecord stacksl_round(LearnerState& state, const CandidateSet& cands,
                          const TruthModel& truth, LearnerStreams& streams);

// Budgeted: queries only when Delta_t > c / sqrt(1 + q) and q < B.
RoundRecord llf_stacksl_round(LearnerState& state, const CandidateSet& cands,
                              const TruthModel& truth, LearnerStreams& streams);

// Baseline: Bernoulli(query_probability) gate intersected with q < B.
RoundRecord random_gate_round(LearnerState& state, const CandidateSet& cands,
                              const TruthModel& truth, LearnerStreams& streams);

struct ExperimentConfig;

// Runs one seeded episode. Output is a pure function of (config, seed).
Trace run_episode(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace stacksl
