#include "stacksl/learners.hpp"

#include <cmath>
#include <utility>

#include "stacksl/errors.hpp"

namespace stacksl {

std::string_view to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::StackSL: return "stacksl";
        case LearnerKind::LLF: return "llf";
        case LearnerKind::RandomGate: return "random-gate";
    }
    return "?";
}

std::string_view to_string(LearnerMode mode) {
    return mode == LearnerMode::SgdCe ? "sgd-ce" : "ridge-ucb";
}

LearnerState::LearnerState(std::size_t d, LearnerConfig cfg)
    : config(std::move(cfg)),
      params(Params::zeros(d, config.confidence.norm_bound)),
      ref_params(params),
      gram(d, config.confidence.lambda_ridge, config.refactor_interval),
      estimator(d, config.confidence.lambda_ridge, config.refactor_interval) {}

namespace {

struct Selection {
    std::size_t chosen = 0;
    double width = 0.0;
    double chosen_norm_sq = 0.0;
    std::size_t uncovered = 0;
};

// UCB/LCB over the set using the pre-update Gram (round index t = gram.rounds()).
Selection select(const LearnerState& state, const CandidateSet& cands, const TruthModel& truth) {
    expects(cands.size() >= 2, "learner round: candidate set must hold at least two candidates");
    expects(cands.dim() == state.params.dim(), "learner round: feature dimension mismatch");

    const double beta = radius(state.config.confidence, state.gram.rounds(), cands.dim());
    const Vector s = scores(state.params, cands);
    const Vector truth_scores = cands.features * truth.theta_star();
    const Matrix& vinv = state.gram.gram_inverse();

    Selection sel;
    double best_ucb = 0.0;
    double max_ucb = 0.0;
    double min_lcb = 0.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto row = cands.features.row(static_cast<Eigen::Index>(i));
        const double w2 = std::max(0.0, row.dot(vinv * row.transpose()));
        const double bonus = beta * std::sqrt(w2);
        const double si = s(static_cast<Eigen::Index>(i));
        const double u = si + bonus;
        const double l = si - bonus;
        const double ts = truth_scores(static_cast<Eigen::Index>(i));
        if (ts > u || ts < l) ++sel.uncovered;
        if (i == 0 || u > best_ucb) {
            best_ucb = u;
            sel.chosen = i;
            sel.chosen_norm_sq = w2;
        }
        max_ucb = i == 0 ? u : std::max(max_ucb, u);
        min_lcb = i == 0 ? l : std::min(min_lcb, l);
    }
    sel.width = max_ucb - min_lcb;
    return sel;
}

RoundRecord begin_record(const LearnerState& state, const CandidateSet& cands, const Selection& sel,
                         std::size_t optimal) {
    RoundRecord rec;
    rec.t = state.gram.rounds() + 1;
    rec.chosen = sel.chosen;
    rec.optimal = optimal;
    rec.width = sel.width;
    rec.chosen_norm_sq = sel.chosen_norm_sq;
    rec.set_size = cands.size();
    rec.uncovered = sel.uncovered;
    return rec;
}

void supervised_update(LearnerState& state, const CandidateSet& cands, const TruthModel& truth,
                       const Vector& phi, LearnerStreams& streams, RoundRecord& rec) {
    if (state.config.mode == LearnerMode::RidgeUcb) {
        const double y = noisy_feedback(phi, truth, streams.noise);
        state.estimator.update(phi);
        state.estimator.add_observation(phi, y);
        state.params.theta = state.estimator.ridge_estimate();
    } else {
        const std::size_t star = oracle_label(cands, truth);
        const double raw = ce_loss(state.params, cands, star);
        rec.raw_loss = raw;
        rec.clipped_loss = clip_loss(raw, state.config.rho);
        const Vector grad = loss_gradient(state.params, state.ref_params, cands, star,
                                          state.config.lambda_kl, state.config.rho);
        state.params = sgd_step(state.params, grad, state.config.eta);
    }
    ++state.queries;
    rec.queried = true;
}

void skip_update(LearnerState& state, const CandidateSet& cands) {
    if (state.config.mode != LearnerMode::SgdCe || state.config.lambda_kl == 0.0) return;
    const Vector grad = state.config.lambda_kl * kl_gradient(state.params, state.ref_params, cands);
    state.params = sgd_step(state.params, grad, state.config.eta);
}

void finish_round(LearnerState& state, const Vector& phi, const TruthModel& truth,
                  const CandidateSet& cands, RoundRecord& rec) {
    state.gram.update(phi);
    if (state.config.audit_inverse) rec.inverse_residual = state.gram.inverse_residual();
    if (state.config.ema_alpha)
        state.ref_params = ema_update(state.ref_params, state.params, *state.config.ema_alpha);
    else
        state.ref_params = state.params;
    rec.queries = state.queries;
    rec.inst_regret = truth.true_score(cands.feature(rec.optimal)) - truth.true_score(phi);
}

template <typename Gate>
RoundRecord gated_round(LearnerState& state, const CandidateSet& cands, const TruthModel& truth,
                        LearnerStreams& streams, Gate&& decide) {
    const Selection sel = select(state, cands, truth);
    RoundRecord rec = begin_record(state, cands, sel, cands.true_best_index);
    const Vector phi = cands.feature(sel.chosen);
    if (decide(sel, rec))
        supervised_update(state, cands, truth, phi, streams, rec);
    else
        skip_update(state, cands);
    finish_round(state, phi, truth, cands, rec);
    return rec;
}

}  // namespace

RoundRecord stacksl_round(LearnerState& state, const CandidateSet& cands, const TruthModel& truth,
                          LearnerStreams& streams) {
    return gated_round(state, cands, truth, streams, [](const Selection&, RoundRecord& rec) {
        rec.threshold = 0.0;
        return true;
    });
}

RoundRecord llf_stacksl_round(LearnerState& state, const CandidateSet& cands,
                              const TruthModel& truth, LearnerStreams& streams) {
    return gated_round(state, cands, truth, streams, [&](const Selection& sel, RoundRecord& rec) {
        rec.threshold = llf_threshold(state.config.confidence.c, state.queries);
        const GateDecision d =
            state.config.inverted_gate
                ? gate_inverted_debug(sel.width, rec.threshold, state.queries, state.config.budget)
                : gate(sel.width, rec.threshold, state.queries, state.config.budget);
        return d.query();
    });
}

RoundRecord random_gate_round(LearnerState& state, const CandidateSet& cands,
                              const TruthModel& truth, LearnerStreams& streams) {
    return gated_round(state, cands, truth, streams, [&](const Selection&, RoundRecord& rec) {
        rec.threshold = 0.0;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        // One draw per round regardless of budget state keeps the gate stream aligned.
        const bool coin = u(streams.gate) < state.config.query_probability;
        return coin && state.queries < state.config.budget;
    });
}

}  // namespace stacksl
