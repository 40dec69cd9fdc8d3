#include <doctest.h>

#include <cmath>
#include <numeric>

#include "stacksl/config.hpp"
#include "stacksl/errors.hpp"
#include "stacksl/harness.hpp"
#include "stacksl/learners.hpp"

using namespace stacksl;

namespace {

ExperimentConfig small_config(LearnerKind kind, LearnerMode mode) {
    ExperimentConfig cfg;
    cfg.learner = kind;
    cfg.mode = mode;
    cfg.horizon = 600;
    cfg.dim = 5;
    return cfg;
}

CandidateSet random_set(Rng& rng, std::size_t d, std::size_t n, const TruthModel& truth) {
    FollowerConfig fc{FollowerStrategy::Random, 0, n, d};
    CandidateSet cs;
    cs.features = sample_pool(rng, fc);
    cs.true_best_index = oracle_label(cs, truth);
    return cs;
}

double window_regret(const Trace& tr, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += tr[i].inst_regret;
    return s;
}

}  // namespace

TEST_CASE("zero radius with the true parameter has zero regret") {
    Rng rng(7);
    const auto truth = TruthModel::sample(rng, 6, 0.0, NoiseKind::Gaussian, 1.0);
    LearnerConfig lc;
    lc.confidence.schedule = RadiusSchedule::Constant;
    lc.confidence.constant_radius = 0.0;
    lc.budget = 0;
    LearnerState state(6, lc);
    state.params.theta = truth.theta_star();
    LearnerStreams streams{Rng(1), Rng(2)};
    for (int t = 0; t < 200; ++t) {
        const auto cs = random_set(rng, 6, 8, truth);
        const auto rec = llf_stacksl_round(state, cs, truth, streams);
        CHECK(std::abs(rec.inst_regret) <= 1e-15);
        CHECK(rec.chosen == cs.true_best_index);
        CHECK_FALSE(rec.queried);
    }
}

TEST_CASE("fresh state breaks UCB ties toward the lowest index") {
    Rng rng(3);
    const auto truth = TruthModel::sample(rng, 4, 0.0, NoiseKind::Gaussian, 1.0);
    LearnerState state(4, LearnerConfig{});
    LearnerStreams streams{Rng(1), Rng(2)};
    const auto cs = random_set(rng, 4, 5, truth);
    const auto rec = stacksl_round(state, cs, truth, streams);
    CHECK(rec.chosen == 0);
    CHECK(rec.t == 1);
    CHECK(rec.queried);
    CHECK(rec.queries == 1);
}

TEST_CASE("ridge-ucb regret flattens and the estimate matches a dense solve") {
    Rng rng(11);
    const std::size_t d = 5;
    const auto truth = TruthModel::sample(rng, d, 0.0, NoiseKind::Gaussian, 1.0);
    LearnerConfig lc;
    lc.budget = 500;
    LearnerState state(d, lc);
    LearnerStreams streams{Rng(1), Rng(2)};
    Matrix V = Matrix::Identity(d, d);
    Vector b = Vector::Zero(d);
    Trace tr;
    for (int t = 0; t < 500; ++t) {
        const auto cs = random_set(rng, d, 10, truth);
        tr.push_back(stacksl_round(state, cs, truth, streams));
        const Vector phi = cs.feature(tr.back().chosen);
        V += phi * phi.transpose();
        b += phi * truth.true_score(phi);
    }
    CHECK(window_regret(tr, 400, 500) <= 0.1 * window_regret(tr, 0, 100));
    const Vector dense = V.ldlt().solve(b);
    CHECK((state.params.theta - dense).norm() <= 1e-8);
}

TEST_CASE("llf with c = 0 and B = T reproduces stacksl") {
    for (auto mode : {LearnerMode::RidgeUcb, LearnerMode::SgdCe}) {
        CAPTURE(to_string(mode));
        auto full = small_config(LearnerKind::StackSL, mode);
        auto llf = small_config(LearnerKind::LLF, mode);
        llf.c = 0.0;
        llf.budget_fraction = 1.0;
        const auto a = run_episode(full, 99);
        const auto b = run_episode(llf, 99);
        REQUIRE(a.size() == b.size());
        CHECK(a == b);
    }
}

TEST_CASE("zero budget never queries") {
    auto cfg = small_config(LearnerKind::LLF, LearnerMode::RidgeUcb);
    cfg.budget_fraction = 1e-4;  // floor(0.06) = 0
    REQUIRE(cfg.budget() == 0);
    const auto tr = run_episode(cfg, 5);
    for (const auto& r : tr) CHECK_FALSE(r.queried);
    CHECK(tr.back().queries == 0);
}

TEST_CASE("random gate extremes") {
    auto cfg = small_config(LearnerKind::RandomGate, LearnerMode::RidgeUcb);
    cfg.budget_fraction = 1.0;
    const auto all = run_episode(cfg, 5);
    for (const auto& r : all) CHECK(r.queried);

    cfg.budget_fraction = 0.25;
    const auto part = run_episode(cfg, 5);
    const auto q = part.back().queries;
    CHECK(q <= cfg.budget());
    CHECK(q > 100);
}

TEST_CASE("budget compliance across learners and modes") {
    for (auto kind : {LearnerKind::LLF, LearnerKind::RandomGate})
        for (auto mode : {LearnerMode::RidgeUcb, LearnerMode::SgdCe})
            for (double beta : {0.05, 0.1, 0.33}) {
                auto cfg = small_config(kind, mode);
                cfg.budget_fraction = beta;
                const auto tr = run_episode(cfg, 17);
                std::uint64_t q = 0;
                for (const auto& r : tr) {
                    q += r.queried ? 1 : 0;
                    CHECK(r.queries == q);
                }
                CHECK(q <= cfg.budget());
                CHECK(static_cast<double>(q) / cfg.horizon <= beta + 1.0 / cfg.horizon);
            }
}

TEST_CASE("clipped losses stay in [0, rho]") {
    auto cfg = small_config(LearnerKind::StackSL, LearnerMode::SgdCe);
    cfg.eta = 5.0;
    cfg.rho = 1.0;
    const auto tr = run_episode(cfg, 21);
    for (const auto& r : tr) {
        REQUIRE(r.clipped_loss.has_value());
        CHECK(*r.clipped_loss >= 0.0);
        CHECK(*r.clipped_loss <= 1.0);
        CHECK(*r.clipped_loss == std::min(*r.raw_loss, 1.0));
    }
}

TEST_CASE("empty horizon and determinism") {
    auto cfg = small_config(LearnerKind::LLF, LearnerMode::RidgeUcb);
    cfg.horizon = 0;
    CHECK(run_episode(cfg, 1).empty());
    cfg.horizon = 300;
    CHECK(run_episode(cfg, 1) == run_episode(cfg, 1));
    CHECK_FALSE(run_episode(cfg, 1) == run_episode(cfg, 2));
}

TEST_CASE("ridge skip rounds leave the parameter unchanged") {
    Rng rng(8);
    const std::size_t d = 4;
    const auto truth = TruthModel::sample(rng, d, 0.1, NoiseKind::Gaussian, 1.0);
    LearnerConfig lc;
    lc.budget = 20;
    LearnerState state(d, lc);
    LearnerStreams streams{Rng(1), Rng(2)};
    for (int t = 0; t < 300; ++t) {
        const Vector before = state.params.theta;
        const auto rec = llf_stacksl_round(state, random_set(rng, d, 6, truth), truth, streams);
        if (!rec.queried) CHECK(state.params.theta == before);
    }
    CHECK(state.queries == 20);
}

TEST_CASE("sgd-ce regret decreases over the episode") {
    auto cfg = small_config(LearnerKind::StackSL, LearnerMode::SgdCe);
    cfg.horizon = 4000;
    cfg.eta = 0.5;
    const auto tr = run_episode(cfg, 4);
    CHECK(window_regret(tr, 3000, 4000) < window_regret(tr, 0, 1000));
}

TEST_CASE("mismatched dimensions are contract violations") {
    Rng rng(1);
    const auto truth = TruthModel::sample(rng, 3, 0.0, NoiseKind::Gaussian, 1.0);
    LearnerState state(4, LearnerConfig{});
    LearnerStreams streams{Rng(1), Rng(2)};
    CHECK_THROWS_AS(stacksl_round(state, random_set(rng, 3, 4, truth), truth, streams),
                    ContractViolation);
}
