#include "stacksl/config.hpp"
#include "stacksl/learners.hpp"

namespace stacksl {

Trace run_episode(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();

    Rng truth_rng = make_stream(seed, Stream::Truth);
    const TruthModel truth =
        TruthModel::sample(truth_rng, config.dim, config.sigma, config.noise, config.norm_bound);
    Rng pool_rng = make_stream(seed, Stream::Pool);
    LearnerStreams streams{make_stream(seed, Stream::Noise), make_stream(seed, Stream::Gate)};
    LearnerState state(config.dim, config.learner_config());
    const FollowerConfig follower = config.follower_config();

    const auto round = [&](const CandidateSet& cands) {
        switch (config.learner) {
            case LearnerKind::StackSL: return stacksl_round(state, cands, truth, streams);
            case LearnerKind::LLF: return llf_stacksl_round(state, cands, truth, streams);
            case LearnerKind::RandomGate: return random_gate_round(state, cands, truth, streams);
        }
        return stacksl_round(state, cands, truth, streams);
    };

    Trace trace;
    trace.reserve(config.horizon);
    for (std::uint64_t t = 0; t < config.horizon; ++t) {
        const Matrix pool = sample_pool(pool_rng, follower);
        const CandidateSet cands =
            follower_best_respond(pool, state.params.theta, truth, follower, pool_rng);
        trace.push_back(round(cands));
        if (t == 0 && config.corrupt_inverse != 0.0)
            state.gram.debug_corrupt_inverse(config.corrupt_inverse);
    }
    return trace;
}

}  // namespace stacksl
