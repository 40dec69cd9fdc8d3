#pragma once

#include <cstddef>

#include "stacksl/model.hpp"
#include "stacksl/rng.hpp"

namespace stacksl {

enum class NoiseKind { Gaussian, BoundedUniform };

class TruthModel {
public:
    // Throws ConfigError if ||theta_star|| exceeds norm_bound or sigma < 0.
    TruthModel(Vector theta_star, double sigma, NoiseKind kind, double norm_bound);

    // theta_star drawn uniformly on the sphere of radius norm_bound.
    static TruthModel sample(Rng& rng, std::size_t d, double sigma, NoiseKind kind,
                             double norm_bound);

    const Vector& theta_star() const { return theta_star_; }
    double sigma() const { return sigma_; }
    NoiseKind noise_kind() const { return kind_; }
    double true_score(const Vector& phi) const { return theta_star_.dot(phi); }

private:
    Vector theta_star_;
    double sigma_;
    NoiseKind kind_;
};

// How the follower builds C_t from a sampled pool. These are one reading of an
// adaptive adversary; the follower is a fixed strategy, not an equilibrium solver.
enum class FollowerStrategy {
    Random,             // the whole pool
    HardNegative,       // true best + k wrong candidates the learner scores highest
    MarginAdversarial,  // true best + k wrong candidates closest to it in learner score
};

struct FollowerConfig {
    FollowerStrategy strategy = FollowerStrategy::HardNegative;
    std::size_t k = 4;
    std::size_t pool_size = 10;
    std::size_t dim = 20;

    void validate() const;  // throws ConfigError
};

// pool_size vectors i.i.d. uniform on the unit sphere, one per row.
Matrix sample_pool(Rng& rng, const FollowerConfig& cfg);

// Builds the round's candidate set in response to the learner's current theta.
// The returned order is shuffled with `rng`; true_best_index refers to the shuffled order.
CandidateSet follower_best_respond(const Matrix& pool, const Vector& learner_theta,
                                   const TruthModel& truth, const FollowerConfig& cfg, Rng& rng);

// argmax_i theta*^T phi_i, lowest index on exact ties.
std::size_t oracle_label(const CandidateSet& cands, const TruthModel& truth);
std::size_t argmax_lowest(const Vector& values);

// theta*^T phi + eta, eta ~ N(0, sigma^2) or U[-sigma sqrt3, sigma sqrt3].
double noisy_feedback(const Vector& phi, const TruthModel& truth, Rng& rng);

}  // namespace stacksl
