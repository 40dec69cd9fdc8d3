#pragma once

#include <cstddef>

#include "stacksl/linalg.hpp"

namespace stacksl {

struct Params {
    Vector theta;
    // Declared bound on ||theta*||; only the confidence radius reads it.
    double norm_bound = 1.0;

    static Params zeros(std::size_t d, double norm_bound = 1.0) {
        return {Vector::Zero(static_cast<Eigen::Index>(d)), norm_bound};
    }
    std::size_t dim() const { return static_cast<std::size_t>(theta.size()); }
};

// One round's candidates. Row i of `features` is phi(z, x_i).
// `true_best_index` is environment-side ground truth; learners must not read it
// except through oracle_label on a queried round.
struct CandidateSet {
    Matrix features;
    std::size_t true_best_index = 0;

    std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
    Vector feature(std::size_t i) const { return features.row(static_cast<Eigen::Index>(i)).transpose(); }
};

double score(const Params& params, const Vector& phi);
Vector scores(const Params& params, const CandidateSet& cands);

// Max-shifted softmax of the candidate scores.
Vector softmax(const Vector& logits);
Vector log_softmax(const Vector& logits);
Vector softmax_policy(const Params& params, const CandidateSet& cands);

// -log pi_theta(star)
double ce_loss(const Params& params, const CandidateSet& cands, std::size_t star);

// min(max(loss, 0), rho). rho may be +infinity (clipping disabled).
double clip_loss(double loss, double rho);

// KL(pi_theta || pi_ref) over the candidate set.
double kl_divergence(const Params& params, const Params& ref, const CandidateSet& cands);

// d/dtheta KL(pi_theta || pi_ref) = sum_j p_j (log p_j - log r_j - KL) phi_j
Vector kl_gradient(const Params& params, const Params& ref, const CandidateSet& cands);

// Gradient of clip(CE) + lambda_kl * KL. The clipped CE contributes zero on both
// plateaus (raw loss <= 0 or raw loss >= rho); the KL term always contributes.
Vector loss_gradient(const Params& params, const Params& ref, const CandidateSet& cands,
                     std::size_t star, double lambda_kl, double rho);

Params sgd_step(const Params& params, const Vector& grad, double eta);

// ref <- alpha * ref + (1 - alpha) * theta
Params ema_update(const Params& ref, const Params& params, double alpha);

}  // namespace stacksl
