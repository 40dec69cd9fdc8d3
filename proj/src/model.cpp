#include "stacksl/model.hpp"

#include <cmath>
#include <limits>

#include "stacksl/errors.hpp"

namespace stacksl {

double score(const Params& params, const Vector& phi) {
    expects(phi.size() == params.theta.size(), "score: dimension mismatch");
    return params.theta.dot(phi);
}

Vector scores(const Params& params, const CandidateSet& cands) {
    expects(cands.features.cols() == params.theta.size(), "scores: dimension mismatch");
    return cands.features * params.theta;
}

Vector log_softmax(const Vector& logits) {
    const double m = logits.maxCoeff();
    const Vector shifted = logits.array() - m;
    const double lse = std::log(shifted.array().exp().sum());
    return shifted.array() - lse;
}

Vector softmax(const Vector& logits) {
    const double m = logits.maxCoeff();
    Vector e = (logits.array() - m).exp();
    return e / e.sum();
}

Vector softmax_policy(const Params& params, const CandidateSet& cands) {
    return softmax(scores(params, cands));
}

double ce_loss(const Params& params, const CandidateSet& cands, std::size_t star) {
    expects(star < cands.size(), "ce_loss: label index out of range");
    const Vector logp = log_softmax(scores(params, cands));
    return std::max(0.0, -logp(static_cast<Eigen::Index>(star)));
}

double clip_loss(double loss, double rho) {
    return std::min(std::max(loss, 0.0), rho);
}

double kl_divergence(const Params& params, const Params& ref, const CandidateSet& cands) {
    const Vector logp = log_softmax(scores(params, cands));
    const Vector logr = log_softmax(scores(ref, cands));
    const double kl = (logp.array().exp() * (logp - logr).array()).sum();
    return std::max(0.0, kl);
}

Vector kl_gradient(const Params& params, const Params& ref, const CandidateSet& cands) {
    const Vector logp = log_softmax(scores(params, cands));
    const Vector logr = log_softmax(scores(ref, cands));
    const Vector p = logp.array().exp();
    const Vector diff = logp - logr;
    const double kl = p.dot(diff);
    const Vector ds = p.array() * (diff.array() - kl);
    return cands.features.transpose() * ds;
}

Vector loss_gradient(const Params& params, const Params& ref, const CandidateSet& cands,
                     std::size_t star, double lambda_kl, double rho) {
    expects(star < cands.size(), "loss_gradient: label index out of range");
    Vector grad = Vector::Zero(params.theta.size());
    const Vector logp = log_softmax(scores(params, cands));
    const double raw = -logp(static_cast<Eigen::Index>(star));
    if (raw > 0.0 && raw < rho) {
        Vector ds = logp.array().exp();
        ds(static_cast<Eigen::Index>(star)) -= 1.0;
        grad.noalias() += cands.features.transpose() * ds;
    }
    if (lambda_kl != 0.0) grad += lambda_kl * kl_gradient(params, ref, cands);
    return grad;
}

Params sgd_step(const Params& params, const Vector& grad, double eta) {
    expects(grad.size() == params.theta.size(), "sgd_step: dimension mismatch");
    return {params.theta - eta * grad, params.norm_bound};
}

Params ema_update(const Params& ref, const Params& params, double alpha) {
    expects(alpha >= 0.0 && alpha <= 1.0, "ema_update: alpha must lie in [0, 1]");
    expects(ref.theta.size() == params.theta.size(), "ema_update: dimension mismatch");
    return {alpha * ref.theta + (1.0 - alpha) * params.theta, ref.norm_bound};
}

}  // namespace stacksl
