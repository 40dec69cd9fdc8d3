#include "stacksl/linalg.hpp"

#include <cmath>
#include <string>

#include "stacksl/errors.hpp"

namespace stacksl {

GramState::GramState(std::size_t d, double lambda_ridge, std::size_t refactor_interval)
    : lambda_(lambda_ridge), refactor_interval_(refactor_interval) {
    if (d == 0) throw ConfigError("gram: dimension must be >= 1");
    if (!(lambda_ridge > 0.0) || !std::isfinite(lambda_ridge))
        throw ConfigError("gram: lambda_ridge must be positive, got " + std::to_string(lambda_ridge));
    if (refactor_interval == 0) throw ConfigError("gram: refactor_interval must be >= 1");
    const auto n = static_cast<Eigen::Index>(d);
    v_ = lambda_ridge * Matrix::Identity(n, n);
    v_inv_ = (1.0 / lambda_ridge) * Matrix::Identity(n, n);
    b_ = Vector::Zero(n);
}

void GramState::update(const Vector& phi) {
    expects(phi.size() == v_.rows(), "gram update: feature dimension mismatch");
    v_.noalias() += phi * phi.transpose();
    const Vector u = v_inv_ * phi;
    const double denom = 1.0 + phi.dot(u);
    v_inv_.noalias() -= (u * u.transpose()) / denom;
    ++t_;
    if (++since_refactor_ >= refactor_interval_) refactor();
}

void GramState::add_observation(const Vector& phi, double y) {
    expects(phi.size() == b_.size(), "ridge observation: feature dimension mismatch");
    b_.noalias() += y * phi;
}

double GramState::mahalanobis_norm_sq(const Vector& phi) const {
    expects(phi.size() == v_.rows(), "mahalanobis norm: feature dimension mismatch");
    // V_inv is SPD up to rounding; clamp keeps sqrt well defined.
    return std::max(0.0, phi.dot(v_inv_ * phi));
}

double GramState::mahalanobis_norm(const Vector& phi) const {
    return std::sqrt(mahalanobis_norm_sq(phi));
}

Vector GramState::ridge_estimate() const { return v_inv_ * b_; }

void GramState::refactor() {
    const auto n = v_.rows();
    v_inv_ = v_.llt().solve(Matrix::Identity(n, n));
    v_inv_ = 0.5 * (v_inv_ + v_inv_.transpose()).eval();
    since_refactor_ = 0;
}

double GramState::inverse_residual() const {
    const auto n = v_.rows();
    return (v_ * v_inv_ - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

void GramState::debug_corrupt_inverse(double amount) { v_inv_(0, 0) += amount; }

}  // namespace stacksl
