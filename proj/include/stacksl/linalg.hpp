#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace stacksl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr std::size_t kDefaultRefactorInterval = 512;

// Ridge-regularized Gram matrix V = lambda*I + sum phi phi^T with an incrementally
// maintained inverse and the response accumulator b used for the ridge estimate.
//
// The inverse is updated with the Sherman-Morrison identity and recomputed from a
// Cholesky factorization of V every `refactor_interval` updates.
class GramState {
public:
    GramState(std::size_t d, double lambda_ridge,
              std::size_t refactor_interval = kDefaultRefactorInterval);

    void update(const Vector& phi);
    void add_observation(const Vector& phi, double y);

    double mahalanobis_norm(const Vector& phi) const;
    double mahalanobis_norm_sq(const Vector& phi) const;
    Vector ridge_estimate() const;

    // Recomputes V_inv from scratch and resets the drift counter.
    void refactor();
    // max |(V * V_inv - I)_ij|
    double inverse_residual() const;

    // Fault-injection hook for the invariant suite: perturbs one entry of V_inv.
    void debug_corrupt_inverse(double amount);

    std::size_t dim() const { return static_cast<std::size_t>(v_.rows()); }
    std::size_t rounds() const { return t_; }
    double lambda_ridge() const { return lambda_; }
    std::size_t updates_since_refactor() const { return since_refactor_; }
    std::size_t refactor_interval() const { return refactor_interval_; }

    const Matrix& gram() const { return v_; }
    const Matrix& gram_inverse() const { return v_inv_; }
    const Vector& response() const { return b_; }

private:
    Matrix v_;
    Matrix v_inv_;
    Vector b_;
    std::size_t t_ = 0;
    double lambda_;
    std::size_t since_refactor_ = 0;
    std::size_t refactor_interval_;
};

}  // namespace stacksl
