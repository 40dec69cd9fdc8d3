#include <doctest.h>

#include <cmath>

#include "stacksl/errors.hpp"
#include "stacksl/linalg.hpp"
#include "stacksl/rng.hpp"

using namespace stacksl;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

Vector random_unit(Rng& rng, int d) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = n(rng);
    return v / v.norm();
}

}  // namespace

TEST_CASE("gram_init produces scaled identity") {
    GramState g(2, 1.0);
    CHECK(g.gram().isApprox(Matrix::Identity(2, 2)));
    CHECK(g.gram_inverse().isApprox(Matrix::Identity(2, 2)));
    CHECK(g.response().isZero());
    CHECK(g.rounds() == 0);

    GramState g4(3, 4.0);
    CHECK((g4.gram() - 4.0 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g4.gram_inverse() - 0.25 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gram_init rejects degenerate configuration") {
    CHECK_THROWS_AS(GramState(0, 1.0), ConfigError);
    CHECK_THROWS_AS(GramState(2, 0.0), ConfigError);
    CHECK_THROWS_AS(GramState(2, -1.0), ConfigError);
}

TEST_CASE("axis-aligned update and hand-computed inverse") {
    GramState g(2, 1.0);
    g.update(vec({1, 0}));
    CHECK(g.gram()(0, 0) == 2.0);
    CHECK(g.gram()(1, 1) == 1.0);
    CHECK(g.gram()(0, 1) == 0.0);
    CHECK(g.rounds() == 1);

    // [[2,0],[0,1]]^-1 = [[1/2,0],[0,1]] -> ||e1||^2 = 1/2
    const double a = 2, b = 0, c = 0, d = 1;
    const double det = a * d - b * c;
    const double inv00 = d / det;
    CHECK(g.mahalanobis_norm(vec({1, 0})) == doctest::Approx(std::sqrt(inv00)).epsilon(1e-14));
    CHECK(g.mahalanobis_norm(vec({1, 0})) == doctest::Approx(0.70711).epsilon(1e-5));
}

TEST_CASE("zero update leaves V but advances t") {
    GramState g(2, 1.0);
    g.update(Vector::Zero(2));
    CHECK(g.gram().isApprox(Matrix::Identity(2, 2)));
    CHECK(g.rounds() == 1);
}

TEST_CASE("mahalanobis norm at t=0 and of zero") {
    GramState g(2, 4.0);
    CHECK(g.mahalanobis_norm(vec({2, 0})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.mahalanobis_norm(Vector::Zero(2)) == 0.0);
}

TEST_CASE("dimension mismatches are contract violations") {
    GramState g(2, 1.0);
    CHECK_THROWS_AS(g.update(Vector::Zero(3)), ContractViolation);
    CHECK_THROWS_AS(g.mahalanobis_norm(Vector::Zero(3)), ContractViolation);
    CHECK_THROWS_AS(g.add_observation(Vector::Zero(1), 1.0), ContractViolation);
}

TEST_CASE("ridge accumulation") {
    GramState g(2, 1.0);
    g.add_observation(vec({1, 0}), 2.0);
    CHECK(g.response().isApprox(vec({2, 0})));
    g.add_observation(vec({0, 1}), 0.0);
    CHECK(g.response().isApprox(vec({2, 0})));

    GramState h(2, 1.0);
    h.add_observation(vec({1, 0}), 1.0);
    h.add_observation(vec({0, 1}), -1.0);
    CHECK(h.response().isApprox(vec({1, -1})));
}

TEST_CASE("ridge estimate") {
    GramState g(2, 1.0);
    CHECK(g.ridge_estimate().isZero());
    // (I + e1 e1^T) theta = e1  ->  theta = (1/2, 0)
    g.update(vec({1, 0}));
    g.add_observation(vec({1, 0}), 1.0);
    const Vector th = g.ridge_estimate();
    CHECK(th(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(th(1) == doctest::Approx(0.0));
}

TEST_CASE("noise-free ridge recovery matches dense normal equations") {
    Rng rng(7);
    const int d = 5;
    const Vector theta_star = random_unit(rng, d);
    GramState g(d, 1.0);
    Matrix A = Matrix::Identity(d, d);
    Vector rhs = Vector::Zero(d);
    for (int i = 0; i < 200; ++i) {
        const Vector phi = random_unit(rng, d);
        const double y = theta_star.dot(phi);
        g.update(phi);
        g.add_observation(phi, y);
        A += phi * phi.transpose();
        rhs += y * phi;
    }
    const Vector oracle = A.fullPivLu().solve(rhs);
    const Vector est = g.ridge_estimate();
    CHECK((est - oracle).norm() < 1e-10);
    CHECK((est - theta_star).norm() <= 0.05);
}

TEST_CASE("property: rank-one consistency, inverse fidelity, shrinkage") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        const int d = 8;
        const double lambda = 0.5 + static_cast<double>(seed) * 0.1;
        GramState g(d, lambda, 64);
        Matrix sum = lambda * Matrix::Identity(d, d);
        const Vector probe = random_unit(rng, d);
        double last_norm = g.mahalanobis_norm(probe);
        for (int t = 0; t < 700; ++t) {
            const Vector phi = random_unit(rng, d);
            g.update(phi);
            sum += phi * phi.transpose();
            CHECK((g.gram() - sum).cwiseAbs().maxCoeff() <= 1e-10);
            CHECK(g.inverse_residual() <= 1e-6);
            if (g.updates_since_refactor() == 0) CHECK(g.inverse_residual() <= 1e-8);
            const double n = g.mahalanobis_norm(probe);
            CHECK(n <= last_norm + 1e-12);
            last_norm = n;
        }
        CHECK(g.rounds() == 700);
    }
}

TEST_CASE("refactorization fires every R updates") {
    Rng rng(3);
    GramState g(4, 1.0, 10);
    for (int i = 0; i < 9; ++i) g.update(random_unit(rng, 4));
    CHECK(g.updates_since_refactor() == 9);
    g.update(random_unit(rng, 4));
    CHECK(g.updates_since_refactor() == 0);
    CHECK(g.inverse_residual() <= 1e-8);
}

TEST_CASE("property: elliptical potential bound") {
    for (std::uint64_t seed = 11; seed <= 15; ++seed) {
        Rng rng(seed);
        const int d = 6;
        const double lambda = 1.0, L = 1.0;
        const std::size_t T = 3000;
        GramState g(d, lambda);
        double sum = 0.0;
        std::uniform_real_distribution<double> scale(0.0, L);
        for (std::size_t t = 0; t < T; ++t) {
            const Vector phi = scale(rng) * random_unit(rng, d);
            sum += g.mahalanobis_norm_sq(phi);
            g.update(phi);
        }
        const double bound = 2.0 * d * std::log(1.0 + T * L * L / (lambda * d));
        CHECK(sum <= bound);
    }
}

TEST_CASE("corrupted inverse is visible in the residual") {
    GramState g(3, 1.0);
    g.update(Vector::Ones(3) / std::sqrt(3.0));
    g.debug_corrupt_inverse(1e-3);
    CHECK(g.inverse_residual() > 1e-6);
    g.refactor();
    CHECK(g.inverse_residual() <= 1e-8);
}
