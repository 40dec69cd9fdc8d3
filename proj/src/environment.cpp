#include "stacksl/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "stacksl/errors.hpp"

namespace stacksl {

namespace {

Vector unit_gaussian_direction(Rng& rng, std::size_t d) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(static_cast<Eigen::Index>(d));
    double n2 = 0.0;
    do {
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
        n2 = v.squaredNorm();
    } while (n2 == 0.0);
    return v / std::sqrt(n2);
}

}  // namespace

TruthModel::TruthModel(Vector theta_star, double sigma, NoiseKind kind, double norm_bound)
    : theta_star_(std::move(theta_star)), sigma_(sigma), kind_(kind) {
    if (!(sigma >= 0.0)) throw ConfigError("truth.sigma must be >= 0");
    if (theta_star_.norm() > norm_bound * (1.0 + 1e-12))
        throw ConfigError("truth: ||theta*|| = " + std::to_string(theta_star_.norm()) +
                          " exceeds norm bound " + std::to_string(norm_bound));
}

TruthModel TruthModel::sample(Rng& rng, std::size_t d, double sigma, NoiseKind kind,
                              double norm_bound) {
    return TruthModel(norm_bound * unit_gaussian_direction(rng, d), sigma, kind, norm_bound);
}

void FollowerConfig::validate() const {
    if (dim == 0) throw ConfigError("dim must be >= 1");
    if (pool_size < 2) throw ConfigError("follower.pool_size must be >= 2");
    if (strategy != FollowerStrategy::Random) {
        if (k < 1) throw ConfigError("follower.k must be >= 1 for hard-negative/margin strategies");
        if (pool_size < k + 1) throw ConfigError("follower.pool_size must be >= follower.k + 1");
    }
}

Matrix sample_pool(Rng& rng, const FollowerConfig& cfg) {
    if (cfg.pool_size < 2) throw ConfigError("follower.pool_size must be >= 2");
    Matrix pool(static_cast<Eigen::Index>(cfg.pool_size), static_cast<Eigen::Index>(cfg.dim));
    for (Eigen::Index i = 0; i < pool.rows(); ++i)
        pool.row(i) = unit_gaussian_direction(rng, cfg.dim).transpose();
    return pool;
}

std::size_t argmax_lowest(const Vector& values) {
    expects(values.size() > 0, "argmax over empty set");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i)
        if (values(i) > values(best)) best = i;
    return static_cast<std::size_t>(best);
}

std::size_t oracle_label(const CandidateSet& cands, const TruthModel& truth) {
    expects(cands.size() >= 1, "oracle_label: empty candidate set");
    expects(cands.dim() == static_cast<std::size_t>(truth.theta_star().size()),
            "oracle_label: dimension mismatch");
    return argmax_lowest(cands.features * truth.theta_star());
}

CandidateSet follower_best_respond(const Matrix& pool, const Vector& learner_theta,
                                   const TruthModel& truth, const FollowerConfig& cfg, Rng& rng) {
    expects(pool.rows() >= 2, "follower: pool must hold at least two candidates");
    expects(pool.cols() == learner_theta.size(), "follower: dimension mismatch");

    const auto m = static_cast<std::size_t>(pool.rows());
    std::vector<std::size_t> chosen;
    if (cfg.strategy == FollowerStrategy::Random) {
        chosen.resize(m);
        std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    } else {
        const Vector truth_scores = pool * truth.theta_star();
        const Vector learner_scores = pool * learner_theta;
        const std::size_t best = argmax_lowest(truth_scores);
        std::vector<std::size_t> wrong;
        wrong.reserve(m - 1);
        for (std::size_t i = 0; i < m; ++i)
            if (i != best) wrong.push_back(i);

        const auto key = [&](std::size_t i) {
            const double s = learner_scores(static_cast<Eigen::Index>(i));
            if (cfg.strategy == FollowerStrategy::HardNegative) return -s;
            return std::abs(s - learner_scores(static_cast<Eigen::Index>(best)));
        };
        std::stable_sort(wrong.begin(), wrong.end(),
                         [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
        const std::size_t take = std::min(cfg.k, wrong.size());
        chosen.push_back(best);
        chosen.insert(chosen.end(), wrong.begin(), wrong.begin() + static_cast<std::ptrdiff_t>(take));
    }

    std::shuffle(chosen.begin(), chosen.end(), rng);

    CandidateSet out;
    out.features.resize(static_cast<Eigen::Index>(chosen.size()), pool.cols());
    for (std::size_t r = 0; r < chosen.size(); ++r)
        out.features.row(static_cast<Eigen::Index>(r)) = pool.row(static_cast<Eigen::Index>(chosen[r]));
    out.true_best_index = oracle_label(out, truth);
    return out;
}

double noisy_feedback(const Vector& phi, const TruthModel& truth, Rng& rng) {
    const double mean = truth.true_score(phi);
    if (truth.sigma() == 0.0) return mean;
    if (truth.noise_kind() == NoiseKind::Gaussian) {
        std::normal_distribution<double> noise(0.0, truth.sigma());
        return mean + noise(rng);
    }
    const double half = truth.sigma() * std::sqrt(3.0);
    std::uniform_real_distribution<double> noise(-half, half);
    return mean + noise(rng);
}

}  // namespace stacksl
