#pragma once

// Shared model builders for the test suites.

#include <Eigen/Core>
#include <random>

#include "lnt/matrix.hpp"

namespace lnt_test {

inline Eigen::MatrixXd constant_correlation(const Eigen::VectorXd& sigma, double rho) {
    Eigen::MatrixXd b = rho * (sigma * sigma.transpose());
    b.diagonal() = sigma.array().square();
    return b;
}

/// The four-asset constant-correlation benchmark model used throughout the
/// numeric checks: sigma = (2, 2.3, 3, 3), zero means.
inline lnt::ModelSpec four_asset_model(double rho, int positive_count = 4) {
    Eigen::VectorXd sigma(4);
    sigma << 2.0, 2.3, 3.0, 3.0;
    return lnt::ModelSpec(Eigen::VectorXd::Zero(4),
                          lnt::CovMatrix(constant_correlation(sigma, rho)), positive_count);
}

inline lnt::ModelSpec pair_model(double s1, double s2, double rho) {
    Eigen::VectorXd sigma(2);
    sigma << s1, s2;
    return lnt::ModelSpec(Eigen::VectorXd::Zero(2),
                          lnt::CovMatrix(constant_correlation(sigma, rho)), 2);
}

/// Well-conditioned random SPD matrix: G G^T + 0.2 I, scaled by a random
/// positive diagonal.
inline Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.5, 2.0);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
    Eigen::MatrixXd b = g * g.transpose() + 0.2 * static_cast<double>(n) *
                                                Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = scale(rng);
    return d.asDiagonal() * b * d.asDiagonal();
}

inline lnt::ModelSpec random_model(int n, int m, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 0.7);
    Eigen::VectorXd mu(n);
    for (int i = 0; i < n; ++i) mu[i] = normal(rng);
    return lnt::ModelSpec(std::move(mu), lnt::CovMatrix(random_spd(n, rng)), m);
}

}  // namespace lnt_test
