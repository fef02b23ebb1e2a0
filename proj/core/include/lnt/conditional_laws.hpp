#pragma once

#include <Eigen/Core>

#include "lnt/matrix.hpp"
#include "lnt/simplex_qp.hpp"
#include "lnt/tail_asymptotics.hpp"

namespace lnt {

/// Limiting law of Y - (1 + lambda_bar) log x given a deep left-tail event:
/// a degenerate Gaussian pinned to mu'_i = log wbar_i on the driving
/// coordinates, with residual covariance only off the support.
struct LimitingGaussian {
    Eigen::VectorXd lambda_bar;  ///< [B wbar]_i / (wbar' B wbar) - 1
    Eigen::VectorXd mu_prime;
    Eigen::MatrixXd cov_prime;   ///< zero on support rows/columns; PSD
};

/// Left-tail conditional structure: exponents, limiting mean and covariance,
/// reusable across Laplace-transform evaluations at many levels.
class ConditionalLawLeft {
public:
    explicit ConditionalLawLeft(const ModelSpec& model);
    ConditionalLawLeft(const ModelSpec& model, QpSolution sol);

    /// log of the leading term of E[exp(u'Y) | X <= x] (equivalently X = x):
    /// (u' exponents) log x + u' mu' + u' B' u / 2.
    double log_laplace(const Eigen::VectorXd& u, double x) const;
    double log_laplace_at_log_level(const Eigen::VectorXd& u, double log_x) const;

    LimitingGaussian limiting_gaussian() const;
    /// Per-coordinate exponent of x for u = e_i: sum_j Abar_j b_{kbar(j), i};
    /// equals 1 on the support and exceeds 1 off it.
    const Eigen::VectorXd& exponents() const { return exponents_; }
    const Eigen::VectorXd& mu_prime() const { return mu_prime_; }
    const Eigen::MatrixXd& cov_prime() const { return cov_prime_; }
    const QpSolution& qp() const { return sol_; }

private:
    void build(const ModelSpec& model);

    QpSolution sol_;
    Eigen::VectorXd exponents_, mu_prime_;
    Eigen::MatrixXd cov_prime_;
};

/// Right-tail analog, defined through the dominant split (requires a
/// singleton dominant set). Only the Laplace transform is exposed; no
/// limiting-Gaussian statement is available for this side.
class ConditionalLawRight {
public:
    explicit ConditionalLawRight(const ModelSpec& model);
    ConditionalLawRight(const ModelSpec& model, DominanceSelection sel);

    double log_laplace(const Eigen::VectorXd& u, double x) const;
    double log_laplace_at_log_level(const Eigen::VectorXd& u, double log_x) const;

    int dominant_split() const { return dominant_p_; }
    const Eigen::VectorXd& exponents() const { return exponents_; }
    const Eigen::VectorXd& mu_prime() const { return mu_prime_; }
    const Eigen::MatrixXd& cov_prime() const { return cov_prime_; }
    const QpSolution& qp() const { return sel_.split_solutions[dominant_p_]; }

private:
    void build(const ModelSpec& model);

    DominanceSelection sel_;
    int dominant_p_ = 0;
    Eigen::VectorXd exponents_, mu_prime_;
    Eigen::MatrixXd cov_prime_;
};

/// log of the leading term of E[exp(u'Y) | X <= x] as x -> 0 (all-positive sum).
double conditional_laplace_left(const ModelSpec& model, const Eigen::VectorXd& u, double x);

/// log of the leading term of E[exp(u'Y) | X^(m) >= x] as x -> infinity.
double conditional_laplace_right(const ModelSpec& model, const Eigen::VectorXd& u, double x);

LimitingGaussian limiting_gaussian_left(const ModelSpec& model);

}  // namespace lnt
