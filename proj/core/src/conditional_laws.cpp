#include "lnt/conditional_laws.hpp"

#include <cmath>
#include <string>

namespace lnt {
namespace {

// exponents_i = sum_j Abar_j b_{kbar(j), i}
// mu'_i      = mu_i - sum_{p,q} b_{kbar(p), i} abar_pq (log(S/|Abar_q|) + mubar_q)
// B'_ij      = (b_ij - sum_{p,q} abar_pq b_{kbar(p), i} b_{kbar(q), j}) off the
//              support, zero otherwise (a Schur-complement residual, PSD).
void build_conditional_pieces(const ModelSpec& model, const QpSolution& sol,
                              Eigen::VectorXd& exponents, Eigen::VectorXd& mu_prime,
                              Eigen::MatrixXd& cov_prime) {
    const int n = model.dim();
    const int nb = sol.nbar;
    const Eigen::MatrixXd& B = model.cov.entries();
    const Eigen::VectorXd& A = sol.reduced_rowsums;
    const double S = A.sum();

    Eigen::MatrixXd cross(nb, n);  // cross(j, i) = b_{kbar(j), i}
    for (int j = 0; j < nb; ++j) cross.row(j) = B.row(sol.active_set[j]);

    Eigen::VectorXd q(nb);
    for (int j = 0; j < nb; ++j) {
        q[j] = std::log(S / std::abs(A[j])) + model.mu[sol.active_set[j]];
    }

    exponents = cross.transpose() * A;
    mu_prime = model.mu - cross.transpose() * (sol.reduced_inverse * q);

    cov_prime = B - cross.transpose() * sol.reduced_inverse * cross;
    for (int j : sol.active_set) {
        cov_prime.row(j).setZero();
        cov_prime.col(j).setZero();
    }
    cov_prime = ((cov_prime + cov_prime.transpose()) / 2.0).eval();
}

double laplace_from_pieces(const Eigen::VectorXd& u, double log_x,
                           const Eigen::VectorXd& exponents,
                           const Eigen::VectorXd& mu_prime,
                           const Eigen::MatrixXd& cov_prime) {
    if (u.size() != exponents.size()) {
        throw ValidationError("u has length " + std::to_string(u.size()) +
                              ", expected " + std::to_string(exponents.size()));
    }
    return u.dot(exponents) * log_x + u.dot(mu_prime) + 0.5 * u.dot(cov_prime * u);
}

}  // namespace

ConditionalLawLeft::ConditionalLawLeft(const ModelSpec& model)
    : sol_(solve(model.cov, FeasibleRegion::sum_simplex(model.dim()))) {
    build(model);
}

ConditionalLawLeft::ConditionalLawLeft(const ModelSpec& model, QpSolution sol)
    : sol_(std::move(sol)) {
    build(model);
}

void ConditionalLawLeft::build(const ModelSpec& model) {
    if (!model.all_positive()) {
        throw DomainError("left-tail conditional law requires an all-positive sum");
    }
    if (!sol_.assumption_ok) {
        if (sol_.assumption_borderline) {
            throw AssumptionBorderline("nondegeneracy check borderline for the sum-simplex minimizer",
                                       sol_.assumption_margins);
        }
        throw AssumptionViolated("nondegeneracy check failed for the sum-simplex minimizer",
                                 sol_.assumption_margins);
    }
    build_conditional_pieces(model, sol_, exponents_, mu_prime_, cov_prime_);
}

double ConditionalLawLeft::log_laplace(const Eigen::VectorXd& u, double x) const {
    if (!(x > 0.0)) throw DomainError("level must be positive");
    return log_laplace_at_log_level(u, std::log(x));
}

double ConditionalLawLeft::log_laplace_at_log_level(const Eigen::VectorXd& u,
                                                    double log_x) const {
    return laplace_from_pieces(u, log_x, exponents_, mu_prime_, cov_prime_);
}

LimitingGaussian ConditionalLawLeft::limiting_gaussian() const {
    LimitingGaussian g;
    g.lambda_bar = exponents_.array() - 1.0;
    g.mu_prime = mu_prime_;
    g.cov_prime = cov_prime_;
    return g;
}

ConditionalLawRight::ConditionalLawRight(const ModelSpec& model)
    : sel_(right_tail_mixed(model)) {
    build(model);
}

ConditionalLawRight::ConditionalLawRight(const ModelSpec& model, DominanceSelection sel)
    : sel_(std::move(sel)) {
    build(model);
}

void ConditionalLawRight::build(const ModelSpec& model) {
    if (sel_.p4.size() != 1) {
        throw NonSingletonDominance("right-tail conditional law needs a single dominant split; got " +
                                    std::to_string(sel_.p4.size()));
    }
    dominant_p_ = sel_.p4.front();
    build_conditional_pieces(model, sel_.split_solutions[dominant_p_], exponents_,
                             mu_prime_, cov_prime_);
}

double ConditionalLawRight::log_laplace(const Eigen::VectorXd& u, double x) const {
    if (!(x > 0.0)) throw DomainError("level must be positive");
    return log_laplace_at_log_level(u, std::log(x));
}

double ConditionalLawRight::log_laplace_at_log_level(const Eigen::VectorXd& u,
                                                     double log_x) const {
    return laplace_from_pieces(u, log_x, exponents_, mu_prime_, cov_prime_);
}

double conditional_laplace_left(const ModelSpec& model, const Eigen::VectorXd& u, double x) {
    return ConditionalLawLeft(model).log_laplace(u, x);
}

double conditional_laplace_right(const ModelSpec& model, const Eigen::VectorXd& u, double x) {
    return ConditionalLawRight(model).log_laplace(u, x);
}

LimitingGaussian limiting_gaussian_left(const ModelSpec& model) {
    return ConditionalLawLeft(model).limiting_gaussian();
}

}  // namespace lnt
