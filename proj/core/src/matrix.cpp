#include "lnt/matrix.hpp"

#include <cmath>
#include <string>

namespace lnt {
namespace {

// Unblocked lower Cholesky with the library's pivot rejection rule.
Eigen::MatrixXd cholesky_or_throw(const Eigen::MatrixXd& a, double* log_det) {
    const int n = static_cast<int>(a.rows());
    const double max_diag = a.diagonal().maxCoeff();
    const double threshold = kPivotRelTol * std::max(max_diag, 0.0);

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    double ld = 0.0;
    for (int k = 0; k < n; ++k) {
        double pivot = a(k, k);
        for (int j = 0; j < k; ++j) pivot -= L(k, j) * L(k, j);
        if (!(pivot > threshold)) {
            throw NotPositiveDefinite(
                "covariance matrix is not positive definite: pivot " +
                std::to_string(pivot) + " at index " + std::to_string(k) +
                " is below " + std::to_string(threshold));
        }
        const double lkk = std::sqrt(pivot);
        L(k, k) = lkk;
        ld += std::log(pivot);
        for (int i = k + 1; i < n; ++i) {
            double s = a(i, k);
            for (int j = 0; j < k; ++j) s -= L(i, j) * L(k, j);
            L(i, k) = s / lkk;
        }
    }
    if (log_det) *log_det = ld;
    return L;
}

}  // namespace

CovMatrix::CovMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
        throw ValidationError("covariance matrix must be square and nonempty");
    }
    const double max_abs = entries_.cwiseAbs().maxCoeff();
    const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(max_abs, 1e-300)) {
        throw ValidationError("covariance matrix is not symmetric: max asymmetry " +
                              std::to_string(asym));
    }
    entries_ = ((entries_ + entries_.transpose()) / 2.0).eval();
    chol_ = cholesky_or_throw(entries_, &log_det_);
}

double CovMatrix::determinant() const { return std::exp(log_det_); }

Eigen::MatrixXd cholesky(const CovMatrix& cov) { return cov.cholesky_lower(); }

InverseSummary invert_with_rowsums(const CovMatrix& cov) {
    const int n = cov.size();
    const Eigen::MatrixXd& L = cov.cholesky_lower();
    // B^-1 = L^-T L^-1 via triangular solves against the identity.
    Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
    L.triangularView<Eigen::Lower>().solveInPlace(inv);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
    inv = ((inv + inv.transpose()) / 2.0).eval();

    InverseSummary out;
    out.inverse = std::move(inv);
    out.row_sums = out.inverse.rowwise().sum();
    out.determinant = cov.determinant();
    return out;
}

CovMatrix principal_submatrix(const CovMatrix& cov, std::span<const int> indices) {
    if (indices.empty()) throw EmptyIndexSet("principal submatrix needs a nonempty index set");
    const int n = cov.size();
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] < 0 || indices[k] >= n) {
            throw IndexOutOfRange("index " + std::to_string(indices[k]) +
                                  " outside [0, " + std::to_string(n) + ")");
        }
        if (k > 0 && indices[k] <= indices[k - 1]) {
            throw ValidationError("indices must be strictly increasing");
        }
    }
    const int m = static_cast<int>(indices.size());
    Eigen::MatrixXd sub(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) sub(i, j) = cov(indices[i], indices[j]);
    return CovMatrix(std::move(sub));
}

ModelSpec::ModelSpec(Eigen::VectorXd mu_in, CovMatrix cov_in, int m)
    : mu(std::move(mu_in)), cov(std::move(cov_in)), positive_count(m) {
    if (mu.size() != cov.size()) {
        throw ValidationError("mean vector length " + std::to_string(mu.size()) +
                              " does not match covariance dimension " +
                              std::to_string(cov.size()));
    }
    if (positive_count < 1 || positive_count > cov.size()) {
        throw ValidationError("positive count m must satisfy 1 <= m <= n");
    }
}

}  // namespace lnt
