#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "lnt/errors.hpp"

namespace lnt {

/// Symmetric positive-definite covariance matrix, sized for n <~ 50.
///
/// Construction validates symmetry (1e-12 relative), symmetrizes, and runs a
/// Cholesky factorization whose pivots decide positive definiteness: a pivot
/// <= 1e-14 x (largest diagonal entry) rejects the matrix with
/// NotPositiveDefinite. The factor is kept for reuse by solvers and samplers.
class CovMatrix {
public:
    explicit CovMatrix(Eigen::MatrixXd entries);

    int size() const { return static_cast<int>(entries_.rows()); }
    const Eigen::MatrixXd& entries() const { return entries_; }
    double operator()(int i, int j) const { return entries_(i, j); }

    /// Lower-triangular factor L with L L^T = entries, strictly positive diagonal.
    const Eigen::MatrixXd& cholesky_lower() const { return chol_; }

    double log_det() const { return log_det_; }
    double determinant() const;

private:
    Eigen::MatrixXd entries_;
    Eigen::MatrixXd chol_;
    double log_det_ = 0.0;
};

/// Relative pivot threshold below which a matrix is treated as singular.
inline constexpr double kPivotRelTol = 1e-14;

/// Lower Cholesky factor of the covariance matrix.
Eigen::MatrixXd cholesky(const CovMatrix& cov);

struct InverseSummary {
    Eigen::MatrixXd inverse;   ///< a_ij
    Eigen::VectorXd row_sums;  ///< A_k = sum_j a_kj
    double determinant = 0.0;
};

/// Inverse, its row sums A_k, and the determinant, all derived from the
/// cached Cholesky factor.
InverseSummary invert_with_rowsums(const CovMatrix& cov);

/// Restriction of cov to a nonempty, strictly increasing, in-range index set
/// (0-based). Positive definiteness is inherited.
CovMatrix principal_submatrix(const CovMatrix& cov, std::span<const int> indices);

/// Gaussian exponent model for X^(m) = sum_{k<m} e^{Y_k} - sum_{k>=m} e^{Y_k}
/// with Y ~ N(mu, cov). The first positive_count components carry the plus sign.
struct ModelSpec {
    Eigen::VectorXd mu;
    CovMatrix cov;
    int positive_count;  ///< m, with 1 <= m <= n

    ModelSpec(Eigen::VectorXd mu_in, CovMatrix cov_in, int m);
    int dim() const { return cov.size(); }
    bool all_positive() const { return positive_count == cov.size(); }
};

}  // namespace lnt
