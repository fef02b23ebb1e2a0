#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "lnt/matrix.hpp"

namespace lnt {

enum class RegionKind { SumSimplex, SignedSimplex, PairSimplex };

/// Feasible set of the weight minimization: vectors summing to one with a
/// per-coordinate sign pattern.
///
///   SumSimplex        all w_i >= 0
///   SignedSimplex(p)  w_i = 0 for i < m except p; w_p >= 0; w_i <= 0 for i >= m
///   PairSimplex(p,q)  as SignedSimplex with both w_p, w_q >= 0 free
///
/// Indices are 0-based; the first m coordinates are the positive-signed terms.
class FeasibleRegion {
public:
    static FeasibleRegion sum_simplex(int n);
    static FeasibleRegion signed_simplex(int n, int m, int p);
    static FeasibleRegion pair_simplex(int n, int m, int p, int q);

    RegionKind kind() const { return kind_; }
    int dim() const { return n_; }
    int positive_count() const { return m_; }
    int p() const { return p_; }
    int q() const { return q_; }

    /// Coordinates not pinned to zero, increasing.
    const std::vector<int>& free_indices() const { return free_; }
    /// +1 for a nonnegativity-constrained free coordinate, -1 for nonpositivity.
    double sign(int i) const { return sign_[i]; }
    bool is_free(int i) const { return sign_[i] != 0.0; }

private:
    FeasibleRegion(RegionKind kind, int n, int m, int p, int q);

    RegionKind kind_;
    int n_, m_, p_, q_;
    std::vector<int> free_;
    std::vector<double> sign_;  // 0 for pinned coordinates
};

/// Result of a nondegeneracy check: every inactive free coordinate must have
/// a strictly nonzero constraint margin (e^i - w)' B w, positive on the sum
/// simplex and negative on the signed regions. Margins within the tolerance
/// band are flagged borderline and fail the check.
struct AssumptionCheck {
    bool ok = false;
    bool borderline = false;
    std::vector<std::pair<int, double>> margins;  // (coordinate, margin)
};

struct QpSolution {
    Eigen::VectorXd wbar;                 ///< full-length minimizer
    std::vector<int> active_set;          ///< support of wbar, increasing, 0-based
    int nbar = 0;                         ///< |active_set|
    Eigen::MatrixXd reduced_inverse;      ///< inverse of the restriction of B to the support
    Eigen::VectorXd reduced_rowsums;      ///< row sums of reduced_inverse
    double min_value = 0.0;               ///< wbar' B wbar = 1 / sum(reduced_rowsums)
    bool assumption_ok = false;
    bool assumption_borderline = false;
    std::vector<std::pair<int, double>> assumption_margins;
};

/// Minimize w' B w over the region. The minimizer is unique by strict
/// convexity. Exact support enumeration for up to 16 free coordinates;
/// projected gradient plus active-set polishing above that, always finished
/// by an exact equality-constrained re-solve and a KKT verification.
QpSolution solve(const CovMatrix& cov, const FeasibleRegion& region);

/// Re-evaluates the nondegeneracy margins of a solution.
AssumptionCheck check_assumption(const CovMatrix& cov, const QpSolution& sol,
                                 const FeasibleRegion& region);

/// Relative tolerance for declaring a margin borderline (scaled by min_value).
inline constexpr double kAssumptionRelTol = 1e-9;

/// Active-weight threshold, relative to the largest weight magnitude.
inline constexpr double kActiveRelTol = 1e-10;

/// Closed-form weight of the larger-variance component for a two-dimensional
/// sum: vbar = sigma2 (sigma2 - rho sigma1) / (sigma1^2 + sigma2^2
/// - 2 rho sigma1 sigma2), clamped at zero. Requires sigma1 >= sigma2 > 0
/// and |rho| < 1.
double two_lognormal_closed_form(double sigma1, double sigma2, double rho);

}  // namespace lnt
