#include "lnt/simplex_qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

namespace lnt {

FeasibleRegion::FeasibleRegion(RegionKind kind, int n, int m, int p, int q)
    : kind_(kind), n_(n), m_(m), p_(p), q_(q), sign_(n, 0.0) {
    if (n < 1) throw ValidationError("region dimension must be positive");
    switch (kind_) {
        case RegionKind::SumSimplex:
            for (int i = 0; i < n; ++i) sign_[i] = 1.0;
            break;
        case RegionKind::SignedSimplex:
            if (m < 1 || m > n) throw ValidationError("need 1 <= m <= n");
            if (p < 0 || p >= m) throw ValidationError("p must index a positive term");
            sign_[p] = 1.0;
            for (int i = m; i < n; ++i) sign_[i] = -1.0;
            break;
        case RegionKind::PairSimplex:
            if (m < 1 || m > n) throw ValidationError("need 1 <= m <= n");
            if (p < 0 || p >= m || q < 0 || q >= m || p == q) {
                throw ValidationError("p, q must be distinct positive-term indices");
            }
            sign_[p] = 1.0;
            sign_[q] = 1.0;
            for (int i = m; i < n; ++i) sign_[i] = -1.0;
            break;
    }
    for (int i = 0; i < n; ++i)
        if (sign_[i] != 0.0) free_.push_back(i);
}

FeasibleRegion FeasibleRegion::sum_simplex(int n) {
    return FeasibleRegion(RegionKind::SumSimplex, n, n, -1, -1);
}
FeasibleRegion FeasibleRegion::signed_simplex(int n, int m, int p) {
    return FeasibleRegion(RegionKind::SignedSimplex, n, m, p, -1);
}
FeasibleRegion FeasibleRegion::pair_simplex(int n, int m, int p, int q) {
    return FeasibleRegion(RegionKind::PairSimplex, n, m, p, q);
}

namespace {

constexpr double kSignFeasTol = 1e-11;
constexpr double kKktRelTol = 1e-9;

struct Candidate {
    Eigen::VectorXd w;       // full length
    double min_value;
    bool sign_feasible;
    bool kkt_ok;
};

// Equality-constrained solve on a fixed support: w_S = B_S^{-1} 1 / (1' B_S^{-1} 1).
// The gradient B w is constant (= min value) across the support.
Candidate solve_on_support(const Eigen::MatrixXd& B, const FeasibleRegion& region,
                           const std::vector<int>& support) {
    const int n = static_cast<int>(B.rows());
    const int k = static_cast<int>(support.size());
    Eigen::MatrixXd BS(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) BS(i, j) = B(support[i], support[j]);

    Candidate cand;
    cand.sign_feasible = false;
    cand.kkt_ok = false;
    Eigen::LLT<Eigen::MatrixXd> llt(BS);
    if (llt.info() != Eigen::Success) {
        cand.min_value = std::numeric_limits<double>::infinity();
        return cand;
    }
    Eigen::VectorXd z = llt.solve(Eigen::VectorXd::Ones(k));
    const double denom = z.sum();
    cand.w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < k; ++i) cand.w[support[i]] = z[i] / denom;
    cand.min_value = 1.0 / denom;

    cand.sign_feasible = true;
    for (int i : support) {
        if (region.sign(i) * cand.w[i] < -kSignFeasTol) {
            cand.sign_feasible = false;
            break;
        }
    }
    if (!cand.sign_feasible) return cand;

    Eigen::VectorXd grad = B * cand.w;
    cand.kkt_ok = true;
    for (int i : region.free_indices()) {
        if (cand.w[i] != 0.0) continue;
        const double margin = grad[i] - cand.min_value;
        if (region.sign(i) * margin < -kKktRelTol * cand.min_value) {
            cand.kkt_ok = false;
            break;
        }
    }
    return cand;
}

// Identify the support by the relative zero-weight threshold, then re-solve
// exactly on it (repeat if the re-solve pushes more weights under threshold).
Candidate refine_support(const Eigen::MatrixXd& B, const FeasibleRegion& region,
                         Eigen::VectorXd w) {
    for (int pass = 0; pass < region.dim() + 1; ++pass) {
        const double wmax = w.cwiseAbs().maxCoeff();
        std::vector<int> support;
        for (int i : region.free_indices())
            if (std::abs(w[i]) >= kActiveRelTol * wmax) support.push_back(i);
        if (support.empty()) throw InfeasibleRegion("empty support during refinement");
        Candidate cand = solve_on_support(B, region, support);
        bool shrank = false;
        const double cmax = cand.w.cwiseAbs().maxCoeff();
        for (int i : support)
            if (std::abs(cand.w[i]) < kActiveRelTol * cmax) shrank = true;
        if (!shrank) return cand;
        w = cand.w;
    }
    throw InfeasibleRegion("support refinement did not stabilize");
}

Candidate solve_by_enumeration(const Eigen::MatrixXd& B, const FeasibleRegion& region) {
    const std::vector<int>& free = region.free_indices();
    const int nf = static_cast<int>(free.size());
    std::uint32_t positive_mask = 0;
    for (int j = 0; j < nf; ++j)
        if (region.sign(free[j]) > 0) positive_mask |= (1u << j);

    // Candidate supports in decreasing size; the first sign-feasible KKT
    // point is the unique minimizer.
    std::vector<std::uint32_t> masks;
    masks.reserve((1u << nf) - 1);
    for (std::uint32_t m = 1; m < (1u << nf); ++m)
        if (m & positive_mask) masks.push_back(m);
    std::stable_sort(masks.begin(), masks.end(),
                     [](std::uint32_t a, std::uint32_t b) {
                         return std::popcount(a) > std::popcount(b);
                     });

    for (std::uint32_t mask : masks) {
        std::vector<int> support;
        for (int j = 0; j < nf; ++j)
            if (mask & (1u << j)) support.push_back(free[j]);
        Candidate cand = solve_on_support(B, region, support);
        if (cand.sign_feasible && cand.kkt_ok) return refine_support(B, region, cand.w);
    }
    throw InfeasibleRegion("no KKT-feasible support found");
}

// Euclidean projection onto {w : sign_i w_i >= 0 on free coords, w = 0 off
// them, sum w = 1}. In the variables z_i = sign_i w_i the constraint set is
// {z >= 0, sum_i sign_i z_i = 1}; z_i(nu) = max(0, y_i + nu sign_i) makes
// phi(nu) = sum sign_i z_i(nu) nondecreasing, so bisection finds the
// multiplier.
Eigen::VectorXd project_onto_region(const FeasibleRegion& region, const Eigen::VectorXd& y) {
    const std::vector<int>& free = region.free_indices();
    auto phi = [&](double nu) {
        double s = 0.0;
        for (int i : free) {
            const double sg = region.sign(i);
            const double zi = std::max(0.0, sg * y[i] + nu * sg);
            s += sg * zi;
        }
        return s;
    };
    double lo = -1.0, hi = 1.0;
    const double span = y.cwiseAbs().maxCoeff() + 1.0;
    lo = -span;
    hi = span;
    while (phi(lo) > 1.0) lo *= 2.0;
    while (phi(hi) < 1.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < 1.0 ? lo : hi) = mid;
    }
    const double nu = 0.5 * (lo + hi);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(y.size());
    for (int i : free) {
        const double sg = region.sign(i);
        w[i] = sg * std::max(0.0, sg * y[i] + nu * sg);
    }
    return w;
}

Candidate solve_by_projected_gradient(const Eigen::MatrixXd& B, const FeasibleRegion& region) {
    const std::vector<int>& free = region.free_indices();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(B.rows());
    w[free.front()] = region.sign(free.front());
    // make the start feasible (sum = 1)
    w = project_onto_region(region, w);

    const double lip = 2.0 * B.cwiseAbs().rowwise().sum().maxCoeff();
    const double step = 0.9 / lip;
    for (int it = 0; it < 100000; ++it) {
        Eigen::VectorXd next = project_onto_region(region, w - step * 2.0 * (B * w));
        const double delta = (next - w).cwiseAbs().maxCoeff();
        w = std::move(next);
        if (delta < 1e-14) break;
    }

    // Active-set polish: exact re-solve on the identified support, then add
    // KKT violators / drop sign violators until clean.
    std::vector<int> support;
    {
        const double wmax = w.cwiseAbs().maxCoeff();
        for (int i : free)
            if (std::abs(w[i]) >= 1e-8 * wmax) support.push_back(i);
    }
    for (int round = 0; round < 4 * static_cast<int>(free.size()) + 4; ++round) {
        Candidate cand = solve_on_support(B, region, support);
        if (cand.sign_feasible && cand.kkt_ok) return refine_support(B, region, cand.w);
        if (!cand.sign_feasible) {
            // drop the most violating coordinate
            int worst = -1;
            double worst_val = 0.0;
            for (int i : support) {
                const double v = region.sign(i) * cand.w[i];
                if (v < worst_val) {
                    worst_val = v;
                    worst = i;
                }
            }
            support.erase(std::remove(support.begin(), support.end(), worst), support.end());
            if (support.empty()) break;
            continue;
        }
        // add the most violating inactive coordinate
        Eigen::VectorXd grad = B * cand.w;
        int worst = -1;
        double worst_val = -kKktRelTol * cand.min_value;
        for (int i : free) {
            if (std::find(support.begin(), support.end(), i) != support.end()) continue;
            const double v = region.sign(i) * (grad[i] - cand.min_value);
            if (v < worst_val) {
                worst_val = v;
                worst = i;
            }
        }
        if (worst < 0) return refine_support(B, region, cand.w);
        support.push_back(worst);
        std::sort(support.begin(), support.end());
    }
    throw InfeasibleRegion("projected-gradient active-set polish did not converge");
}

}  // namespace

AssumptionCheck check_assumption(const CovMatrix& cov, const QpSolution& sol,
                                 const FeasibleRegion& region) {
    AssumptionCheck out;
    const Eigen::VectorXd grad = cov.entries() * sol.wbar;
    const double tol = kAssumptionRelTol * sol.min_value;
    out.ok = true;
    for (int i : region.free_indices()) {
        if (std::binary_search(sol.active_set.begin(), sol.active_set.end(), i)) continue;
        const double margin = grad[i] - sol.min_value;  // (e^i - w)' B w
        out.margins.emplace_back(i, margin);
        if (std::abs(margin) <= tol) {
            out.borderline = true;
            out.ok = false;
        } else if (region.sign(i) * margin < 0.0) {
            out.ok = false;  // cannot happen at the true minimizer
        }
    }
    return out;
}

QpSolution solve(const CovMatrix& cov, const FeasibleRegion& region) {
    if (region.dim() != cov.size()) {
        throw ValidationError("region dimension " + std::to_string(region.dim()) +
                              " does not match covariance dimension " +
                              std::to_string(cov.size()));
    }
    const Eigen::MatrixXd& B = cov.entries();
    Candidate cand = region.free_indices().size() <= 16
                         ? solve_by_enumeration(B, region)
                         : solve_by_projected_gradient(B, region);

    QpSolution sol;
    sol.wbar = cand.w;
    for (int i : region.free_indices())
        if (sol.wbar[i] != 0.0) sol.active_set.push_back(i);
    sol.nbar = static_cast<int>(sol.active_set.size());

    CovMatrix reduced = principal_submatrix(cov, sol.active_set);
    InverseSummary inv = invert_with_rowsums(reduced);
    sol.reduced_inverse = std::move(inv.inverse);
    sol.reduced_rowsums = std::move(inv.row_sums);
    sol.min_value = 1.0 / sol.reduced_rowsums.sum();

    AssumptionCheck check = check_assumption(cov, sol, region);
    sol.assumption_ok = check.ok;
    sol.assumption_borderline = check.borderline;
    sol.assumption_margins = std::move(check.margins);
    return sol;
}

double two_lognormal_closed_form(double sigma1, double sigma2, double rho) {
    if (!(sigma2 > 0.0) || sigma1 < sigma2) {
        throw DomainError("requires sigma1 >= sigma2 > 0 (sort the components first)");
    }
    if (!(std::abs(rho) < 1.0)) throw DomainError("requires |rho| < 1");
    const double num = sigma2 * (sigma2 - rho * sigma1);
    const double den = sigma1 * sigma1 + sigma2 * sigma2 - 2.0 * rho * sigma1 * sigma2;
    return std::max(0.0, num / den);
}

}  // namespace lnt
