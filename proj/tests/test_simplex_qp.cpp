#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lnt/simplex_qp.hpp"
#include "support/models.hpp"

using lnt::CovMatrix;
using lnt::FeasibleRegion;
using lnt::QpSolution;

namespace {

// KKT certificate: feasibility, stationarity on the support, correctly signed
// margins off it. Sufficient for global optimality of the strictly convex
// objective, so it doubles as an oracle for the iterative path.
void check_kkt(const CovMatrix& cov, const FeasibleRegion& region, const QpSolution& sol) {
    CHECK(std::abs(sol.wbar.sum() - 1.0) < 1e-10);
    for (int i = 0; i < region.dim(); ++i) {
        if (!region.is_free(i)) CHECK(sol.wbar[i] == 0.0);
        else CHECK(region.sign(i) * sol.wbar[i] >= -1e-10);
    }
    const Eigen::VectorXd grad = cov.entries() * sol.wbar;
    for (int i : sol.active_set) {
        CHECK(grad[i] == doctest::Approx(sol.min_value).epsilon(1e-8));
    }
    for (const auto& [i, margin] : sol.assumption_margins) {
        CHECK(region.sign(i) * margin >= -1e-8 * sol.min_value);
    }
    CHECK(sol.min_value == doctest::Approx(1.0 / sol.reduced_rowsums.sum()).epsilon(1e-10));
    CHECK(sol.min_value == doctest::Approx(sol.wbar.dot(cov.entries() * sol.wbar)).epsilon(1e-9));
}

}  // namespace

TEST_CASE("identity covariance gives uniform weights") {
    CovMatrix cov(Eigen::MatrixXd::Identity(5, 5));
    QpSolution sol = lnt::solve(cov, FeasibleRegion::sum_simplex(5));
    for (int i = 0; i < 5; ++i) CHECK(sol.wbar[i] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(sol.nbar == 5);
    CHECK(sol.assumption_ok);
}

TEST_CASE("four-asset model, low correlation: interior solution") {
    lnt::ModelSpec model = lnt_test::four_asset_model(0.2);
    QpSolution sol = lnt::solve(model.cov, FeasibleRegion::sum_simplex(4));
    CHECK(sol.wbar[0] == doctest::Approx(0.44).epsilon(0.025));
    CHECK(sol.wbar[1] == doctest::Approx(0.30).epsilon(0.025));
    CHECK(sol.wbar[2] == doctest::Approx(0.13).epsilon(0.05));
    CHECK(sol.wbar[3] == doctest::Approx(0.13).epsilon(0.05));
    CHECK(sol.nbar == 4);
    check_kkt(model.cov, FeasibleRegion::sum_simplex(4), sol);
}

TEST_CASE("four-asset model, high correlation: two components drop out") {
    lnt::ModelSpec model = lnt_test::four_asset_model(0.8);
    QpSolution sol = lnt::solve(model.cov, FeasibleRegion::sum_simplex(4));
    CHECK(sol.active_set == std::vector<int>{0, 1});
    CHECK(sol.wbar[0] == doctest::Approx(0.83).epsilon(0.02));
    CHECK(sol.wbar[1] == doctest::Approx(0.17).epsilon(0.05));
    CHECK(sol.wbar[2] == 0.0);
    CHECK(sol.wbar[3] == 0.0);
    CHECK(sol.assumption_ok);
    check_kkt(model.cov, FeasibleRegion::sum_simplex(4), sol);
}

TEST_CASE("four-asset split regions reproduce the signed minimizers") {
    lnt::ModelSpec model = lnt_test::four_asset_model(0.8, 2);
    QpSolution s1 = lnt::solve(model.cov, FeasibleRegion::signed_simplex(4, 2, 0));
    CHECK(s1.wbar[0] == doctest::Approx(1.32).epsilon(0.01));
    CHECK(s1.wbar[1] == 0.0);
    CHECK(s1.wbar[2] == doctest::Approx(-0.16).epsilon(0.02));
    CHECK(s1.wbar[3] == doctest::Approx(-0.16).epsilon(0.02));

    QpSolution s2 = lnt::solve(model.cov, FeasibleRegion::signed_simplex(4, 2, 1));
    CHECK(s2.wbar[1] == doctest::Approx(1.1).epsilon(0.01));
    CHECK(s2.wbar[2] == doctest::Approx(-0.05).epsilon(0.05));
    CHECK(s2.min_value > s1.min_value);

    // signed row-sum pattern: positive entry for p, negative for active shorts
    const auto& A = s2.reduced_rowsums;
    CHECK(A[0] > 0.0);
    for (int k = 1; k < s2.nbar; ++k) CHECK(A[k] < 0.0);

    check_kkt(model.cov, FeasibleRegion::signed_simplex(4, 2, 0), s1);
    check_kkt(model.cov, FeasibleRegion::signed_simplex(4, 2, 1), s2);
}

TEST_CASE("low-correlation splits collapse to vertices") {
    lnt::ModelSpec model = lnt_test::four_asset_model(0.2, 2);
    for (int p = 0; p < 2; ++p) {
        QpSolution sol = lnt::solve(model.cov, FeasibleRegion::signed_simplex(4, 2, p));
        CHECK(sol.active_set == std::vector<int>{p});
        CHECK(sol.wbar[p] == doctest::Approx(1.0));
        CHECK(sol.min_value == doctest::Approx(model.cov(p, p)));
    }
}

TEST_CASE("nondegeneracy verdicts on the two-component example") {
    SUBCASE("no inactive indices: vacuously nondegenerate") {
        lnt::ModelSpec model = lnt_test::pair_model(1.0, 1.0, 0.0);
        QpSolution sol = lnt::solve(model.cov, FeasibleRegion::sum_simplex(2));
        CHECK(sol.assumption_ok);
        CHECK(sol.assumption_margins.empty());
    }
    SUBCASE("correlation above the variance ratio: holds at the vertex") {
        lnt::ModelSpec model = lnt_test::pair_model(3.0, 2.0, 0.9);
        QpSolution sol = lnt::solve(model.cov, FeasibleRegion::sum_simplex(2));
        CHECK(sol.active_set == std::vector<int>{1});
        CHECK(sol.assumption_ok);
        REQUIRE(sol.assumption_margins.size() == 1);
        CHECK(sol.assumption_margins[0].second == doctest::Approx(1.4).epsilon(1e-12));
    }
    SUBCASE("correlation equal to the variance ratio: degenerate, rejected") {
        lnt::ModelSpec model = lnt_test::pair_model(3.0, 2.0, 2.0 / 3.0);
        QpSolution sol = lnt::solve(model.cov, FeasibleRegion::sum_simplex(2));
        CHECK(sol.active_set == std::vector<int>{1});
        CHECK(!sol.assumption_ok);
        CHECK(sol.assumption_borderline);
    }
}

TEST_CASE("two-component closed form") {
    CHECK(lnt::two_lognormal_closed_form(1.0, 1.0, 0.0) == doctest::Approx(0.5));
    CHECK(lnt::two_lognormal_closed_form(3.0, 2.0, 0.9) == 0.0);
    CHECK(lnt::two_lognormal_closed_form(2.0, 1.0, 0.25) == doctest::Approx(0.125));
    CHECK_THROWS_AS(lnt::two_lognormal_closed_form(1.0, 2.0, 0.0), lnt::DomainError);
    CHECK_THROWS_AS(lnt::two_lognormal_closed_form(2.0, 1.0, 1.0), lnt::DomainError);
}

TEST_CASE("closed form agrees with the solver across random pairs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 60; ++rep) {
        const double s2 = 0.2 + 2.8 * u(rng);
        const double s1 = s2 + 2.5 * u(rng);
        const double rho = -0.95 + 1.9 * u(rng);
        lnt::ModelSpec model = lnt_test::pair_model(s1, s2, rho);
        QpSolution sol = lnt::solve(model.cov, FeasibleRegion::sum_simplex(2));
        CHECK(sol.wbar[0] ==
              doctest::Approx(lnt::two_lognormal_closed_form(s1, s2, rho)).epsilon(1e-8));
    }
}

TEST_CASE("random models: scale invariance, permutation equivariance, restriction") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 30; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 7);
        CovMatrix cov(lnt_test::random_spd(n, rng));
        FeasibleRegion region = FeasibleRegion::sum_simplex(n);
        QpSolution sol = lnt::solve(cov, region);
        check_kkt(cov, region, sol);

        CHECK(sol.min_value <= cov.entries().diagonal().minCoeff() + 1e-12);

        // scaling the matrix leaves the minimizer unchanged, scales the value
        CovMatrix scaled(3.5 * cov.entries());
        QpSolution ssol = lnt::solve(scaled, region);
        CHECK((ssol.wbar - sol.wbar).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(ssol.min_value == doctest::Approx(3.5 * sol.min_value).epsilon(1e-10));

        // permuting the matrix permutes the weights
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::MatrixXd pb(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) pb(i, j) = cov(perm[i], perm[j]);
        QpSolution psol = lnt::solve(CovMatrix(pb), region);
        for (int i = 0; i < n; ++i) {
            CHECK(psol.wbar[i] == doctest::Approx(sol.wbar[perm[i]]).epsilon(1e-8));
        }

        // re-solving restricted to the support reproduces the active weights
        CovMatrix reduced = lnt::principal_submatrix(cov, sol.active_set);
        QpSolution rsol = lnt::solve(reduced, FeasibleRegion::sum_simplex(sol.nbar));
        for (int k = 0; k < sol.nbar; ++k) {
            CHECK(rsol.wbar[k] == doctest::Approx(sol.wbar[sol.active_set[k]]).epsilon(1e-10));
        }

        // signed region: the vertex e^p is feasible
        const int m = 1 + static_cast<int>(rng() % n);
        const int p = static_cast<int>(rng() % m);
        FeasibleRegion signed_region = FeasibleRegion::signed_simplex(n, m, p);
        QpSolution sgn = lnt::solve(cov, signed_region);
        check_kkt(cov, signed_region, sgn);
        CHECK(sgn.min_value <= cov(p, p) + 1e-12);
        CHECK(sgn.wbar[p] > 0.0);
    }
}

TEST_CASE("iterative path matches the KKT certificate above the enumeration cutoff") {
    std::mt19937_64 rng(123);
    for (int rep = 0; rep < 4; ++rep) {
        const int n = 20 + static_cast<int>(rng() % 6);
        CovMatrix cov(lnt_test::random_spd(n, rng));
        FeasibleRegion region = FeasibleRegion::sum_simplex(n);
        QpSolution sol = lnt::solve(cov, region);
        check_kkt(cov, region, sol);

        FeasibleRegion sregion = FeasibleRegion::signed_simplex(n, 2, 0);
        QpSolution ssol = lnt::solve(cov, sregion);
        check_kkt(cov, sregion, ssol);
    }
}

TEST_CASE("pair region relaxes both splits") {
    lnt::ModelSpec model = lnt_test::four_asset_model(0.2, 2);
    FeasibleRegion pair = FeasibleRegion::pair_simplex(4, 2, 0, 1);
    QpSolution sol = lnt::solve(model.cov, pair);
    check_kkt(model.cov, pair, sol);
    QpSolution s1 = lnt::solve(model.cov, FeasibleRegion::signed_simplex(4, 2, 0));
    QpSolution s2 = lnt::solve(model.cov, FeasibleRegion::signed_simplex(4, 2, 1));
    CHECK(sol.min_value <= std::min(s1.min_value, s2.min_value) + 1e-12);
}

TEST_CASE("region and dimension mismatches are rejected") {
    CovMatrix cov(Eigen::MatrixXd::Identity(3, 3));
    CHECK_THROWS_AS(lnt::solve(cov, FeasibleRegion::sum_simplex(4)), lnt::ValidationError);
    CHECK_THROWS_AS(FeasibleRegion::signed_simplex(3, 2, 2), lnt::ValidationError);
    CHECK_THROWS_AS(FeasibleRegion::pair_simplex(3, 2, 0, 0), lnt::ValidationError);
}
