#include <doctest.h>

#include <cmath>
#include <random>

#include "lnt/matrix.hpp"
#include "support/models.hpp"

using lnt::CovMatrix;
using lnt::InverseSummary;

TEST_CASE("cholesky of the identity is the identity") {
    CovMatrix cov(Eigen::MatrixXd::Identity(3, 3));
    CHECK((lnt::cholesky(cov) - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("cholesky of a 1x1 matrix is the square root") {
    Eigen::MatrixXd b(1, 1);
    b << 4.0;
    CHECK(lnt::cholesky(CovMatrix(b))(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("cholesky 2x2 hand expansion") {
    Eigen::MatrixXd b(2, 2);
    b << 4.0, 1.0, 1.0, 4.0;
    Eigen::MatrixXd L = lnt::cholesky(CovMatrix(b));
    CHECK(L(0, 0) == doctest::Approx(2.0));
    CHECK(L(1, 0) == doctest::Approx(0.5));
    CHECK(L(1, 1) == doctest::Approx(std::sqrt(3.75)));
    CHECK(L(0, 1) == 0.0);
}

TEST_CASE("indefinite and near-singular matrices are rejected") {
    Eigen::MatrixXd b(2, 2);
    b << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(CovMatrix{b}, lnt::NotPositiveDefinite);
    b << 1.0, 1.0, 1.0, 1.0;  // singular
    CHECK_THROWS_AS(CovMatrix{b}, lnt::NotPositiveDefinite);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, 0.2, 1.0;
    CHECK_THROWS_AS(CovMatrix{asym}, lnt::ValidationError);
}

TEST_CASE("inverse row sums: identity and diagonal cases") {
    InverseSummary id = lnt::invert_with_rowsums(CovMatrix(Eigen::MatrixXd::Identity(4, 4)));
    CHECK(id.determinant == doctest::Approx(1.0));
    for (int k = 0; k < 4; ++k) CHECK(id.row_sums[k] == doctest::Approx(1.0));

    Eigen::VectorXd sig2(3);
    sig2 << 4.0, 0.25, 9.0;
    InverseSummary diag = lnt::invert_with_rowsums(CovMatrix(sig2.asDiagonal()));
    for (int k = 0; k < 3; ++k) CHECK(diag.row_sums[k] == doctest::Approx(1.0 / sig2[k]));
}

TEST_CASE("inverse row sums: correlated 2x2 closed form") {
    // unit variances, correlation 1/2: row sums 1/(1 + rho), det 1 - rho^2
    Eigen::MatrixXd b(2, 2);
    b << 1.0, 0.5, 0.5, 1.0;
    InverseSummary inv = lnt::invert_with_rowsums(CovMatrix(b));
    CHECK(inv.row_sums[0] == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
    CHECK(inv.row_sums[1] == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
    CHECK(inv.determinant == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("principal submatrix basics and errors") {
    lnt::ModelSpec model = lnt_test::four_asset_model(0.8);
    const std::vector<int> first_two{0, 1};
    CovMatrix sub = lnt::principal_submatrix(model.cov, first_two);
    CHECK(sub(0, 0) == doctest::Approx(4.0));
    CHECK(sub(0, 1) == doctest::Approx(3.68));
    CHECK(sub(1, 1) == doctest::Approx(5.29));

    const std::vector<int> all{0, 1, 2, 3};
    CHECK((lnt::principal_submatrix(model.cov, all).entries() - model.cov.entries())
              .cwiseAbs()
              .maxCoeff() == 0.0);
    const std::vector<int> singleton{2};
    CHECK(lnt::principal_submatrix(model.cov, singleton)(0, 0) == doctest::Approx(9.0));

    CHECK_THROWS_AS(lnt::principal_submatrix(model.cov, std::vector<int>{}), lnt::EmptyIndexSet);
    CHECK_THROWS_AS(lnt::principal_submatrix(model.cov, std::vector<int>{4}),
                    lnt::IndexOutOfRange);
    CHECK_THROWS_AS(lnt::principal_submatrix(model.cov, std::vector<int>{1, 1}),
                    lnt::ValidationError);
}

TEST_CASE("random models: inverse consistency, double inversion, permutations") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 40; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 7);
        CovMatrix cov(lnt_test::random_spd(n, rng));
        InverseSummary inv = lnt::invert_with_rowsums(cov);

        const double scale = cov.entries().cwiseAbs().maxCoeff();
        CHECK((inv.inverse * cov.entries() - Eigen::MatrixXd::Identity(n, n))
                  .cwiseAbs()
                  .maxCoeff() < 1e-10 * std::max(1.0, scale));
        CHECK(inv.row_sums.sum() > 0.0);

        // inverting the inverse returns the original
        InverseSummary back = lnt::invert_with_rowsums(CovMatrix(inv.inverse));
        CHECK((back.inverse - cov.entries()).cwiseAbs().maxCoeff() < 1e-8 * scale);

        // a permutation of the matrix permutes the row sums identically
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::MatrixXd pb(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) pb(i, j) = cov(perm[i], perm[j]);
        InverseSummary pinv = lnt::invert_with_rowsums(CovMatrix(pb));
        for (int i = 0; i < n; ++i) {
            CHECK(pinv.row_sums[i] ==
                  doctest::Approx(inv.row_sums[perm[i]]).epsilon(1e-9));
        }

        // any principal submatrix stays a valid covariance
        std::vector<int> subset;
        for (int i = 0; i < n; ++i)
            if (rng() % 2 == 0) subset.push_back(i);
        if (subset.empty()) subset.push_back(0);
        CHECK_NOTHROW(lnt::principal_submatrix(cov, subset));
    }
}

TEST_CASE("model spec validation") {
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(lnt::ModelSpec(Eigen::VectorXd::Zero(3), CovMatrix(b), 2),
                    lnt::ValidationError);
    CHECK_THROWS_AS(lnt::ModelSpec(Eigen::VectorXd::Zero(2), CovMatrix(b), 0),
                    lnt::ValidationError);
    CHECK_THROWS_AS(lnt::ModelSpec(Eigen::VectorXd::Zero(2), CovMatrix(b), 3),
                    lnt::ValidationError);
    lnt::ModelSpec ok(Eigen::VectorXd::Zero(2), CovMatrix(b), 1);
    CHECK(!ok.all_positive());
}
