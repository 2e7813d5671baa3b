#include "catch_amalgamated.hpp"

#include <cmath>
#include <vector>

#include "test_support.hpp"

using namespace parseries;
using test_support::dense_gamma;

TEST_CASE("beta = 0 gives the identity", "[covariance]") {
    const auto b = gamma_of(Ar1Model(5), 0.0);
    CHECK(linalg::max_abs(b.gamma - Matrix::Identity(5, 5)) == 0.0);
    CHECK(linalg::max_abs(b.w - Matrix::Identity(5, 5)) < 1e-15);
    CHECK(b.log_det_gamma == 0.0);
}

TEST_CASE("tri-diagonal inverse matches a dense inverse", "[covariance]") {
    const std::vector<std::vector<double>> grids{
        {1, 2, 3, 4, 5, 6}, {0.0, 0.5, 1.7, 2.0, 4.25}, {1, 3, 4, 8, 9, 10, 15}};
    for (const auto& pts : grids) {
        const Ar1Model ar1(pts);
        for (double beta : {0.05, 0.3, 0.7, 0.95}) {
            const auto b = gamma_of(ar1, beta);
            const Matrix g = dense_gamma(pts, beta);
            CHECK(linalg::max_abs(b.gamma - g) < 1e-14);
            CHECK(linalg::max_abs(b.w - g.inverse()) < 1e-9 * (1.0 + linalg::max_abs(b.w)));
            CHECK(b.log_det_gamma == Catch::Approx(std::log(g.determinant())).epsilon(1e-10));
            // W is tri-diagonal
            for (Eigen::Index i = 0; i < b.w.rows(); ++i)
                for (Eigen::Index j = i + 2; j < b.w.cols(); ++j) CHECK(b.w(i, j) == 0.0);
        }
    }
}

TEST_CASE("negative beta on an integer grid", "[covariance]") {
    const Ar1Model ar1(6);
    const auto b = gamma_of(ar1, -0.6);
    const Matrix g = dense_gamma(ar1.points(), -0.6);
    CHECK(linalg::max_abs(b.gamma - g) < 1e-14);
    CHECK(linalg::max_abs(b.w * b.gamma - Matrix::Identity(6, 6)) < 1e-12);
}

TEST_CASE("D is the beta derivative of Gamma", "[covariance]") {
    const Ar1Model ar1(std::vector<double>{0.0, 1.0, 2.5, 3.0, 6.0});
    for (double beta : {0.2, 0.6, 0.9}) {
        const double h = 1e-6;
        const auto b = gamma_of(ar1, beta);
        const Matrix fd = (gamma_of(ar1, beta + h).gamma - gamma_of(ar1, beta - h).gamma) / (2 * h);
        CHECK(linalg::max_abs(b.d - fd) < 1e-6);
    }
    // a lag below one has an unbounded derivative at beta = 0
    CHECK_THROWS_AS(gamma_of(ar1, 0.0), parseries::domain_error);
    CHECK_NOTHROW(gamma_of(Ar1Model(std::vector<double>{0.0, 1.0, 2.5}), 0.0));
}

TEST_CASE("V at beta = 0 equals 2n(n-1)", "[covariance]") {
    for (std::size_t n : {2u, 5u, 8u, 13u}) {
        const auto b = gamma_of(Ar1Model(n), 0.0);
        CHECK(v_factor(b) == Catch::Approx(2.0 * n * (n - 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("domain errors", "[covariance]") {
    const Ar1Model ar1(4);
    CHECK_THROWS_AS(gamma_of(ar1, 1.0), parseries::domain_error);
    CHECK_THROWS_AS(gamma_of(ar1, -1.0), parseries::domain_error);
    CHECK_THROWS_AS(gamma_of(ar1, std::nan("")), parseries::domain_error);
    CHECK_THROWS_AS(gamma_of(Ar1Model(std::vector<double>{0.0, 0.5, 1.0}), -0.3), parseries::domain_error);
    CHECK_THROWS_AS(Ar1Model(1), parseries::domain_error);
    CHECK_THROWS_AS(Ar1Model(std::vector<double>{0.0, 1.0, 1.0}), parseries::domain_error);
}

TEST_CASE("Sigma specifications", "[covariance]") {
    CHECK(linalg::max_abs(build_sigma(ScalarVar{2.0}, 3) - 2.0 * Matrix::Identity(3, 3)) == 0.0);
    const Matrix d = build_sigma(DiagonalVar{{1.0, 4.0}}, 2);
    CHECK(d(1, 1) == 4.0);
    CHECK(d(0, 1) == 0.0);
    CHECK_THROWS_AS(build_sigma(DiagonalVar{{1.0, 4.0}}, 3), parseries::domain_error);

    SECTION("Green matrix has a tri-diagonal inverse") {
        const Green g{{1.0, 1.5, 2.0, 2.5}, {4.0, 3.0, 2.0, 1.0}};
        const Matrix s = build_sigma(g, 4);
        CHECK(s(0, 3) == Catch::Approx(1.0));
        CHECK(s(3, 0) == Catch::Approx(1.0));
        const Matrix inv = s.inverse();
        CHECK(std::abs(inv(0, 2)) < 1e-12);
        CHECK(std::abs(inv(0, 3)) < 1e-12);
        CHECK(std::abs(inv(1, 3)) < 1e-12);
    }

    SECTION("non-PD input reports the failing minor") {
        Matrix bad(2, 2);
        bad << 1.0, 2.0, 2.0, 1.0;
        try {
            build_sigma(FullPd{bad}, 2);
            FAIL("expected a domain error");
        } catch (const parseries::domain_error& e) {
            CHECK(std::string(e.what()).find("leading minor of order 2") != std::string::npos);
        }
        Matrix asym(2, 2);
        asym << 1.0, 0.1, 0.2, 1.0;
        CHECK_THROWS_AS(build_sigma(FullPd{asym}, 2), parseries::domain_error);
    }
}
