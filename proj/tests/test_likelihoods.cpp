#include "catch_amalgamated.hpp"

#include <cmath>
#include <vector>

#include "test_support.hpp"

using namespace parseries;
using test_support::dense_gamma;
using test_support::dense_wq;
using test_support::derivative;
using test_support::random_matrix;
using test_support::rel_err;

namespace {

double log_pdet(const Matrix& a, Eigen::Index rank) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    double s = 0.0;
    for (Eigen::Index i = a.rows() - rank; i < a.rows(); ++i) s += std::log(es.eigenvalues()(i));
    return s;
}

// Profiled Gaussian log likelihood, built from a dense inverse (constants dropped).
double dense_profile(const Matrix& y, const std::vector<double>& pts, double beta, ModelKind model,
                     const Matrix& x) {
    const Matrix p = dense_wq(dense_gamma(pts, beta), x);
    const double m = static_cast<double>(y.rows() - x.cols());
    const double k = static_cast<double>(y.cols());
    const double head = 0.5 * k * log_pdet(p, y.rows() - x.cols());
    const Matrix f = y.transpose() * p * y;
    switch (model) {
        case ModelKind::I: return head - 0.5 * m * k * std::log(f.trace());
        case ModelKind::II: {
            double s = 0.0;
            for (Eigen::Index r = 0; r < f.rows(); ++r) s += std::log(f(r, r));
            return head - 0.5 * m * s;
        }
        case ModelKind::III: return head - 0.5 * m * std::log(f.determinant());
    }
    return 0.0;
}

double dense_sequential(const Matrix& y, const std::vector<double>& pts, double beta, const Matrix& x, bool markov) {
    const Matrix g = dense_gamma(pts, beta);
    const auto n = y.rows();
    const auto m = n - x.cols();
    double total = 0.0;
    for (Eigen::Index r = 0; r < y.cols(); ++r) {
        Matrix span = x;
        if (markov && r > 0) {
            span.conservativeResize(n, x.cols() + 1);
            span.col(x.cols()) = y.col(r - 1);
        } else if (!markov && r > 0) {
            span.conservativeResize(n, x.cols() + r);
            span.rightCols(r) = y.leftCols(r);
        }
        const auto rank = n - span.cols();
        if (rank <= 0) break;
        const Matrix p = dense_wq(g, span);
        total += 0.5 * log_pdet(p, rank) - 0.5 * static_cast<double>(rank) * std::log(y.col(r).dot(p * y.col(r)));
    }
    (void)m;
    return total;
}

}  // namespace

TEST_CASE("profile likelihoods agree with dense oracles up to a constant", "[likelihood]") {
    const Ar1Model ar1(7);
    const Matrix y = random_matrix(7, 3, 101);
    for (std::size_t p : {0u, 1u, 2u}) {
        const auto x = DesignMatrix::polynomial(ar1.points(), p);
        const std::optional<DesignMatrix> xo = p ? std::optional(x) : std::nullopt;
        for (auto model : {ModelKind::I, ModelKind::II, ModelKind::III}) {
            const double a = profile_loglik(y, ar1, 0.2, model, xo) - profile_loglik(y, ar1, -0.5, model, xo);
            const double b = dense_profile(y, ar1.points(), 0.2, model, x.matrix()) -
                             dense_profile(y, ar1.points(), -0.5, model, x.matrix());
            CHECK(a == Catch::Approx(b).epsilon(1e-9).margin(1e-9));
        }
    }
}

TEST_CASE("scores are derivatives of the likelihoods", "[likelihood]") {
    const Ar1Model ar1(std::vector<double>{0.0, 1.0, 1.5, 3.0, 4.0, 4.5, 7.0, 8.0});
    const Matrix y = random_matrix(8, 4, 7);
    for (std::size_t p : {0u, 1u, 2u})
        for (auto model : {ModelKind::I, ModelKind::II, ModelKind::III})
            for (double beta : {0.15, 0.55, 0.85}) {
                const auto x = p ? std::optional(DesignMatrix::polynomial(ar1.points(), p)) : std::nullopt;
                const double fd =
                    derivative([&](double b) { return profile_loglik(y, ar1, b, model, x); }, beta, 1e-4);
                CHECK(rel_err(score(y, ar1, beta, model, x), fd) < 1e-7);
            }
}

TEST_CASE("closed-form information", "[likelihood]") {
    const auto b0 = gamma_of(Ar1Model(8), 0.0);
    CHECK(expected_info(4, b0, ModelKind::III) == Catch::Approx(12.8).epsilon(1e-12));
    for (std::size_t k = 0; k <= 8; ++k)
        CHECK(expected_info(k, b0, ModelKind::III) == Catch::Approx(expected_info(8 - k, b0, ModelKind::III)).margin(1e-12));
    CHECK(expected_info(8, b0, ModelKind::III) == 0.0);
    CHECK_THROWS_AS(expected_info(9, b0, ModelKind::III), parseries::domain_error);
    // k = 1: all three models coincide
    const auto b = gamma_of(Ar1Model(8), 0.4);
    const double i1 = expected_info(1, b, ModelKind::I);
    CHECK(expected_info(1, b, ModelKind::II) == Catch::Approx(i1));
    CHECK(expected_info(1, b, ModelKind::III) == Catch::Approx(i1));
    CHECK(efficiency_II_vs_I(10, 1) == 1.0);
    CHECK(efficiency_II_vs_I(10, 100000) == Catch::Approx(10.0 / 12.0).margin(1e-4));
}

TEST_CASE("model III collapses when k reaches m", "[likelihood]") {
    const Ar1Model ar1(6);
    const Matrix y = random_matrix(6, 6, 9);
    const double l0 = profile_loglik(y, ar1, -0.7, ModelKind::III);
    for (double beta : {-0.3, 0.0, 0.4, 0.9})
        CHECK(std::abs(profile_loglik(y, ar1, beta, ModelKind::III) - l0) < 1e-8 * (1.0 + std::abs(l0)));
    CHECK(score(y, ar1, 0.3, ModelKind::III) == 0.0);
    CHECK(is_degenerate(ModelKind::III, 6, 6));
    CHECK_THROWS_AS(fit_beta(y, ar1, ModelKind::III), degenerate_likelihood);

    // k > m: pseudo-determinant form, also flat in beta
    const Matrix yw = random_matrix(6, 8, 10);
    const double lw = profile_loglik(yw, ar1, 0.1, ModelKind::III);
    CHECK(std::abs(profile_loglik(yw, ar1, 0.8, ModelKind::III) - lw) < 1e-8 * (1.0 + std::abs(lw)));
}

TEST_CASE("model III is invariant under Y -> Yg", "[likelihood]") {
    const Ar1Model ar1(9);
    const Matrix y = random_matrix(9, 4, 21);
    const Matrix g = random_matrix(4, 4, 22);
    const double shift = -9.0 * std::log(std::abs(g.determinant()));
    for (double beta : {-0.2, 0.35, 0.8}) {
        CHECK(score(y * g, ar1, beta, ModelKind::III) == Catch::Approx(score(y, ar1, beta, ModelKind::III)).epsilon(1e-9));
        CHECK(profile_loglik(y * g, ar1, beta, ModelKind::III) - profile_loglik(y, ar1, beta, ModelKind::III) ==
              Catch::Approx(shift).epsilon(1e-9));
    }
}

TEST_CASE("fit recovers beta on a long record", "[likelihood]") {
    const Ar1Model ar1(300);
    const auto b = gamma_of(ar1, 0.5);
    const Matrix y = sample_gaussian(b.gamma, Matrix::Identity(3, 3), 77);
    for (auto model : {ModelKind::I, ModelKind::II, ModelKind::III}) {
        const auto fit = fit_beta(y, ar1, model);
        CHECK(std::abs(fit.beta_hat - 0.5) < 4.0 * fit.se);
        CHECK(std::abs(score(y, ar1, fit.beta_hat, model)) < 1e-3);
        CHECK_FALSE(fit.boundary);
    }
    CHECK_THROWS_AS(fit_beta(y, ar1, ModelKind::I, std::nullopt, SearchOptions{0.5, 0.2, 1e-8}),
                    parseries::domain_error);
}

TEST_CASE("evaluate reports observed information", "[likelihood]") {
    const Ar1Model ar1(12);
    const Matrix y = random_matrix(12, 3, 4);
    const auto e = evaluate(y, ar1, 0.3, ModelKind::II);
    const double fd = -derivative([&](double b) { return score(y, ar1, b, ModelKind::II); }, 0.3);
    CHECK(e.observed_info == Catch::Approx(fd).epsilon(1e-4));
    CHECK(e.expected_info > 0.0);
}

TEST_CASE("sequential likelihoods match a dense construction", "[likelihood]") {
    const Ar1Model ar1(7);
    const auto x = DesignMatrix::intercept(7);
    const Matrix y = random_matrix(7, 8, 31);
    for (double beta : {0.1, 0.6}) {
        CHECK(ut_subgroup_loglik(y, ar1, beta, x) ==
              Catch::Approx(dense_sequential(y, ar1.points(), beta, x.matrix(), false)).epsilon(1e-9));
        CHECK(markov_conditional_loglik(y, ar1, beta, x) ==
              Catch::Approx(dense_sequential(y, ar1.points(), beta, x.matrix(), true)).epsilon(1e-9));
    }
}

TEST_CASE("sequential scores", "[likelihood]") {
    const Ar1Model ar1(8);
    const auto x = DesignMatrix::intercept(8);
    const Matrix y = random_matrix(8, 9, 12);
    const std::vector<std::size_t> order{3, 1, 0, 2, 8, 7, 6, 5, 4};
    for (double beta : {0.2, 0.7}) {
        const double fu = derivative([&](double b) { return ut_subgroup_loglik(y, ar1, b, x, order); }, beta);
        CHECK(rel_err(ut_subgroup_score(y, ar1, beta, x, order), fu) < 1e-7);
        const double fm = derivative([&](double b) { return markov_conditional_loglik(y, ar1, b, x, order); }, beta);
        CHECK(rel_err(markov_conditional_score(y, ar1, beta, x, order), fm) < 1e-7);
    }
    // the rank-one term carries no information about beta
    const auto terms = ut_subgroup_term_scores(y, gamma_of(ar1, 0.4), x);
    REQUIRE(terms.size() == 7);
    CHECK(terms.back() == 0.0);
}

TEST_CASE("distance forms", "[likelihood]") {
    const Ar1Model ar1(10);
    const auto x = DesignMatrix::polynomial(ar1.points(), 2);
    const Matrix y = random_matrix(10, 3, 55) + Matrix::Constant(10, 3, 2.0);
    const auto dp = distance_pair(y);
    const auto per = per_series_distances(y);
    const std::span<const Matrix> per_span(per);

    const double d_dist = distance_loglik_model_I(dp, 3, ar1, 0.7, x) - distance_loglik_model_I(dp, 3, ar1, 0.1, x);
    const double d_reml = profile_loglik(y, ar1, 0.7, ModelKind::I, x) - profile_loglik(y, ar1, 0.1, ModelKind::I, x);
    CHECK(std::abs(d_dist - d_reml) < 1e-9);
    const double d2 = distance_loglik_model_II(per_span, ar1, 0.7, x) - distance_loglik_model_II(per_span, ar1, 0.1, x);
    const double r2 = profile_loglik(y, ar1, 0.7, ModelKind::II, x) - profile_loglik(y, ar1, 0.1, ModelKind::II, x);
    CHECK(std::abs(d2 - r2) < 1e-9);

    for (double beta : {0.25, 0.75}) {
        const double f1 = derivative([&](double b) { return distance_loglik_model_I(dp, 3, ar1, b, x); }, beta);
        CHECK(rel_err(distance_score_model_I(dp, 3, ar1, beta, x), f1) < 1e-7);
        const double f2 = derivative([&](double b) { return distance_loglik_model_II(per_span, ar1, b, x); }, beta);
        CHECK(rel_err(distance_score_model_II(per_span, ar1, beta, x), f2) < 1e-7);
    }
    CHECK_THROWS_AS(distance_loglik_model_I(dp, 3, ar1, 0.5, DesignMatrix::none(10)), parseries::domain_error);
}

TEST_CASE("model names", "[likelihood]") {
    CHECK(parse_model_kind("II") == ModelKind::II);
    CHECK(parse_model_kind("3") == ModelKind::III);
    CHECK(to_string(ModelKind::I) == "I");
    CHECK_THROWS(parse_model_kind("IV"));
}
