#include "catch_amalgamated.hpp"

#include <cmath>

#include "test_support.hpp"

using namespace parseries;

TEST_CASE("low-order moments", "[haar]") {
    MomentQuery q;
    q.n = 5;
    q.rows = {1, 1, 1, 1};
    q.cols = {1, 1, 1, 1};
    CHECK(haar_second_moment(q) == Catch::Approx(0.2));
    // E(H_11^4) = 3 / (n (n + 2))
    CHECK(haar_fourth_moment(q) == Catch::Approx(3.0 / 35.0));
    // E(H_11^2 H_22^2) = (n + 1) / (n (n - 1) (n + 2))
    q.rows = {1, 1, 2, 2};
    q.cols = {1, 1, 2, 2};
    CHECK(haar_fourth_moment(q) == Catch::Approx(6.0 / 140.0));
    // E(H_11 H_22 H_12 H_21) = -1 / (n (n - 1) (n + 2))
    q.rows = {1, 2, 1, 2};
    q.cols = {1, 2, 2, 1};
    CHECK(haar_fourth_moment(q) == Catch::Approx(-1.0 / 140.0));
    // cumulant of H_11^4 = 3/(n(n+2)) - 3/n^2
    q.rows = {1, 1, 1, 1};
    q.cols = {1, 1, 1, 1};
    CHECK(haar_fourth_cumulant(q) == Catch::Approx(3.0 / 35.0 - 3.0 / 25.0));
    q.rows = {1, 1, 1, 6};
    CHECK_THROWS_AS(haar_fourth_moment(q), parseries::domain_error);
}

TEST_CASE("trace moment expectations", "[haar]") {
    for (std::size_t n : {2u, 3u, 5u, 10u}) {
        const auto e = trace_moment_expectations(n);
        CHECK(e[0] == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(e[1] == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(e[2] == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(e[3] == Catch::Approx(3.0).epsilon(1e-12));
    }
}

TEST_CASE("tr(Z'AZ) moments", "[haar]") {
    const Matrix a = test_support::random_symmetric(6, 1);
    const Matrix b = test_support::random_symmetric(6, 2);
    CHECK(expected_tr_quad(a, 3) == Catch::Approx(0.5 * a.trace()));
    // k = n: tr(Z'AZ) = tr(A) exactly
    const auto full = product_and_cov_tr_quad(a, b, 6);
    CHECK(std::abs(full.covariance) < 1e-12);
    CHECK(full.product_moment == Catch::Approx(a.trace() * b.trace()));
    // k = 0: zero
    CHECK(product_and_cov_tr_quad(a, b, 0).product_moment == 0.0);
    // covariance = product moment minus the product of means
    const auto m = product_and_cov_tr_quad(a, b, 2);
    CHECK(m.covariance == Catch::Approx(m.product_moment - expected_tr_quad(a, 2) * expected_tr_quad(b, 2)));
    CHECK_THROWS_AS(product_and_cov_tr_quad(a, b, 7), parseries::domain_error);
}

TEST_CASE("pairings and bi-partition counts", "[haar]") {
    CHECK(perfect_matchings(2).size() == 1);
    CHECK(perfect_matchings(4).size() == 3);
    CHECK(perfect_matchings(6).size() == 15);
    CHECK(perfect_matchings(8).size() == 105);
    const auto c4 = bipartition_pair_counts(4);
    CHECK(c4 == std::map<std::size_t, std::size_t>{{1, 6}, {2, 3}});
    const auto c6 = bipartition_pair_counts(6);
    CHECK(c6 == std::map<std::size_t, std::size_t>{{1, 120}, {2, 90}, {3, 15}});
    std::size_t total = 0;
    for (const auto& [blocks, count] : bipartition_pair_counts(8)) total += count;
    CHECK(total == 105 * 105);
    CHECK_THROWS_AS(bipartition_pair_counts(3), parseries::domain_error);
    CHECK_THROWS_AS(bipartition_pair_counts(0), parseries::domain_error);
}
