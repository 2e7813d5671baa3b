#include "catch_amalgamated.hpp"

#include <cmath>
#include <limits>

#include "test_support.hpp"

using namespace parseries;

TEST_CASE("z scores", "[experiments]") {
    CHECK(mc::z_score(1.2, 0.1, 1.0) == Catch::Approx(2.0));
    CHECK(mc::z_score(1.0, 0.0, 1.0) == 0.0);
    CHECK(std::isinf(mc::z_score(1.1, 0.0, 1.0)));
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const auto r = mc::mean_report(x, 2.5, 0);
    CHECK(r.estimate == 2.5);
    CHECK(r.std_error == Catch::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(r.passes());
    const auto v = mc::variance_report(x, std::nullopt, 0);
    CHECK(v.estimate == Catch::Approx(5.0 / 3.0));
    CHECK(v.passes());
}

TEST_CASE("replicates do not depend on the worker count", "[experiments]") {
    auto f = [](Engine& eng, std::size_t i) {
        std::normal_distribution<double> nd;
        return nd(eng) + static_cast<double>(i);
    };
    const auto one = mc::run_replicates<double>(1001, 7, f, 1);
    const auto four = mc::run_replicates<double>(1001, 7, f, 4);
    CHECK(one == four);

    BartlettConfig cfg;
    cfg.n = 6;
    cfg.k = 2;
    cfg.p = 1;
    cfg.beta = 0.4;
    cfg.model = ModelKind::II;
    cfg.reps = 500;
    cfg.seed = 3;
    const auto a = bartlett_check(cfg);
    cfg.workers = 3;
    const auto b = bartlett_check(cfg);
    CHECK(a.var_score.estimate == b.var_score.estimate);
    CHECK(a.mean_score.estimate == b.mean_score.estimate);
}

TEST_CASE("worker exceptions propagate", "[experiments]") {
    auto f = [](Engine&, std::size_t i) -> double {
        if (i == 5) throw std::runtime_error("boom");
        return 0.0;
    };
    CHECK_THROWS_AS(mc::run_replicates<double>(10, 1, f, 3), std::runtime_error);
}

TEST_CASE("Bartlett check rejects a Sigma outside the model", "[experiments]") {
    BartlettConfig cfg;
    cfg.model = ModelKind::I;
    cfg.k = 2;
    cfg.sigma = DiagonalVar{{1.0, 2.0}};
    cfg.reps = 10;
    CHECK_THROWS_AS(bartlett_check(cfg), parseries::domain_error);
}

TEST_CASE("small Bartlett run", "[experiments]") {
    BartlettConfig cfg;
    cfg.n = 8;
    cfg.k = 3;
    cfg.beta = 0.4;
    cfg.model = ModelKind::III;
    cfg.sigma = FullPd{test_support::random_spd(3, 4)};
    cfg.reps = 4000;
    cfg.seed = 19;
    const auto r = bartlett_check(cfg);
    CHECK(r.mean_score.passes(4.0));
    CHECK(r.var_score.passes(4.0));
}

TEST_CASE("information curve formula column", "[experiments]") {
    InfoCurveConfig cfg;
    cfg.n = 8;
    cfg.beta = 0.0;
    cfg.reps = 200;
    const auto c = info_curve(cfg);
    REQUIRE(c.rows.size() == 8);
    CHECK(c.rows[3].k == 4);
    CHECK(c.rows[3].formula_info == Catch::Approx(12.8));
    CHECK(c.rows[7].formula_info == 0.0);
}

TEST_CASE("degeneracy report", "[experiments]") {
    DegeneracyConfig cfg;
    cfg.n = 7;
    cfg.p = 1;
    cfg.seed = 5;
    const auto r = degeneracy_check(cfg);
    CHECK(r.constant_at_m);
    CHECK(r.spread_at_m <= 1e-8 * (1.0 + r.scale_at_m));
    CHECK(r.spread_single > 1e-3);
}

TEST_CASE("efficiency table", "[experiments]") {
    const auto t = efficiency_table(10, {1, 2, 10, 100000});
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0].efficiency == 1.0);
    for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i].efficiency < t.rows[i - 1].efficiency);
    CHECK(t.limit == Catch::Approx(10.0 / 12.0));
}

TEST_CASE("deletion experiment preconditions", "[experiments]") {
    DeletionConfig cfg;
    cfg.k_sub = 0;
    CHECK_THROWS_AS(deletion_experiment(cfg), parseries::domain_error);
    cfg.k_sub = 4;
    cfg.k_full = 8;
    CHECK_THROWS_AS(deletion_experiment(cfg), parseries::domain_error);
}
