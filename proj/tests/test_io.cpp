#include "catch_amalgamated.hpp"

#include <sstream>

#include "parseries/io.hpp"
#include "test_support.hpp"

using namespace parseries;

TEST_CASE("CSV round trip is exact", "[io]") {
    const Matrix y = test_support::random_matrix(5, 3, 1) * 1e3;
    for (bool header : {false, true}) {
        std::stringstream ss;
        io::write_csv(ss, y, header);
        const Matrix back = io::read_csv(ss, header);
        CHECK(back == y);
    }
}

TEST_CASE("CSV errors name the row", "[io]") {
    std::stringstream ragged("1,2\n3\n");
    try {
        io::read_csv(ragged);
        FAIL("expected a parse error");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    std::stringstream junk("# comment\n1,x\n");
    CHECK_THROWS_AS(io::read_csv(junk), parse_error);
    std::stringstream empty("\n# only comments\n");
    CHECK_THROWS_AS(io::read_csv(empty), parse_error);
}

TEST_CASE("Sigma spec strings", "[io]") {
    CHECK(std::get<ScalarVar>(io::parse_sigma_spec("scalar:2.5")).variance == 2.5);
    CHECK(std::get<DiagonalVar>(io::parse_sigma_spec("diag:1,2,3")).variances.size() == 3);
    const auto full = std::get<FullPd>(io::parse_sigma_spec("full:2,1,1,2")).sigma;
    CHECK(full(0, 1) == 1.0);
    const auto g = std::get<Green>(io::parse_sigma_spec("green:1,2;3,4"));
    CHECK(g.b[1] == 4.0);
    CHECK_THROWS_AS(io::parse_sigma_spec("full:1,2,3"), parse_error);
    CHECK_THROWS_AS(io::parse_sigma_spec("wishart:3"), parse_error);
    CHECK_THROWS_AS(io::parse_sigma_spec("scalar"), parse_error);
    CHECK_THROWS_AS(io::parse_sigma_spec("scalar:-1"), parseries::domain_error);
}

TEST_CASE("number lists", "[io]") {
    CHECK(io::parse_count_list("1, 2,100000", "k") == std::vector<std::size_t>{1, 2, 100000});
    CHECK_THROWS_AS(io::parse_count_list("1,-2", "k"), parse_error);
    CHECK(io::format_double(0.1) == "0.1");
}
