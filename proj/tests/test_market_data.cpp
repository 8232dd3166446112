#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "polymodel/errors.hpp"
#include "polymodel/hermite.hpp"
#include "polymodel/imputation.hpp"
#include "polymodel/io.hpp"
#include "polymodel/panel_io.hpp"
#include "polymodel/synthetic.hpp"
#include "test_support.hpp"

using namespace polymodel;
namespace fs = std::filesystem;

namespace {

std::string data_path(const std::string& name) { return std::string(TEST_DATA_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& content) {
    const std::string path = (fs::temp_directory_path() / name).string();
    write_text_file(path, content);
    return path;
}

} // namespace

TEST_CASE("month parse and format") {
    MonthIndex m = parse_month("2020-07");
    CHECK(m.year == 2020);
    CHECK(m.month == 7);
    CHECK(format_month(m) == "2020-07");
    CHECK(m.plus(6) == parse_month("2021-01"));
    CHECK(m.plus(-7) == parse_month("2019-12"));
    CHECK_THROWS_AS(parse_month("2020-13"), ParseError);
    CHECK_THROWS_AS(parse_month("2020/07"), ParseError);
    CHECK_THROWS_AS(parse_month("20-07"), ParseError);
}

TEST_CASE("align intersects jointly observed months") {
    ReturnSeries y{{2020, 1}, {}};
    ReturnSeries x{{2020, 1}, {}};
    for (int i = 0; i < 12; ++i) {
        y.values.push_back(0.01 * i + 0.001);
        x.values.push_back(0.02 * i - 0.05);
    }
    y.values[4] = std::nullopt; // month 5 of the window

    auto pair = align(y, x, {{2020, 1}, {2020, 12}});
    CHECK(pair.size() == 11);
    CHECK(pair.dropped == 1);
    CHECK(pair.months.front() == MonthIndex{2020, 1});
    CHECK(pair.months[4] == MonthIndex{2020, 6}); // month 5 skipped

    SUBCASE("fully disjoint coverage") {
        ReturnSeries late{{2021, 1}, std::vector<std::optional<double>>(12, 0.01)};
        CHECK_THROWS_AS(align(y, late, {{2020, 1}, {2021, 12}}), InsufficientDataError);
    }
    SUBCASE("complete windows align one-to-one") {
        ReturnSeries a{{2019, 1}, std::vector<std::optional<double>>(48, 0.01)};
        ReturnSeries b{{2019, 1}, std::vector<std::optional<double>>(48, 0.02)};
        auto full = align(a, b, {{2019, 7}, {2022, 6}});
        CHECK(full.size() == 36);
        CHECK(full.dropped == 0);
        CHECK(full.months.front() == MonthIndex{2019, 7});
        CHECK(full.months.back() == MonthIndex{2022, 6});
    }
}

TEST_CASE("load_panel parses the bundled fixture") {
    auto panel = load_panel(data_path("funds_small.csv"), data_path("factors_small.csv"));
    CHECK(panel.funds.size() == 2);
    CHECK(panel.factors.size() == 3);
    CHECK(panel.span_start == MonthIndex{2020, 1});
    CHECK(panel.span_end == MonthIndex{2021, 12});
    CHECK(panel.span_end.serial() - panel.span_start.serial() + 1 == 24);

    const FundRecord* fa = panel.find_fund("FA");
    REQUIRE(fa != nullptr);
    CHECK(fa->returns.values.size() == 24);
    CHECK(fa->returns.at({2020, 1}) == 0.01);
    CHECK(*fa->aum_at({2020, 1}) == 1000123.0);

    // FB reports only months 13..24: twelve missing leading values
    const FundRecord* fb = panel.find_fund("FB");
    REQUIRE(fb != nullptr);
    int leading_missing = 0;
    for (const auto& v : fb->returns.values) {
        if (v) break;
        ++leading_missing;
    }
    CHECK(leading_missing == 12);
    CHECK(fb->returns.at({2021, 1}) == -0.0045);
}

TEST_CASE("load_panel error contracts carry row numbers") {
    SUBCASE("non-numeric cell names its row") {
        try {
            load_panel(data_path("funds_bad_cell.csv"), data_path("factors_small.csv"));
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("row 7") != std::string::npos);
        }
    }
    SUBCASE("duplicate (id, month) row") {
        auto funds = temp_file("dup_funds.csv",
                               "id,date,return,aum\nFA,2020-01,0.01,1\nFA,2020-01,0.02,1\n");
        CHECK_THROWS_WITH_AS(load_panel(funds, data_path("factors_small.csv")),
                             doctest::Contains("duplicate"), ParseError);
    }
    SUBCASE("empty file") {
        auto funds = temp_file("empty_funds.csv", "");
        CHECK_THROWS_AS(load_panel(funds, data_path("factors_small.csv")), ParseError);
        auto header_only = temp_file("header_funds.csv", "id,date,return,aum\n");
        CHECK_THROWS_WITH_AS(load_panel(header_only, data_path("factors_small.csv")),
                             doctest::Contains("empty"), ParseError);
    }
    SUBCASE("malformed date names its row") {
        auto funds =
            temp_file("bad_date.csv", "id,date,return,aum\nFA,2020-1,0.01,1\n");
        CHECK_THROWS_WITH_AS(load_panel(funds, data_path("factors_small.csv")),
                             doctest::Contains("row 2"), ParseError);
    }
    SUBCASE("factor with an internal gap is rejected") {
        auto factors = temp_file("gap_factors.csv",
                                 "id,date,return\nXA,2020-01,0.01\nXA,2020-03,0.01\n");
        CHECK_THROWS_WITH_AS(load_panel(data_path("funds_small.csv"), factors),
                             doctest::Contains("gap"), ParseError);
    }
    SUBCASE("return at -1 or below is rejected") {
        auto funds = temp_file("neg_funds.csv", "id,date,return,aum\nFA,2020-01,-1,1\n");
        CHECK_THROWS_AS(load_panel(funds, data_path("factors_small.csv")), ParseError);
    }
}

TEST_CASE("write-back emitter round-trips bit-exactly on canonical fixtures") {
    auto panel = load_panel(data_path("funds_small.csv"), data_path("factors_small.csv"));
    const auto funds_out = (fs::temp_directory_path() / "roundtrip_funds.csv").string();
    const auto factors_out = (fs::temp_directory_path() / "roundtrip_factors.csv").string();
    write_fund_csv(panel, funds_out);
    write_factor_csv(panel, factors_out);
    CHECK(read_text_file(funds_out) == read_text_file(data_path("funds_small.csv")));
    CHECK(read_text_file(factors_out) == read_text_file(data_path("factors_small.csv")));

    // and the reloaded panel emits the same bytes again
    auto reloaded = load_panel(funds_out, factors_out);
    const auto funds_out2 = (fs::temp_directory_path() / "roundtrip_funds2.csv").string();
    write_fund_csv(reloaded, funds_out2);
    CHECK(read_text_file(funds_out2) == read_text_file(funds_out));
}

TEST_CASE("impute_feature applies the published sentinels") {
    CHECK(impute_feature("Return", std::nullopt) == -30.0);
    CHECK(impute_feature("Sharpe", std::nullopt) == -3.0);
    CHECK(impute_feature("LTS", std::nullopt) == -1.0);
    CHECK(impute_feature("MRaR", std::nullopt) == -3.0);
    CHECK(impute_feature("Sharpe", 1.2) == 1.2);
    CHECK(impute_feature("Return", -0.4) == -0.4);
    CHECK_THROWS_AS(impute_feature("LTA", std::nullopt), ConfigError);
}

TEST_CASE("generate_synthetic determinism and degenerate cases") {
    SyntheticSpec spec;
    spec.n_funds = 4;
    spec.n_factors = 3;
    spec.n_months = 30;
    spec.noise_vol = 0.01;
    spec.missing_rate = 0.2;
    spec.factor_vol = 0.04;
    spec.exposures.push_back({"F00", "X00", {0.004, 0.02, 0.0, 0.0, 0.0}});

    SUBCASE("same seed => bitwise-identical panels") {
        auto a = generate_synthetic(spec, 7);
        auto b = generate_synthetic(spec, 7);
        REQUIRE(a.funds.size() == b.funds.size());
        for (std::size_t i = 0; i < a.funds.size(); ++i) {
            CHECK(a.funds[i].returns.values == b.funds[i].returns.values);
            CHECK(a.funds[i].aum == b.funds[i].aum);
        }
        for (std::size_t j = 0; j < a.factors.size(); ++j)
            CHECK(a.factors[j].returns.values == b.factors[j].returns.values);
        auto c = generate_synthetic(spec, 8);
        CHECK(a.funds[0].returns.values != c.funds[0].returns.values);
    }
    SUBCASE("all-zero coefficients and zero noise give exactly zero returns") {
        SyntheticSpec zero = spec;
        zero.noise_vol = 0.0;
        zero.missing_rate = 0.0;
        zero.exposures = {{"F00", "X00", {0.0, 0.0, 0.0, 0.0, 0.0}}};
        auto panel = generate_synthetic(zero, 3);
        for (const auto& fund : panel.funds)
            for (const auto& v : fund.returns.values) {
                REQUIRE(v.has_value());
                CHECK(*v == 0.0);
            }
    }
    SUBCASE("invalid specs are rejected") {
        SyntheticSpec bad = spec;
        bad.n_funds = 0;
        CHECK_THROWS_AS(generate_synthetic(bad, 1), ConfigError);
        bad = spec;
        bad.noise_vol = -0.1;
        CHECK_THROWS_AS(generate_synthetic(bad, 1), ConfigError);
    }
}

TEST_CASE("synthetic missing rate lands near the requested fraction") {
    SyntheticSpec spec;
    spec.n_funds = 50;
    spec.n_factors = 20;
    spec.n_months = 120;
    spec.noise_vol = 0.01;
    spec.missing_rate = 0.10;
    auto panel = generate_synthetic(spec, 11);
    int missing = 0, total = 0;
    for (const auto& fund : panel.funds)
        for (const auto& v : fund.returns.values) {
            ++total;
            if (!v) ++missing;
        }
    const double frac = static_cast<double>(missing) / total;
    CHECK(frac > 0.08);
    CHECK(frac < 0.12);
}

TEST_CASE("noise-free synthetic funds are exact polynomial images of their factors") {
    SyntheticSpec spec;
    spec.n_funds = 3;
    spec.n_factors = 2;
    spec.n_months = 60;
    spec.noise_vol = 0.0;
    spec.missing_rate = 0.0;
    spec.factor_vol = 0.04;
    spec.exposures = {{"F00", "X00", {0.002, 0.01, 0.003, -0.001, 0.0005}},
                      {"F01", "X01", {0.0, -0.02, 0.0, 0.002, 0.0}},
                      {"F02", "X00", {0.001, 0.005, 0.0, 0.0, 0.001}}};
    auto panel = generate_synthetic(spec, 5);
    for (const auto& [fund, factor] : {std::pair{"F00", "X00"}, {"F01", "X01"}, {"F02", "X00"}}) {
        auto pair = align(panel.find_fund(fund)->returns, panel.find_factor(factor)->returns,
                          {panel.span_start, panel.span_end});
        PolyFit fit = ridge_fit(pair, 0.0);
        CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("synthetic spec JSON schema errors name the offending key") {
    CHECK_THROWS_WITH_AS(SyntheticSpec::from_json_text("{\"funds\": 3}"),
                         doctest::Contains("factors"), ParseError);
    CHECK_THROWS_WITH_AS(SyntheticSpec::from_json_text("not json"),
                         doctest::Contains("JSON"), ParseError);
    const char* good = R"({"funds":2,"factors":1,"months":12,"exposures":
        [{"fund":"F00","factor":"X00","beta":[0,0.01,0,0,0]}],
        "noise_vol":0.01,"missing_rate":0.0,"seed":9})";
    auto spec = SyntheticSpec::from_json_text(good);
    CHECK(spec.n_funds == 2);
    CHECK(spec.exposures.size() == 1);
    CHECK(spec.exposures[0].beta[1] == 0.01);
}
