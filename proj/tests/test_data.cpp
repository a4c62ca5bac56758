#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dualcv/data.hpp"
#include "dualcv/errors.hpp"

#include <cmath>
#include <string>

namespace {

const char* kSchemaText = R"({
  "columns": {
    "hh":        {"role": "id"},
    "wtp_yes":   {"role": "outcome", "vehicle": "cash"},
    "wtc_yes":   {"role": "outcome", "vehicle": "labor"},
    "bid_cash":  {"role": "bid", "vehicle": "cash"},
    "bid_labor": {"role": "bid", "vehicle": "labor"},
    "max_wtp":   {"role": "open_ended", "vehicle": "cash"},
    "max_wtc":   {"role": "open_ended", "vehicle": "labor"},
    "w_slack":   {"role": "wage", "season": "slack"},
    "w_peak":    {"role": "wage", "season": "peak"},
    "income":    {"role": "covariate", "scale": 0.001},
    "young":     {"role": "covariate", "kind": "dummy"},
    "village":   {"role": "passthrough"}
  },
  "bid_design": {"cash": [25, 31, 37], "labor": [1, 2, 3]}
})";

const char* kCsvText =
    "hh,wtp_yes,wtc_yes,bid_cash,bid_labor,max_wtp,max_wtc,w_slack,w_peak,income,young,village\n"
    "a1,1,1,25,1,40,2,13,17,1200,1,north\n"
    "a2,0,1,31,2,20,2.5,NA,18,900,0,north\n"
    "a3,1,0,37,3,37,,14,,1500,1,south\n"
    "a4,0,0,25,1,,0.5,12,16,,0,south\n";

dualcv::Dataset load_fixture() {
    const auto schema = dualcv::SchemaConfig::from_json_text(kSchemaText);
    return dualcv::load_csv_text(kCsvText, schema).dataset;
}

}  // namespace

TEST_CASE("schema validation") {
    CHECK_THROWS_AS(dualcv::SchemaConfig::from_json_text("not json"), dualcv::DataError);
    CHECK_THROWS_AS(dualcv::SchemaConfig::from_json_text("{}"), dualcv::DataError);
    // Outcome without vehicle.
    CHECK_THROWS_AS(dualcv::SchemaConfig::from_json_text(
                        R"({"columns": {"y": {"role": "outcome"}}})"),
                    dualcv::DataError);
    // Missing the labor-side outcome/bid.
    CHECK_THROWS_AS(dualcv::SchemaConfig::from_json_text(R"({"columns": {
        "y1": {"role": "outcome", "vehicle": "cash"},
        "b1": {"role": "bid", "vehicle": "cash"}}})"),
                    dualcv::DataError);
    CHECK_NOTHROW(dualcv::SchemaConfig::from_json_text(kSchemaText));
}

TEST_CASE("bid design validation") {
    dualcv::BidDesign d;
    d.cash_bids = {25, 31, 37};
    d.labor_bids = {1, 2, 3};
    CHECK_NOTHROW(d.validate());
    CHECK(d.has_cash(31.0));
    CHECK_FALSE(d.has_cash(32.0));
    d.labor_bids = {3, 2};  // not increasing
    CHECK_THROWS_AS(d.validate(), dualcv::DataError);
    d.labor_bids = {0, 1};  // not strictly positive
    CHECK_THROWS_AS(d.validate(), dualcv::DataError);
    d.labor_bids = {};
    CHECK_THROWS_AS(d.validate(), dualcv::DataError);
}

TEST_CASE("CSV loading maps roles, scales, and missing values") {
    const auto schema = dualcv::SchemaConfig::from_json_text(kSchemaText);
    const auto loaded = dualcv::load_csv_text(kCsvText, schema);
    const auto& ds = loaded.dataset;
    REQUIRE(ds.n() == 4);

    const auto& r1 = ds.records[0];
    CHECK(r1.id == "a1");
    CHECK(r1.y1 == 1);
    CHECK(r1.y2 == 1);
    CHECK(r1.bid_cash == doctest::Approx(25.0));
    CHECK(r1.bid_labor == doctest::Approx(1.0));
    REQUIRE(r1.max_wtp.has_value());
    CHECK(*r1.max_wtp == doctest::Approx(40.0));
    REQUIRE(r1.wage_slack.has_value());
    CHECK(*r1.wage_slack == doctest::Approx(13.0));
    // Covariate scale applied on load: ETB -> thousand ETB.
    CHECK(r1.covariates.at("income") == doctest::Approx(1.2));
    CHECK(r1.passthrough.at("village") == "north");

    // Missing cells: wage NA, open-ended blank, covariate blank.
    CHECK_FALSE(ds.records[1].wage_slack.has_value());
    CHECK_FALSE(ds.records[2].max_wtc.has_value());
    CHECK_FALSE(ds.value(ds.records[3], "income").has_value());
    CHECK(loaded.report.missing_counts.at("income") == 1);
    CHECK(loaded.report.rows_read == 4);
    CHECK(loaded.report.warnings.empty());

    // value() resolves outcomes and bids by role.
    CHECK(*ds.value(r1, "wtc_yes") == doctest::Approx(1.0));
    CHECK(*ds.value(r1, "bid_labor") == doctest::Approx(1.0));
    CHECK(ds.bid_column("cash") == std::string("bid_cash"));
}

TEST_CASE("CSV loading rejects malformed inputs") {
    const auto schema = dualcv::SchemaConfig::from_json_text(kSchemaText);
    // Missing schema column in header.
    CHECK_THROWS_AS(dualcv::load_csv_text("a,b\n1,2\n", schema), dualcv::DataError);
    auto bad = [](const std::string& row) {
        return std::string(
                   "hh,wtp_yes,wtc_yes,bid_cash,bid_labor,max_wtp,max_wtc,w_slack,w_peak,"
                   "income,young,village\n") +
               row + "\n";
    };
    const auto with_row = [&](const std::string& row) {
        return dualcv::load_csv_text(bad(row), dualcv::SchemaConfig::from_json_text(kSchemaText));
    };
    // Outcome not 0/1.
    CHECK_THROWS_AS(with_row("a,2,1,25,1,,,,,,1,x"), dualcv::DataError);
    // Missing bid.
    CHECK_THROWS_AS(with_row("a,1,1,,1,,,,,,1,x"), dualcv::DataError);
    // Dummy covariate outside {0,1}.
    CHECK_THROWS_AS(with_row("a,1,1,25,1,,,,,,3,x"), dualcv::DataError);
    // Negative open-ended maximum.
    CHECK_THROWS_AS(with_row("a,1,1,25,1,-5,,,,,1,x"), dualcv::DataError);
    // Ragged row.
    CHECK_THROWS_AS(with_row("a,1,1,25,1"), dualcv::DataError);
    // Unparseable number.
    CHECK_THROWS_AS(with_row("a,1,1,yes,1,,,,,,1,x"), dualcv::DataError);
    // No data rows at all.
    CHECK_THROWS_AS(with_row(""), dualcv::DataError);
}

TEST_CASE("off-design bids produce warnings, not errors") {
    const auto schema = dualcv::SchemaConfig::from_json_text(kSchemaText);
    const std::string csv =
        "hh,wtp_yes,wtc_yes,bid_cash,bid_labor,max_wtp,max_wtc,w_slack,w_peak,income,young,"
        "village\n"
        "a1,1,1,26,1,,,,,,1,x\n";
    const auto loaded = dualcv::load_csv_text(csv, schema);
    REQUIRE(loaded.report.warnings.size() == 1);
    CHECK(loaded.report.warnings[0].find("cash bid") != std::string::npos);
}

TEST_CASE("write_csv round-trips the dataset") {
    const auto schema = dualcv::SchemaConfig::from_json_text(kSchemaText);
    const auto ds = load_fixture();
    const std::string text = dualcv::write_csv(ds);
    const auto again = dualcv::load_csv_text(text, schema).dataset;
    REQUIRE(again.n() == ds.n());
    for (size_t i = 0; i < ds.n(); ++i) {
        const auto& a = ds.records[i];
        const auto& b = again.records[i];
        CHECK(a.id == b.id);
        CHECK(a.y1 == b.y1);
        CHECK(a.y2 == b.y2);
        CHECK(a.bid_cash == b.bid_cash);
        CHECK(a.bid_labor == b.bid_labor);
        CHECK(a.max_wtp == b.max_wtp);
        CHECK(a.max_wtc == b.max_wtc);
        CHECK(a.wage_slack == b.wage_slack);
        CHECK(a.wage_peak == b.wage_peak);
        CHECK(a.passthrough == b.passthrough);
        for (const auto& [name, v] : a.covariates) {
            if (std::isnan(v)) {
                CHECK(std::isnan(b.covariates.at(name)));
            } else {
                CHECK(b.covariates.at(name) == v);
            }
        }
    }
}

TEST_CASE("consistency filter removes stated-maximum contradictions") {
    // a1: y1=1, max_wtp=40 >= bid 25 -> kept. Modify rows to build violations.
    const auto schema = dualcv::SchemaConfig::from_json_text(kSchemaText);
    const std::string csv =
        "hh,wtp_yes,wtc_yes,bid_cash,bid_labor,max_wtp,max_wtc,w_slack,w_peak,income,young,"
        "village\n"
        "k1,1,1,25,1,40,2,,,,1,x\n"    // consistent
        "v1,1,0,31,1,20,,,,,0,x\n"     // wtp 20 < accepted cash bid 31
        "v2,0,1,25,2,,1,,,,0,x\n"      // wtc 1 < accepted labor bid 2
        "k2,0,1,37,2,10,2,,,,1,x\n"    // y1=0, low wtp is fine; wtc equals bid
        "k3,1,1,25,1,,,,,,0,x\n";      // missing open-ended values retained
    const auto ds = dualcv::load_csv_text(csv, schema).dataset;
    const auto [kept, removed] = dualcv::consistency_filter(ds);
    REQUIRE(removed.size() == 2);
    CHECK(removed[0].id == "v1");
    CHECK(removed[0].rule.find("WTP") != std::string::npos);
    CHECK(removed[0].bid == doctest::Approx(31.0));
    CHECK(removed[0].stated_max == doctest::Approx(20.0));
    CHECK(removed[1].id == "v2");
    CHECK(kept.n() == 3);
    CHECK(kept.records[0].id == "k1");
    CHECK(kept.records[1].id == "k2");
    CHECK(kept.records[2].id == "k3");
}

TEST_CASE("summarize reports means, sds, and dummy shares") {
    const auto ds = load_fixture();
    const auto rows = dualcv::summarize(ds);
    bool saw_income = false, saw_young = false;
    for (const auto& s : rows) {
        if (s.name == "income") {
            saw_income = true;
            CHECK(s.n == 3);  // one missing cell
            CHECK(s.mean == doctest::Approx((1.2 + 0.9 + 1.5) / 3.0));
        }
        if (s.name == "young") {
            saw_young = true;
            CHECK(s.kind == dualcv::VariableKind::Dummy);
            CHECK(s.share == doctest::Approx(0.5));
        }
    }
    CHECK(saw_income);
    CHECK(saw_young);
}
