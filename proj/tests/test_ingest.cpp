#include <sstream>
#include <stdexcept>

#include "admitml/ingest.hpp"
#include "doctest.h"

using namespace admitml;

namespace {

DataTable parse(const std::string& text, const std::map<std::string, ColumnKind>& schema = {}) {
    std::istringstream in(text);
    return parse_csv(in, schema);
}

}  // namespace

TEST_CASE("merge_outer unions columns and flags provenance") {
    const auto a = parse("GRE,TOEFL\n320,110\n");
    const auto b = parse("GRE,CGPA\n300,8.1\n310,9.0\n");
    const auto merged = merge_outer({{a, "cohort_a"}, {b, "cohort_b"}});

    REQUIRE(merged.row_count() == 3);
    REQUIRE(merged.column_count() == 4);  // GRE, TOEFL, CGPA, context
    CHECK(merged.columns()[3].name == "context");
    CHECK(merged.at(0, 1).number() == 110.0);
    CHECK(merged.at(0, 2).is_missing());  // CGPA absent in cohort_a
    CHECK(merged.at(1, 1).is_missing());  // TOEFL absent in cohort_b
    CHECK(merged.at(2, 3).category() == "cohort_b");
    CHECK(merged.row_ids() == std::vector<std::int64_t>{0, 1, 2});
}

TEST_CASE("merge_outer rejects kind conflicts and duplicate flags") {
    const auto a = parse("x\n1\n");
    const auto b = parse("x\nword\n");
    CHECK_THROWS_WITH_AS(merge_outer({{a, "one"}, {b, "two"}}), doctest::Contains("x"),
                         std::runtime_error);
    CHECK_THROWS_AS(merge_outer({{a, "one"}, {a, "one"}}), std::invalid_argument);
    CHECK_THROWS_AS(merge_outer({}), std::invalid_argument);
}

TEST_CASE("impute fills numeric means and categorical modes") {
    auto t = parse("score,team\n1,red\n3,\n,blue\n,red\n");
    const auto filled = impute(t);
    CHECK(filled.at(2, 0).number() == 2.0);
    CHECK(filled.at(3, 0).number() == 2.0);
    CHECK(filled.at(1, 1).category() == "red");  // red:2 blue:1
    CHECK(filled.row_ids() == t.row_ids());
}

TEST_CASE("impute breaks mode ties lexicographically and rejects empty columns") {
    const auto tied = impute(parse("team\nred\nblue\n\n"));
    CHECK(tied.at(2, 0).category() == "blue");
    CHECK_THROWS_WITH_AS(impute(parse("a,b\n,1\n,2\n")), doctest::Contains("'a'"),
                         std::runtime_error);
}

TEST_CASE("drop_high_missingness uses a strict threshold and honors exemptions") {
    // 3 of 10 cells missing = 0.30 exactly: kept. 4 of 10: dropped.
    std::string csv = "keep,drop,label\n";
    for (int i = 0; i < 10; ++i) {
        csv += (i < 3 ? "" : "1");
        csv += ",";
        csv += (i < 4 ? "" : "1");
        csv += ",1\n";
    }
    const auto t = parse(csv);
    const auto result = drop_high_missingness(t, 0.30);
    CHECK(result.dropped == std::vector<std::string>{"drop"});
    CHECK(result.table.has_column("keep"));
    CHECK_FALSE(result.table.has_column("drop"));

    const auto exempted = drop_high_missingness(t, 0.30, {"drop"});
    CHECK(exempted.dropped.empty());
}

TEST_CASE("clean_anomalies removes label contradictions only") {
    const auto t = parse(
        "GRE,CGPA,Admission_Status\n"
        "330,9.8,0\n"   // strong profile, rejected: anomaly
        "320,9.5,0\n"   // boundary strong profile, rejected: anomaly
        "320,9.4,0\n"   // CGPA below threshold: kept
        "330,9.8,1\n"   // strong and admitted: kept
        "295,7.5,1\n"   // weak profile, admitted: anomaly
        "300,8.0,1\n"   // boundary weak profile, admitted: anomaly
        "300,8.1,1\n"   // CGPA above weak threshold: kept
        "295,7.5,0\n");  // weak and rejected: kept
    const auto result = clean_anomalies(t, CleaningRule{});

    CHECK(result.table.row_count() == 4);
    CHECK(result.log.rows_before == 8);
    CHECK(result.log.rows_after == 4);
    CHECK(result.log.rule_hits.at("strong_profile") == 2);
    CHECK(result.log.rule_hits.at("weak_profile") == 2);
    CHECK(result.log.removed_row_ids == std::vector<std::int64_t>{0, 1, 4, 5});

    const auto json = result.log.to_json_string();
    CHECK(json.find("strong_profile") != std::string::npos);
    CHECK(json.find("\"rows_after\": 4") != std::string::npos);
}

TEST_CASE("clean_anomalies validates its inputs") {
    CHECK_THROWS_WITH_AS(
        clean_anomalies(parse("GRE,CGPA,Admission_Status\n320,9.9,0.4\n"), CleaningRule{}),
        doctest::Contains("binary"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        clean_anomalies(parse("GRE,CGPA,Admission_Status\n,9.9,0\n"), CleaningRule{}),
        doctest::Contains("GRE"), std::runtime_error);
    CHECK_THROWS_AS(clean_anomalies(parse("GRE,CGPA\n320,9.9\n"), CleaningRule{}),
                    std::invalid_argument);

    CleaningRule bad;
    bad.weak_gre_max = 330.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
