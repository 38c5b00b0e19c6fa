#include <sstream>
#include <stdexcept>

#include "admitml/table.hpp"
#include "doctest.h"

using namespace admitml;

namespace {

DataTable parse(const std::string& text, const std::map<std::string, ColumnKind>& schema = {}) {
    std::istringstream in(text);
    return parse_csv(in, schema);
}

}  // namespace

TEST_CASE("csv type inference splits numeric and categorical columns") {
    const auto t = parse("GRE,Gender\n320,Male\n300,Female\n");
    REQUIRE(t.column_count() == 2);
    CHECK(t.columns()[0].kind == ColumnKind::Numeric);
    CHECK(t.columns()[1].kind == ColumnKind::Categorical);
    CHECK(t.at(0, 0).number() == 320.0);
    CHECK(t.at(1, 1).category() == "Female");
    CHECK(t.row_ids() == std::vector<std::int64_t>{0, 1});
}

TEST_CASE("quoted fields carry commas, escaped quotes and newlines") {
    const auto t = parse("name,note\n\"Smith, Jane\",\"said \"\"hi\"\"\"\nBo,\"line1\nline2\"\n");
    REQUIRE(t.row_count() == 2);
    CHECK(t.at(0, 0).category() == "Smith, Jane");
    CHECK(t.at(0, 1).category() == "said \"hi\"");
    CHECK(t.at(1, 1).category() == "line1\nline2");
}

TEST_CASE("crlf line endings parse like bare newlines") {
    const auto t = parse("a,b\r\n1,2\r\n3,4\r\n");
    REQUIRE(t.row_count() == 2);
    CHECK(t.at(1, 0).number() == 3.0);
}

TEST_CASE("missing markers become Missing cells without forcing a kind") {
    const auto t = parse("score,team\n1.5,red\nNA,blue\n,red\n");
    CHECK(t.columns()[0].kind == ColumnKind::Numeric);
    CHECK(t.at(1, 0).is_missing());
    CHECK(t.at(2, 0).is_missing());
    CHECK(t.at(0, 0).number() == 1.5);
}

TEST_CASE("malformed csv is rejected with the offending location") {
    CHECK_THROWS_WITH_AS(parse("a,a\n1,2\n"), doctest::Contains("duplicate column"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse("a,b\n1,2,3\n"), doctest::Contains("row 1"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse(""), doctest::Contains("empty"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse("a\nx\n", {{"a", ColumnKind::Numeric}}),
                         doctest::Contains("'a'"), std::runtime_error);
}

TEST_CASE("declared schema overrides inference") {
    const auto t = parse("zip\n02139\n10001\n", {{"zip", ColumnKind::Categorical}});
    CHECK(t.columns()[0].kind == ColumnKind::Categorical);
    CHECK(t.at(0, 0).category() == "02139");
}

TEST_CASE("serialize round-trips cells exactly") {
    const auto original =
        parse("x,label\n0.1,\"a,b\"\n-3.5,c\n1e-17,\"q\"\"q\"\n,c\n");
    const auto text = serialize_csv(original);
    std::istringstream in(text);
    const auto again = parse_csv(in, schema_of(original));

    REQUIRE(again.row_count() == original.row_count());
    REQUIRE(again.columns() == original.columns());
    for (std::size_t r = 0; r < original.row_count(); ++r) {
        for (std::size_t c = 0; c < original.column_count(); ++c) {
            CHECK(again.at(r, c) == original.at(r, c));
        }
    }
}

TEST_CASE("take_rows preserves row ids") {
    const auto t = parse("a\n1\n2\n3\n");
    const auto sub = t.take_rows({2, 0});
    CHECK(sub.row_ids() == std::vector<std::int64_t>{2, 0});
    CHECK(sub.at(0, 0).number() == 3.0);
}

TEST_CASE("column edits validate names and sizes") {
    auto t = parse("a\n1\n2\n");
    CHECK_THROWS_AS(t.add_column({"a", ColumnKind::Numeric}, {Cell(1.0), Cell(2.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(t.add_column({"b", ColumnKind::Numeric}, {Cell(1.0)}), std::invalid_argument);
    t.add_column({"b", ColumnKind::Numeric}, {Cell(1.0), Cell(2.0)});
    CHECK(t.column_count() == 2);
    t.rename_column("b", "c");
    CHECK(t.has_column("c"));
    CHECK_THROWS_AS(t.rename_column("missing", "x"), std::invalid_argument);
    CHECK_THROWS_AS((void)t.column_index("missing"), std::invalid_argument);
}
