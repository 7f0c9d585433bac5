#include "doctest.h"
#include "tabx/errors.hpp"
#include "tabx/table.hpp"

using namespace tabx;
using model::Cell;
using model::Table;
using model::TableFormat;

namespace {

Table flat(std::vector<std::string> headers, std::vector<std::vector<std::string>> rows) {
    Table t;
    for (auto& h : headers) t.column_headers.push_back({std::move(h)});
    for (auto& row : rows) {
        std::vector<Cell> cells;
        for (auto& v : row) cells.push_back(Cell{std::move(v)});
        t.rows.push_back(std::move(cells));
    }
    return t;
}

}  // namespace

TEST_CASE("csv parse with quoting") {
    auto t = model::parse_table("a,b\n1,\"x, y\"\n\"he said \"\"hi\"\"\",2\n", TableFormat::Csv);
    REQUIRE(t.column_count() == 2);
    REQUIRE(t.row_count() == 2);
    CHECK(t.cell(0, 1) == "x, y");
    CHECK(t.cell(1, 0) == "he said \"hi\"");
}

TEST_CASE("csv serialize then parse is identity") {
    auto t = flat({"name", "note"}, {{"a", "x, y"}, {"q\"q", "line"}});
    auto back = model::parse_table(model::to_csv(t), TableFormat::Csv);
    CHECK(back == t);
}

TEST_CASE("markdown pipe parse") {
    std::string md = "| city | pop |\n|---|---|\n| Oslo | 700000 |\n| Bergen | 285000 |\n";
    auto t = model::parse_table(md, TableFormat::MarkdownPipe);
    REQUIRE(t.column_count() == 2);
    REQUIRE(t.row_count() == 2);
    CHECK(t.header_text(0) == "city");
    CHECK(t.cell(1, 0) == "Bergen");

    auto round = model::parse_table(model::to_markdown(t), TableFormat::MarkdownPipe);
    CHECK(round == t);
}

TEST_CASE("markdown escaped pipes round-trip") {
    auto t = flat({"expr"}, {{"a|b"}});
    auto back = model::parse_table(model::to_markdown(t), TableFormat::MarkdownPipe);
    CHECK(back == t);
}

TEST_CASE("canonical json round-trip and stability") {
    auto t = flat({"a", "b"}, {{"1", "2"}, {"3", "4"}});
    auto s1 = model::canonical_serialize(t);
    auto parsed = model::parse_table(s1, TableFormat::JsonCanonical);
    CHECK(parsed == t);
    CHECK(model::canonical_serialize(parsed) == s1);
}

TEST_CASE("parse rejects malformed inputs") {
    CHECK_THROWS_AS(model::parse_table("a,b\n1\n", TableFormat::Csv), MalformedInput);
    CHECK_THROWS_AS(model::parse_table("not json", TableFormat::JsonCanonical), MalformedInput);
    CHECK_THROWS_AS(model::parse_table("{\"headers\":[],\"rows\":[]}", TableFormat::JsonCanonical), MalformedInput);
    CHECK_THROWS_AS(model::parse_table("| a |\n| missing delimiter\n", TableFormat::MarkdownPipe), MalformedInput);
    CHECK_THROWS_AS(model::parse_table("\xff\xfe", TableFormat::Csv), MalformedInput);
}

TEST_CASE("validate rejects structural breakage") {
    auto t = flat({"a", "b"}, {{"1", "2"}});
    CHECK_NOTHROW(t.validate());

    auto ragged = t;
    ragged.rows.push_back({Cell{"only-one"}});
    CHECK_THROWS_AS(ragged.validate(), Error);

    auto dup = flat({"x", "x"}, {{"1", "2"}});
    CHECK_THROWS_AS(dup.validate(), Error);

    Table empty;
    CHECK_THROWS_AS(empty.validate(), Error);
}

TEST_CASE("transpose is an involution on flat tables") {
    auto t = flat({"k", "a", "b"}, {{"r1", "1", "2"}, {"r2", "3", "4"}});
    auto tt = model::transpose(model::transpose(t));
    CHECK(tt == t);

    auto once = model::transpose(t);
    CHECK(once.column_count() == t.row_count() + 1);
    CHECK(once.row_count() == t.column_count() - 1);
    CHECK(once.header_text(0) == "k");
    CHECK(once.header_text(1) == "r1");
    CHECK(once.cell(0, 0) == "a");
    CHECK(once.cell(0, 2) == "3");
}

TEST_CASE("flatten handles hierarchical headers") {
    Table t;
    t.column_headers = {{"region"}, {"sales", "q1"}, {"sales", "q2"}};
    t.rows = {{Cell{"west"}, Cell{"10"}, Cell{"20"}}, {Cell{"east"}, Cell{"30"}, Cell{"40"}}};
    auto f = model::flatten_hierarchical(t);
    CHECK(f.is_flat());
    CHECK(f.column_count() == 3);
    REQUIRE(f.column_headers[1].size() == 1);
    CHECK(f.column_headers[1][0] == std::string("sales ") + model::kPathSep + " q1");
    // display form escapes the embedded glyph so it cannot be mistaken for a path
    CHECK(f.header_text(1) == std::string("sales \\") + model::kPathSep + " q1");
    CHECK(f.cell(1, 2) == "40");
}

TEST_CASE("flatten joins row-group label columns") {
    Table t;
    t.column_headers = {{"country"}, {"year", "y"}, {"value"}};
    // hierarchical header on column 1 marks the table as non-flat; country
    // labels use blank continuation cells
    t.rows = {{Cell{"Norway"}, Cell{"2020"}, Cell{"1"}},
              {Cell{""}, Cell{"2021"}, Cell{"2"}},
              {Cell{"Sweden"}, Cell{"2020"}, Cell{"3"}}};
    auto f = model::flatten_hierarchical(t);
    CHECK(f.is_flat());
    REQUIRE(f.column_count() == 2);
    CHECK(f.cell(1, 0) == std::string("Norway ") + model::kGroupSep + " 2021");
    CHECK(f.cell(2, 0) == std::string("Sweden ") + model::kGroupSep + " 2020");
}

TEST_CASE("flatten is idempotent") {
    auto t = flat({"a", "b"}, {{"1", ""}, {"", "2"}});
    auto once = model::flatten_hierarchical(t);
    CHECK(model::flatten_hierarchical(once) == once);

    Table h;
    h.column_headers = {{"region"}, {"sales", "q1"}};
    h.rows = {{Cell{"west"}, Cell{"10"}}, {Cell{""}, Cell{"20"}}};
    auto f = model::flatten_hierarchical(h);
    CHECK(model::flatten_hierarchical(f) == f);
}

TEST_CASE("flatten reports unresolvable header collisions") {
    Table t;
    t.column_headers = {{"a", "x"}, {"a", "x"}};
    t.rows = {{Cell{"1"}, Cell{"2"}}};
    CHECK_THROWS_AS(model::flatten_hierarchical(t), AmbiguousHierarchy);

    // a literal glyph in a flat header is escaped apart from a real path
    Table ok;
    ok.column_headers = {{"a", "x"}, {std::string("a") + model::kPathSep + "x"}};
    ok.rows = {{Cell{"1"}, Cell{"2"}}};
    auto f = model::flatten_hierarchical(ok);
    CHECK(f.header_text(0) != f.header_text(1));
}

TEST_CASE("extension mapping") {
    CHECK(model::format_from_extension("x.csv") == TableFormat::Csv);
    CHECK(model::format_from_extension("x.MD") == TableFormat::MarkdownPipe);
    CHECK(model::format_from_extension("x.json") == TableFormat::JsonCanonical);
    CHECK_FALSE(model::format_from_extension("x.txt"));
    CHECK_FALSE(model::format_from_extension("noext"));
}
