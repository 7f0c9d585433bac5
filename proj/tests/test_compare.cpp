#include "doctest.h"
#include "tabx/align.hpp"
#include "tabx/compare.hpp"
#include "tabx/errors.hpp"

using namespace tabx;
using namespace tabx::compare;
using model::Cell;
using model::Table;

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

CellComparison cmp(const char* gt, const char* cand) { return compare_cells(Cell{gt}, Cell{cand}); }

}  // namespace

TEST_CASE("numeric equality under formatting") {
    CHECK(cmp("1234", "1,234").classification == Classification::Exact);
    CHECK(cmp("1000000", "1 million").classification == Classification::Exact);
    CHECK(cmp("0.5", ".5").classification == Classification::Exact);
}

TEST_CASE("numeric partial carries relative magnitude") {
    auto c = cmp("100", "110");
    CHECK(c.classification == Classification::Partial);
    REQUIRE(c.magnitude);
    CHECK(*c.magnitude == doctest::Approx(10.0 / 110.0));
    CHECK_FALSE(c.zero_reference);
}

TEST_CASE("zero reference falls back to absolute difference") {
    auto c = compare_cells(Cell{"5"}, Cell{"0"});
    CHECK(c.classification == Classification::Partial);
    CHECK(c.zero_reference);
    REQUIRE(c.magnitude);
    CHECK(*c.magnitude == doctest::Approx(5.0));
}

TEST_CASE("unit conversion length") {
    CHECK(cmp("1.5 m", "150 cm").classification == Classification::Exact);
    auto c = cmp("1 km", "900 m");
    CHECK(c.classification == Classification::Partial);
    REQUIRE(c.magnitude);
    CHECK(*c.magnitude == doctest::Approx(100.0 / 900.0));
}

TEST_CASE("duration conversion months vs days") {
    auto c = cmp("2 months", "61 days");
    CHECK(c.classification == Classification::Partial);
    REQUIRE(c.magnitude);
    CHECK(*c.magnitude == doctest::Approx(0.12 / 61.0).epsilon(1e-6));
}

TEST_CASE("currency symbol mismatch is a mismatch") {
    auto c = cmp("$100", "€100");
    CHECK(c.classification == Classification::Mismatch);
    CHECK(cmp("$100", "USD 100").classification == Classification::Exact);
}

TEST_CASE("clock vs duration is a mismatch") {
    auto c = cmp("14:30", "870 min");
    CHECK(c.classification == Classification::Mismatch);
}

TEST_CASE("date magnitude uses candidate day of month") {
    auto c = cmp("2020-03-03", "2020-03-05");
    CHECK(c.classification == Classification::Partial);
    CHECK(c.data_type == ValueKind::Date);
    REQUIRE(c.magnitude);
    CHECK(*c.magnitude == doctest::Approx(0.4));
}

TEST_CASE("date equal across formats") {
    CHECK(cmp("2020-03-03", "March 3, 2020").classification == Classification::Exact);
}

TEST_CASE("text comparisons") {
    CHECK(cmp("The  Matrix", "the matrix").classification == Classification::Exact);
    auto c = cmp("matrix", "matrux");
    CHECK(c.classification == Classification::Partial);
    REQUIRE(c.magnitude);
    CHECK(*c.magnitude == doctest::Approx(1.0 - 5.0 / 6.0));
    auto far = cmp("alpha", "omega zone");
    CHECK(far.classification == Classification::Partial);
    REQUIRE(far.magnitude);
    CHECK(*far.magnitude == doctest::Approx(0.9));
}

TEST_CASE("list comparisons use jaccard") {
    CHECK(cmp("a; b; c", "c; b; a").classification == Classification::Exact);
    auto c = cmp("a; b; c", "a; b; d");
    CHECK(c.classification == Classification::Partial);
    REQUIRE(c.magnitude);
    CHECK(*c.magnitude == doctest::Approx(1.0 - 2.0 / 4.0));
}

TEST_CASE("kind disagreement is a mismatch") {
    CHECK(cmp("2020-03-03", "not a date").classification == Classification::Mismatch);
    CHECK(cmp("12", "twelve").classification == Classification::Mismatch);
}

TEST_CASE("compute_magnitude exposed directly") {
    auto g = infer_cell_type("100");
    auto c = infer_cell_type("90");
    auto m = compute_magnitude(g, c);
    CHECK(m.value == doctest::Approx(10.0 / 90.0));
    CHECK_FALSE(m.zero_reference);

    auto z = compute_magnitude(infer_cell_type("7"), infer_cell_type("0"));
    CHECK(z.zero_reference);
    CHECK(z.value == doctest::Approx(7.0));

    CHECK_THROWS_AS(compute_magnitude(infer_cell_type("2020-03-03"), infer_cell_type("plain text")),
                    InconsistentInputs);
}

TEST_CASE("column majority kind") {
    auto t = flat({"a"}, {{"1"}, {"2"}, {"x"}});
    CHECK(column_majority_kind(t, 0) == ValueKind::Number);
    auto d = flat({"a"}, {{"2020-01-01"}, {"bad"}, {"2020-01-03"}});
    CHECK(column_majority_kind(d, 0) == ValueKind::Date);
    auto e = flat({"a"}, {{""}, {""}});
    CHECK(column_majority_kind(e, 0) == ValueKind::Text);
}

TEST_CASE("aligned comparison emits one tuple per paired cell plus residue") {
    auto gt = flat({"k", "v", "w"}, {{"a", "1", "x"}, {"b", "2", "y"}, {"c", "3", "z"}});
    auto cand = flat({"k", "v"}, {{"a", "1"}, {"b", "5"}});

    auto alignment = align::exact_align(gt, cand);
    alignment = align::similarity_align(gt, cand, alignment);
    auto result = compare_aligned_tables(gt, cand, alignment);

    CHECK(result.tuples.size() == 4);  // 2 rows x 2 cols
    std::size_t partial = 0;
    for (const auto& t : result.tuples)
        if (t.classification == Classification::Partial) ++partial;
    CHECK(partial == 1);

    CHECK(result.residue.missing_rows.size() == 1);
    CHECK(result.residue.missing_cols.size() == 1);
    CHECK(result.residue.extra_rows.empty());
    CHECK(result.residue.extra_cols.empty());
    // deduplicated residue cells: |uR|*C + |uC|*R - |uR|*|uC| = 3 + 3 - 1
    CHECK(result.residue.missing_cell_count == 5);
}

TEST_CASE("tuple and residue cell conservation") {
    // paired cells + deduplicated missing cells account for every gt cell
    auto gt = flat({"a", "b", "c", "d"},
                   {{"1", "2", "3", "4"}, {"5", "6", "7", "8"}, {"9", "10", "11", "12"}});
    auto cand = flat({"a", "c"}, {{"1", "3"}, {"9", "11"}});
    auto alignment = align::similarity_align(gt, cand, align::exact_align(gt, cand));
    auto result = compare_aligned_tables(gt, cand, alignment);
    CHECK(result.tuples.size() + result.residue.missing_cell_count == gt.cell_count());
}
