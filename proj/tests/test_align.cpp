#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "tabx/align.hpp"
#include "tabx/errors.hpp"
#include "tabx/table.hpp"
#include "tabx/util.hpp"

using namespace tabx;
using align::Alignment;
using align::MatchStrictness;
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

Table movies_gt() {
    return flat({"title", "genre", "release date", "rating", "box office"},
                {{"Inception", "Sci-Fi", "2010-07-16", "8.8", "$829,895,144"},
                 {"Parasite", "Thriller", "2019-05-30", "8.5", "$262,840,595"},
                 {"Onward", "Animation", "2020-03-03", "7.4", "$141,940,042"},
                 {"Arrival", "Sci-Fi", "2016-11-11", "7.9", "$203,388,186"},
                 {"Whiplash", "Drama", "2014-10-10", "8.5", "$49,078,601"}});
}

// exhaustive maximum-weight assignment over row permutations
double brute_force_best(const std::vector<std::vector<double>>& score) {
    std::size_t rows = score.size();
    std::size_t cols = rows ? score[0].size() : 0;
    std::size_t n = std::max(rows, cols);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
        double total = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t c = perm[r];
            if (c < cols && score[r][c] > 0.0) total += score[r][c];
        }
        best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("exact alignment on identical tables") {
    auto gt = movies_gt();
    auto a = align::exact_align(gt, gt);
    CHECK(a.column_pairs.size() == 5);
    CHECK(a.row_pairs.size() == 5);
    for (const auto& p : a.column_pairs) {
        CHECK(p.gt == p.cand);
        CHECK(p.strictness == MatchStrictness::Strict);
    }
    CHECK(a.unmatched_gt_rows.empty());
    CHECK(a.unmatched_cand_cols.empty());
}

TEST_CASE("exact alignment survives column and row reorder") {
    auto gt = movies_gt();
    Table cand = gt;
    std::swap(cand.column_headers[0], cand.column_headers[2]);
    for (auto& row : cand.rows) std::swap(row[0], row[2]);
    std::swap(cand.rows[0], cand.rows[4]);

    auto a = align::exact_align(gt, cand);
    CHECK(a.column_pairs.size() == 5);
    CHECK(a.row_pairs.size() == 5);
    const auto* col0 = a.column_for_gt(0);
    REQUIRE(col0);
    CHECK(col0->cand == 2);
    const auto* row0 = a.row_for_gt(0);
    REQUIRE(row0);
    CHECK(row0->cand == 4);
}

TEST_CASE("row matching needs a strict majority of equal cells") {
    auto gt = flat({"a", "b"}, {{"1", "2"}});
    auto cand = flat({"a", "b"}, {{"1", "9"}});
    // 1 of 2 paired cells equal = exactly 50%, not strictly more
    auto a = align::exact_align(gt, cand);
    CHECK(a.row_pairs.empty());

    auto gt3 = flat({"a", "b", "c"}, {{"1", "2", "3"}});
    auto cand3 = flat({"a", "b", "c"}, {{"1", "2", "9"}});
    auto a3 = align::exact_align(gt3, cand3);
    CHECK(a3.row_pairs.size() == 1);
}

TEST_CASE("similarity alignment pairs renamed headers as relaxed") {
    auto gt = movies_gt();
    Table cand = gt;
    cand.column_headers[0] = {"movie name"};
    cand.column_headers[3] = {"score"};

    auto a = align::similarity_align(gt, cand, align::exact_align(gt, cand));
    CHECK(a.column_pairs.size() == 5);
    std::size_t relaxed = 0;
    for (const auto& p : a.column_pairs)
        if (p.strictness == MatchStrictness::Relaxed) ++relaxed;
    CHECK(relaxed == 2);
    const auto* c3 = a.column_for_gt(3);
    REQUIRE(c3);
    CHECK(c3->cand == 3);
}

TEST_CASE("similarity alignment leaves unrelated columns unmatched") {
    auto gt = flat({"alpha"}, {{"1"}, {"2"}});
    auto cand = flat({"zzz"}, {{"x"}, {"y"}});
    auto a = align::similarity_align(gt, cand, align::exact_align(gt, cand));
    CHECK(a.column_pairs.empty());
    CHECK(a.unmatched_gt_cols.size() == 1);
    CHECK(a.unmatched_cand_cols.size() == 1);
}

TEST_CASE("assignment equals brute force on random matrices") {
    util::Rng rng(20240815);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t rows = 1 + rng.below(6);
        std::size_t cols = 1 + rng.below(6);
        std::vector<std::vector<double>> score(rows, std::vector<double>(cols));
        for (auto& row : score)
            for (auto& v : row) v = rng.unit_real();
        double total = 0.0;
        align::max_weight_assignment(score, &total);
        CHECK(total == doctest::Approx(brute_force_best(score)).epsilon(1e-9));
    }
}

TEST_CASE("assignment result is injective and in range") {
    util::Rng rng(7);
    std::vector<std::vector<double>> score(4, std::vector<double>(6));
    for (auto& row : score)
        for (auto& v : row) v = rng.unit_real();
    auto match = align::max_weight_assignment(score);
    REQUIRE(match.size() == 4);
    std::vector<int> used;
    for (int c : match) {
        if (c < 0) continue;
        CHECK(c < 6);
        CHECK(std::find(used.begin(), used.end(), c) == used.end());
        used.push_back(c);
    }
}

TEST_CASE("transpose detection") {
    auto gt = movies_gt();
    CHECK_FALSE(align::detect_transpose(gt, gt));
    auto flipped = model::transpose(gt);
    CHECK(align::detect_transpose(gt, flipped));
    // detecting on the already-correct orientation must not fire
    CHECK_FALSE(align::detect_transpose(flipped, flipped));
}

TEST_CASE("validate_alignment rejects inconsistency") {
    auto gt = movies_gt();
    auto a = align::similarity_align(gt, gt, align::exact_align(gt, gt));
    CHECK_NOTHROW(align::validate_alignment(a, gt, gt));

    auto out_of_range = a;
    out_of_range.row_pairs.push_back({99, 0, MatchStrictness::Relaxed, 0.5});
    CHECK_THROWS_AS(align::validate_alignment(out_of_range, gt, gt), InconsistentAlignment);

    auto duplicate = a;
    duplicate.row_pairs.push_back({0, 1, MatchStrictness::Relaxed, 0.5});
    CHECK_THROWS_AS(align::validate_alignment(duplicate, gt, gt), InconsistentAlignment);
}

TEST_CASE("finalize rebuilds unmatched lists sorted") {
    Alignment a;
    a.column_pairs.push_back({2, 0, MatchStrictness::Strict, 1.0});
    a.row_pairs.push_back({1, 1, MatchStrictness::Strict, 1.0});
    align::finalize_alignment(a, 3, 2, 3, 2);
    CHECK(a.unmatched_gt_rows == std::vector<std::size_t>{0, 2});
    CHECK(a.unmatched_cand_rows == std::vector<std::size_t>{0});
    CHECK(a.unmatched_gt_cols == std::vector<std::size_t>{0, 1});
    CHECK(a.unmatched_cand_cols == std::vector<std::size_t>{1});
}

TEST_CASE("cell similarity blends equality and structure") {
    CHECK(align::cell_similarity("abc", "abc") == 1.0);
    CHECK(align::cell_similarity("", "") == 1.0);
    CHECK(align::cell_similarity("abc", "xyz") < 0.5);
}
