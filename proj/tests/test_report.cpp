#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "tabx/errors.hpp"
#include "tabx/report.hpp"
#include "tabx/table.hpp"
#include "tabx/util.hpp"

using namespace tabx;
using namespace tabx::report;
using nlohmann::ordered_json;

#ifndef TABX_FIXTURES_DIR
#error "TABX_FIXTURES_DIR must be defined"
#endif

namespace {

model::Table load_fixture(const std::string& name) {
    auto text = util::read_file(std::string(TABX_FIXTURES_DIR) + "/" + name);
    auto t = model::parse_table(text, model::TableFormat::Csv);
    t.source_id = name;
    return t;
}

}  // namespace

TEST_CASE("full evaluation of the movie fixture pair") {
    auto gt = load_fixture("movies_gt.csv");
    auto cand = load_fixture("movies_cand.csv");
    auto outcome = evaluate_tables(gt, cand);

    CHECK(outcome.rubric.error == doctest::Approx(0.369216).epsilon(1e-9));
    CHECK(outcome.rubric.quality == doctest::Approx(1.0 / 1.369216).epsilon(1e-9));
    CHECK_FALSE(outcome.transposed);
    CHECK(outcome.gt.rows == 5);
    CHECK(outcome.gt.cols == 5);
    CHECK(outcome.cand.rows == 4);
    CHECK(outcome.cand.cols == 6);
    CHECK(outcome.gt.sha256.size() == 64);
    CHECK(outcome.baselines.em_cells < 1.0);
    CHECK_FALSE(outcome.baselines.em_table);
    CHECK(outcome.baselines.chrf > 0.0);
    CHECK(outcome.baselines.rouge_l > 0.0);
    CHECK_FALSE(outcome.llm_used);
}

TEST_CASE("report document carries the schema and no wall-clock timestamps") {
    auto gt = load_fixture("movies_gt.csv");
    auto cand = load_fixture("movies_cand.csv");
    EvaluationOptions opts;
    auto outcome = evaluate_tables(gt, cand, opts);
    auto doc = report_document(outcome, opts);

    CHECK(doc.at("schema") == "tabx-report/1");
    CHECK(doc.at("inputs").at("gt").at("id") == "movies_gt.csv");
    CHECK(doc.at("alignment").contains("column_map"));
    CHECK(doc.at("alignment").contains("row_map"));
    CHECK(doc.at("rubric").at("error") == doctest::Approx(0.369216));
    CHECK(doc.at("tuples").is_array());
    CHECK(doc.contains("baselines"));

    auto text = doc.dump(2);
    CHECK(text.find("timestamp") == std::string::npos);

    // deterministic apart from elapsed timing
    auto outcome2 = evaluate_tables(gt, cand, opts);
    auto doc2 = report_document(outcome2, opts);
    doc.erase("timing");
    doc2.erase("timing");
    CHECK(doc == doc2);
}

TEST_CASE("stored reports parse back to the numbers that went in") {
    auto gt = load_fixture("movies_gt.csv");
    auto cand = load_fixture("movies_cand.csv");
    EvaluationOptions opts;
    auto outcome = evaluate_tables(gt, cand, opts);
    auto text = report_json(outcome, opts);

    auto back = parse_report(text);
    CHECK(back.gt_id == "movies_gt.csv");
    CHECK(back.cand_id == "movies_cand.csv");
    CHECK(back.error == doctest::Approx(outcome.rubric.error));
    CHECK(back.quality == doctest::Approx(outcome.rubric.quality));
    CHECK(back.transposed == outcome.transposed);
    CHECK(back.counts.f == outcome.rubric.counts.f);
    CHECK(back.counts.N == outcome.rubric.counts.N);
    REQUIRE(back.partials.size() == outcome.rubric.partials.size());
    for (std::size_t i = 0; i < back.partials.size(); ++i)
        CHECK(back.partials[i].magnitude == doctest::Approx(outcome.rubric.partials[i].magnitude));
    CHECK(back.baselines.em_cells == doctest::Approx(outcome.baselines.em_cells));
    CHECK(back.baselines.em_table == outcome.baselines.em_table);
    CHECK(back.provenance.is_null());

    CHECK_THROWS_AS(parse_report("{\"schema\": \"something-else/9\"}"), MalformedInput);
    CHECK_THROWS_AS(parse_report("not json"), MalformedInput);
}

TEST_CASE("provenance blocks survive a round-trip untouched") {
    auto gt = load_fixture("movies_gt.csv");
    auto cand = load_fixture("movies_cand.csv");
    EvaluationOptions opts;
    auto outcome = evaluate_tables(gt, cand, opts);
    auto doc = report_document(outcome, opts);
    doc["provenance"] = ordered_json{{"case_id", "case-7"}, {"expected_error", 0.18}};
    auto back = parse_report(doc.dump());
    REQUIRE(back.provenance.is_object());
    CHECK(back.provenance.at("case_id") == "case-7");
    CHECK(back.provenance.at("expected_error") == doctest::Approx(0.18));
}

TEST_CASE("pretty rendering shows the headline numbers") {
    auto gt = load_fixture("movies_gt.csv");
    auto cand = load_fixture("movies_cand.csv");
    auto outcome = evaluate_tables(gt, cand);
    auto text = render_pretty(outcome);
    CHECK(text.find("0.369216") != std::string::npos);
    CHECK(text.find("movies_gt.csv") != std::string::npos);
    CHECK(text.find("missing") != std::string::npos);
}

TEST_CASE("identical tables score clean with full-match baselines") {
    auto gt = load_fixture("movies_gt.csv");
    auto outcome = evaluate_tables(gt, gt);
    CHECK(outcome.rubric.error == 0.0);
    CHECK(outcome.rubric.quality == 1.0);
    CHECK(outcome.baselines.em_cells == 1.0);
    CHECK(outcome.baselines.em_table);
    CHECK(outcome.baselines.chrf == doctest::Approx(1.0));
    CHECK(outcome.baselines.rouge_l == doctest::Approx(1.0));
}

TEST_CASE("transposed candidates are detected and scored in the corrected orientation") {
    auto gt = load_fixture("movies_gt.csv");
    auto cand = model::transpose(gt);
    auto outcome = evaluate_tables(gt, cand);
    CHECK(outcome.transposed);
    CHECK(outcome.rubric.error == 0.0);
    // the baselines stay orientation-blind on purpose
    CHECK(outcome.baselines.em_cells < 1.0);
    CHECK_FALSE(outcome.baselines.em_table);

    EvaluationOptions opts;
    auto doc = report_document(outcome, opts);
    CHECK(doc.at("alignment").at("transposed") == true);
}

TEST_CASE("evaluation rejects invalid inputs") {
    model::Table ragged;
    ragged.column_headers = {{"a"}, {"b"}};
    ragged.rows.push_back({model::Cell{"1"}});
    auto gt = load_fixture("movies_gt.csv");
    CHECK_THROWS_AS(evaluate_tables(gt, ragged), Error);
    CHECK_THROWS_AS(evaluate_tables(ragged, gt), Error);
}
