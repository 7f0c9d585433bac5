#include "tabx/report.hpp"

#include <chrono>

#include "tabx/baselines.hpp"
#include "tabx/errors.hpp"
#include "tabx/llm.hpp"
#include "tabx/util.hpp"

namespace tabx::report {

using nlohmann::ordered_json;

namespace {

InputDescriptor describe(const Table& t, const char* fallback_id) {
    InputDescriptor d;
    d.id = t.source_id.value_or(fallback_id);
    d.sha256 = util::sha256_hex(model::canonical_serialize(t));
    d.rows = t.row_count();
    d.cols = t.column_count();
    return d;
}

ordered_json weights_json(const rubric::WeightConfig& w) {
    return ordered_json{{"name", w.name},
                        {"beta_missing", w.beta_missing},
                        {"beta_extra", w.beta_extra},
                        {"beta_partial", w.beta_partial},
                        {"alpha_row", w.alpha_row},
                        {"alpha_col", w.alpha_col},
                        {"alpha_cell", w.alpha_cell},
                        {"omega_p", w.omega_p}};
}

ordered_json pairs_json(const std::vector<align::MatchPair>& pairs) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : pairs)
        arr.push_back(ordered_json{{"gt", p.gt},
                                   {"cand", p.cand},
                                   {"strictness", align::strictness_name(p.strictness)},
                                   {"score", p.score}});
    return arr;
}

ordered_json counts_json(const rubric::RubricCounts& c) {
    using rubric::EntityType;
    using rubric::InfoType;
    auto row = [&](InfoType i) {
        return ordered_json{{"row", c.at(i, EntityType::Row)},
                            {"column", c.at(i, EntityType::Column)},
                            {"cell", c.at(i, EntityType::Cell)}};
    };
    return ordered_json{{"missing", row(InfoType::Missing)},
                        {"extra", row(InfoType::Extra)},
                        {"partial", row(InfoType::Partial)},
                        {"N",
                         ordered_json{{"row", c.total(EntityType::Row)},
                                      {"column", c.total(EntityType::Column)},
                                      {"cell", c.total(EntityType::Cell)}}}};
}

void counts_from_report_json(const ordered_json& j, rubric::RubricCounts& c) {
    using rubric::EntityType;
    using rubric::InfoType;
    auto read = [&](const char* key, InfoType i) {
        if (!j.contains(key) || !j.at(key).is_object()) return;
        const auto& row = j.at(key);
        c.at(i, EntityType::Row) = row.value("row", std::size_t{0});
        c.at(i, EntityType::Column) = row.value("column", std::size_t{0});
        c.at(i, EntityType::Cell) = row.value("cell", std::size_t{0});
    };
    read("missing", InfoType::Missing);
    read("extra", InfoType::Extra);
    read("partial", InfoType::Partial);
    if (j.contains("N") && j.at("N").is_object()) {
        c.total(EntityType::Row) = j.at("N").value("row", std::size_t{0});
        c.total(EntityType::Column) = j.at("N").value("column", std::size_t{0});
        c.total(EntityType::Cell) = j.at("N").value("cell", std::size_t{0});
    }
}

std::string unit_symbol(const std::optional<compare::Unit>& u) { return u ? u->symbol : ""; }

// Second opinion on mismatch tuples; accepted verdicts overwrite the tuple
// classification in place.
void llm_tuple_pass(compare::CompareResult& cmp, llm::LlmClient& client, bool strict,
                    std::vector<std::string>& notes) {
    for (auto& t : cmp.tuples) {
        if (t.classification != compare::Classification::Mismatch) continue;
        compare::CellComparison det;
        det.classification = t.classification;
        det.magnitude = t.magnitude;
        det.data_type = t.data_type;
        det.gt_value = t.gt_value;
        det.cand_value = t.cand_value;
        det.gt_unit = t.gt_unit;
        det.cand_unit = t.cand_unit;
        det.zero_reference = t.zero_reference;
        det.note = t.note;
        compare::CellComparison refined;
        try {
            refined = compare::compare_cells_llm(model::Cell{t.gt_raw}, model::Cell{t.cand_raw}, det, client);
        } catch (const ProviderError&) {
            if (strict) throw;
            continue;
        }
        if (refined.classification != det.classification || refined.magnitude != det.magnitude) {
            t.classification = refined.classification;
            t.magnitude = refined.magnitude;
            t.zero_reference = refined.zero_reference;
            t.note = refined.note;
            notes.push_back("tuple (" + std::to_string(t.gt_row) + "," + std::to_string(t.gt_col) +
                            ") reclassified by provider");
        }
    }
}

}  // namespace

EvaluationOutcome evaluate_tables(const Table& gt, const Table& cand, const EvaluationOptions& opts,
                                  llm::LlmClient* client) {
    auto started = std::chrono::steady_clock::now();

    gt.validate();
    cand.validate();

    EvaluationOutcome out;
    out.gt = describe(gt, "gt");
    out.cand = describe(cand, "cand");

    Table gt_flat = model::flatten_hierarchical(gt);
    Table cand_flat = model::flatten_hierarchical(cand);

    out.baselines.em_cells = baselines::exact_match(gt_flat, cand_flat);
    out.baselines.em_table = model::canonical_serialize(gt_flat) == model::canonical_serialize(cand_flat);
    out.baselines.chrf = baselines::chrf_tables(gt_flat, cand_flat);
    out.baselines.rouge_l = baselines::rouge_l_tables(gt_flat, cand_flat);

    out.transposed = align::detect_transpose(gt_flat, cand_flat, opts.align);
    Table oriented = out.transposed ? model::transpose(cand_flat) : cand_flat;

    align::Alignment a = align::exact_align(gt_flat, oriented, opts.align);
    a = align::similarity_align(gt_flat, oriented, a, opts.align);
    a.transposed = out.transposed;

    if (opts.use_llm && client) {
        a = align::refine_with_llm(gt_flat, oriented, a, *client, opts.llm_strict);
        out.llm_used = true;
    }

    out.comparison = compare::compare_aligned_tables(gt_flat, oriented, a, opts.compare);
    if (opts.use_llm && client) llm_tuple_pass(out.comparison, *client, opts.llm_strict, out.notes);

    out.rubric = rubric::build_rubric(gt_flat, oriented, a, out.comparison, opts.weights);
    out.alignment = std::move(a);

    out.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return out;
}

ordered_json report_document(const EvaluationOutcome& o, const EvaluationOptions& opts) {
    ordered_json doc;
    doc["schema"] = "tabx-report/1";
    doc["inputs"] = ordered_json{
        {"gt", ordered_json{{"id", o.gt.id}, {"sha256", o.gt.sha256}, {"rows", o.gt.rows}, {"cols", o.gt.cols}}},
        {"cand", ordered_json{{"id", o.cand.id},
                              {"sha256", o.cand.sha256},
                              {"rows", o.cand.rows},
                              {"cols", o.cand.cols}}}};
    doc["options"] = ordered_json{{"weights", weights_json(opts.weights)},
                                  {"llm", opts.use_llm ? (opts.llm_strict ? "strict" : "on") : "off"},
                                  {"row_match_threshold", opts.align.row_match_threshold},
                                  {"tau_relax", opts.align.tau_relax},
                                  {"epsilon_rel", opts.compare.epsilon_rel},
                                  {"epsilon_abs", opts.compare.epsilon_abs}};

    ordered_json alignment;
    alignment["transposed"] = o.transposed;
    alignment["column_map"] = pairs_json(o.alignment.column_pairs);
    alignment["row_map"] = pairs_json(o.alignment.row_pairs);
    alignment["unmatched_gt_rows"] = o.alignment.unmatched_gt_rows;
    alignment["unmatched_cand_rows"] = o.alignment.unmatched_cand_rows;
    alignment["unmatched_gt_cols"] = o.alignment.unmatched_gt_cols;
    alignment["unmatched_cand_cols"] = o.alignment.unmatched_cand_cols;
    doc["alignment"] = std::move(alignment);

    ordered_json tuples = ordered_json::array();
    for (const auto& t : o.comparison.tuples) {
        ordered_json j{{"gt_row", t.gt_row},
                       {"gt_col", t.gt_col},
                       {"cand_row", t.cand_row},
                       {"cand_col", t.cand_col},
                       {"data_type", compare::value_kind_name(t.data_type)},
                       {"gt_raw", t.gt_raw},
                       {"cand_raw", t.cand_raw},
                       {"gt_unit", unit_symbol(t.gt_unit)},
                       {"cand_unit", unit_symbol(t.cand_unit)},
                       {"classification", compare::classification_name(t.classification)},
                       {"zero_reference", t.zero_reference},
                       {"note", t.note}};
        if (t.magnitude) j["magnitude"] = *t.magnitude;
        tuples.push_back(std::move(j));
    }
    doc["tuples"] = std::move(tuples);

    ordered_json rub;
    rub["counts"] = counts_json(o.rubric.counts);
    ordered_json partials = ordered_json::array();
    for (const auto& p : o.rubric.partials)
        partials.push_back(ordered_json{{"gt_row", p.gt_row},
                                        {"gt_col", p.gt_col},
                                        {"type", compare::value_kind_name(p.type)},
                                        {"magnitude", p.magnitude}});
    rub["partials"] = std::move(partials);
    rub["residue"] = ordered_json{{"missing_rows", o.rubric.residue.missing_rows},
                                  {"extra_rows", o.rubric.residue.extra_rows},
                                  {"missing_cols", o.rubric.residue.missing_cols},
                                  {"extra_cols", o.rubric.residue.extra_cols},
                                  {"missing_cell_count", o.rubric.residue.missing_cell_count},
                                  {"extra_cell_count", o.rubric.residue.extra_cell_count}};
    ordered_json columns = ordered_json::array();
    for (const auto& c : o.rubric.columns)
        columns.push_back(ordered_json{{"gt_col", c.gt_col},
                                       {"header", c.header},
                                       {"type", compare::value_kind_name(c.type)},
                                       {"missing", c.missing},
                                       {"exact", c.exact},
                                       {"partial", c.partial},
                                       {"mismatch", c.mismatch}});
    rub["columns"] = std::move(columns);
    rub["cells"] = ordered_json{{"exact", o.rubric.exact_cells},
                                {"partial", o.rubric.partial_cells},
                                {"mismatch", o.rubric.mismatch_cells}};
    rub["error"] = o.rubric.error;
    rub["quality"] = o.rubric.quality;
    doc["rubric"] = std::move(rub);

    doc["baselines"] = ordered_json{{"em_cells", o.baselines.em_cells},
                                    {"em_table", o.baselines.em_table},
                                    {"chrf", o.baselines.chrf},
                                    {"rouge_l", o.baselines.rouge_l}};
    doc["llm_used"] = o.llm_used;
    doc["notes"] = o.notes;
    doc["timing"] = ordered_json{{"elapsed_ms", o.elapsed_ms}};
    return doc;
}

std::string report_json(const EvaluationOutcome& o, const EvaluationOptions& opts, int indent) {
    return report_document(o, opts).dump(indent) + "\n";
}

std::string render_pretty(const EvaluationOutcome& o) {
    std::string s;
    s += "## Table evaluation\n\n";
    s += "| | reference | candidate |\n|---|---|---|\n";
    s += "| id | " + o.gt.id + " | " + o.cand.id + " |\n";
    s += "| shape | " + std::to_string(o.gt.rows) + " x " + std::to_string(o.gt.cols) + " | " +
         std::to_string(o.cand.rows) + " x " + std::to_string(o.cand.cols) + " |\n\n";

    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", o.rubric.error);
    s += "**Error score: ";
    s += buf;
    std::snprintf(buf, sizeof buf, "%.6f", o.rubric.quality);
    s += "**  (quality ";
    s += buf;
    s += ")\n\n";
    if (o.transposed) s += "Candidate was evaluated transposed.\n\n";

    const auto& c = o.rubric.counts;
    using rubric::EntityType;
    using rubric::InfoType;
    s += "| | rows | columns | cells |\n|---|---|---|---|\n";
    auto line = [&](const char* label, InfoType i) {
        s += "| " + std::string(label) + " | " + std::to_string(c.at(i, EntityType::Row)) + " | " +
             std::to_string(c.at(i, EntityType::Column)) + " | " + std::to_string(c.at(i, EntityType::Cell)) +
             " |\n";
    };
    line("missing", InfoType::Missing);
    line("extra", InfoType::Extra);
    line("partial", InfoType::Partial);
    s += "| of | " + std::to_string(c.total(EntityType::Row)) + " | " + std::to_string(c.total(EntityType::Column)) +
         " | " + std::to_string(c.total(EntityType::Cell)) + " |\n\n";

    std::size_t shown = 0;
    for (const auto& t : o.comparison.tuples) {
        if (t.classification == compare::Classification::Exact) continue;
        if (shown == 0) s += "Deviations:\n\n";
        if (++shown > 20) {
            s += "- ...\n";
            break;
        }
        s += "- (" + std::to_string(t.gt_row) + "," + std::to_string(t.gt_col) + ") " +
             compare::classification_name(t.classification) + " [" + compare::value_kind_name(t.data_type) + "] \"" +
             t.gt_raw + "\" vs \"" + t.cand_raw + "\"";
        if (t.magnitude) {
            std::snprintf(buf, sizeof buf, "%.4f", *t.magnitude);
            s += " magnitude ";
            s += buf;
        }
        s += "\n";
    }

    std::snprintf(buf, sizeof buf, "%.4f", o.baselines.em_cells);
    s += "\nBaselines: EM(cells) ";
    s += buf;
    s += o.baselines.em_table ? ", EM(table) 1" : ", EM(table) 0";
    std::snprintf(buf, sizeof buf, "%.4f", o.baselines.chrf);
    s += ", chrF ";
    s += buf;
    std::snprintf(buf, sizeof buf, "%.4f", o.baselines.rouge_l);
    s += ", ROUGE-L ";
    s += buf;
    s += "\n";
    return s;
}

StoredReport parse_report(const std::string& text) {
    ordered_json doc = ordered_json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw MalformedInput("report is not a JSON object");
    if (doc.value("schema", "") != "tabx-report/1")
        throw MalformedInput("unsupported report schema: " + doc.value("schema", std::string("<none>")));

    StoredReport r;
    if (doc.contains("inputs") && doc["inputs"].is_object()) {
        const auto& in = doc["inputs"];
        if (in.contains("gt") && in["gt"].is_object()) r.gt_id = in["gt"].value("id", "");
        if (in.contains("cand") && in["cand"].is_object()) r.cand_id = in["cand"].value("id", "");
    }
    if (doc.contains("alignment") && doc["alignment"].is_object())
        r.transposed = doc["alignment"].value("transposed", false);
    if (doc.contains("rubric") && doc["rubric"].is_object()) {
        const auto& rub = doc["rubric"];
        if (rub.contains("counts") && rub["counts"].is_object()) counts_from_report_json(rub["counts"], r.counts);
        r.error = rub.value("error", 0.0);
        r.quality = rub.value("quality", 1.0);
        if (rub.contains("partials") && rub["partials"].is_array()) {
            for (const auto& p : rub["partials"]) {
                if (!p.is_object()) continue;
                rubric::PartialCell cell;
                cell.gt_row = p.value("gt_row", std::size_t{0});
                cell.gt_col = p.value("gt_col", std::size_t{0});
                if (auto kind = compare::value_kind_from_name(p.value("type", "text"))) cell.type = *kind;
                cell.magnitude = p.value("magnitude", 0.0);
                r.partials.push_back(cell);
            }
        }
    }
    if (doc.contains("baselines") && doc["baselines"].is_object()) {
        const auto& b = doc["baselines"];
        r.baselines.em_cells = b.value("em_cells", 0.0);
        r.baselines.em_table = b.value("em_table", false);
        r.baselines.chrf = b.value("chrf", 0.0);
        r.baselines.rouge_l = b.value("rouge_l", 0.0);
    }
    if (doc.contains("provenance")) r.provenance = doc["provenance"];
    return r;
}

}  // namespace tabx::report
