#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabx/align.hpp"
#include "tabx/compare.hpp"
#include "tabx/rubric.hpp"
#include "tabx/table.hpp"

namespace tabx::llm {
class LlmClient;
}

namespace tabx::report {

using model::Table;

struct EvaluationOptions {
    rubric::WeightConfig weights = rubric::WeightConfig::defaults();
    align::AlignOptions align;
    compare::CompareOptions compare;
    bool use_llm = false;
    bool llm_strict = false;  // provider failures abort instead of falling back
};

struct InputDescriptor {
    std::string id;
    std::string sha256;  // of the canonical serialization, as parsed
    std::size_t rows = 0;
    std::size_t cols = 0;
};

struct BaselineScores {
    double em_cells = 0.0;  // positional cell-level exact match
    bool em_table = false;  // canonical serializations byte-equal
    double chrf = 0.0;
    double rouge_l = 0.0;
};

struct EvaluationOutcome {
    InputDescriptor gt, cand;
    bool transposed = false;  // candidate was evaluated against its transpose
    align::Alignment alignment;
    compare::CompareResult comparison;
    rubric::RubricReport rubric;
    BaselineScores baselines;  // always on the as-given orientation
    bool llm_used = false;
    std::vector<std::string> notes;
    double elapsed_ms = 0.0;
};

// Full pipeline on in-memory tables: flatten, orient, two-phase alignment,
// optional provider refinement, cell comparison, rubric scoring, baselines.
// The client may be null unless opts.use_llm is set.
EvaluationOutcome evaluate_tables(const Table& gt, const Table& cand, const EvaluationOptions& opts = {},
                                  llm::LlmClient* client = nullptr);

// Schema "tabx-report/1". Deterministic field order; carries no wall-clock
// timestamps (the timing block is elapsed duration only).
nlohmann::ordered_json report_document(const EvaluationOutcome& o, const EvaluationOptions& opts);

std::string report_json(const EvaluationOutcome& o, const EvaluationOptions& opts, int indent = 2);

// Markdown rendering for terminals.
std::string render_pretty(const EvaluationOutcome& o);

// Everything cmd_bench needs back out of a stored report document.
struct StoredReport {
    std::string gt_id, cand_id;
    rubric::RubricCounts counts;
    std::vector<rubric::PartialCell> partials;
    double error = 0.0;
    double quality = 1.0;
    bool transposed = false;
    BaselineScores baselines;
    nlohmann::ordered_json provenance;  // opaque extra block, if present
};

StoredReport parse_report(const std::string& text);

}  // namespace tabx::report
