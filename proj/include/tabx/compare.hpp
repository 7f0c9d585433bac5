#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabx/align.hpp"
#include "tabx/table.hpp"
#include "tabx/value.hpp"

namespace tabx::compare {

using model::Cell;
using model::Table;

enum class Classification { Exact, Partial, Mismatch };

std::string classification_name(Classification c);

struct CompareOptions {
    double epsilon_rel = 1e-9;
    double epsilon_abs = 1e-12;
};

struct CellComparison {
    Classification classification = Classification::Exact;
    std::optional<double> magnitude;  // present iff partial
    ValueKind data_type = ValueKind::Text;
    CellValue gt_value{TextValue{}};
    CellValue cand_value{TextValue{}};
    std::optional<Unit> gt_unit, cand_unit;
    bool zero_reference = false;  // magnitude fell back to absolute difference
    std::string note;
};

struct ComparisonTuple {
    std::size_t gt_row = 0, gt_col = 0;
    std::size_t cand_row = 0, cand_col = 0;
    ValueKind data_type = ValueKind::Text;
    CellValue gt_value{TextValue{}};
    CellValue cand_value{TextValue{}};
    std::string gt_raw, cand_raw;
    std::optional<Unit> gt_unit, cand_unit;
    Classification classification = Classification::Exact;
    std::optional<double> magnitude;
    bool zero_reference = false;
    std::string note;
};

struct ResidueSummary {
    std::vector<std::size_t> missing_rows, extra_rows;
    std::vector<std::size_t> missing_cols, extra_cols;
    std::size_t missing_cell_count = 0;  // cells of unmatched GT rows/cols, deduplicated
    std::size_t extra_cell_count = 0;    // same over the candidate
    std::map<ValueKind, std::size_t> missing_cells_by_type, extra_cells_by_type;
};

struct CompareResult {
    std::vector<ComparisonTuple> tuples;
    ResidueSummary residue;
};

struct MagnitudeResult {
    double value = 0.0;
    bool zero_reference = false;
};

// Normalized deviation of cand from gt for values of the same kind: relative
// numeric difference, day/second deltas for dates and times, 1 - LCS ratio for
// text, 1 - Jaccard for lists. Throws InconsistentInputs for incomparable kinds.
MagnitudeResult compute_magnitude(const CellValue& gt, const CellValue& cand);

// Majority inferred kind over a column's non-empty cells; ties resolve by the
// cascade order. Empty columns read as Text.
ValueKind column_majority_kind(const Table& t, std::size_t col);

CellComparison compare_cells(const Cell& gt, const Cell& cand, std::optional<ValueKind> column_hint = std::nullopt,
                             const std::optional<Unit>& gt_default_unit = std::nullopt,
                             const std::optional<Unit>& cand_default_unit = std::nullopt,
                             const CompareOptions& opts = {});

// Walks every aligned row/column pair, producing one tuple per cell pair plus
// the residue of unmatched structure. The candidate must already be in the
// orientation the alignment was computed on.
CompareResult compare_aligned_tables(const Table& gt, const Table& cand, const align::Alignment& alignment,
                                     const CompareOptions& opts = {});

}  // namespace tabx::compare
