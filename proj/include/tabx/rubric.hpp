#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabx/align.hpp"
#include "tabx/compare.hpp"
#include "tabx/table.hpp"

namespace tabx::rubric {

using model::Table;

enum class InfoType { Missing = 0, Extra = 1, Partial = 2 };
enum class EntityType { Row = 0, Column = 1, Cell = 2 };

std::string info_type_name(InfoType t);
std::string entity_type_name(EntityType t);

struct WeightConfig {
    std::string name = "default";
    double beta_missing = 1.0;
    double beta_extra = 0.9;
    double beta_partial = 0.8;
    double alpha_row = 0.9;
    double alpha_col = 1.0;
    double alpha_cell = 0.8;
    double omega_p = 0.9;

    double beta(InfoType t) const;
    double alpha(EntityType t) const;

    static WeightConfig defaults() { return WeightConfig{}; }
    static WeightConfig all_ones();
};

struct RubricCounts {
    // f[info][entity]: error counts at the coarsest granularity; a missing
    // row counts once as a row, not again as its cells.
    std::array<std::array<std::size_t, 3>, 3> f{};
    // N[entity]: ground-truth row, column, and cell totals.
    std::array<std::size_t, 3> N{};

    std::size_t& at(InfoType i, EntityType e) { return f[static_cast<std::size_t>(i)][static_cast<std::size_t>(e)]; }
    std::size_t at(InfoType i, EntityType e) const {
        return f[static_cast<std::size_t>(i)][static_cast<std::size_t>(e)];
    }
    std::size_t& total(EntityType e) { return N[static_cast<std::size_t>(e)]; }
    std::size_t total(EntityType e) const { return N[static_cast<std::size_t>(e)]; }
};

struct PartialCell {
    std::size_t gt_row = 0, gt_col = 0;
    compare::ValueKind type = compare::ValueKind::Text;
    double magnitude = 0.0;
};

struct ColumnStat {
    std::size_t gt_col = 0;
    std::string header;
    compare::ValueKind type = compare::ValueKind::Text;
    bool missing = false;
    std::size_t exact = 0, partial = 0, mismatch = 0;
};

struct RubricReport {
    RubricCounts counts;
    std::vector<PartialCell> partials;
    compare::ResidueSummary residue;
    std::vector<compare::ComparisonTuple> tuples;
    std::vector<ColumnStat> columns;
    std::vector<std::size_t> extra_cand_cols;
    bool transposed = false;

    std::size_t exact_cells = 0, partial_cells = 0, mismatch_cells = 0;
    std::size_t exact_rows = 0, exact_cols = 0;  // fully exact matched rows/columns
    std::map<compare::ValueKind, std::size_t> exact_by_type, partial_by_type;
    std::map<compare::ValueKind, std::size_t> mismatch_missing_by_type;  // keyed by the GT side
    std::map<compare::ValueKind, std::size_t> mismatch_extra_by_type;    // keyed by the candidate side

    WeightConfig weights;
    double error = 0.0;
    double quality = 1.0;  // 1 / (1 + error)
};

// Per-cell deviation discount: 1 for missing and extra entries; for a partial
// tuple, omega_p times its magnitude.
double compute_gamma(const std::optional<compare::ComparisonTuple>& tuple, const WeightConfig& w);
double gamma_for_magnitude(double magnitude, const WeightConfig& w);

// Weighted error. Throws ZeroDenominator when a nonzero count divides by an
// empty entity total and InconsistentInputs when counts and partials disagree.
double compute_score(const RubricCounts& counts, const std::vector<PartialCell>& partials, const WeightConfig& w);

double quality_from_error(double error);

// Assembles counts, descriptors, and diagnostics; error/quality filled from
// compute_score with the given weights.
RubricReport build_rubric(const Table& gt, const Table& cand, const align::Alignment& alignment,
                          const compare::CompareResult& cmp, const WeightConfig& w = WeightConfig::defaults());

struct TypeAggregate {
    double missing = 0.0, extra = 0.0, partial = 0.0, exact = 0.0;  // mean per report
};

struct StructureAggregate {
    double missing = 0.0, extra = 0.0, exact = 0.0;
};

struct AggregateStats {
    std::size_t reports = 0;
    std::map<compare::ValueKind, TypeAggregate> cell_by_type;
    StructureAggregate rows, columns;
    double mean_error = 0.0;
    double mean_quality = 0.0;
};

AggregateStats aggregate_stats(const std::vector<RubricReport>& reports);

// One scored case for weight sweeps: everything needed to re-score under a
// different configuration without re-aligning.
struct ScoredCase {
    std::string id;
    RubricCounts counts;
    std::vector<PartialCell> partials;
};

struct SweepEntry {
    std::size_t index = 0;  // bit i of the six toggles
    WeightConfig config;
    double mean_error = 0.0;
    double tau_vs_default = 0.0;  // ranking agreement against the default profile
};

// All 64 configurations that toggle the six alpha/beta weights between `low`
// and 1, omega_p held at its default.
std::vector<SweepEntry> sweep_weights(const std::vector<ScoredCase>& cases, double low = 0.0);

}  // namespace tabx::rubric
