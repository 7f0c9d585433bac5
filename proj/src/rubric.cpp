#include "tabx/rubric.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tabx/errors.hpp"
#include "tabx/stats.hpp"
#include "tabx/util.hpp"

namespace tabx::rubric {

std::string info_type_name(InfoType t) {
    switch (t) {
        case InfoType::Missing: return "missing";
        case InfoType::Extra: return "extra";
        case InfoType::Partial: return "partial";
    }
    return "missing";
}

std::string entity_type_name(EntityType t) {
    switch (t) {
        case EntityType::Row: return "row";
        case EntityType::Column: return "column";
        case EntityType::Cell: return "cell";
    }
    return "cell";
}

double WeightConfig::beta(InfoType t) const {
    switch (t) {
        case InfoType::Missing: return beta_missing;
        case InfoType::Extra: return beta_extra;
        case InfoType::Partial: return beta_partial;
    }
    return beta_missing;
}

double WeightConfig::alpha(EntityType t) const {
    switch (t) {
        case EntityType::Row: return alpha_row;
        case EntityType::Column: return alpha_col;
        case EntityType::Cell: return alpha_cell;
    }
    return alpha_cell;
}

WeightConfig WeightConfig::all_ones() {
    WeightConfig w;
    w.name = "all-ones";
    w.beta_missing = w.beta_extra = w.beta_partial = 1.0;
    w.alpha_row = w.alpha_col = w.alpha_cell = 1.0;
    return w;
}

double gamma_for_magnitude(double magnitude, const WeightConfig& w) {
    return util::decimal_mul(w.omega_p, magnitude);
}

double compute_gamma(const std::optional<compare::ComparisonTuple>& tuple, const WeightConfig& w) {
    if (!tuple) return 1.0;
    if (tuple->classification != compare::Classification::Partial)
        return 1.0;
    if (!tuple->magnitude) throw InconsistentInputs("partial tuple without a magnitude");
    return gamma_for_magnitude(*tuple->magnitude, w);
}

double compute_score(const RubricCounts& counts, const std::vector<PartialCell>& partials, const WeightConfig& w) {
    if (counts.at(InfoType::Partial, EntityType::Row) != 0 || counts.at(InfoType::Partial, EntityType::Column) != 0)
        throw InconsistentInputs("partial counts apply only to cells");
    if (counts.at(InfoType::Partial, EntityType::Cell) != partials.size())
        throw InconsistentInputs("partial cell count disagrees with the magnitude list");

    double score = 0.0;
    for (InfoType info : {InfoType::Missing, InfoType::Extra}) {
        for (EntityType entity : {EntityType::Row, EntityType::Column, EntityType::Cell}) {
            std::size_t f = counts.at(info, entity);
            if (f == 0) continue;
            std::size_t N = counts.total(entity);
            if (N == 0) throw ZeroDenominator("error count against an empty " + entity_type_name(entity) + " total");
            double frac = static_cast<double>(f) / static_cast<double>(N);
            score += util::decimal_mul(util::decimal_mul(w.beta(info), w.alpha(entity)), frac);
        }
    }
    if (!partials.empty()) {
        std::size_t n_cell = counts.total(EntityType::Cell);
        if (n_cell == 0) throw ZeroDenominator("partial cells against an empty cell total");
        double unit = util::decimal_mul(w.beta(InfoType::Partial), w.alpha(EntityType::Cell)) /
                      static_cast<double>(n_cell);
        for (const PartialCell& p : partials) score += unit * gamma_for_magnitude(p.magnitude, w);
    }
    return score;
}

double quality_from_error(double error) { return 1.0 / (1.0 + error); }

RubricReport build_rubric(const Table& gt, const Table& cand, const align::Alignment& alignment,
                          const compare::CompareResult& cmp, const WeightConfig& w) {
    RubricReport rep;
    rep.weights = w;
    rep.transposed = alignment.transposed;
    rep.residue = cmp.residue;
    rep.tuples = cmp.tuples;

    rep.counts.total(EntityType::Row) = gt.row_count();
    rep.counts.total(EntityType::Column) = gt.column_count();
    rep.counts.total(EntityType::Cell) = gt.cell_count();

    rep.counts.at(InfoType::Missing, EntityType::Row) = cmp.residue.missing_rows.size();
    rep.counts.at(InfoType::Extra, EntityType::Row) = cmp.residue.extra_rows.size();
    rep.counts.at(InfoType::Missing, EntityType::Column) = cmp.residue.missing_cols.size();
    rep.counts.at(InfoType::Extra, EntityType::Column) = cmp.residue.extra_cols.size();

    std::map<std::size_t, ColumnStat> col_stats;
    for (std::size_t c = 0; c < gt.column_count(); ++c) {
        ColumnStat cs;
        cs.gt_col = c;
        cs.header = gt.header_text(c);
        cs.type = compare::column_majority_kind(gt, c);
        col_stats[c] = cs;
    }
    for (std::size_t c : cmp.residue.missing_cols) col_stats[c].missing = true;

    std::map<std::size_t, bool> row_all_exact, col_all_exact;
    for (const auto& rp : alignment.row_pairs) row_all_exact[rp.gt] = true;
    for (const auto& cp : alignment.column_pairs) col_all_exact[cp.gt] = true;

    for (const auto& tup : cmp.tuples) {
        switch (tup.classification) {
            case compare::Classification::Exact:
                rep.exact_cells++;
                rep.exact_by_type[tup.data_type]++;
                col_stats[tup.gt_col].exact++;
                break;
            case compare::Classification::Partial: {
                if (!tup.magnitude) throw InconsistentInputs("partial tuple without a magnitude");
                rep.partial_cells++;
                rep.partial_by_type[tup.data_type]++;
                col_stats[tup.gt_col].partial++;
                rep.partials.push_back(PartialCell{tup.gt_row, tup.gt_col, tup.data_type, *tup.magnitude});
                row_all_exact[tup.gt_row] = false;
                col_all_exact[tup.gt_col] = false;
                break;
            }
            case compare::Classification::Mismatch:
                rep.mismatch_cells++;
                rep.mismatch_missing_by_type[tup.data_type]++;
                rep.mismatch_extra_by_type[tup.cand_value.kind()]++;
                col_stats[tup.gt_col].mismatch++;
                row_all_exact[tup.gt_row] = false;
                col_all_exact[tup.gt_col] = false;
                break;
        }
    }

    // A mismatched cell is wrong information in place of right: one missing
    // and one extra unit at cell granularity.
    rep.counts.at(InfoType::Missing, EntityType::Cell) = rep.mismatch_cells;
    rep.counts.at(InfoType::Extra, EntityType::Cell) = rep.mismatch_cells;
    rep.counts.at(InfoType::Partial, EntityType::Cell) = rep.partials.size();

    for (const auto& [r, all_exact] : row_all_exact)
        if (all_exact) rep.exact_rows++;
    for (const auto& [c, all_exact] : col_all_exact)
        if (all_exact) rep.exact_cols++;

    rep.columns.reserve(col_stats.size());
    for (auto& [c, cs] : col_stats) rep.columns.push_back(std::move(cs));
    rep.extra_cand_cols = cmp.residue.extra_cols;

    rep.error = compute_score(rep.counts, rep.partials, w);
    rep.quality = quality_from_error(rep.error);
    return rep;
}

AggregateStats aggregate_stats(const std::vector<RubricReport>& reports) {
    if (reports.empty()) throw TooFewItems("no reports to aggregate");
    AggregateStats agg;
    agg.reports = reports.size();
    double n = static_cast<double>(reports.size());

    for (const auto& rep : reports) {
        for (const auto& [k, c] : rep.residue.missing_cells_by_type) agg.cell_by_type[k].missing += c;
        for (const auto& [k, c] : rep.residue.extra_cells_by_type) agg.cell_by_type[k].extra += c;
        for (const auto& [k, c] : rep.mismatch_missing_by_type) agg.cell_by_type[k].missing += c;
        for (const auto& [k, c] : rep.mismatch_extra_by_type) agg.cell_by_type[k].extra += c;
        for (const auto& [k, c] : rep.partial_by_type) agg.cell_by_type[k].partial += c;
        for (const auto& [k, c] : rep.exact_by_type) agg.cell_by_type[k].exact += c;

        agg.rows.missing += static_cast<double>(rep.counts.at(InfoType::Missing, EntityType::Row));
        agg.rows.extra += static_cast<double>(rep.counts.at(InfoType::Extra, EntityType::Row));
        agg.rows.exact += static_cast<double>(rep.exact_rows);
        agg.columns.missing += static_cast<double>(rep.counts.at(InfoType::Missing, EntityType::Column));
        agg.columns.extra += static_cast<double>(rep.counts.at(InfoType::Extra, EntityType::Column));
        agg.columns.exact += static_cast<double>(rep.exact_cols);

        agg.mean_error += rep.error;
        agg.mean_quality += rep.quality;
    }

    for (auto& [k, t] : agg.cell_by_type) {
        t.missing /= n;
        t.extra /= n;
        t.partial /= n;
        t.exact /= n;
    }
    agg.rows.missing /= n;
    agg.rows.extra /= n;
    agg.rows.exact /= n;
    agg.columns.missing /= n;
    agg.columns.extra /= n;
    agg.columns.exact /= n;
    agg.mean_error /= n;
    agg.mean_quality /= n;
    return agg;
}

std::vector<SweepEntry> sweep_weights(const std::vector<ScoredCase>& cases, double low) {
    if (cases.size() < 2) throw TooFewItems("weight sweeps need at least two cases");

    auto ranking_for = [&](const WeightConfig& w) {
        std::vector<std::pair<std::string, double>> scored;
        scored.reserve(cases.size());
        for (const auto& c : cases) scored.emplace_back(c.id, compute_score(c.counts, c.partials, w));
        // Lower error means better, so rank ascending.
        return stats::scores_to_ranking(scored, false);
    };
    auto default_ranking = ranking_for(WeightConfig::defaults());

    auto tau_between = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        std::map<std::string, double> pos;
        for (std::size_t i = 0; i < b.size(); ++i) pos[b[i]] = static_cast<double>(i);
        std::vector<double> x(a.size()), y(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            x[i] = static_cast<double>(i);
            y[i] = pos[a[i]];
        }
        return stats::kendall_tau(x, y);
    };

    std::vector<SweepEntry> out;
    out.reserve(64);
    for (std::size_t mask = 0; mask < 64; ++mask) {
        SweepEntry entry;
        entry.index = mask;
        WeightConfig w;
        w.name = "sweep-" + std::to_string(mask);
        w.beta_missing = (mask & 1u) ? 1.0 : low;
        w.beta_extra = (mask & 2u) ? 1.0 : low;
        w.beta_partial = (mask & 4u) ? 1.0 : low;
        w.alpha_row = (mask & 8u) ? 1.0 : low;
        w.alpha_col = (mask & 16u) ? 1.0 : low;
        w.alpha_cell = (mask & 32u) ? 1.0 : low;
        entry.config = w;

        double sum = 0.0;
        for (const auto& c : cases) sum += compute_score(c.counts, c.partials, w);
        entry.mean_error = sum / static_cast<double>(cases.size());
        entry.tau_vs_default = tau_between(ranking_for(w), default_ranking);
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace tabx::rubric
