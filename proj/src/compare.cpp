#include "tabx/compare.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tabx/errors.hpp"
#include "tabx/util.hpp"

namespace tabx::compare {

namespace {

bool nearly_equal(double a, double b, const CompareOptions& opts) {
    double diff = std::fabs(a - b);
    double scale = std::max(std::fabs(a), std::fabs(b));
    return diff <= std::max(opts.epsilon_rel * scale, opts.epsilon_abs);
}

CellComparison numeric_outcome(double gt_val, double cand_val, const CompareOptions& opts, CellComparison base) {
    if (nearly_equal(gt_val, cand_val, opts)) {
        base.classification = Classification::Exact;
        return base;
    }
    base.classification = Classification::Partial;
    if (cand_val == 0.0) {
        base.zero_reference = true;
        base.magnitude = std::fabs(gt_val - cand_val);
        base.note = "zero reference value, absolute difference used";
    } else {
        base.magnitude = std::fabs(gt_val - cand_val) / std::fabs(cand_val);
    }
    return base;
}

std::set<std::string> list_elements(const ListValue& lv) {
    std::set<std::string> out;
    for (const auto& item : lv.items) out.insert(canonical_string(item));
    return out;
}

}  // namespace

MagnitudeResult compute_magnitude(const CellValue& gt, const CellValue& cand) {
    MagnitudeResult out;
    auto relative = [&out](double g, double c) {
        if (c == 0.0) {
            out.zero_reference = true;
            out.value = std::fabs(g - c);
        } else {
            out.value = std::fabs(g - c) / std::fabs(c);
        }
        return out;
    };

    bool g_bare_num = gt.kind() == ValueKind::Number && !gt.number().unit;
    bool c_bare_num = cand.kind() == ValueKind::Number && !cand.number().unit;
    if (g_bare_num && cand.kind() == ValueKind::Time && cand.time().kind == TimeValue::Kind::Duration)
        return relative(gt.number().magnitude, cand.time().seconds);
    if (c_bare_num && gt.kind() == ValueKind::Time && gt.time().kind == TimeValue::Kind::Duration)
        return relative(gt.time().seconds, cand.number().magnitude);
    if (gt.kind() != cand.kind())
        throw InconsistentInputs("cannot measure deviation between " + value_kind_name(gt.kind()) + " and " +
                                 value_kind_name(cand.kind()));

    switch (gt.kind()) {
        case ValueKind::Number: {
            const auto& gn = gt.number();
            const auto& cn = cand.number();
            if (gn.unit && cn.unit && gn.unit->dimension != cn.unit->dimension)
                throw InconsistentInputs("cannot measure deviation across dimensions");
            return relative(gn.magnitude, cn.magnitude);
        }
        case ValueKind::Time: {
            if (gt.time().kind != cand.time().kind)
                throw InconsistentInputs("cannot measure deviation between clock time and duration");
            return relative(gt.time().seconds, cand.time().seconds);
        }
        case ValueKind::Date: {
            const auto& gd = gt.date();
            const auto& cd = cand.date();
            double delta = static_cast<double>(
                std::llabs(days_from_civil(gd.year, gd.month, gd.day) - days_from_civil(cd.year, cd.month, cd.day)));
            out.value = delta / static_cast<double>(cd.day);
            return out;
        }
        case ValueKind::Text:
            out.value = 1.0 - util::lcs_ratio(gt.text().text, cand.text().text);
            return out;
        case ValueKind::List: {
            auto ga = list_elements(gt.list());
            auto cb = list_elements(cand.list());
            std::size_t inter = 0;
            for (const auto& e : ga) inter += cb.count(e);
            std::size_t uni = ga.size() + cb.size() - inter;
            out.value = uni == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
            return out;
        }
        default:
            throw InconsistentInputs("no deviation measure for " + value_kind_name(gt.kind()));
    }
}

std::string classification_name(Classification c) {
    switch (c) {
        case Classification::Exact: return "exact";
        case Classification::Partial: return "partial";
        case Classification::Mismatch: return "mismatch";
    }
    return "mismatch";
}

ValueKind column_majority_kind(const Table& t, std::size_t col) {
    std::map<ValueKind, std::size_t> counts;
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        const std::string& raw = t.cell(r, col);
        if (util::trim(raw).empty()) continue;
        counts[infer_cell_type(raw).kind()]++;
    }
    if (counts.empty()) return ValueKind::Text;
    static const ValueKind precedence[] = {ValueKind::Number, ValueKind::Date,    ValueKind::Time, ValueKind::Boolean,
                                           ValueKind::List,   ValueKind::Text,    ValueKind::Other};
    ValueKind best = ValueKind::Text;
    std::size_t best_count = 0;
    for (ValueKind k : precedence) {
        auto it = counts.find(k);
        if (it != counts.end() && it->second > best_count) {
            best = k;
            best_count = it->second;
        }
    }
    return best;
}

CellComparison compare_cells(const Cell& gt, const Cell& cand, std::optional<ValueKind> column_hint,
                             const std::optional<Unit>& gt_default_unit,
                             const std::optional<Unit>& cand_default_unit, const CompareOptions& opts) {
    CellValue g = normalize_value(infer_cell_type(gt.raw, column_hint, gt_default_unit));
    CellValue c = normalize_value(infer_cell_type(cand.raw, column_hint, cand_default_unit));

    CellComparison out;
    out.gt_value = g;
    out.cand_value = c;
    out.data_type = g.kind();
    if (g.kind() == ValueKind::Number) out.gt_unit = g.number().unit;
    if (c.kind() == ValueKind::Number) out.cand_unit = c.number().unit;
    if (g.kind() == ValueKind::Time) out.gt_unit = g.time().written_unit;
    if (c.kind() == ValueKind::Time) out.cand_unit = c.time().written_unit;

    if (g.kind() != c.kind()) {
        // A bare number against a duration reads as seconds.
        bool g_bare_num = g.kind() == ValueKind::Number && !g.number().unit;
        bool c_bare_num = c.kind() == ValueKind::Number && !c.number().unit;
        if (g_bare_num && c.kind() == ValueKind::Time && c.time().kind == TimeValue::Kind::Duration) {
            out.data_type = ValueKind::Time;
            return numeric_outcome(g.number().magnitude, c.time().seconds, opts, out);
        }
        if (c_bare_num && g.kind() == ValueKind::Time && g.time().kind == TimeValue::Kind::Duration) {
            out.data_type = ValueKind::Time;
            return numeric_outcome(g.time().seconds, c.number().magnitude, opts, out);
        }
        out.classification = Classification::Mismatch;
        out.note = "type mismatch: " + value_kind_name(g.kind()) + " vs " + value_kind_name(c.kind());
        return out;
    }

    switch (g.kind()) {
        case ValueKind::Number: {
            const auto& gn = g.number();
            const auto& cn = c.number();
            if (gn.unit && cn.unit) {
                if (gn.unit->dimension != cn.unit->dimension) {
                    out.classification = Classification::Mismatch;
                    out.note = "incompatible dimensions: " + dimension_name(gn.unit->dimension) + " vs " +
                               dimension_name(cn.unit->dimension);
                    return out;
                }
                if (gn.unit->dimension == Dimension::CurrencyScale && gn.unit->symbol != cn.unit->symbol) {
                    out.classification = Classification::Mismatch;
                    out.note = "different currencies: " + gn.unit->symbol + " vs " + cn.unit->symbol;
                    return out;
                }
            }
            return numeric_outcome(gn.magnitude, cn.magnitude, opts, out);
        }
        case ValueKind::Boolean: {
            if (g.boolean().value == c.boolean().value) return out;
            out.classification = Classification::Mismatch;
            out.note = "boolean values differ";
            return out;
        }
        case ValueKind::Date: {
            const auto& gd = g.date();
            const auto& cd = c.date();
            if (gd.year == cd.year && gd.month == cd.month && gd.day == cd.day) return out;
            out.classification = Classification::Partial;
            double delta = static_cast<double>(
                std::llabs(days_from_civil(gd.year, gd.month, gd.day) - days_from_civil(cd.year, cd.month, cd.day)));
            out.magnitude = delta / static_cast<double>(cd.day);
            return out;
        }
        case ValueKind::Time: {
            const auto& gt_t = g.time();
            const auto& cd_t = c.time();
            if (gt_t.kind != cd_t.kind) {
                out.classification = Classification::Mismatch;
                out.note = "clock time vs duration";
                return out;
            }
            return numeric_outcome(gt_t.seconds, cd_t.seconds, opts, out);
        }
        case ValueKind::Text: {
            const std::string& a = g.text().text;
            const std::string& b = c.text().text;
            if (a == b) return out;
            out.classification = Classification::Partial;
            out.magnitude = 1.0 - util::lcs_ratio(a, b);
            return out;
        }
        case ValueKind::List: {
            auto ga = list_elements(g.list());
            auto cb = list_elements(c.list());
            if (ga == cb) return out;
            out.classification = Classification::Partial;
            std::size_t inter = 0;
            for (const auto& e : ga) inter += cb.count(e);
            std::size_t uni = ga.size() + cb.size() - inter;
            out.magnitude = uni == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
            return out;
        }
        case ValueKind::Other: {
            if (g.other().raw == c.other().raw) return out;
            out.classification = Classification::Mismatch;
            out.note = "opaque values differ";
            return out;
        }
    }
    return out;
}

CompareResult compare_aligned_tables(const Table& gt, const Table& cand, const align::Alignment& alignment,
                                     const CompareOptions& opts) {
    align::validate_alignment(alignment, gt, cand);

    std::vector<std::optional<ValueKind>> gt_hints(gt.column_count());
    std::vector<std::optional<Unit>> gt_units(gt.column_count());
    for (std::size_t c = 0; c < gt.column_count(); ++c) {
        gt_hints[c] = column_majority_kind(gt, c);
        gt_units[c] = header_unit(gt.header_text(c));
    }
    std::vector<std::optional<Unit>> cand_units(cand.column_count());
    for (std::size_t c = 0; c < cand.column_count(); ++c) cand_units[c] = header_unit(cand.header_text(c));

    CompareResult result;
    result.tuples.reserve(alignment.row_pairs.size() * alignment.column_pairs.size());
    for (const auto& rp : alignment.row_pairs) {
        for (const auto& cp : alignment.column_pairs) {
            const std::string& graw = gt.cell(rp.gt, cp.gt);
            const std::string& craw = cand.cell(rp.cand, cp.cand);
            CellComparison cmp =
                compare_cells(Cell{graw}, Cell{craw}, gt_hints[cp.gt], gt_units[cp.gt], cand_units[cp.cand], opts);
            ComparisonTuple tup;
            tup.gt_row = rp.gt;
            tup.gt_col = cp.gt;
            tup.cand_row = rp.cand;
            tup.cand_col = cp.cand;
            tup.data_type = cmp.data_type;
            tup.gt_value = cmp.gt_value;
            tup.cand_value = cmp.cand_value;
            tup.gt_raw = graw;
            tup.cand_raw = craw;
            tup.gt_unit = cmp.gt_unit;
            tup.cand_unit = cmp.cand_unit;
            tup.classification = cmp.classification;
            tup.magnitude = cmp.magnitude;
            tup.zero_reference = cmp.zero_reference;
            tup.note = cmp.note;
            result.tuples.push_back(std::move(tup));
        }
    }

    ResidueSummary& res = result.residue;
    res.missing_rows = alignment.unmatched_gt_rows;
    res.extra_rows = alignment.unmatched_cand_rows;
    res.missing_cols = alignment.unmatched_gt_cols;
    res.extra_cols = alignment.unmatched_cand_cols;

    auto cell_membership = [](const Table& t, const std::vector<std::size_t>& rows,
                              const std::vector<std::size_t>& cols, std::map<ValueKind, std::size_t>& by_type) {
        std::set<std::size_t> row_set(rows.begin(), rows.end());
        std::set<std::size_t> col_set(cols.begin(), cols.end());
        std::vector<std::optional<ValueKind>> hints(t.column_count());
        std::size_t count = 0;
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            for (std::size_t c = 0; c < t.column_count(); ++c) {
                if (!row_set.count(r) && !col_set.count(c)) continue;
                ++count;
                if (!hints[c]) hints[c] = column_majority_kind(t, c);
                by_type[infer_cell_type(t.cell(r, c), hints[c]).kind()]++;
            }
        }
        return count;
    };
    res.missing_cell_count = cell_membership(gt, res.missing_rows, res.missing_cols, res.missing_cells_by_type);
    res.extra_cell_count = cell_membership(cand, res.extra_rows, res.extra_cols, res.extra_cells_by_type);
    return result;
}

}  // namespace tabx::compare
