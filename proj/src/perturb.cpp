#include "tabx/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <set>

#include "json.hpp"
#include "tabx/align.hpp"
#include "tabx/compare.hpp"
#include "tabx/errors.hpp"
#include "tabx/util.hpp"
#include "tabx/value.hpp"

namespace tabx::perturb {

using compare::CellValue;
using compare::Classification;
using compare::DateValue;
using compare::Dimension;
using compare::TimeValue;
using compare::Unit;
using compare::ValueKind;
using compare::header_unit;
using compare::infer_cell_type;
using compare::lookup_unit;
using model::Cell;
using util::Rng;

namespace {

constexpr char kValueSep = '\x1f';

// ---- taxonomy ----------------------------------------------------------------

struct KindInfo {
    Kind kind;
    Difficulty difficulty;
    const char* name;
};

const KindInfo kKinds[] = {
    {Kind::TypoInText, Difficulty::Easy, "typo-in-text"},
    {Kind::HeaderRephrase, Difficulty::Easy, "header-rephrase"},
    {Kind::DateFormatChange, Difficulty::Easy, "date-format-change"},
    {Kind::ThousandsSeparatorToggle, Difficulty::Easy, "thousands-separator-toggle"},
    {Kind::UnitRescale, Difficulty::Easy, "unit-rescale"},
    {Kind::CurrencySymbolNormalize, Difficulty::Easy, "currency-symbol-normalize"},
    {Kind::DecimalRounding, Difficulty::Easy, "decimal-rounding"},
    {Kind::HeaderReorder, Difficulty::Medium, "header-reorder"},
    {Kind::SmallNumericShift, Difficulty::Medium, "small-numeric-shift"},
    {Kind::MergeTwoRows, Difficulty::Medium, "merge-two-rows"},
    {Kind::RowReorder, Difficulty::Medium, "row-reorder"},
    {Kind::AbbreviationSwap, Difficulty::Medium, "abbreviation-swap"},
    {Kind::DropRow, Difficulty::Hard, "drop-row"},
    {Kind::DropColumn, Difficulty::Hard, "drop-column"},
    {Kind::AddSpuriousColumn, Difficulty::Hard, "add-spurious-column"},
    {Kind::TransposeTable, Difficulty::Hard, "transpose-table"},
};

const KindInfo& info_of(Kind k) {
    for (const auto& info : kKinds)
        if (info.kind == k) return info;
    throw Error("unknown perturbation kind");
}

// ---- text helpers --------------------------------------------------------------

bool ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool ascii_digit(char c) { return c >= '0' && c <= '9'; }

struct NumericBody {
    std::size_t begin = 0, end = 0;  // [begin, end) in the raw string
    std::string int_part;            // digits only, commas removed
    std::string frac_part;           // digits after the decimal point
    bool had_commas = false;
};

// First digit run with optional comma grouping and fraction. Exponent forms
// are left alone (the span stops before 'e').
std::optional<NumericBody> find_numeric_body(const std::string& raw) {
    std::size_t i = 0;
    while (i < raw.size() && !ascii_digit(raw[i])) ++i;
    if (i == raw.size()) return std::nullopt;
    NumericBody body;
    body.begin = i;
    while (i < raw.size() && (ascii_digit(raw[i]) || raw[i] == ',')) {
        if (raw[i] == ',') {
            // a comma not followed by a digit ends the body (list separators)
            if (i + 1 >= raw.size() || !ascii_digit(raw[i + 1])) break;
            body.had_commas = true;
        } else {
            body.int_part.push_back(raw[i]);
        }
        ++i;
    }
    if (i < raw.size() && raw[i] == '.' && i + 1 < raw.size() && ascii_digit(raw[i + 1])) {
        ++i;
        while (i < raw.size() && ascii_digit(raw[i])) body.frac_part.push_back(raw[i++]);
    }
    body.end = i;
    if (i < raw.size() && (raw[i] == 'e' || raw[i] == 'E') && i + 1 < raw.size() &&
        (ascii_digit(raw[i + 1]) || raw[i + 1] == '+' || raw[i + 1] == '-'))
        return std::nullopt;  // exponent form, leave untouched
    return body;
}

std::string group_thousands(const std::string& digits) {
    std::string out;
    std::size_t n = digits.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && (n - i) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

std::string strip_leading_zeros(std::string digits) {
    std::size_t i = 0;
    while (i + 1 < digits.size() && digits[i] == '0') ++i;
    return digits.substr(i);
}

std::string render_body(const NumericBody& body, const std::string& int_digits, const std::string& frac_digits) {
    std::string out = body.had_commas ? group_thousands(int_digits) : int_digits;
    if (!frac_digits.empty()) out += "." + frac_digits;
    return out;
}

std::string splice(const std::string& raw, std::size_t begin, std::size_t end, const std::string& replacement) {
    return raw.substr(0, begin) + replacement + raw.substr(end);
}

// Adds delta (may be negative) to the integer encoded by the digit string.
// Returns digits of the absolute result; false when the result went negative.
bool add_to_digits(std::string& digits, long long delta) {
    long long carry = delta;
    for (std::size_t i = digits.size(); i-- > 0 && carry != 0;) {
        long long d = (digits[i] - '0') + carry;
        carry = d / 10;
        d %= 10;
        if (d < 0) {
            d += 10;
            carry -= 1;
        }
        digits[i] = static_cast<char>('0' + d);
    }
    if (carry < 0) return false;
    while (carry > 0) {
        digits.insert(digits.begin(), static_cast<char>('0' + carry % 10));
        carry /= 10;
    }
    return true;
}

bool all_zero(const std::string& digits) {
    return std::all_of(digits.begin(), digits.end(), [](char c) { return c == '0'; });
}

// Round the fraction to `places` digits, half away from zero. Returns false
// when the cut digits are all zero (value unchanged).
bool round_fraction(std::string& int_digits, std::string& frac_digits, std::size_t places) {
    if (frac_digits.size() <= places) return false;
    std::string cut = frac_digits.substr(places);
    if (all_zero(cut)) return false;
    bool round_up = cut[0] >= '5';
    frac_digits.resize(places);
    if (round_up) {
        std::string combined = int_digits + frac_digits;
        add_to_digits(combined, 1);
        if (combined.size() > int_digits.size() + frac_digits.size())
            int_digits = combined.substr(0, combined.size() - frac_digits.size());
        else
            int_digits = combined.substr(0, int_digits.size());
        frac_digits = combined.substr(combined.size() - frac_digits.size());
        if (places == 0) frac_digits.clear();
    }
    int_digits = strip_leading_zeros(int_digits.empty() ? "0" : int_digits);
    return true;
}

// ---- plan-time validation -------------------------------------------------------

compare::CellComparison planned_compare(const Table& t, std::size_t r, std::size_t c, const std::string& new_raw,
                                        const std::optional<Unit>& cand_unit_override = std::nullopt) {
    auto hint = compare::column_majority_kind(t, c);
    auto gu = header_unit(t.header_text(c));
    auto cu = cand_unit_override ? cand_unit_override : gu;
    return compare::compare_cells(Cell{t.cell(r, c)}, Cell{new_raw}, hint, gu, cu);
}

bool exact_rewrite(const Table& t, std::size_t r, std::size_t c, const std::string& new_raw,
                   const std::optional<Unit>& cand_unit_override = std::nullopt) {
    if (new_raw == t.cell(r, c)) return false;
    auto cmp = planned_compare(t, r, c, new_raw, cand_unit_override);
    return cmp.classification == Classification::Exact;
}

struct PartialRewrite {
    std::string new_raw;
    double magnitude = 0.0;
};

std::optional<PartialRewrite> partial_rewrite(const Table& t, std::size_t r, std::size_t c,
                                              const std::string& new_raw) {
    if (new_raw == t.cell(r, c)) return std::nullopt;
    auto cmp = planned_compare(t, r, c, new_raw);
    if (cmp.classification != Classification::Partial || cmp.zero_reference || !cmp.magnitude) return std::nullopt;
    return PartialRewrite{new_raw, *cmp.magnitude};
}

std::vector<std::size_t> seeded_order(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    return order;
}

std::vector<std::pair<std::size_t, std::size_t>> cell_loci(const Table& t, Rng& rng) {
    std::vector<std::pair<std::size_t, std::size_t>> loci;
    for (std::size_t r = 0; r < t.row_count(); ++r)
        for (std::size_t c = 0; c < t.column_count(); ++c) loci.emplace_back(r, c);
    rng.shuffle(loci);
    return loci;
}

void require(bool ok, const char* what) {
    if (!ok) throw KindInapplicable(what);
}

void set_planned(PerturbationSpec& s) { s.params["planned"] = "1"; }

PerturbationSpec base_spec(Kind k, std::uint64_t seed) {
    PerturbationSpec s;
    s.kind = k;
    s.difficulty = difficulty_of(k);
    s.seed = seed;
    return s;
}

// Single-cell edits must leave the row recognizable: with at least three
// columns a one-cell change keeps a strict majority of cells equal.
void require_cell_edit_room(const Table& t) {
    require(t.column_count() >= 3, "needs at least three columns so one changed cell cannot break row identity");
    require(t.row_count() >= 1, "needs at least one row");
}

// ---- per-kind planners -----------------------------------------------------------

PerturbationSpec plan_typo(const Table& t, std::uint64_t seed) {
    require_cell_edit_room(t);
    Rng rng(seed);
    bool case_mode = rng.below(2) == 0;
    auto loci = cell_loci(t, rng);
    for (auto [r, c] : loci) {
        const std::string& raw = t.cell(r, c);
        if (infer_cell_type(raw, compare::column_majority_kind(t, c)).kind() != ValueKind::Text) continue;
        std::size_t alpha = 0;
        for (char ch : raw) alpha += ascii_alpha(ch) ? 1 : 0;
        if (alpha < 3) continue;

        if (case_mode) {
            std::string flipped = raw;
            bool any_lower = std::any_of(raw.begin(), raw.end(), [](char ch) { return ch >= 'a' && ch <= 'z'; });
            for (char& ch : flipped) {
                if (any_lower)
                    ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
                else
                    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            }
            if (!exact_rewrite(t, r, c, flipped)) continue;
            auto s = base_spec(Kind::TypoInText, seed);
            s.target_row = r;
            s.target_col = c;
            s.params["mode"] = "case";
            s.params["new"] = flipped;
            set_planned(s);
            return s;
        }

        // alpha runs of length >= 3
        std::vector<std::pair<std::size_t, std::size_t>> runs;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= raw.size(); ++i) {
            bool in = i < raw.size() && ascii_alpha(raw[i]);
            if (in && (i == 0 || !ascii_alpha(raw[i - 1]))) start = i;
            if (!in && i > 0 && ascii_alpha(raw[i - 1]) && i - start >= 3) runs.emplace_back(start, i);
        }
        if (runs.empty()) continue;
        for (std::size_t attempt = 0; attempt < 8; ++attempt) {
            auto [rb, re] = runs[rng.below(runs.size())];
            std::size_t pos = rb + rng.below(re - rb);
            int op = static_cast<int>(rng.below(3));
            std::string edited = raw;
            char letter = static_cast<char>('a' + rng.below(26));
            if (std::isupper(static_cast<unsigned char>(raw[pos])))
                letter = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
            if (op == 0) {
                if (letter == raw[pos]) letter = letter == 'z' || letter == 'Z' ? letter - 1 : letter + 1;
                edited[pos] = letter;
            } else if (op == 1) {
                edited.insert(edited.begin() + static_cast<std::ptrdiff_t>(pos), letter);
            } else {
                if (re - rb < 4) continue;  // keep a recognizable stem
                edited.erase(edited.begin() + static_cast<std::ptrdiff_t>(pos));
            }
            auto pr = partial_rewrite(t, r, c, edited);
            if (!pr) continue;
            if (infer_cell_type(pr->new_raw, compare::column_majority_kind(t, c)).kind() != ValueKind::Text) continue;
            auto s = base_spec(Kind::TypoInText, seed);
            s.target_row = r;
            s.target_col = c;
            s.params["mode"] = "edit";
            s.params["new"] = pr->new_raw;
            s.params["magnitude"] = util::format_double(pr->magnitude);
            set_planned(s);
            return s;
        }
    }
    throw KindInapplicable("no text cell suitable for a typo");
}

struct HeaderParts {
    std::string stem;
    std::string annotation;  // includes parentheses, empty when absent
};

HeaderParts split_header(const std::string& header) {
    HeaderParts parts;
    std::string trimmed = util::trim(header);
    if (!trimmed.empty() && trimmed.back() == ')') {
        auto open = trimmed.rfind('(');
        if (open != std::string::npos && open > 0) {
            parts.stem = util::trim(trimmed.substr(0, open));
            parts.annotation = trimmed.substr(open);
            return parts;
        }
    }
    parts.stem = trimmed;
    return parts;
}

const std::vector<std::pair<std::string, std::string>>& header_synonyms() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"title", "name"},        {"name", "full name"},     {"year", "yr"},
        {"country", "nation"},    {"city", "town"},          {"genre", "category"},
        {"rating", "score"},      {"price", "cost"},         {"weight", "wt"},
        {"runtime", "duration"},  {"population", "residents"}, {"release date", "date of release"},
        {"box office", "gross"},  {"distance", "dist"},      {"medals", "medal count"},
        {"sport", "discipline"},  {"product", "item"},       {"area", "surface"},
        {"founded", "established"}, {"elevation", "altitude"}, {"tags", "labels"},
        {"category", "type"},     {"in stock", "available"}, {"personal best", "best time"},
        {"date", "day"},          {"author", "writer"},      {"team", "club"},
    };
    return table;
}

PerturbationSpec plan_header_rephrase(const Table& t, std::uint64_t seed) {
    require(t.column_count() >= 2, "needs at least two columns");
    Rng rng(seed);
    std::set<std::string> taken;
    for (std::size_t c = 0; c < t.column_count(); ++c) taken.insert(util::normalize_text(t.header_text(c)));
    auto order = seeded_order(t.column_count(), rng);
    for (std::size_t c : order) {
        auto parts = split_header(t.header_text(c));
        std::string key = util::normalize_text(parts.stem);
        std::string replacement;
        for (const auto& [from, to] : header_synonyms()) {
            if (key == from) {
                replacement = to;
                break;
            }
            if (key == to) {
                replacement = from;
                break;
            }
        }
        if (replacement.empty()) {
            if (key.size() >= 6) {
                auto space = key.find(' ');
                std::string word = space == std::string::npos ? key : key.substr(0, space);
                if (word.size() < 5) continue;
                replacement = word.substr(0, 4) + ".";
            } else {
                replacement = "the " + key;
            }
        }
        std::string new_header = replacement;
        if (!parts.annotation.empty()) new_header += " " + parts.annotation;
        std::string norm = util::normalize_text(new_header);
        if (norm == util::normalize_text(t.header_text(c)) || taken.count(norm)) continue;
        auto s = base_spec(Kind::HeaderRephrase, seed);
        s.target_col = c;
        s.params["new_header"] = new_header;
        set_planned(s);
        return s;
    }
    throw KindInapplicable("no rephrasable header");
}

const char* kMonthShort[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
const char* kMonthLong[] = {"January", "February", "March",     "April",   "May",      "June",
                            "July",    "August",   "September", "October", "November", "December"};

std::vector<std::string> render_date_forms(const DateValue& d) {
    char buf[48];
    std::vector<std::string> forms;
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    forms.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "%02d/%02d/%04d", d.month, d.day, d.year);
    forms.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "%04d/%02d/%02d", d.year, d.month, d.day);
    forms.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "%d %s %04d", d.day, kMonthShort[d.month - 1], d.year);
    forms.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "%s %d, %04d", kMonthLong[d.month - 1], d.day, d.year);
    forms.emplace_back(buf);
    return forms;
}

PerturbationSpec plan_date_format(const Table& t, std::uint64_t seed) {
    require_cell_edit_room(t);
    Rng rng(seed);
    auto loci = cell_loci(t, rng);
    for (auto [r, c] : loci) {
        auto v = infer_cell_type(t.cell(r, c), compare::column_majority_kind(t, c));
        if (v.kind() != ValueKind::Date) continue;
        auto forms = render_date_forms(v.date());
        std::size_t start = rng.below(forms.size());
        for (std::size_t off = 0; off < forms.size(); ++off) {
            const std::string& form = forms[(start + off) % forms.size()];
            if (!exact_rewrite(t, r, c, form)) continue;
            auto s = base_spec(Kind::DateFormatChange, seed);
            s.target_row = r;
            s.target_col = c;
            s.params["new"] = form;
            set_planned(s);
            return s;
        }
    }
    throw KindInapplicable("no date cell with an alternative rendering");
}

PerturbationSpec plan_separator_toggle(const Table& t, std::uint64_t seed) {
    require_cell_edit_room(t);
    Rng rng(seed);
    auto loci = cell_loci(t, rng);
    for (auto [r, c] : loci) {
        const std::string& raw = t.cell(r, c);
        if (infer_cell_type(raw, compare::column_majority_kind(t, c)).kind() != ValueKind::Number) continue;
        auto body = find_numeric_body(raw);
        if (!body) continue;
        std::string rendered;
        if (body->had_commas) {
            NumericBody plain = *body;
            plain.had_commas = false;
            rendered = render_body(plain, body->int_part, body->frac_part);
        } else {
            if (body->int_part.size() < 4) continue;
            NumericBody grouped = *body;
            grouped.had_commas = true;
            rendered = render_body(grouped, body->int_part, body->frac_part);
        }
        std::string candidate = splice(raw, body->begin, body->end, rendered);
        if (!exact_rewrite(t, r, c, candidate)) continue;
        auto s = base_spec(Kind::ThousandsSeparatorToggle, seed);
        s.target_row = r;
        s.target_col = c;
        s.params["new"] = candidate;
        set_planned(s);
        return s;
    }
    throw KindInapplicable("no groupable numeric cell");
}

struct Conversion {
    const char* from;
    const char* to;
};

const Conversion kConversions[] = {
    {"m", "cm"}, {"m", "km"},  {"cm", "m"},  {"km", "m"},  {"mm", "cm"}, {"kg", "g"},
    {"g", "kg"}, {"min", "hr"}, {"hr", "min"}, {"s", "min"}, {"min", "s"},
};

std::optional<std::string> written_magnitude(const CellValue& v) {
    if (v.kind() == ValueKind::Number && v.number().unit) return util::format_double(v.number().magnitude);
    if (v.kind() == ValueKind::Time && v.time().kind == TimeValue::Kind::Duration && v.time().written_unit) {
        double mag = v.time().seconds / v.time().written_unit->to_base;
        return util::format_double(mag);
    }
    return std::nullopt;
}

std::optional<Unit> written_unit_of(const CellValue& v) {
    if (v.kind() == ValueKind::Number) return v.number().unit;
    if (v.kind() == ValueKind::Time) return v.time().written_unit;
    return std::nullopt;
}

PerturbationSpec plan_unit_rescale(const Table& t, std::uint64_t seed) {
    require_cell_edit_room(t);
    Rng rng(seed);
    bool header_first = rng.below(2) == 0;

    auto try_header_mode = [&]() -> std::optional<PerturbationSpec> {
        auto order = seeded_order(t.column_count(), rng);
        for (std::size_t c : order) {
            auto unit = header_unit(t.header_text(c));
            if (!unit) continue;
            std::vector<const Conversion*> convs;
            for (const auto& conv : kConversions)
                if (unit->symbol == conv.from) convs.push_back(&conv);
            if (convs.empty()) continue;
            std::size_t nonempty = 0;
            bool all_bare = true;
            for (std::size_t r = 0; r < t.row_count(); ++r) {
                const std::string& raw = t.cell(r, c);
                if (util::trim(raw).empty()) continue;
                ++nonempty;
                auto v = infer_cell_type(raw);
                if (v.kind() != ValueKind::Number || v.number().unit) {
                    all_bare = false;
                    break;
                }
            }
            if (!all_bare || nonempty == 0) continue;
            std::size_t pick = rng.below(convs.size());
            for (std::size_t off = 0; off < convs.size(); ++off) {
                const Conversion& conv = *convs[(pick + off) % convs.size()];
                auto from = lookup_unit(conv.from);
                auto to = lookup_unit(conv.to);
                if (!from || !to) continue;
                auto parts = split_header(t.header_text(c));
                std::string new_header = parts.stem + " (" + conv.to + ")";
                bool ok = true;
                for (std::size_t r = 0; r < t.row_count() && ok; ++r) {
                    const std::string& raw = t.cell(r, c);
                    if (util::trim(raw).empty()) continue;
                    auto mag = util::parse_double(util::trim(raw));
                    if (!mag) {
                        ok = false;
                        break;
                    }
                    std::string rendered = util::format_double(*mag * from->to_base / to->to_base);
                    ok = exact_rewrite(t, r, c, rendered, to);
                }
                if (!ok) continue;
                auto s = base_spec(Kind::UnitRescale, seed);
                s.target_col = c;
                s.params["mode"] = "header";
                s.params["from"] = conv.from;
                s.params["to"] = conv.to;
                s.params["new_header"] = new_header;
                set_planned(s);
                return s;
            }
        }
        return std::nullopt;
    };

    auto try_cell_mode = [&]() -> std::optional<PerturbationSpec> {
        auto loci = cell_loci(t, rng);
        for (auto [r, c] : loci) {
            auto v = infer_cell_type(t.cell(r, c), compare::column_majority_kind(t, c));
            auto unit = written_unit_of(v);
            auto mag = written_magnitude(v);
            if (!unit || !mag) continue;
            if (unit->dimension == Dimension::CurrencyScale || unit->dimension == Dimension::Percentage) continue;
            std::vector<const Conversion*> convs;
            for (const auto& conv : kConversions)
                if (unit->symbol == conv.from) convs.push_back(&conv);
            if (convs.empty()) continue;
            std::size_t pick = rng.below(convs.size());
            for (std::size_t off = 0; off < convs.size(); ++off) {
                const Conversion& conv = *convs[(pick + off) % convs.size()];
                auto from = lookup_unit(conv.from);
                auto to = lookup_unit(conv.to);
                if (!from || !to) continue;
                auto value = util::parse_double(*mag);
                if (!value) continue;
                std::string rendered = util::format_double(*value * from->to_base / to->to_base) + " " + conv.to;
                if (!exact_rewrite(t, r, c, rendered)) continue;
                auto s = base_spec(Kind::UnitRescale, seed);
                s.target_row = r;
                s.target_col = c;
                s.params["mode"] = "cell";
                s.params["from"] = conv.from;
                s.params["to"] = conv.to;
                s.params["new"] = rendered;
                set_planned(s);
                return s;
            }
        }
        return std::nullopt;
    };

    std::optional<PerturbationSpec> planned;
    if (header_first) {
        planned = try_header_mode();
        if (!planned) planned = try_cell_mode();
    } else {
        planned = try_cell_mode();
        if (!planned) planned = try_header_mode();
    }
    if (!planned) throw KindInapplicable("no rescalable unit column or cell");
    return *planned;
}

const std::vector<std::pair<std::string, std::string>>& currency_glyphs() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"$", "USD"}, {"€", "EUR"}, {"£", "GBP"}, {"¥", "JPY"}};
    return table;
}

PerturbationSpec plan_currency_normalize(const Table& t, std::uint64_t seed) {
    require_cell_edit_room(t);
    Rng rng(seed);
    auto loci = cell_loci(t, rng);
    for (auto [r, c] : loci) {
        const std::string& raw = t.cell(r, c);
        std::string trimmed = util::trim(raw);
        if (trimmed.empty()) continue;
        auto v = infer_cell_type(raw, compare::column_majority_kind(t, c));
        if (v.kind() != ValueKind::Number || !v.number().unit) continue;
        if (v.number().unit->dimension != Dimension::CurrencyScale) continue;
        std::string iso = v.number().unit->symbol;

        std::string sign;
        std::string rest = trimmed;
        if (!rest.empty() && (rest[0] == '-' || rest[0] == '+')) {
            sign = rest.substr(0, 1);
            rest = util::trim(rest.substr(1));
        }
        auto body = find_numeric_body(rest);
        if (!body) continue;
        std::string digits = rest.substr(body->begin, body->end - body->begin);
        // only plain "<currency> <number>" shapes are rewritten; scaled or
        // otherwise decorated forms stay as they are
        std::string glyph;
        for (const auto& [g, code] : currency_glyphs())
            if (code == iso) glyph = g;
        std::vector<std::string> forms;
        if (!glyph.empty()) forms.push_back(sign + glyph + digits);
        forms.push_back(sign + iso + " " + digits);
        forms.push_back(sign + digits + " " + iso);
        std::size_t start = rng.below(forms.size());
        for (std::size_t off = 0; off < forms.size(); ++off) {
            const std::string& form = forms[(start + off) % forms.size()];
            if (!exact_rewrite(t, r, c, form)) continue;
            auto s = base_spec(Kind::CurrencySymbolNormalize, seed);
            s.target_row = r;
            s.target_col = c;
            s.params["new"] = form;
            set_planned(s);
            return s;
        }
    }
    throw KindInapplicable("no currency cell with an alternative form");
}

PerturbationSpec plan_decimal_rounding(const Table& t, std::uint64_t seed) {
    require_cell_edit_room(t);
    Rng rng(seed);
    auto loci = cell_loci(t, rng);
    for (auto [r, c] : loci) {
        const std::string& raw = t.cell(r, c);
        auto kind = infer_cell_type(raw, compare::column_majority_kind(t, c)).kind();
        if (kind != ValueKind::Number && kind != ValueKind::Time) continue;
        auto body = find_numeric_body(raw);
        if (!body || body->frac_part.size() < 2) continue;
        std::size_t places = rng.below(2);  // 0 or 1 decimals
        for (std::size_t attempt = 0; attempt < 2; ++attempt, places = 1 - places) {
            std::string int_digits = body->int_part;
            std::string frac_digits = body->frac_part;
            if (!round_fraction(int_digits, frac_digits, places)) continue;
            if (all_zero(int_digits) && all_zero(frac_digits)) continue;
            std::string candidate = splice(raw, body->begin, body->end, render_body(*body, int_digits, frac_digits));
            auto pr = partial_rewrite(t, r, c, candidate);
            if (!pr) continue;
            auto s = base_spec(Kind::DecimalRounding, seed);
            s.target_row = r;
            s.target_col = c;
            s.params["new"] = candidate;
            s.params["magnitude"] = util::format_double(pr->magnitude);
            set_planned(s);
            return s;
        }
    }
    throw KindInapplicable("no cell with enough decimal places");
}

std::string join_indices(const std::vector<std::size_t>& idx) {
    std::string out;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(idx[i]);
    }
    return out;
}

std::vector<std::size_t> parse_indices(const std::string& joined) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= joined.size()) {
        auto comma = joined.find(',', pos);
        std::string part = joined.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!part.empty()) out.push_back(static_cast<std::size_t>(std::stoull(part)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

PerturbationSpec plan_header_reorder(const Table& t, std::uint64_t seed) {
    require(t.column_count() >= 2, "needs at least two columns");
    std::set<std::string> seen;
    for (std::size_t c = 0; c < t.column_count(); ++c)
        require(seen.insert(util::normalize_text(t.header_text(c))).second, "duplicate headers cannot be reordered safely");
    Rng rng(seed);
    auto perm = seeded_order(t.column_count(), rng);
    bool identity = true;
    for (std::size_t i = 0; i < perm.size(); ++i) identity = identity && perm[i] == i;
    if (identity) std::rotate(perm.begin(), perm.begin() + 1, perm.end());
    auto s = base_spec(Kind::HeaderReorder, seed);
    s.params["perm"] = join_indices(perm);
    set_planned(s);
    return s;
}

PerturbationSpec plan_numeric_shift(const Table& t, std::uint64_t seed) {
    require_cell_edit_room(t);
    Rng rng(seed);
    auto loci = cell_loci(t, rng);
    for (auto [r, c] : loci) {
        const std::string& raw = t.cell(r, c);
        auto kind = infer_cell_type(raw, compare::column_majority_kind(t, c)).kind();
        if (kind != ValueKind::Number && kind != ValueKind::Time) continue;
        auto body = find_numeric_body(raw);
        if (!body) continue;
        long long delta = 1 + static_cast<long long>(rng.below(3));
        if (rng.below(2) == 0) delta = -delta;
        std::string digits = body->int_part + body->frac_part;
        for (std::size_t attempt = 0; attempt < 2; ++attempt, delta = std::llabs(delta)) {
            std::string shifted = digits;
            if (!add_to_digits(shifted, delta) || all_zero(shifted)) continue;
            std::string frac_digits;
            std::string int_digits = shifted;
            if (!body->frac_part.empty()) {
                while (shifted.size() < body->frac_part.size() + 1) shifted.insert(shifted.begin(), '0');
                frac_digits = shifted.substr(shifted.size() - body->frac_part.size());
                int_digits = strip_leading_zeros(shifted.substr(0, shifted.size() - body->frac_part.size()));
            } else {
                int_digits = strip_leading_zeros(shifted);
            }
            std::string candidate = splice(raw, body->begin, body->end, render_body(*body, int_digits, frac_digits));
            auto pr = partial_rewrite(t, r, c, candidate);
            if (!pr) continue;
            auto s = base_spec(Kind::SmallNumericShift, seed);
            s.target_row = r;
            s.target_col = c;
            s.params["new"] = candidate;
            s.params["magnitude"] = util::format_double(pr->magnitude);
            set_planned(s);
            return s;
        }
    }
    throw KindInapplicable("no numeric cell to shift");
}

PerturbationSpec plan_merge_rows(const Table& t, std::uint64_t seed) {
    require(t.row_count() >= 2, "needs at least two rows");
    Rng rng(seed);
    auto s = base_spec(Kind::MergeTwoRows, seed);
    s.target_row = static_cast<std::size_t>(rng.below(t.row_count() - 1));
    set_planned(s);
    return s;
}

PerturbationSpec plan_row_reorder(const Table& t, std::uint64_t seed) {
    require(t.row_count() >= 2, "needs at least two rows");
    bool any_distinct = false;
    for (std::size_t r = 1; r < t.row_count() && !any_distinct; ++r) any_distinct = !(t.rows[r] == t.rows[0]);
    require(any_distinct, "all rows identical, reorder is invisible");
    Rng rng(seed);
    auto perm = seeded_order(t.row_count(), rng);
    auto moved = [&]() {
        for (std::size_t i = 0; i < perm.size(); ++i)
            if (!(t.rows[perm[i]] == t.rows[i])) return true;
        return false;
    };
    if (!moved()) std::rotate(perm.begin(), perm.begin() + 1, perm.end());
    require(moved(), "no visible row movement");
    auto s = base_spec(Kind::RowReorder, seed);
    s.params["perm"] = join_indices(perm);
    set_planned(s);
    return s;
}

const std::vector<std::pair<std::string, std::string>>& abbreviation_pairs() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"united states", "US"},   {"united kingdom", "UK"},  {"new york city", "NYC"},
        {"los angeles", "LA"},     {"san francisco", "SF"},   {"european union", "EU"},
        {"doctor", "Dr."},         {"mister", "Mr."},         {"street", "St."},
        {"avenue", "Ave."},        {"boulevard", "Blvd."},    {"mount", "Mt."},
        {"incorporated", "Inc."},  {"corporation", "Corp."},  {"limited", "Ltd."},
        {"company", "Co."},        {"department", "Dept."},   {"international", "Intl."},
        {"national", "Natl."},     {"association", "Assn."},  {"university", "Univ."},
        {"institute", "Inst."},    {"laboratory", "Lab"},     {"technology", "Tech"},
    };
    return table;
}

// Whole-word, case-insensitive match of `needle` inside `hay`; returns the span.
std::optional<std::pair<std::size_t, std::size_t>> find_word(const std::string& hay, const std::string& needle) {
    std::string low_hay = util::to_lower(hay);
    std::string low_needle = util::to_lower(needle);
    std::size_t pos = 0;
    while ((pos = low_hay.find(low_needle, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !ascii_alpha(low_hay[pos - 1]);
        std::size_t end = pos + low_needle.size();
        bool right_ok = end >= low_hay.size() || !ascii_alpha(low_hay[end]);
        if (left_ok && right_ok) return std::make_pair(pos, end);
        ++pos;
    }
    return std::nullopt;
}

PerturbationSpec plan_abbreviation_swap(const Table& t, std::uint64_t seed) {
    require_cell_edit_room(t);
    Rng rng(seed);
    auto loci = cell_loci(t, rng);
    for (auto [r, c] : loci) {
        const std::string& raw = t.cell(r, c);
        if (infer_cell_type(raw, compare::column_majority_kind(t, c)).kind() != ValueKind::Text) continue;
        for (const auto& [full, abbrev] : abbreviation_pairs()) {
            std::string replacement;
            std::optional<std::pair<std::size_t, std::size_t>> span = find_word(raw, full);
            if (span) {
                replacement = abbrev;
            } else {
                // strip the trailing period for matching "St" vs "St."
                std::string bare = abbrev;
                while (!bare.empty() && bare.back() == '.') bare.pop_back();
                span = find_word(raw, bare);
                if (span && span->second < raw.size() && raw[span->second] == '.') ++span->second;
                replacement = full;
            }
            if (!span) continue;
            std::string candidate = splice(raw, span->first, span->second, replacement);
            auto pr = partial_rewrite(t, r, c, candidate);
            if (!pr) continue;
            if (infer_cell_type(candidate, compare::column_majority_kind(t, c)).kind() != ValueKind::Text) continue;
            auto s = base_spec(Kind::AbbreviationSwap, seed);
            s.target_row = r;
            s.target_col = c;
            s.params["new"] = candidate;
            s.params["magnitude"] = util::format_double(pr->magnitude);
            set_planned(s);
            return s;
        }
    }
    throw KindInapplicable("no cell with a known abbreviation");
}

PerturbationSpec plan_drop_row(const Table& t, std::uint64_t seed) {
    require(t.row_count() >= 2, "needs at least two rows");
    Rng rng(seed);
    auto s = base_spec(Kind::DropRow, seed);
    s.target_row = static_cast<std::size_t>(rng.below(t.row_count()));
    set_planned(s);
    return s;
}

PerturbationSpec plan_drop_column(const Table& t, std::uint64_t seed) {
    require(t.column_count() >= 2, "needs at least two columns");
    Rng rng(seed);
    auto s = base_spec(Kind::DropColumn, seed);
    s.target_col = static_cast<std::size_t>(rng.below(t.column_count()));
    set_planned(s);
    return s;
}

PerturbationSpec plan_add_column(const Table& t, std::uint64_t seed) {
    Rng rng(seed);
    static const char* headers[] = {"notes", "misc", "flag", "aux", "tag", "remark"};
    static const char* fillers[] = {"n/a", "-", "x", "ok", "tbd", "?"};
    std::set<std::string> taken;
    for (std::size_t c = 0; c < t.column_count(); ++c) taken.insert(util::normalize_text(t.header_text(c)));
    std::string header;
    std::size_t start = rng.below(std::size(headers));
    for (std::size_t off = 0; off < std::size(headers); ++off) {
        const char* h = headers[(start + off) % std::size(headers)];
        if (!taken.count(h)) {
            header = h;
            break;
        }
    }
    if (header.empty()) {
        std::size_t n = 2;
        while (taken.count("extra " + std::to_string(n))) ++n;
        header = "extra " + std::to_string(n);
    }
    std::string values;
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        if (r) values.push_back(kValueSep);
        values += fillers[rng.below(std::size(fillers))];
    }
    auto s = base_spec(Kind::AddSpuriousColumn, seed);
    s.target_col = static_cast<std::size_t>(rng.below(t.column_count() + 1));
    s.params["header"] = header;
    s.params["values"] = values;
    set_planned(s);
    return s;
}

PerturbationSpec plan_transpose(const Table& t, std::uint64_t seed) {
    require(t.is_flat(), "transpose needs a flat table");
    require(t.row_count() >= 1 && t.column_count() >= 2, "degenerate shape");
    std::set<std::string> labels;
    labels.insert(util::normalize_text(t.header_text(0)));
    for (std::size_t r = 0; r < t.row_count(); ++r)
        require(labels.insert(util::normalize_text(t.cell(r, 0))).second,
                "first column must be unique to act as transposed headers");
    Table flipped = model::transpose(t);
    require(align::detect_transpose(t, flipped), "transposed form is not detectable");
    auto s = base_spec(Kind::TransposeTable, seed);
    set_planned(s);
    return s;
}

// ---- mechanical application --------------------------------------------------------

Table with_cell(const Table& t, std::size_t r, std::size_t c, const std::string& raw) {
    if (r >= t.row_count() || c >= t.column_count()) throw TargetOutOfRange("cell target outside table");
    Table out = t;
    out.rows[r][c].raw = raw;
    return out;
}

const std::string& param(const PerturbationSpec& s, const char* key) {
    auto it = s.params.find(key);
    if (it == s.params.end()) throw Error(std::string("perturbation spec missing parameter: ") + key);
    return it->second;
}

std::size_t target_row_of(const PerturbationSpec& s, const Table& t) {
    if (!s.target_row || *s.target_row >= t.row_count()) throw TargetOutOfRange("row target outside table");
    return *s.target_row;
}

std::size_t target_col_of(const PerturbationSpec& s, const Table& t) {
    if (!s.target_col || *s.target_col >= t.column_count()) throw TargetOutOfRange("column target outside table");
    return *s.target_col;
}

Table apply_planned(const Table& t, const PerturbationSpec& s) {
    switch (s.kind) {
        case Kind::TypoInText:
        case Kind::DateFormatChange:
        case Kind::ThousandsSeparatorToggle:
        case Kind::CurrencySymbolNormalize:
        case Kind::DecimalRounding:
        case Kind::SmallNumericShift:
        case Kind::AbbreviationSwap:
            return with_cell(t, target_row_of(s, t), target_col_of(s, t), param(s, "new"));

        case Kind::HeaderRephrase: {
            std::size_t c = target_col_of(s, t);
            Table out = t;
            out.column_headers[c] = {param(s, "new_header")};
            return out;
        }

        case Kind::UnitRescale: {
            if (param(s, "mode") == "cell")
                return with_cell(t, target_row_of(s, t), target_col_of(s, t), param(s, "new"));
            std::size_t c = target_col_of(s, t);
            auto from = lookup_unit(param(s, "from"));
            auto to = lookup_unit(param(s, "to"));
            if (!from || !to) throw Error("unknown unit in rescale spec");
            Table out = t;
            out.column_headers[c] = {param(s, "new_header")};
            for (std::size_t r = 0; r < out.row_count(); ++r) {
                std::string trimmed = util::trim(out.rows[r][c].raw);
                if (trimmed.empty()) continue;
                auto mag = util::parse_double(trimmed);
                if (!mag) continue;
                out.rows[r][c].raw = util::format_double(*mag * from->to_base / to->to_base);
            }
            return out;
        }

        case Kind::HeaderReorder: {
            auto perm = parse_indices(param(s, "perm"));
            if (perm.size() != t.column_count()) throw TargetOutOfRange("permutation length mismatch");
            Table out = t;
            for (std::size_t j = 0; j < perm.size(); ++j) {
                if (perm[j] >= t.column_count()) throw TargetOutOfRange("permutation index outside table");
                out.column_headers[j] = t.column_headers[perm[j]];
            }
            for (std::size_t r = 0; r < t.row_count(); ++r)
                for (std::size_t j = 0; j < perm.size(); ++j) out.rows[r][j] = t.rows[r][perm[j]];
            return out;
        }

        case Kind::RowReorder: {
            auto perm = parse_indices(param(s, "perm"));
            if (perm.size() != t.row_count()) throw TargetOutOfRange("permutation length mismatch");
            Table out = t;
            for (std::size_t j = 0; j < perm.size(); ++j) {
                if (perm[j] >= t.row_count()) throw TargetOutOfRange("permutation index outside table");
                out.rows[j] = t.rows[perm[j]];
            }
            return out;
        }

        case Kind::MergeTwoRows: {
            std::size_t r = target_row_of(s, t);
            if (r + 1 >= t.row_count()) throw TargetOutOfRange("merge needs a following row");
            Table out = t;
            for (std::size_t c = 0; c < t.column_count(); ++c) {
                const std::string& a = t.cell(r, c);
                const std::string& b = t.cell(r + 1, c);
                if (util::trim(a).empty())
                    out.rows[r][c].raw = b;
                else if (util::trim(b).empty())
                    out.rows[r][c].raw = a;
                else
                    out.rows[r][c].raw = a + "; " + b;
            }
            out.rows.erase(out.rows.begin() + static_cast<std::ptrdiff_t>(r) + 1);
            return out;
        }

        case Kind::DropRow: {
            std::size_t r = target_row_of(s, t);
            Table out = t;
            out.rows.erase(out.rows.begin() + static_cast<std::ptrdiff_t>(r));
            return out;
        }

        case Kind::DropColumn: {
            std::size_t c = target_col_of(s, t);
            Table out = t;
            out.column_headers.erase(out.column_headers.begin() + static_cast<std::ptrdiff_t>(c));
            for (auto& row : out.rows) row.erase(row.begin() + static_cast<std::ptrdiff_t>(c));
            return out;
        }

        case Kind::AddSpuriousColumn: {
            if (!s.target_col || *s.target_col > t.column_count())
                throw TargetOutOfRange("insert position outside table");
            std::size_t c = *s.target_col;
            std::vector<std::string> values;
            const std::string& joined = param(s, "values");
            std::size_t pos = 0;
            while (true) {
                auto sep = joined.find(kValueSep, pos);
                values.push_back(joined.substr(pos, sep == std::string::npos ? std::string::npos : sep - pos));
                if (sep == std::string::npos) break;
                pos = sep + 1;
            }
            if (t.row_count() == 0) values.clear();
            if (values.size() != t.row_count()) throw TargetOutOfRange("value count mismatch");
            Table out = t;
            out.column_headers.insert(out.column_headers.begin() + static_cast<std::ptrdiff_t>(c),
                                      {param(s, "header")});
            for (std::size_t r = 0; r < out.row_count(); ++r)
                out.rows[r].insert(out.rows[r].begin() + static_cast<std::ptrdiff_t>(c), Cell{values[r]});
            return out;
        }

        case Kind::TransposeTable:
            return model::transpose(t);
    }
    throw Error("unknown perturbation kind");
}

}  // namespace

// ---- public surface ------------------------------------------------------------

Difficulty difficulty_of(Kind k) { return info_of(k).difficulty; }

const std::vector<Kind>& kinds_of(Difficulty d) {
    static const std::vector<Kind> easy = {Kind::TypoInText,
                                           Kind::HeaderRephrase,
                                           Kind::DateFormatChange,
                                           Kind::ThousandsSeparatorToggle,
                                           Kind::UnitRescale,
                                           Kind::CurrencySymbolNormalize,
                                           Kind::DecimalRounding};
    static const std::vector<Kind> medium = {Kind::HeaderReorder, Kind::SmallNumericShift, Kind::MergeTwoRows,
                                             Kind::RowReorder, Kind::AbbreviationSwap};
    static const std::vector<Kind> hard = {Kind::DropRow, Kind::DropColumn, Kind::AddSpuriousColumn,
                                           Kind::TransposeTable};
    switch (d) {
        case Difficulty::Easy: return easy;
        case Difficulty::Medium: return medium;
        case Difficulty::Hard: return hard;
    }
    return easy;
}

const std::vector<Kind>& all_kinds() {
    static const std::vector<Kind> all = [] {
        std::vector<Kind> out;
        for (const auto& info : kKinds) out.push_back(info.kind);
        return out;
    }();
    return all;
}

std::string kind_name(Kind k) { return info_of(k).name; }

Kind kind_from_name(std::string_view name) {
    for (const auto& info : kKinds)
        if (name == info.name) return info.kind;
    throw Error("unknown perturbation kind: " + std::string(name));
}

std::string difficulty_name(Difficulty d) {
    switch (d) {
        case Difficulty::Easy: return "easy";
        case Difficulty::Medium: return "medium";
        case Difficulty::Hard: return "hard";
    }
    return "easy";
}

Difficulty difficulty_from_name(std::string_view name) {
    std::string low = util::to_lower(name);
    if (low == "easy") return Difficulty::Easy;
    if (low == "medium") return Difficulty::Medium;
    if (low == "hard") return Difficulty::Hard;
    throw Error("unknown difficulty: " + std::string(name));
}

bool ExpectedOutcome::formatting_only() const {
    for (const auto& row : counts.f)
        for (std::size_t v : row)
            if (v != 0) return false;
    return true;
}

PerturbationSpec plan_perturbation(const Table& t, Kind kind, std::uint64_t seed) {
    t.validate();
    switch (kind) {
        case Kind::TypoInText: return plan_typo(t, seed);
        case Kind::HeaderRephrase: return plan_header_rephrase(t, seed);
        case Kind::DateFormatChange: return plan_date_format(t, seed);
        case Kind::ThousandsSeparatorToggle: return plan_separator_toggle(t, seed);
        case Kind::UnitRescale: return plan_unit_rescale(t, seed);
        case Kind::CurrencySymbolNormalize: return plan_currency_normalize(t, seed);
        case Kind::DecimalRounding: return plan_decimal_rounding(t, seed);
        case Kind::HeaderReorder: return plan_header_reorder(t, seed);
        case Kind::SmallNumericShift: return plan_numeric_shift(t, seed);
        case Kind::MergeTwoRows: return plan_merge_rows(t, seed);
        case Kind::RowReorder: return plan_row_reorder(t, seed);
        case Kind::AbbreviationSwap: return plan_abbreviation_swap(t, seed);
        case Kind::DropRow: return plan_drop_row(t, seed);
        case Kind::DropColumn: return plan_drop_column(t, seed);
        case Kind::AddSpuriousColumn: return plan_add_column(t, seed);
        case Kind::TransposeTable: return plan_transpose(t, seed);
    }
    throw Error("unknown perturbation kind");
}

Table apply_perturbation(const Table& t, const PerturbationSpec& spec) {
    if (spec.params.count("planned")) return apply_planned(t, spec);
    return apply_planned(t, plan_perturbation(t, spec.kind, spec.seed));
}

Table apply_all(const Table& t, const std::vector<PerturbationSpec>& specs) {
    Table out = t;
    for (const auto& s : specs) out = apply_perturbation(out, s);
    return out;
}

ExpectedOutcome expected_outcome(const Table& t, const PerturbationSpec& spec) {
    PerturbationSpec s = spec.params.count("planned") ? spec : plan_perturbation(t, spec.kind, spec.seed);
    ExpectedOutcome out;
    out.counts.total(rubric::EntityType::Row) = t.row_count();
    out.counts.total(rubric::EntityType::Column) = t.column_count();
    out.counts.total(rubric::EntityType::Cell) = t.cell_count();

    auto partial = [&] {
        out.counts.at(rubric::InfoType::Partial, rubric::EntityType::Cell) = 1;
        auto it = s.params.find("magnitude");
        out.partial_magnitudes.push_back(it == s.params.end() ? 0.0 : util::parse_double(it->second).value_or(0.0));
    };

    switch (s.kind) {
        case Kind::TypoInText:
            if (s.params.at("mode") == "edit") partial();
            break;
        case Kind::DecimalRounding:
        case Kind::SmallNumericShift:
        case Kind::AbbreviationSwap:
            partial();
            out.guaranteed = s.kind != Kind::AbbreviationSwap;
            break;
        case Kind::HeaderRephrase:
        case Kind::DateFormatChange:
        case Kind::ThousandsSeparatorToggle:
        case Kind::UnitRescale:
        case Kind::CurrencySymbolNormalize:
        case Kind::HeaderReorder:
        case Kind::RowReorder:
            break;  // all-zero expectation
        case Kind::MergeTwoRows:
            out.counts.at(rubric::InfoType::Missing, rubric::EntityType::Row) = 2;
            out.counts.at(rubric::InfoType::Extra, rubric::EntityType::Row) = 1;
            break;
        case Kind::DropRow:
            out.counts.at(rubric::InfoType::Missing, rubric::EntityType::Row) = 1;
            out.guaranteed = true;
            break;
        case Kind::DropColumn:
            out.counts.at(rubric::InfoType::Missing, rubric::EntityType::Column) = 1;
            out.guaranteed = true;
            break;
        case Kind::AddSpuriousColumn:
            out.counts.at(rubric::InfoType::Extra, rubric::EntityType::Column) = 1;
            out.guaranteed = true;
            break;
        case Kind::TransposeTable:
            out.transposed = true;
            out.guaranteed = true;
            break;
    }
    return out;
}

ExpectedOutcome expected_rubric(const BenchmarkCase& c) {
    if (c.applied.size() == 1) return expected_outcome(c.clean, c.applied[0]);
    return c.expected;
}

DifficultyMix default_mix() {
    return {{Difficulty::Easy, 0.44}, {Difficulty::Medium, 0.34}, {Difficulty::Hard, 0.22}};
}

namespace {

double mix_weight(const DifficultyMix& mix, Difficulty d) {
    auto it = mix.find(d);
    return it == mix.end() ? 0.0 : std::max(0.0, it->second);
}

Difficulty sample_difficulty(const DifficultyMix& mix, Rng& rng) {
    double e = mix_weight(mix, Difficulty::Easy);
    double m = mix_weight(mix, Difficulty::Medium);
    double h = mix_weight(mix, Difficulty::Hard);
    double total = e + m + h;
    if (total <= 0.0) {
        e = 0.44;
        m = 0.34;
        h = 0.22;
        total = 1.0;
    }
    double u = rng.unit_real() * total;
    if (u < e) return Difficulty::Easy;
    if (u < e + m) return Difficulty::Medium;
    return Difficulty::Hard;
}

std::string sanitize_id(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
            out.push_back(c);
        else
            out.push_back('-');
    }
    return out.empty() ? "table" : out;
}

std::optional<PerturbationSpec> try_plan(const Table& t, Kind kind, std::uint64_t seed) {
    try {
        return plan_perturbation(t, kind, seed);
    } catch (const KindInapplicable&) {
        return std::nullopt;
    }
}

}  // namespace

std::vector<BenchmarkCase> generate_benchmark(const std::vector<Table>& cleans, std::size_t per_table,
                                              const DifficultyMix& mix, std::uint64_t seed) {
    if (per_table < 1) throw Error("per_table must be at least 1");
    std::vector<BenchmarkCase> cases;
    cases.reserve(cleans.size() * per_table);
    static const Difficulty fallback_bands[] = {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard};

    for (std::size_t i = 0; i < cleans.size(); ++i) {
        const Table& clean = cleans[i];
        std::string table_tag =
            sanitize_id(clean.source_id ? *clean.source_id : "table-" + std::to_string(i));
        std::set<Kind> used;
        for (std::size_t k = 0; k < per_table; ++k) {
            std::uint64_t case_seed = util::derive_seed(seed, table_tag, k);
            Rng rng(case_seed);
            Difficulty band = sample_difficulty(mix, rng);

            std::optional<PerturbationSpec> planned;
            std::uint64_t attempt = 0;
            auto try_band = [&](Difficulty d) {
                const auto& pool = kinds_of(d);
                std::vector<Kind> fresh, stale;
                for (Kind kind : pool) (used.count(kind) ? stale : fresh).push_back(kind);
                for (const auto& group : {fresh, stale}) {
                    if (group.empty()) continue;
                    std::size_t start = rng.below(group.size());
                    for (std::size_t off = 0; off < group.size() && !planned; ++off) {
                        Kind kind = group[(start + off) % group.size()];
                        planned = try_plan(clean, kind, util::derive_seed(case_seed, "plan", attempt++));
                    }
                    if (planned) return;
                }
            };
            try_band(band);
            for (Difficulty d : fallback_bands)
                if (!planned && d != band) try_band(d);
            if (!planned)
                planned = plan_perturbation(clean, Kind::AddSpuriousColumn,
                                            util::derive_seed(case_seed, "plan", attempt));

            used.insert(planned->kind);
            BenchmarkCase bc;
            bc.id = table_tag + "-p" + std::to_string(k);
            bc.clean = clean;
            bc.perturbed = apply_perturbation(clean, *planned);
            bc.applied = {*planned};
            bc.provenance = clean.source_id ? *clean.source_id : "unnamed";
            bc.expected = expected_outcome(clean, *planned);
            cases.push_back(std::move(bc));
        }
    }
    return cases;
}

// ---- synthetic corpus ------------------------------------------------------------

namespace {

std::string two_decimals(std::uint64_t hundredths) {
    std::uint64_t whole = hundredths / 100;
    std::uint64_t frac = hundredths % 100;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%llu.%02llu", static_cast<unsigned long long>(whole),
                  static_cast<unsigned long long>(frac));
    return buf;
}

std::string iso_date(Rng& rng) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", static_cast<int>(1985 + rng.below(40)),
                  static_cast<int>(1 + rng.below(12)), static_cast<int>(1 + rng.below(28)));
    return buf;
}

std::string unique_name(std::string base, std::set<std::string>& seen, std::size_t row) {
    if (!seen.insert(util::normalize_text(base)).second) {
        base += " " + std::to_string(row + 2);
        seen.insert(util::normalize_text(base));
    }
    return base;
}

Table synth_films(Rng& rng, std::size_t index) {
    static const std::vector<std::string> adjectives = {"Silent", "Crimson", "Golden", "Hidden", "Broken",
                                                        "Distant", "Frozen", "Burning", "Quiet", "Iron"};
    static const std::vector<std::string> nouns = {"Horizon", "Tide",   "Empire", "Garden", "Signal",
                                                   "Harbor",  "Summit", "Mirror", "Canyon", "Lantern"};
    static const std::vector<std::string> genres = {"Action", "Drama",       "Comedy",   "Thriller",
                                                    "Romance", "Documentary", "Animation", "Mystery"};
    Table t;
    t.source_id = "synth-films-" + std::to_string(index);
    t.column_headers = {{"title"}, {"genre"}, {"release date"}, {"rating"}, {"box office"}, {"runtime (min)"}};
    std::size_t n = 4 + rng.below(4);
    std::set<std::string> seen;
    for (std::size_t r = 0; r < n; ++r) {
        std::string title = unique_name("The " + rng.pick(adjectives) + " " + rng.pick(nouns), seen, r);
        std::string gross = "$" + group_thousands(std::to_string(1000000 + rng.below(999000000)));
        t.rows.push_back({Cell{title}, Cell{rng.pick(genres)}, Cell{iso_date(rng)},
                          Cell{two_decimals(100 + rng.below(900))}, Cell{gross},
                          Cell{std::to_string(60 + rng.below(140))}});
    }
    return t;
}

Table synth_cities(Rng& rng, std::size_t index) {
    static const std::vector<std::string> names = {"Springfield", "Riverton", "Lakewood",   "Fairview", "Greenville",
                                                   "Bristol",     "Georgetown", "Salem",    "Clayton",  "Madison"};
    static const std::vector<std::string> prefixes = {"North", "South", "East", "West", "New", "Old", "Port", "Fort"};
    static const std::vector<std::string> countries = {"United States", "United Kingdom", "Canada", "Australia",
                                                       "Germany",       "France",         "Japan",  "Brazil",
                                                       "India",         "Norway"};
    Table t;
    t.source_id = "synth-cities-" + std::to_string(index);
    t.column_headers = {{"city"}, {"country"}, {"population"}, {"elevation"}, {"founded"}};
    std::size_t n = 4 + rng.below(4);
    std::set<std::string> seen;
    for (std::size_t r = 0; r < n; ++r) {
        std::string city = unique_name(rng.pick(prefixes) + " " + rng.pick(names), seen, r);
        std::string pop = group_thousands(std::to_string(10000 + rng.below(9990000)));
        t.rows.push_back({Cell{city}, Cell{rng.pick(countries)}, Cell{pop},
                          Cell{std::to_string(rng.below(2500)) + " m"}, Cell{std::to_string(1500 + rng.below(500))}});
    }
    return t;
}

Table synth_athletes(Rng& rng, std::size_t index) {
    static const std::vector<std::string> first = {"Alex",  "Jordan", "Casey", "Morgan", "Riley",
                                                   "Taylor", "Avery",  "Quinn", "Dana",   "Rowan"};
    static const std::vector<std::string> last = {"Keller",  "Ibarra", "Novak",  "Sato",   "Fischer",
                                                  "Laurent", "Okafor", "Petrov", "Hansen", "Varga"};
    static const std::vector<std::string> sports = {"sprinting", "rowing",  "cycling", "swimming",
                                                    "fencing",   "archery", "judo",    "skiing"};
    static const std::vector<std::string> countries = {"United States", "United Kingdom", "Canada", "Australia",
                                                       "Germany",       "France",         "Japan",  "Norway"};
    static const std::vector<std::string> units = {"s", "min"};
    Table t;
    t.source_id = "synth-athletes-" + std::to_string(index);
    t.column_headers = {{"name"}, {"sport"}, {"country"}, {"medals"}, {"personal best"}};
    std::size_t n = 4 + rng.below(4);
    std::set<std::string> seen;
    for (std::size_t r = 0; r < n; ++r) {
        std::string name = unique_name(rng.pick(first) + " " + rng.pick(last), seen, r);
        std::string best = two_decimals(900 + rng.below(5000)) + " " + rng.pick(units);
        t.rows.push_back({Cell{name}, Cell{rng.pick(sports)}, Cell{rng.pick(countries)},
                          Cell{std::to_string(rng.below(20))}, Cell{best}});
    }
    return t;
}

Table synth_products(Rng& rng, std::size_t index) {
    static const std::vector<std::string> brands = {"Lumen", "Vertex", "Atlas",  "Nimbus",
                                                    "Orbit", "Pulse",  "Quartz", "Zephyr"};
    static const std::vector<std::string> items = {"Lamp",    "Chair",   "Kettle",  "Router",
                                                   "Speaker", "Monitor", "Blender", "Heater"};
    static const std::vector<std::string> categories = {"kitchen", "office",   "outdoor",
                                                        "audio",   "lighting", "furniture"};
    static const std::vector<std::string> tags = {"portable", "wireless", "compact", "durable",
                                                  "eco",      "smart",    "classic", "premium"};
    Table t;
    t.source_id = "synth-products-" + std::to_string(index);
    t.column_headers = {{"product"}, {"category"}, {"price"}, {"weight"}, {"in stock"}, {"tags"}};
    std::size_t n = 4 + rng.below(4);
    std::set<std::string> seen;
    for (std::size_t r = 0; r < n; ++r) {
        std::string product = unique_name(rng.pick(brands) + " " + rng.pick(items), seen, r);
        std::string price = "$" + two_decimals(500 + rng.below(49500));
        std::string weight = two_decimals(50 + rng.below(2000)) + " kg";
        std::size_t tag_a = rng.below(tags.size());
        std::size_t tag_b = (tag_a + 1 + rng.below(tags.size() - 1)) % tags.size();
        std::string tag_text = tags[tag_a] + "; " + tags[tag_b];
        t.rows.push_back({Cell{product}, Cell{rng.pick(categories)}, Cell{price}, Cell{weight},
                          Cell{rng.below(2) ? "yes" : "no"}, Cell{tag_text}});
    }
    return t;
}

}  // namespace

std::vector<Table> synthetic_tables(std::size_t count, std::uint64_t seed) {
    std::vector<Table> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(util::derive_seed(seed, "synth", i));
        switch (i % 4) {
            case 0: out.push_back(synth_films(rng, i / 4)); break;
            case 1: out.push_back(synth_cities(rng, i / 4)); break;
            case 2: out.push_back(synth_athletes(rng, i / 4)); break;
            default: out.push_back(synth_products(rng, i / 4)); break;
        }
    }
    return out;
}

// ---- persistence ------------------------------------------------------------------

namespace {

using nlohmann::json;

json counts_to_json(const rubric::RubricCounts& counts) {
    auto info = [&](rubric::InfoType i) {
        return json{{"row", counts.at(i, rubric::EntityType::Row)},
                    {"column", counts.at(i, rubric::EntityType::Column)},
                    {"cell", counts.at(i, rubric::EntityType::Cell)}};
    };
    return json{{"f",
                 {{"missing", info(rubric::InfoType::Missing)},
                  {"extra", info(rubric::InfoType::Extra)},
                  {"partial", info(rubric::InfoType::Partial)}}},
                {"N",
                 {{"row", counts.total(rubric::EntityType::Row)},
                  {"column", counts.total(rubric::EntityType::Column)},
                  {"cell", counts.total(rubric::EntityType::Cell)}}}};
}

rubric::RubricCounts counts_from_json(const json& j) {
    rubric::RubricCounts counts;
    auto read_info = [&](rubric::InfoType i, const json& obj) {
        counts.at(i, rubric::EntityType::Row) = obj.at("row").get<std::size_t>();
        counts.at(i, rubric::EntityType::Column) = obj.at("column").get<std::size_t>();
        counts.at(i, rubric::EntityType::Cell) = obj.at("cell").get<std::size_t>();
    };
    read_info(rubric::InfoType::Missing, j.at("f").at("missing"));
    read_info(rubric::InfoType::Extra, j.at("f").at("extra"));
    read_info(rubric::InfoType::Partial, j.at("f").at("partial"));
    counts.total(rubric::EntityType::Row) = j.at("N").at("row").get<std::size_t>();
    counts.total(rubric::EntityType::Column) = j.at("N").at("column").get<std::size_t>();
    counts.total(rubric::EntityType::Cell) = j.at("N").at("cell").get<std::size_t>();
    return counts;
}

json spec_to_json(const PerturbationSpec& s) {
    json j{{"kind", kind_name(s.kind)}, {"difficulty", difficulty_name(s.difficulty)}, {"seed", s.seed}};
    if (s.target_row) j["target_row"] = *s.target_row;
    if (s.target_col) j["target_col"] = *s.target_col;
    if (!s.params.empty()) j["params"] = s.params;
    return j;
}

PerturbationSpec spec_from_json(const json& j) {
    PerturbationSpec s;
    s.kind = kind_from_name(j.at("kind").get<std::string>());
    s.difficulty = difficulty_from_name(j.at("difficulty").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("target_row")) s.target_row = j.at("target_row").get<std::size_t>();
    if (j.contains("target_col")) s.target_col = j.at("target_col").get<std::size_t>();
    if (j.contains("params")) s.params = j.at("params").get<std::map<std::string, std::string>>();
    return s;
}

}  // namespace

void write_benchmark(const std::vector<BenchmarkCase>& cases, const std::string& dir, std::uint64_t master_seed,
                     const DifficultyMix& mix) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "tables");

    json manifest;
    manifest["schema"] = "tabx-bench/1";
    manifest["master_seed"] = master_seed;
    manifest["mix"] = {{"easy", mix_weight(mix, Difficulty::Easy)},
                       {"medium", mix_weight(mix, Difficulty::Medium)},
                       {"hard", mix_weight(mix, Difficulty::Hard)}};
    manifest["cases"] = json::array();

    for (const auto& c : cases) {
        std::string clean_path = "tables/" + c.id + ".clean.json";
        std::string perturbed_path = "tables/" + c.id + ".perturbed.json";
        util::write_file_atomic((fs::path(dir) / clean_path).string(), model::canonical_serialize(c.clean));
        util::write_file_atomic((fs::path(dir) / perturbed_path).string(), model::canonical_serialize(c.perturbed));

        json entry;
        entry["id"] = c.id;
        entry["provenance"] = c.provenance;
        entry["clean"] = clean_path;
        entry["perturbed"] = perturbed_path;
        entry["applied"] = json::array();
        for (const auto& s : c.applied) entry["applied"].push_back(spec_to_json(s));
        json expected = counts_to_json(c.expected.counts);
        expected["partial_magnitudes"] = c.expected.partial_magnitudes;
        expected["transposed"] = c.expected.transposed;
        expected["guaranteed"] = c.expected.guaranteed;
        expected["formatting_only"] = c.expected.formatting_only();
        entry["expected"] = expected;
        manifest["cases"].push_back(std::move(entry));
    }

    util::write_file_atomic((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

std::vector<BenchmarkCase> load_benchmark(const std::string& dir) {
    namespace fs = std::filesystem;
    json manifest = json::parse(util::read_file((fs::path(dir) / "manifest.json").string()));
    if (manifest.value("schema", "") != "tabx-bench/1")
        throw MalformedInput("unrecognized benchmark manifest schema");

    std::vector<BenchmarkCase> cases;
    for (const auto& entry : manifest.at("cases")) {
        BenchmarkCase c;
        c.id = entry.at("id").get<std::string>();
        c.provenance = entry.value("provenance", "");
        c.clean = model::parse_table(util::read_file((fs::path(dir) / entry.at("clean").get<std::string>()).string()),
                                     model::TableFormat::JsonCanonical);
        c.perturbed =
            model::parse_table(util::read_file((fs::path(dir) / entry.at("perturbed").get<std::string>()).string()),
                               model::TableFormat::JsonCanonical);
        for (const auto& sj : entry.at("applied")) c.applied.push_back(spec_from_json(sj));
        const json& expected = entry.at("expected");
        c.expected.counts = counts_from_json(expected);
        c.expected.partial_magnitudes = expected.value("partial_magnitudes", std::vector<double>{});
        c.expected.transposed = expected.value("transposed", false);
        c.expected.guaranteed = expected.value("guaranteed", false);
        cases.push_back(std::move(c));
    }
    return cases;
}

}  // namespace tabx::perturb
