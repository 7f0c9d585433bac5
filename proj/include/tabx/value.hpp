#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tabx::compare {

enum class Dimension { Length, Time, Mass, CurrencyScale, Percentage, Count };

std::string dimension_name(Dimension d);

struct Unit {
    Dimension dimension = Dimension::Count;
    std::string symbol;   // canonical symbol; ISO code for currencies
    double to_base = 1.0; // multiplicative factor into the dimension's base

    bool operator==(const Unit&) const = default;
};

// Unit for a bare token like "cm", "min", "$", "USD", "%". Empty optional when
// the token is not a known unit.
std::optional<Unit> lookup_unit(std::string_view token);

// Default unit embedded in a header, e.g. "runtime (min)" or "price ($)".
std::optional<Unit> header_unit(std::string_view header_text);

// Header text with a trailing parenthetical annotation removed.
std::string strip_header_annotation(std::string_view header_text);

enum class ValueKind { Number, Text, Boolean, Date, Time, List, Other };

std::string value_kind_name(ValueKind k);
std::optional<ValueKind> value_kind_from_name(std::string_view name);

struct CellValue;

struct NumberValue {
    double magnitude = 0.0;
    std::optional<Unit> unit;
};

struct TextValue {
    std::string text;  // comparison form (case-folded, whitespace-collapsed)
};

struct BooleanValue {
    bool value = false;
};

struct DateValue {
    int year = 1970;
    int month = 1;
    int day = 1;
};

struct TimeValue {
    enum class Kind { Duration, Clock };
    Kind kind = Kind::Duration;
    double seconds = 0.0;
    std::optional<Unit> written_unit;  // duration unit as it appeared, if any
};

struct ListValue {
    std::vector<CellValue> items;
};

struct OtherValue {
    std::string raw;
};

struct CellValue {
    std::variant<NumberValue, TextValue, BooleanValue, DateValue, TimeValue, ListValue, OtherValue> v;

    ValueKind kind() const { return static_cast<ValueKind>(v.index()); }

    const NumberValue& number() const { return std::get<NumberValue>(v); }
    const TextValue& text() const { return std::get<TextValue>(v); }
    const BooleanValue& boolean() const { return std::get<BooleanValue>(v); }
    const DateValue& date() const { return std::get<DateValue>(v); }
    const TimeValue& time() const { return std::get<TimeValue>(v); }
    const ListValue& list() const { return std::get<ListValue>(v); }
    const OtherValue& other() const { return std::get<OtherValue>(v); }
};

// Ordered pattern cascade: Boolean, Number (with unit suffix), Date, Time,
// List, Text. The hint only breaks ambiguity (boolean numerals, comma lists);
// it never downgrades a strong typed parse.
CellValue infer_cell_type(std::string_view raw, std::optional<ValueKind> column_hint = std::nullopt,
                          const std::optional<Unit>& default_unit = std::nullopt);

// Scale suffixes applied, units converted to the dimension base, dates kept as
// calendar dates, text case/whitespace folded. Idempotent.
CellValue normalize_value(const CellValue& v);

// Stable single-line rendering of a normalized value, used for grouping and
// set-style comparisons.
std::string canonical_string(const CellValue& v);

// Days since 1970-01-01 for a civil date.
long long days_from_civil(int y, int m, int d);

bool is_valid_date(int y, int m, int d);

}  // namespace tabx::compare
