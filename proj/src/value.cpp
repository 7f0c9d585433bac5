#include "tabx/value.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "tabx/util.hpp"

namespace tabx::compare {

namespace {

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

std::string lower_copy(std::string_view s) { return util::to_lower(std::string(s)); }

const std::map<std::string, Unit>& unit_table() {
    static const std::map<std::string, Unit> table = [] {
        std::map<std::string, Unit> t;
        auto add = [&](std::initializer_list<const char*> names, Dimension d, const char* sym, double base) {
            for (const char* n : names) t[n] = Unit{d, sym, base};
        };
        add({"m", "meter", "metre", "meters", "metres"}, Dimension::Length, "m", 1.0);
        add({"cm", "centimeter", "centimeters"}, Dimension::Length, "cm", 0.01);
        add({"mm", "millimeter", "millimeters"}, Dimension::Length, "mm", 0.001);
        add({"km", "kilometer", "kilometers"}, Dimension::Length, "km", 1000.0);
        add({"in", "inch", "inches"}, Dimension::Length, "in", 0.0254);
        add({"ft", "foot", "feet"}, Dimension::Length, "ft", 0.3048);
        add({"mi", "mile", "miles"}, Dimension::Length, "mi", 1609.344);

        add({"s", "sec", "secs", "second", "seconds"}, Dimension::Time, "s", 1.0);
        add({"min", "mins", "minute", "minutes"}, Dimension::Time, "min", 60.0);
        add({"h", "hr", "hrs", "hour", "hours"}, Dimension::Time, "hr", 3600.0);
        add({"day", "days"}, Dimension::Time, "day", 86400.0);
        add({"wk", "week", "weeks"}, Dimension::Time, "week", 604800.0);
        // Mean month and year lengths: 30.44 days and 365.25 days.
        add({"mo", "month", "months"}, Dimension::Time, "month", 2630016.0);
        add({"yr", "yrs", "year", "years"}, Dimension::Time, "year", 31557600.0);

        add({"kg", "kgs", "kilogram", "kilograms"}, Dimension::Mass, "kg", 1.0);
        add({"g", "gram", "grams"}, Dimension::Mass, "g", 0.001);
        add({"mg", "milligram", "milligrams"}, Dimension::Mass, "mg", 1e-6);
        add({"t", "ton", "tons", "tonne", "tonnes"}, Dimension::Mass, "t", 1000.0);
        add({"lb", "lbs", "pound", "pounds"}, Dimension::Mass, "lb", 0.45359237);
        add({"oz", "ounce", "ounces"}, Dimension::Mass, "oz", 0.028349523125);

        add({"%", "percent"}, Dimension::Percentage, "%", 0.01);

        for (const char* iso : {"USD", "EUR", "GBP", "INR", "JPY", "CNY", "CAD", "AUD", "CHF"})
            t[iso] = Unit{Dimension::CurrencyScale, iso, 1.0};
        t["$"] = Unit{Dimension::CurrencyScale, "USD", 1.0};
        t["€"] = Unit{Dimension::CurrencyScale, "EUR", 1.0};
        t["£"] = Unit{Dimension::CurrencyScale, "GBP", 1.0};
        t["₹"] = Unit{Dimension::CurrencyScale, "INR", 1.0};
        t["¥"] = Unit{Dimension::CurrencyScale, "JPY", 1.0};
        return t;
    }();
    return table;
}

// Attached scale suffixes are case-sensitive: "100m" reads as 100 million,
// while the spaced form "100 m" reads as meters.
const std::map<std::string, double>& attached_scales() {
    static const std::map<std::string, double> t = {
        {"k", 1e3}, {"K", 1e3},  {"m", 1e6},  {"M", 1e6},  {"mn", 1e6}, {"Mn", 1e6}, {"MN", 1e6},
        {"b", 1e9}, {"B", 1e9},  {"bn", 1e9}, {"Bn", 1e9}, {"BN", 1e9}, {"tn", 1e12}, {"T", 1e12},
    };
    return t;
}

const std::map<std::string, double>& word_scales() {
    static const std::map<std::string, double> t = {
        {"thousand", 1e3}, {"million", 1e6},  {"millions", 1e6},  {"billion", 1e9},
        {"billions", 1e9}, {"trillion", 1e12}, {"trillions", 1e12}, {"lakh", 1e5},
        {"crore", 1e7},
    };
    return t;
}

std::optional<Unit> lookup_unit_token(std::string_view token) {
    const auto& table = unit_table();
    std::string key(token);
    if (auto it = table.find(key); it != table.end()) return it->second;
    if (token.size() > 1) {
        std::string low = lower_copy(token);
        if (auto it = table.find(low); it != table.end()) return it->second;
        std::string up = low;
        std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
        if (auto it = table.find(up); it != table.end()) return it->second;
    }
    return std::nullopt;
}

const std::array<const char*, 5> kCurrencyGlyphs = {"$", "€", "£", "₹", "¥"};

// Returns glyph length when s starts with a currency glyph, 0 otherwise.
std::size_t currency_glyph_prefix(std::string_view s) {
    for (const char* g : kCurrencyGlyphs) {
        std::string_view gv(g);
        if (s.substr(0, gv.size()) == gv) return gv.size();
    }
    return 0;
}

struct NumberParse {
    double magnitude = 0.0;
    std::optional<Unit> unit;
    bool is_duration = false;
};

std::optional<double> parse_core(std::string_view s, std::size_t& pos) {
    std::size_t i = pos;
    std::string digits;
    bool any_digit = false;
    // Integer part, with optional strict 3-digit grouping.
    std::size_t int_start = i;
    while (i < s.size() && (is_ascii_digit(s[i]) || s[i] == ',')) ++i;
    std::string_view int_part = s.substr(int_start, i - int_start);
    if (!int_part.empty() && int_part.back() == ',') {
        int_part.remove_suffix(1);
        --i;
    }
    if (int_part.find(',') != std::string_view::npos) {
        std::size_t group = 0, group_index = 0;
        std::size_t first_len = 0;
        for (std::size_t k = 0; k <= int_part.size(); ++k) {
            if (k == int_part.size() || int_part[k] == ',') {
                if (group_index == 0) {
                    first_len = group;
                    if (group < 1 || group > 3) return std::nullopt;
                } else if (group != 3) {
                    return std::nullopt;
                }
                (void)first_len;
                group = 0;
                ++group_index;
            } else if (is_ascii_digit(int_part[k])) {
                ++group;
            } else {
                return std::nullopt;
            }
        }
    }
    for (char c : int_part)
        if (is_ascii_digit(c)) {
            digits += c;
            any_digit = true;
        }
    if (i < s.size() && s[i] == '.') {
        digits += '.';
        ++i;
        while (i < s.size() && is_ascii_digit(s[i])) {
            digits += s[i];
            any_digit = true;
            ++i;
        }
    }
    if (!any_digit) return std::nullopt;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        std::size_t exp_start = j;
        while (j < s.size() && is_ascii_digit(s[j])) ++j;
        if (j > exp_start) {
            digits.append(s.substr(i, j - i));
            i = j;
        }
    }
    double out = 0.0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out);
    if (ec != std::errc() || p != digits.data() + digits.size()) return std::nullopt;
    pos = i;
    return out;
}

std::optional<NumberParse> parse_number(std::string_view raw) {
    std::string s = util::trim(std::string(raw));
    if (s.empty()) return std::nullopt;

    bool negative = false;
    bool paren = false;
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        s = util::trim(s.substr(1, s.size() - 2));
        paren = true;
    }

    std::string_view v(s);
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < v.size() && (v[i] == ' ' || v[i] == '\t')) ++i;
    };

    std::optional<Unit> currency;
    bool sign_seen = false;
    if (i < v.size() && (v[i] == '+' || v[i] == '-')) {
        negative = v[i] == '-';
        sign_seen = true;
        ++i;
        skip_ws();
    }
    if (std::size_t g = currency_glyph_prefix(v.substr(i)); g > 0) {
        currency = lookup_unit_token(v.substr(i, g));
        i += g;
        skip_ws();
    } else if (i + 3 <= v.size() && is_ascii_alpha(v[i])) {
        std::string_view iso = v.substr(i, 3);
        bool boundary = i + 3 == v.size() || !is_ascii_alpha(v[i + 3]);
        if (boundary) {
            if (auto u = lookup_unit_token(iso); u && u->dimension == Dimension::CurrencyScale) {
                currency = u;
                i += 3;
                skip_ws();
            }
        }
    }
    if (!sign_seen && i < v.size() && (v[i] == '+' || v[i] == '-')) {
        negative = v[i] == '-';
        ++i;
        skip_ws();
    }

    auto core = parse_core(v, i);
    if (!core) return std::nullopt;
    double magnitude = *core;

    std::optional<double> scale;
    std::optional<Unit> unit;

    // Attached suffix: letters, '%', or a currency glyph directly after digits.
    if (i < v.size() && is_ascii_alpha(v[i])) {
        std::size_t start = i;
        while (i < v.size() && is_ascii_alpha(v[i])) ++i;
        std::string tok(v.substr(start, i - start));
        if (auto it = attached_scales().find(tok); it != attached_scales().end()) {
            scale = it->second;
        } else if (auto u = lookup_unit_token(tok); u && tok.size() > 1) {
            unit = u;
        } else {
            return std::nullopt;
        }
    } else if (i < v.size() && v[i] == '%') {
        unit = lookup_unit_token("%");
        ++i;
    } else if (std::size_t g = currency_glyph_prefix(v.substr(i)); g > 0) {
        unit = lookup_unit_token(v.substr(i, g));
        i += g;
    }

    // Spaced tail: optional scale word, then optional unit token.
    while (i < v.size()) {
        skip_ws();
        if (i >= v.size()) break;
        std::size_t start = i;
        while (i < v.size() && v[i] != ' ' && v[i] != '\t') ++i;
        std::string tok(v.substr(start, i - start));
        std::string low = lower_copy(tok);
        if (!scale && !unit) {
            if (auto it = word_scales().find(low); it != word_scales().end()) {
                scale = it->second;
                continue;
            }
            if (auto it = attached_scales().find(tok); it != attached_scales().end() && tok.size() > 1) {
                scale = it->second;
                continue;
            }
            if (tok == "M") {
                scale = 1e6;
                continue;
            }
            if (tok == "K") {
                scale = 1e3;
                continue;
            }
        }
        if (!unit) {
            if (auto u = lookup_unit_token(tok)) {
                unit = u;
                continue;
            }
        }
        return std::nullopt;
    }

    if (currency) {
        if (unit && unit->dimension != Dimension::CurrencyScale) return std::nullopt;
        if (unit && unit->symbol != currency->symbol) return std::nullopt;
        unit = currency;
    }

    if (scale) magnitude = util::decimal_mul(magnitude, *scale);
    if (negative) magnitude = -magnitude;
    if (paren && !negative) magnitude = -magnitude;

    NumberParse out;
    out.magnitude = magnitude;
    if (unit && unit->dimension == Dimension::Time) {
        out.is_duration = true;
        out.unit = unit;
    } else if (unit) {
        out.unit = unit;
    }
    // A bare scale suffix is folded into the magnitude and leaves no unit.
    return out;
}

const std::map<std::string, int>& month_names() {
    static const std::map<std::string, int> t = {
        {"january", 1},  {"jan", 1},  {"february", 2}, {"feb", 2},  {"march", 3},    {"mar", 3},
        {"april", 4},    {"apr", 4},  {"may", 5},      {"june", 6}, {"jun", 6},      {"july", 7},
        {"jul", 7},      {"august", 8}, {"aug", 8},    {"september", 9}, {"sep", 9}, {"sept", 9},
        {"october", 10}, {"oct", 10}, {"november", 11}, {"nov", 11}, {"december", 12}, {"dec", 12},
    };
    return t;
}

std::optional<DateValue> parse_date(std::string_view raw) {
    std::string s = util::trim(std::string(raw));
    if (s.empty()) return std::nullopt;

    auto all_digits = [](std::string_view t) {
        return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return is_ascii_digit(c); });
    };
    auto to_int = [](std::string_view t) {
        int out = 0;
        std::from_chars(t.data(), t.data() + t.size(), out);
        return out;
    };

    for (char sep : {'-', '/', '.'}) {
        std::vector<std::string_view> parts;
        std::string_view v(s);
        std::size_t start = 0;
        bool ok = true;
        for (std::size_t k = 0; k <= v.size(); ++k) {
            if (k == v.size() || v[k] == sep) {
                parts.push_back(v.substr(start, k - start));
                start = k + 1;
            } else if (!is_ascii_digit(v[k])) {
                ok = false;
                break;
            }
        }
        if (!ok || parts.size() != 3) continue;
        if (!all_digits(parts[0]) || !all_digits(parts[1]) || !all_digits(parts[2])) continue;
        if (parts[0].size() == 4 && parts[1].size() <= 2 && parts[2].size() <= 2) {
            int y = to_int(parts[0]), m = to_int(parts[1]), d = to_int(parts[2]);
            if (is_valid_date(y, m, d)) return DateValue{y, m, d};
        }
        if (parts[2].size() == 4 && parts[0].size() <= 2 && parts[1].size() <= 2) {
            int a = to_int(parts[0]), b = to_int(parts[1]), y = to_int(parts[2]);
            int m = a, d = b;
            if (a > 12 && b <= 12) {
                d = a;
                m = b;
            }
            if (is_valid_date(y, m, d)) return DateValue{y, m, d};
        }
    }

    // Month-name forms: "March 3, 2020", "3 March 2020", "Mar 3 2020".
    std::string cleaned;
    cleaned.reserve(s.size());
    for (char c : s) cleaned += (c == ',') ? ' ' : c;
    auto tokens = util::tokenize(cleaned);
    if (tokens.size() == 3) {
        int month = 0;
        std::size_t month_idx = 3;
        for (std::size_t k = 0; k < 3; ++k) {
            auto it = month_names().find(lower_copy(tokens[k]));
            if (it != month_names().end()) {
                month = it->second;
                month_idx = k;
                break;
            }
        }
        if (month != 0) {
            std::vector<std::string_view> nums;
            for (std::size_t k = 0; k < 3; ++k)
                if (k != month_idx) nums.push_back(tokens[k]);
            if (nums.size() == 2 && all_digits(nums[0]) && all_digits(nums[1])) {
                int a = to_int(nums[0]), b = to_int(nums[1]);
                int day = a, year = b;
                if (nums[0].size() == 4 && nums[1].size() <= 2) {
                    year = a;
                    day = b;
                }
                if (is_valid_date(year, month, day)) return DateValue{year, month, day};
            }
        }
    }
    return std::nullopt;
}

std::optional<TimeValue> parse_clock(std::string_view raw) {
    std::string s = util::trim(std::string(raw));
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else if (is_ascii_digit(c)) {
            cur += c;
        } else {
            return std::nullopt;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 2 && parts.size() != 3) return std::nullopt;
    for (const auto& p : parts)
        if (p.empty() || p.size() > 2) return std::nullopt;
    auto to_int = [](const std::string& t) {
        int out = 0;
        std::from_chars(t.data(), t.data() + t.size(), out);
        return out;
    };
    int h = to_int(parts[0]), m = to_int(parts[1]);
    int sec = parts.size() == 3 ? to_int(parts[2]) : 0;
    if (h > 23 || m > 59 || sec > 59) return std::nullopt;
    TimeValue t;
    t.kind = TimeValue::Kind::Clock;
    t.seconds = h * 3600.0 + m * 60.0 + sec;
    return t;
}

std::optional<bool> parse_boolean(std::string_view raw, bool lenient) {
    std::string n = util::normalize_text(std::string(raw));
    if (n == "true" || n == "yes") return true;
    if (n == "false" || n == "no") return false;
    if (lenient) {
        if (n == "1" || n == "t" || n == "y") return true;
        if (n == "0" || n == "f" || n == "n") return false;
    }
    return std::nullopt;
}

std::vector<std::string> split_list(std::string_view body, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : body) {
        if (c == sep) {
            parts.push_back(util::trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(util::trim(cur));
    return parts;
}

}  // namespace

std::string dimension_name(Dimension d) {
    switch (d) {
        case Dimension::Length: return "length";
        case Dimension::Time: return "time";
        case Dimension::Mass: return "mass";
        case Dimension::CurrencyScale: return "currency-scale";
        case Dimension::Percentage: return "percentage";
        case Dimension::Count: return "count";
    }
    return "count";
}

std::optional<Unit> lookup_unit(std::string_view token) { return lookup_unit_token(util::trim(std::string(token))); }

std::optional<Unit> header_unit(std::string_view header_text) {
    std::string s = util::trim(std::string(header_text));
    if (s.empty() || s.back() != ')') return std::nullopt;
    auto open = s.rfind('(');
    if (open == std::string::npos) return std::nullopt;
    std::string inner = util::trim(s.substr(open + 1, s.size() - open - 2));
    if (inner.empty()) return std::nullopt;
    if (auto u = lookup_unit_token(inner)) return u;
    std::string low = lower_copy(inner);
    if (auto it = word_scales().find(low); it != word_scales().end())
        return Unit{Dimension::Count, low, it->second};
    return std::nullopt;
}

std::string strip_header_annotation(std::string_view header_text) {
    std::string s = util::trim(std::string(header_text));
    if (!s.empty() && s.back() == ')') {
        auto open = s.rfind('(');
        if (open != std::string::npos) {
            std::string rest = util::trim(s.substr(0, open));
            if (!rest.empty()) return rest;
        }
    }
    return s;
}

std::string value_kind_name(ValueKind k) {
    switch (k) {
        case ValueKind::Number: return "Number";
        case ValueKind::Text: return "Text";
        case ValueKind::Boolean: return "Boolean";
        case ValueKind::Date: return "Date";
        case ValueKind::Time: return "Time";
        case ValueKind::List: return "List";
        case ValueKind::Other: return "Other";
    }
    return "Other";
}

std::optional<ValueKind> value_kind_from_name(std::string_view name) {
    std::string low = lower_copy(name);
    if (low == "number" || low == "num") return ValueKind::Number;
    if (low == "text" || low == "string") return ValueKind::Text;
    if (low == "boolean" || low == "bool") return ValueKind::Boolean;
    if (low == "date") return ValueKind::Date;
    if (low == "time") return ValueKind::Time;
    if (low == "list") return ValueKind::List;
    if (low == "other" || low == "others") return ValueKind::Other;
    return std::nullopt;
}

bool is_valid_date(int y, int m, int d) {
    if (y < 1 || y > 9999 || m < 1 || m > 12 || d < 1) return false;
    static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = days[m - 1];
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (m == 2 && leap) dim = 29;
    return d <= dim;
}

long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u + static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097LL + static_cast<long long>(doe) - 719468LL;
}

CellValue infer_cell_type(std::string_view raw, std::optional<ValueKind> column_hint,
                          const std::optional<Unit>& default_unit) {
    if (!util::is_valid_utf8(raw)) return CellValue{OtherValue{std::string(raw)}};

    std::string trimmed = util::trim(std::string(raw));
    if (trimmed.empty()) return CellValue{TextValue{""}};

    bool bool_lenient = column_hint == ValueKind::Boolean;
    if (auto b = parse_boolean(trimmed, bool_lenient)) return CellValue{BooleanValue{*b}};

    if (auto n = parse_number(trimmed)) {
        if (n->is_duration) {
            TimeValue t;
            t.kind = TimeValue::Kind::Duration;
            t.seconds = util::decimal_mul(n->magnitude, n->unit->to_base);
            t.written_unit = n->unit;
            return CellValue{t};
        }
        if (!n->unit && default_unit) {
            if (default_unit->dimension == Dimension::Time) {
                TimeValue t;
                t.kind = TimeValue::Kind::Duration;
                t.seconds = util::decimal_mul(n->magnitude, default_unit->to_base);
                t.written_unit = default_unit;
                return CellValue{t};
            }
            return CellValue{NumberValue{n->magnitude, default_unit}};
        }
        return CellValue{NumberValue{n->magnitude, n->unit}};
    }

    if (auto d = parse_date(trimmed)) return CellValue{*d};
    if (auto t = parse_clock(trimmed)) return CellValue{*t};

    auto make_list = [&](const std::vector<std::string>& parts) {
        ListValue lv;
        for (const auto& p : parts)
            if (!p.empty()) lv.items.push_back(infer_cell_type(p));
        return lv;
    };
    if (trimmed.find(';') != std::string::npos) {
        auto parts = split_list(trimmed, ';');
        std::size_t nonempty = 0;
        for (const auto& p : parts)
            if (!p.empty()) ++nonempty;
        if (nonempty >= 2) return CellValue{make_list(parts)};
    }
    if (trimmed.size() >= 2 && trimmed.front() == '[' && trimmed.back() == ']') {
        auto parts = split_list(trimmed.substr(1, trimmed.size() - 2), ',');
        std::size_t nonempty = 0;
        for (const auto& p : parts)
            if (!p.empty()) ++nonempty;
        if (nonempty >= 1) return CellValue{make_list(parts)};
    }
    if (column_hint == ValueKind::List && trimmed.find(',') != std::string::npos) {
        auto parts = split_list(trimmed, ',');
        std::size_t nonempty = 0;
        for (const auto& p : parts)
            if (!p.empty()) ++nonempty;
        if (nonempty >= 2) return CellValue{make_list(parts)};
    }

    return CellValue{TextValue{util::normalize_text(trimmed)}};
}

CellValue normalize_value(const CellValue& v) {
    switch (v.kind()) {
        case ValueKind::Number: {
            NumberValue n = v.number();
            if (!n.unit) return CellValue{n};
            switch (n.unit->dimension) {
                case Dimension::Count:
                    n.magnitude = util::decimal_mul(n.magnitude, n.unit->to_base);
                    n.unit.reset();
                    break;
                case Dimension::Percentage:
                    n.magnitude = util::decimal_mul(n.magnitude, n.unit->to_base);
                    n.unit.reset();
                    break;
                case Dimension::Length:
                    n.magnitude = util::decimal_mul(n.magnitude, n.unit->to_base);
                    n.unit = Unit{Dimension::Length, "m", 1.0};
                    break;
                case Dimension::Mass:
                    n.magnitude = util::decimal_mul(n.magnitude, n.unit->to_base);
                    n.unit = Unit{Dimension::Mass, "kg", 1.0};
                    break;
                case Dimension::Time: {
                    TimeValue t;
                    t.kind = TimeValue::Kind::Duration;
                    t.seconds = util::decimal_mul(n.magnitude, n.unit->to_base);
                    t.written_unit = n.unit;
                    return CellValue{t};
                }
                case Dimension::CurrencyScale:
                    n.magnitude = util::decimal_mul(n.magnitude, n.unit->to_base);
                    n.unit = Unit{Dimension::CurrencyScale, n.unit->symbol, 1.0};
                    break;
            }
            return CellValue{n};
        }
        case ValueKind::Text: {
            TextValue t = v.text();
            t.text = util::normalize_text(t.text);
            return CellValue{t};
        }
        case ValueKind::List: {
            ListValue out;
            out.items.reserve(v.list().items.size());
            for (const auto& item : v.list().items) out.items.push_back(normalize_value(item));
            return CellValue{out};
        }
        case ValueKind::Boolean:
        case ValueKind::Date:
        case ValueKind::Time:
        case ValueKind::Other:
            return v;
    }
    return v;
}

std::string canonical_string(const CellValue& v) {
    switch (v.kind()) {
        case ValueKind::Number: {
            const auto& n = v.number();
            std::string s = "num:" + util::format_double(n.magnitude);
            if (n.unit) s += "|" + n.unit->symbol;
            return s;
        }
        case ValueKind::Text:
            return "txt:" + v.text().text;
        case ValueKind::Boolean:
            return v.boolean().value ? "bool:true" : "bool:false";
        case ValueKind::Date: {
            const auto& d = v.date();
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
            return std::string("date:") + buf;
        }
        case ValueKind::Time: {
            const auto& t = v.time();
            std::string tag = t.kind == TimeValue::Kind::Clock ? "clock:" : "time:";
            return tag + util::format_double(t.seconds);
        }
        case ValueKind::List: {
            std::string s = "list:[";
            bool first = true;
            for (const auto& item : v.list().items) {
                if (!first) s += ";";
                first = false;
                s += canonical_string(item);
            }
            s += "]";
            return s;
        }
        case ValueKind::Other:
            return "other:" + v.other().raw;
    }
    return "other:";
}

}  // namespace tabx::compare
