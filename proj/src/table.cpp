#include "tabx/table.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tabx/errors.hpp"
#include "tabx/util.hpp"

namespace tabx::model {

using nlohmann::json;

bool Table::is_flat() const {
    return std::all_of(column_headers.begin(), column_headers.end(),
                       [](const HeaderPath& p) { return p.size() == 1; });
}

std::string escape_separators(std::string_view segment) {
    std::string out;
    out.reserve(segment.size());
    for (std::size_t i = 0; i < segment.size();) {
        bool special = segment.compare(i, 3, kPathSep) == 0 || segment.compare(i, 3, kGroupSep) == 0;
        if (special) {
            out.push_back('\\');
            out.append(segment.substr(i, 3));
            i += 3;
        } else {
            if (segment[i] == '\\') out.push_back('\\');
            out.push_back(segment[i]);
            ++i;
        }
    }
    return out;
}

static std::string join_with(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) {
            out += ' ';
            out += sep;
            out += ' ';
        }
        out += escape_separators(parts[i]);
    }
    return out;
}

std::string join_path(const HeaderPath& path) { return join_with(path, kPathSep); }

std::string Table::header_text(std::size_t col) const { return join_path(column_headers[col]); }

void Table::validate() const {
    if (column_headers.empty()) throw MalformedInput("table has no columns");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != column_headers.size())
            throw MalformedInput("row has " + std::to_string(rows[r].size()) + " cells, expected " +
                                     std::to_string(column_headers.size()),
                                 r + 2);
    }
    std::set<std::string> seen;
    for (std::size_t c = 0; c < column_headers.size(); ++c) {
        if (column_headers[c].empty()) throw MalformedInput("empty header path");
        if (!seen.insert(header_text(c)).second)
            throw AmbiguousHierarchy("duplicate flattened header: " + header_text(c));
    }
}

// ---- CSV (RFC 4180 quoting) --------------------------------------------------

namespace {

std::vector<std::vector<std::string>> parse_csv_records(std::string_view input) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1, col = 1;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < input.size(); ++i) {
        char c = input[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < input.size() && input[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                    col += 2;
                } else {
                    in_quotes = false;
                    ++col;
                }
            } else {
                field.push_back(c);
                if (c == '\n') {
                    ++line;
                    col = 1;
                } else {
                    ++col;
                }
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !field.empty())
                    throw MalformedInput("unexpected quote inside unquoted field", line, col);
                in_quotes = true;
                field_started = true;
                ++col;
                break;
            case ',':
                end_field();
                ++col;
                break;
            case '\r':
                ++col;
                break;  // CRLF tolerated
            case '\n':
                end_record();
                ++line;
                col = 1;
                break;
            default:
                field.push_back(c);
                field_started = true;
                ++col;
        }
    }
    if (in_quotes) throw MalformedInput("unterminated quoted field", line, col);
    // final record without trailing newline
    if (!field.empty() || field_started || !record.empty()) end_record();
    return records;
}

std::string csv_quote(const std::string& s) {
    bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

Table table_from_grid(std::vector<std::vector<std::string>> grid) {
    if (grid.empty()) throw MalformedInput("empty input: no header row", 1);
    Table t;
    for (auto& h : grid[0]) t.column_headers.push_back({util::trim(h)});
    if (t.column_headers.empty() ||
        std::all_of(t.column_headers.begin(), t.column_headers.end(),
                    [](const HeaderPath& p) { return p[0].empty(); }))
        throw MalformedInput("empty header row", 1);
    for (std::size_t r = 1; r < grid.size(); ++r) {
        if (grid[r].size() != t.column_headers.size())
            throw MalformedInput("row has " + std::to_string(grid[r].size()) + " cells, expected " +
                                     std::to_string(t.column_headers.size()),
                                 r + 1);
        std::vector<Cell> row;
        row.reserve(grid[r].size());
        for (auto& f : grid[r]) row.push_back(Cell{util::trim(f)});
        t.rows.push_back(std::move(row));
    }
    t.validate();
    return t;
}

// ---- markdown pipe tables ------------------------------------------------------

std::vector<std::string> split_pipe_row(std::string_view line, std::size_t lineno) {
    std::string body = util::trim(line);
    if (body.empty() || body[0] != '|')
        throw MalformedInput("markdown table row must start with '|'", lineno, 1);
    std::vector<std::string> cells;
    std::string cur;
    for (std::size_t i = 1; i < body.size(); ++i) {
        char c = body[i];
        if (c == '\\' && i + 1 < body.size() && body[i + 1] == '|') {
            cur.push_back('|');
            ++i;
        } else if (c == '|') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    // content after the final pipe counts as a cell only if non-blank
    if (!util::trim(cur).empty()) cells.push_back(cur);
    return cells;
}

bool is_delimiter_row(const std::vector<std::string>& cells) {
    if (cells.empty()) return false;
    for (const auto& c : cells) {
        std::string t = util::trim(c);
        if (t.empty()) return false;
        for (char ch : t)
            if (ch != '-' && ch != ':') return false;
        if (t.find('-') == std::string::npos) return false;
    }
    return true;
}

Table parse_markdown(std::string_view input) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= input.size(); ++i) {
        if (i == input.size() || input[i] == '\n') {
            std::string_view ln = input.substr(start, i - start);
            if (!ln.empty() && ln.back() == '\r') ln.remove_suffix(1);
            if (!util::trim(ln).empty()) lines.push_back(ln);
            start = i + 1;
        }
    }
    if (lines.empty()) throw MalformedInput("empty input: no header row", 1);
    if (lines.size() < 2) throw MalformedInput("markdown table missing delimiter row", 2);

    auto header = split_pipe_row(lines[0], 1);
    auto delim = split_pipe_row(lines[1], 2);
    if (!is_delimiter_row(delim))
        throw MalformedInput("second line is not a markdown delimiter row", 2);
    if (delim.size() != header.size())
        throw MalformedInput("delimiter row width differs from header", 2);

    std::vector<std::vector<std::string>> grid;
    grid.push_back(header);
    for (std::size_t i = 2; i < lines.size(); ++i) grid.push_back(split_pipe_row(lines[i], i + 1));
    return table_from_grid(std::move(grid));
}

std::string md_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n' || c == '\r') out.push_back(' ');  // pipe tables are single-line
        else out.push_back(c);
    }
    return out;
}

// ---- canonical JSON -------------------------------------------------------------

Table parse_json_canonical(std::string_view input) {
    json doc = json::parse(input, nullptr, false);
    if (doc.is_discarded()) throw MalformedInput("invalid JSON");
    if (!doc.is_object() || !doc.contains("headers") || !doc.contains("rows"))
        throw MalformedInput("canonical JSON needs object with \"headers\" and \"rows\"");
    Table t;
    if (!doc["headers"].is_array() || doc["headers"].empty())
        throw MalformedInput("\"headers\" must be a non-empty array");
    for (const auto& h : doc["headers"]) {
        if (!h.is_array()) throw MalformedInput("each header must be an array of strings");
        HeaderPath path;
        for (const auto& seg : h) {
            if (!seg.is_string()) throw MalformedInput("header segments must be strings");
            path.push_back(util::trim(seg.get<std::string>()));
        }
        if (path.empty()) throw MalformedInput("empty header path");
        t.column_headers.push_back(std::move(path));
    }
    std::size_t r = 0;
    for (const auto& row : doc["rows"]) {
        ++r;
        if (!row.is_array()) throw MalformedInput("each row must be an array", r);
        if (row.size() != t.column_headers.size())
            throw MalformedInput("row has " + std::to_string(row.size()) + " cells, expected " +
                                     std::to_string(t.column_headers.size()),
                                 r);
        std::vector<Cell> cells;
        for (const auto& v : row) {
            if (!v.is_string()) throw MalformedInput("cells must be strings", r);
            cells.push_back(Cell{util::trim(v.get<std::string>())});
        }
        t.rows.push_back(std::move(cells));
    }
    t.validate();
    return t;
}

}  // namespace

Table parse_table(std::string_view input, TableFormat format) {
    if (!util::is_valid_utf8(input)) throw MalformedInput("input is not valid UTF-8", 1);
    switch (format) {
        case TableFormat::Csv:
            return table_from_grid(parse_csv_records(input));
        case TableFormat::MarkdownPipe:
            return parse_markdown(input);
        case TableFormat::JsonCanonical:
            return parse_json_canonical(input);
    }
    throw MalformedInput("unknown format");
}

// ---- flattening -----------------------------------------------------------------

Table flatten_hierarchical(const Table& t) {
    t.validate();
    if (t.is_flat()) return t;
    Table out;
    out.source_id = t.source_id;
    out.orientation_hint = t.orientation_hint;

    // Row-group detection: the leading column carries blank continuation cells
    // below a non-blank label. Join label columns up to and including the
    // first one without blanks (the within-group discriminator). Only tables
    // with hierarchical headers are considered; flat input passes through
    // untouched.
    std::size_t group_cols = 0;
    if (!t.is_flat() && t.column_count() >= 2 && t.row_count() >= 2) {
        auto col_has_continuations = [&](std::size_t c) {
            bool seen_label = false, blank_below = false;
            for (std::size_t r = 0; r < t.row_count(); ++r) {
                const std::string& raw = t.rows[r][c].raw;
                if (raw.empty() && seen_label) blank_below = true;
                if (!raw.empty()) seen_label = true;
            }
            return blank_below && seen_label;
        };
        if (t.column_headers[0].size() == 1 && !t.rows[0][0].raw.empty() &&
            col_has_continuations(0)) {
            group_cols = 1;
            while (group_cols < t.column_count() - 1 && t.column_headers[group_cols].size() == 1 &&
                   col_has_continuations(group_cols))
                ++group_cols;
            ++group_cols;  // include the discriminator column
        }
    }

    if (group_cols > 0) {
        std::vector<std::string> key_parts;
        for (std::size_t c = 0; c < group_cols; ++c)
            key_parts.push_back(join_path(t.column_headers[c]));
        out.column_headers.push_back({join_with(key_parts, kGroupSep)});
    }
    for (std::size_t c = group_cols; c < t.column_count(); ++c)
        out.column_headers.push_back({join_path(t.column_headers[c])});

    std::vector<std::string> fill(group_cols);
    for (const auto& row : t.rows) {
        std::vector<Cell> cells;
        if (group_cols > 0) {
            std::vector<std::string> parts;
            for (std::size_t c = 0; c < group_cols; ++c) {
                if (!row[c].raw.empty()) fill[c] = row[c].raw;  // forward-fill the row span
                parts.push_back(fill[c]);
            }
            cells.push_back(Cell{join_with(parts, kGroupSep)});
        }
        for (std::size_t c = group_cols; c < t.column_count(); ++c) cells.push_back(row[c]);
        out.rows.push_back(std::move(cells));
    }

    std::set<std::string> seen;
    for (std::size_t c = 0; c < out.column_count(); ++c) {
        if (!seen.insert(out.header_text(c)).second)
            throw AmbiguousHierarchy("flattened header collision: " + out.header_text(c));
    }
    return out;
}

// ---- transpose --------------------------------------------------------------------

Table transpose(const Table& t) {
    if (!t.is_flat()) throw Error("transpose requires a flat table");
    t.validate();
    // work on the full grid: header row followed by data rows
    std::size_t grid_rows = t.row_count() + 1;
    std::size_t grid_cols = t.column_count();
    auto at = [&](std::size_t i, std::size_t j) -> const std::string& {
        return i == 0 ? t.column_headers[j][0] : t.rows[i - 1][j].raw;
    };
    Table out;
    out.source_id = t.source_id;
    for (std::size_t i = 0; i < grid_rows; ++i) out.column_headers.push_back({at(i, 0)});
    for (std::size_t j = 1; j < grid_cols; ++j) {
        std::vector<Cell> row;
        for (std::size_t i = 0; i < grid_rows; ++i) row.push_back(Cell{at(i, j)});
        out.rows.push_back(std::move(row));
    }
    return out;
}

// ---- serialization ------------------------------------------------------------------

std::string canonical_serialize(const Table& t) {
    json doc;
    json headers = json::array();
    for (const auto& h : t.column_headers) headers.push_back(h);
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::array();
        for (const auto& c : row) r.push_back(c.raw);
        rows.push_back(std::move(r));
    }
    doc["headers"] = std::move(headers);
    doc["rows"] = std::move(rows);
    return doc.dump();  // nlohmann objects iterate in sorted key order
}

std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t c = 0; c < t.column_count(); ++c) {
        if (c) out.push_back(',');
        out += csv_quote(t.header_text(c));
    }
    out.push_back('\n');
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out.push_back(',');
            out += csv_quote(row[c].raw);
        }
        out.push_back('\n');
    }
    return out;
}

std::string to_markdown(const Table& t) {
    std::string out = "|";
    for (std::size_t c = 0; c < t.column_count(); ++c) out += " " + md_escape(t.header_text(c)) + " |";
    out += "\n|";
    for (std::size_t c = 0; c < t.column_count(); ++c) out += " --- |";
    out.push_back('\n');
    for (const auto& row : t.rows) {
        out.push_back('|');
        for (const auto& cell : row) {
            std::string body = md_escape(cell.raw);
            out += " " + (body.empty() ? std::string(" ") : body) + " |";
        }
        out.push_back('\n');
    }
    return out;
}

std::string serialize(const Table& t, TableFormat format) {
    switch (format) {
        case TableFormat::Csv:
            return to_csv(t);
        case TableFormat::MarkdownPipe:
            return to_markdown(t);
        case TableFormat::JsonCanonical:
            return canonical_serialize(t);
    }
    throw Error("unknown format");
}

std::optional<TableFormat> format_from_extension(std::string_view path) {
    auto dot = path.rfind('.');
    if (dot == std::string_view::npos) return std::nullopt;
    std::string ext = util::to_lower(path.substr(dot + 1));
    if (ext == "csv") return TableFormat::Csv;
    if (ext == "md" || ext == "markdown") return TableFormat::MarkdownPipe;
    if (ext == "json") return TableFormat::JsonCanonical;
    return std::nullopt;
}

}  // namespace tabx::model
