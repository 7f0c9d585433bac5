#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabx::model {

// Header path separator and row-group join used by flatten_hierarchical.
inline constexpr const char* kPathSep = "∧";   // ∧
inline constexpr const char* kGroupSep = "∨";  // ∨

struct Cell {
    std::string raw;  // text as parsed, surrounding whitespace trimmed

    bool operator==(const Cell&) const = default;
};

// A header is a path of segments; flat tables have single-segment paths.
using HeaderPath = std::vector<std::string>;

enum class Orientation { AsGiven, TransposedCandidate };

enum class TableFormat { Csv, MarkdownPipe, JsonCanonical };

class Table {
public:
    std::vector<HeaderPath> column_headers;
    std::vector<std::vector<Cell>> rows;
    std::optional<std::string> source_id;
    Orientation orientation_hint = Orientation::AsGiven;

    std::size_t column_count() const { return column_headers.size(); }
    std::size_t row_count() const { return rows.size(); }
    std::size_t cell_count() const { return row_count() * column_count(); }
    bool is_flat() const;

    const std::string& cell(std::size_t r, std::size_t c) const { return rows[r][c].raw; }

    // Flattened text of one header path (segments joined with the reserved
    // separator, literals escaped).
    std::string header_text(std::size_t col) const;

    // Rows/columns plus header paths; provenance fields are metadata and do
    // not participate in equality.
    bool operator==(const Table& other) const {
        return column_headers == other.column_headers && rows == other.rows;
    }

    // Throws Error when a structural invariant is broken (ragged row, empty
    // header set, duplicate flattened header).
    void validate() const;
};

std::string join_path(const HeaderPath& path);
std::string escape_separators(std::string_view segment);

Table parse_table(std::string_view input, TableFormat format);

// Unrolls multi-segment header paths into flat headers and joins row-group
// label prefixes (a leading column with blank continuation cells plus its
// discriminator column) into one key column.
Table flatten_hierarchical(const Table& t);

// Grid transpose including the header row: out[j][i] = grid[i][j].
Table transpose(const Table& t);

// Deterministic canonical form (JSON, sorted keys, no insignificant
// whitespace). Equal tables serialize byte-identically and the result parses
// back to an equal table.
std::string canonical_serialize(const Table& t);

std::string to_csv(const Table& t);
std::string to_markdown(const Table& t);
std::string serialize(const Table& t, TableFormat format);

std::optional<TableFormat> format_from_extension(std::string_view path);

}  // namespace tabx::model
