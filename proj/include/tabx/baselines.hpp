#pragma once

#include <string>

#include "tabx/table.hpp"

namespace tabx::baselines {

using model::Table;

// Positional exact match over the cell grid (headers excluded): the fraction
// of positions, over the larger of the two shapes, whose raw text is
// byte-equal. 1 iff the grids are identical.
double exact_match(const Table& gt, const Table& cand);

// Character n-gram F-score (orders 1..6, beta = 2) on whitespace-stripped
// text. Orders with no n-grams on either side are skipped.
double chrf(const std::string& reference, const std::string& hypothesis);

// LCS-based F1 over alphanumeric tokens.
double rouge_l(const std::string& reference, const std::string& hypothesis);

// Deterministic linearization used by the text metrics: header line then one
// line per row, cells joined with " | ".
std::string table_text(const Table& t);

double chrf_tables(const Table& gt, const Table& cand);
double rouge_l_tables(const Table& gt, const Table& cand);

}  // namespace tabx::baselines
