#pragma once

#include <cstddef>
#include <vector>

#include "tabx/table.hpp"

namespace tabx::llm {
class LlmClient;
}

namespace tabx::align {

using model::Table;

enum class MatchStrictness { Strict, Relaxed };

std::string strictness_name(MatchStrictness s);

struct MatchPair {
    std::size_t gt = 0;
    std::size_t cand = 0;
    MatchStrictness strictness = MatchStrictness::Strict;
    double score = 1.0;
};

struct Alignment {
    std::vector<MatchPair> column_pairs;
    std::vector<MatchPair> row_pairs;
    bool transposed = false;

    std::vector<std::size_t> unmatched_gt_rows, unmatched_cand_rows;
    std::vector<std::size_t> unmatched_gt_cols, unmatched_cand_cols;

    const MatchPair* column_for_gt(std::size_t gt_col) const;
    const MatchPair* row_for_gt(std::size_t gt_row) const;
};

struct AlignOptions {
    // A row pair needs strictly more than this fraction of equal cells over
    // the already-paired columns to match in the exact phase.
    double row_match_threshold = 0.5;
    // Similarity-phase acceptance threshold on the blended score.
    double tau_relax = 0.5;
};

// Phase 1a: exact header equality for columns, then rows by majority cell
// equality over the paired columns. All pairs strict.
Alignment exact_align(const Table& gt, const Table& cand, const AlignOptions& opts = {});

// Phase 1b: similarity matching of the leftovers via maximum-weight
// assignment; pairs scoring at least tau_relax join as relaxed. Existing
// pairs are never removed or relabeled.
Alignment similarity_align(const Table& gt, const Table& cand, Alignment base, const AlignOptions& opts = {});

// True when aligning against the transposed candidate pairs strictly more
// cells than the as-given orientation.
bool detect_transpose(const Table& gt, const Table& cand, const AlignOptions& opts = {});

// Optional refinement: proposes extra pairs for the leftovers; proposals are
// validated and added as relaxed. Provider failures fall back to the base
// alignment unless strict is set.
Alignment refine_with_llm(const Table& gt, const Table& cand, Alignment base, llm::LlmClient& client,
                          bool strict = false);

// Rebuilds the unmatched index lists and sorts pairs by ground-truth index.
void finalize_alignment(Alignment& a, std::size_t gt_rows, std::size_t cand_rows, std::size_t gt_cols,
                        std::size_t cand_cols);

// Throws InconsistentAlignment on out-of-range indices, duplicate endpoints,
// or strict column pairs whose normalized headers differ.
void validate_alignment(const Alignment& a, const Table& gt, const Table& cand);

// Maximum-weight one-to-one assignment on a rectangular score matrix.
// Returns, per row, the matched column or -1. Ties resolve toward lower
// indices. Total matched weight is written to *total when non-null.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& score, double* total = nullptr);

// Blended column similarity and mean-cell row similarity, exposed for tests.
double cell_similarity(const std::string& a, const std::string& b);

}  // namespace tabx::align
