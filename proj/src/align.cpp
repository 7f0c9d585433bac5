#include "tabx/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tabx/errors.hpp"
#include "tabx/util.hpp"
#include "tabx/value.hpp"

namespace tabx::align {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Parenthetical annotations like "(min)" are unit metadata; they stay out of
// header similarity so a rescaled column still matches its origin.
double header_similarity(const std::string& a, const std::string& b) {
    std::string na = util::normalize_text(compare::strip_header_annotation(a));
    std::string nb = util::normalize_text(compare::strip_header_annotation(b));
    if (na == nb) return 1.0;
    return std::max(util::token_jaccard(na, nb), util::lcs_ratio(na, nb));
}

// Prefer lower indices among equal-weight assignments so results are stable
// across solver implementations.
void canonicalize_assignment(const std::vector<std::vector<double>>& score, std::vector<int>& match) {
    std::size_t n = match.size();
    if (n == 0) return;
    std::size_t m = score.empty() ? 0 : score[0].size();
    std::vector<bool> used(m, false);
    for (int j : match)
        if (j >= 0) used[static_cast<std::size_t>(j)] = true;
    bool changed = true;
    std::size_t guard = 0;
    while (changed && guard++ <= n * n + 4) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (match[i] < 0) continue;
            for (std::size_t j = 0; j < static_cast<std::size_t>(match[i]); ++j) {
                if (used[j]) continue;
                if (score[i][j] == score[i][static_cast<std::size_t>(match[i])]) {
                    used[static_cast<std::size_t>(match[i])] = false;
                    used[j] = true;
                    match[i] = static_cast<int>(j);
                    changed = true;
                    break;
                }
            }
        }
        for (std::size_t a = 0; a < n; ++a) {
            if (match[a] < 0) continue;
            for (std::size_t b = a + 1; b < n; ++b) {
                if (match[b] < 0) continue;
                std::size_t ja = static_cast<std::size_t>(match[a]);
                std::size_t jb = static_cast<std::size_t>(match[b]);
                if (jb < ja && score[a][jb] + score[b][ja] == score[a][ja] + score[b][jb]) {
                    std::swap(match[a], match[b]);
                    changed = true;
                }
            }
        }
    }
}

std::vector<std::string> normalized_column(const Table& t, std::size_t col) {
    std::vector<std::string> out;
    out.reserve(t.row_count());
    for (std::size_t r = 0; r < t.row_count(); ++r) out.push_back(util::normalize_text(t.cell(r, col)));
    return out;
}

// Content similarity of two columns: mean cell similarity over already-paired
// rows when any exist, otherwise a sorted positional comparison.
double column_content_similarity(const Table& gt, std::size_t gcol, const Table& cand, std::size_t ccol,
                                 const std::vector<MatchPair>& row_pairs) {
    if (!row_pairs.empty()) {
        double sum = 0.0;
        for (const auto& rp : row_pairs) sum += cell_similarity(gt.cell(rp.gt, gcol), cand.cell(rp.cand, ccol));
        return sum / static_cast<double>(row_pairs.size());
    }
    auto a = normalized_column(gt, gcol);
    auto b = normalized_column(cand, ccol);
    if (a.empty() && b.empty()) return 1.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t lo = std::min(a.size(), b.size());
    std::size_t hi = std::max(a.size(), b.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < lo; ++k) sum += util::lcs_ratio(a[k], b[k]);
    return sum / static_cast<double>(hi);
}

}  // namespace

std::string strictness_name(MatchStrictness s) { return s == MatchStrictness::Strict ? "strict" : "relaxed"; }

const MatchPair* Alignment::column_for_gt(std::size_t gt_col) const {
    for (const auto& p : column_pairs)
        if (p.gt == gt_col) return &p;
    return nullptr;
}

const MatchPair* Alignment::row_for_gt(std::size_t gt_row) const {
    for (const auto& p : row_pairs)
        if (p.gt == gt_row) return &p;
    return nullptr;
}

double cell_similarity(const std::string& a, const std::string& b) {
    return util::lcs_ratio(util::normalize_text(a), util::normalize_text(b));
}

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& score, double* total) {
    std::size_t n = score.size();
    std::size_t m = n == 0 ? 0 : score[0].size();
    for (const auto& row : score)
        if (row.size() != m) throw InconsistentInputs("similarity matrix is ragged");
    if (n == 0 || m == 0) {
        if (total) *total = 0.0;
        return std::vector<int>(n, -1);
    }

    // Hungarian algorithm with potentials on the square padded cost matrix;
    // costs are negated scores, pads cost zero.
    std::size_t N = std::max(n, m);
    auto cost = [&](std::size_t i, std::size_t j) -> double {
        return (i < n && j < m) ? -score[i][j] : 0.0;
    };
    std::vector<double> u(N + 1, 0.0), v(N + 1, 0.0);
    std::vector<std::size_t> p(N + 1, 0), way(N + 1, 0);
    for (std::size_t i = 1; i <= N; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(N + 1, kInf);
        std::vector<bool> used(N + 1, false);
        do {
            used[j0] = true;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = kInf;
            for (std::size_t j = 1; j <= N; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= N; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> match(n, -1);
    for (std::size_t j = 1; j <= N; ++j) {
        std::size_t i = p[j];
        if (i >= 1 && i <= n && j <= m) match[i - 1] = static_cast<int>(j - 1);
    }
    canonicalize_assignment(score, match);
    if (total) {
        double tot = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (match[i] >= 0) tot += score[i][static_cast<std::size_t>(match[i])];
        *total = tot;
    }
    return match;
}

void finalize_alignment(Alignment& a, std::size_t gt_rows, std::size_t cand_rows, std::size_t gt_cols,
                        std::size_t cand_cols) {
    auto by_gt = [](const MatchPair& x, const MatchPair& y) { return x.gt < y.gt; };
    std::sort(a.column_pairs.begin(), a.column_pairs.end(), by_gt);
    std::sort(a.row_pairs.begin(), a.row_pairs.end(), by_gt);

    auto unmatched = [](const std::vector<MatchPair>& pairs, std::size_t count, bool gt_side) {
        std::set<std::size_t> taken;
        for (const auto& p : pairs) taken.insert(gt_side ? p.gt : p.cand);
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < count; ++i)
            if (!taken.count(i)) out.push_back(i);
        return out;
    };
    a.unmatched_gt_rows = unmatched(a.row_pairs, gt_rows, true);
    a.unmatched_cand_rows = unmatched(a.row_pairs, cand_rows, false);
    a.unmatched_gt_cols = unmatched(a.column_pairs, gt_cols, true);
    a.unmatched_cand_cols = unmatched(a.column_pairs, cand_cols, false);
}

void validate_alignment(const Alignment& a, const Table& gt, const Table& cand) {
    auto check = [](const std::vector<MatchPair>& pairs, std::size_t gt_n, std::size_t cand_n, const char* what) {
        std::set<std::size_t> gs, cs;
        for (const auto& p : pairs) {
            if (p.gt >= gt_n || p.cand >= cand_n)
                throw InconsistentAlignment(std::string(what) + " pair index out of range");
            if (!gs.insert(p.gt).second || !cs.insert(p.cand).second)
                throw InconsistentAlignment(std::string(what) + " pairs are not one-to-one");
        }
    };
    check(a.column_pairs, gt.column_count(), cand.column_count(), "column");
    check(a.row_pairs, gt.row_count(), cand.row_count(), "row");
    for (const auto& p : a.column_pairs) {
        if (p.strictness == MatchStrictness::Strict &&
            util::normalize_text(gt.header_text(p.gt)) != util::normalize_text(cand.header_text(p.cand)))
            throw InconsistentAlignment("strict column pair with differing headers");
    }
}

Alignment exact_align(const Table& gt, const Table& cand, const AlignOptions& opts) {
    Alignment a;

    std::vector<std::string> gh(gt.column_count()), ch(cand.column_count());
    for (std::size_t c = 0; c < gt.column_count(); ++c) gh[c] = util::normalize_text(gt.header_text(c));
    for (std::size_t c = 0; c < cand.column_count(); ++c) ch[c] = util::normalize_text(cand.header_text(c));

    std::vector<bool> cand_used(cand.column_count(), false);
    for (std::size_t c = 0; c < gt.column_count(); ++c) {
        for (std::size_t cc = 0; cc < cand.column_count(); ++cc) {
            if (cand_used[cc] || ch[cc] != gh[c]) continue;
            a.column_pairs.push_back(MatchPair{c, cc, MatchStrictness::Strict, 1.0});
            cand_used[cc] = true;
            break;
        }
    }

    if (!a.column_pairs.empty() && gt.row_count() > 0 && cand.row_count() > 0) {
        const auto& paired = a.column_pairs;
        std::vector<std::vector<std::string>> gn(gt.row_count()), cn(cand.row_count());
        for (std::size_t r = 0; r < gt.row_count(); ++r)
            for (const auto& cp : paired) gn[r].push_back(util::normalize_text(gt.cell(r, cp.gt)));
        for (std::size_t r = 0; r < cand.row_count(); ++r)
            for (const auto& cp : paired) cn[r].push_back(util::normalize_text(cand.cell(r, cp.cand)));

        struct RowMatch {
            std::size_t count, g, r;
        };
        std::vector<RowMatch> matches;
        for (std::size_t g = 0; g < gt.row_count(); ++g) {
            for (std::size_t r = 0; r < cand.row_count(); ++r) {
                std::size_t cnt = 0;
                for (std::size_t k = 0; k < paired.size(); ++k)
                    if (gn[g][k] == cn[r][k]) ++cnt;
                double frac = static_cast<double>(cnt) / static_cast<double>(paired.size());
                if (frac > opts.row_match_threshold) matches.push_back(RowMatch{cnt, g, r});
            }
        }
        std::sort(matches.begin(), matches.end(), [](const RowMatch& x, const RowMatch& y) {
            if (x.count != y.count) return x.count > y.count;
            if (x.g != y.g) return x.g < y.g;
            return x.r < y.r;
        });
        std::set<std::size_t> g_used, r_used;
        for (const auto& m : matches) {
            if (g_used.count(m.g) || r_used.count(m.r)) continue;
            g_used.insert(m.g);
            r_used.insert(m.r);
            double score = static_cast<double>(m.count) / static_cast<double>(paired.size());
            a.row_pairs.push_back(MatchPair{m.g, m.r, MatchStrictness::Strict, score});
        }
    }

    finalize_alignment(a, gt.row_count(), cand.row_count(), gt.column_count(), cand.column_count());
    return a;
}

Alignment similarity_align(const Table& gt, const Table& cand, Alignment base, const AlignOptions& opts) {
    Alignment a = std::move(base);
    finalize_alignment(a, gt.row_count(), cand.row_count(), gt.column_count(), cand.column_count());

    const auto& ug = a.unmatched_gt_cols;
    const auto& uc = a.unmatched_cand_cols;
    if (!ug.empty() && !uc.empty()) {
        std::vector<std::vector<double>> score(ug.size(), std::vector<double>(uc.size(), 0.0));
        for (std::size_t i = 0; i < ug.size(); ++i) {
            for (std::size_t j = 0; j < uc.size(); ++j) {
                double h = header_similarity(gt.header_text(ug[i]), cand.header_text(uc[j]));
                double content = column_content_similarity(gt, ug[i], cand, uc[j], a.row_pairs);
                score[i][j] = 0.5 * h + 0.5 * content;
            }
        }
        auto match = max_weight_assignment(score);
        for (std::size_t i = 0; i < ug.size(); ++i) {
            int j = match[i];
            if (j < 0) continue;
            double s = score[i][static_cast<std::size_t>(j)];
            if (s >= opts.tau_relax)
                a.column_pairs.push_back(MatchPair{ug[i], uc[static_cast<std::size_t>(j)], MatchStrictness::Relaxed, s});
        }
        finalize_alignment(a, gt.row_count(), cand.row_count(), gt.column_count(), cand.column_count());
    }

    const auto ugr = a.unmatched_gt_rows;
    const auto ucr = a.unmatched_cand_rows;
    if (!ugr.empty() && !ucr.empty() && !a.column_pairs.empty()) {
        std::vector<std::vector<double>> score(ugr.size(), std::vector<double>(ucr.size(), 0.0));
        for (std::size_t i = 0; i < ugr.size(); ++i) {
            for (std::size_t j = 0; j < ucr.size(); ++j) {
                double sum = 0.0;
                for (const auto& cp : a.column_pairs)
                    sum += cell_similarity(gt.cell(ugr[i], cp.gt), cand.cell(ucr[j], cp.cand));
                score[i][j] = sum / static_cast<double>(a.column_pairs.size());
            }
        }
        auto match = max_weight_assignment(score);
        for (std::size_t i = 0; i < ugr.size(); ++i) {
            int j = match[i];
            if (j < 0) continue;
            double s = score[i][static_cast<std::size_t>(j)];
            if (s >= opts.tau_relax)
                a.row_pairs.push_back(MatchPair{ugr[i], ucr[static_cast<std::size_t>(j)], MatchStrictness::Relaxed, s});
        }
    }

    finalize_alignment(a, gt.row_count(), cand.row_count(), gt.column_count(), cand.column_count());
    return a;
}

bool detect_transpose(const Table& gt, const Table& cand, const AlignOptions& opts) {
    auto matched_cells = [&](const Table& c) {
        Alignment al = similarity_align(gt, c, exact_align(gt, c, opts), opts);
        return al.row_pairs.size() * al.column_pairs.size();
    };
    std::size_t as_given = matched_cells(cand);
    std::size_t flipped = matched_cells(model::transpose(cand));
    return flipped > as_given;
}

}  // namespace tabx::align
