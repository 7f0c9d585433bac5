#include "tabx/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "tabx/util.hpp"

namespace tabx::baselines {

namespace {

std::string strip_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

std::map<std::string, std::size_t> ngram_counts(const std::string& s, std::size_t n) {
    std::map<std::string, std::size_t> counts;
    if (s.size() >= n)
        for (std::size_t i = 0; i + n <= s.size(); ++i) counts[s.substr(i, n)]++;
    return counts;
}

std::vector<std::string> alnum_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::size_t token_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) cur[j] = prev[j - 1] + 1;
            else cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
        std::fill(cur.begin(), cur.end(), 0);
    }
    return prev[b.size()];
}

}  // namespace

double exact_match(const Table& gt, const Table& cand) {
    std::size_t rows = std::max(gt.row_count(), cand.row_count());
    std::size_t cols = std::max(gt.column_count(), cand.column_count());
    if (rows == 0 || cols == 0) return 1.0;
    std::size_t equal = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            bool in_gt = r < gt.row_count() && c < gt.column_count();
            bool in_cand = r < cand.row_count() && c < cand.column_count();
            if (in_gt && in_cand && gt.cell(r, c) == cand.cell(r, c)) ++equal;
        }
    }
    return static_cast<double>(equal) / static_cast<double>(rows * cols);
}

double chrf(const std::string& reference, const std::string& hypothesis) {
    constexpr std::size_t kMaxOrder = 6;
    constexpr double kBeta = 2.0;
    std::string ref = strip_whitespace(reference);
    std::string hyp = strip_whitespace(hypothesis);

    double f_sum = 0.0;
    std::size_t orders = 0;
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
        auto rc = ngram_counts(ref, n);
        auto hc = ngram_counts(hyp, n);
        std::size_t ref_total = 0, hyp_total = 0, matches = 0;
        for (const auto& [g, c] : rc) ref_total += c;
        for (const auto& [g, c] : hc) {
            hyp_total += c;
            auto it = rc.find(g);
            if (it != rc.end()) matches += std::min(c, it->second);
        }
        if (ref_total == 0 && hyp_total == 0) continue;
        ++orders;
        double precision = hyp_total == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(hyp_total);
        double recall = ref_total == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(ref_total);
        double denom = kBeta * kBeta * precision + recall;
        double f = denom == 0.0 ? 0.0 : (1.0 + kBeta * kBeta) * precision * recall / denom;
        f_sum += f;
    }
    if (orders == 0) return 1.0;  // two empty strings
    return f_sum / static_cast<double>(orders);
}

double rouge_l(const std::string& reference, const std::string& hypothesis) {
    auto ref = alnum_tokens(reference);
    auto hyp = alnum_tokens(hypothesis);
    if (ref.empty() && hyp.empty()) return 1.0;
    if (ref.empty() || hyp.empty()) return 0.0;
    std::size_t lcs = token_lcs(ref, hyp);
    double precision = static_cast<double>(lcs) / static_cast<double>(hyp.size());
    double recall = static_cast<double>(lcs) / static_cast<double>(ref.size());
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

std::string table_text(const Table& t) {
    std::string out;
    for (std::size_t c = 0; c < t.column_count(); ++c) {
        if (c > 0) out += " | ";
        out += t.header_text(c);
    }
    out += "\n";
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        for (std::size_t c = 0; c < t.column_count(); ++c) {
            if (c > 0) out += " | ";
            out += t.cell(r, c);
        }
        out += "\n";
    }
    return out;
}

double chrf_tables(const Table& gt, const Table& cand) { return chrf(table_text(gt), table_text(cand)); }

double rouge_l_tables(const Table& gt, const Table& cand) { return rouge_l(table_text(gt), table_text(cand)); }

}  // namespace tabx::baselines
