#include "tabx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "tabx/errors.hpp"

namespace tabx::stats {

namespace {

void check_paired(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InconsistentInputs("paired vectors differ in length");
    if (x.size() < 2) throw TooFewItems("need at least two items");
}

// Maps ids to their positions in each ranking after validating that the two
// rankings are duplicate-free permutations of the same set.
std::pair<std::map<std::string, std::size_t>, std::map<std::string, std::size_t>> ranking_positions(
    const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.size() != b.size()) throw InconsistentInputs("rankings differ in length");
    std::map<std::string, std::size_t> pa, pb;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!pa.emplace(a[i], i).second) throw InconsistentInputs("duplicate id in ranking");
    for (std::size_t i = 0; i < b.size(); ++i)
        if (!pb.emplace(b[i], i).second) throw InconsistentInputs("duplicate id in ranking");
    for (const auto& [id, _] : pa)
        if (!pb.count(id)) throw InconsistentInputs("rankings cover different id sets");
    return {std::move(pa), std::move(pb)};
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& x) {
    std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    check_paired(x, y);
    std::size_t n = x.size();
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    check_paired(x, y);
    return pearson(average_ranks(x), average_ranks(y));
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
    check_paired(x, y);
    std::size_t n = x.size();
    long long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = x[i] - x[j], dy = y[i] - y[j];
            double prod = dx * dy;
            if (prod > 0) ++concordant;
            else if (prod < 0) ++discordant;
        }
    }
    double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    return static_cast<double>(concordant - discordant) / pairs;
}

double weighted_kendall(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.size() < 2) throw TooFewItems("need at least two items");
    auto [pa, pb] = ranking_positions(a, b);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            double w = 1.0 / static_cast<double>(i + 1) + 1.0 / static_cast<double>(j + 1);
            long long db = static_cast<long long>(pb[a[i]]) - static_cast<long long>(pb[a[j]]);
            num += db < 0 ? w : -w;  // a places a[i] before a[j]
            den += w;
        }
    }
    return num / den;
}

double rbo(const std::vector<std::string>& a, const std::vector<std::string>& b, double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidP("persistence must lie strictly between 0 and 1");
    if (a.empty()) throw TooFewItems("empty ranking");
    auto [pa, pb] = ranking_positions(a, b);
    (void)pa;
    std::size_t n = a.size();
    std::set<std::string> seen_a, seen_b;
    std::size_t overlap = 0;
    double sum = 0.0;
    double pd = 1.0;  // p^(d-1)
    for (std::size_t d = 1; d <= n; ++d) {
        const std::string& xa = a[d - 1];
        const std::string& xb = b[d - 1];
        if (xa == xb) {
            ++overlap;
        } else {
            if (seen_b.count(xa)) ++overlap;
            if (seen_a.count(xb)) ++overlap;
        }
        seen_a.insert(xa);
        seen_b.insert(xb);
        sum += pd * static_cast<double>(overlap) / static_cast<double>(d);
        if (d < n) pd *= p;
    }
    double pn = pd * p;  // p^n
    double xn_over_n = static_cast<double>(overlap) / static_cast<double>(n);
    return (1.0 - p) * sum + pn * xn_over_n;
}

double spearman_footrule(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.size() < 2) throw TooFewItems("need at least two items");
    auto [pa, pb] = ranking_positions(a, b);
    std::size_t n = a.size();
    double dist = 0.0;
    for (const auto& [id, pos] : pa)
        dist += std::fabs(static_cast<double>(pos) - static_cast<double>(pb[id]));
    double divisor = n % 2 == 0 ? static_cast<double>(n) * n / 2.0 : (static_cast<double>(n) * n - 1.0) / 2.0;
    return dist / divisor;
}

DetectionMetrics detection_metrics(const DetectionCounts& c) {
    std::size_t total = c.true_positive + c.false_positive + c.true_negative + c.false_negative;
    if (total == 0) throw DegenerateInput("no observations");
    DetectionMetrics m;
    m.accuracy = static_cast<double>(c.true_positive + c.true_negative) / static_cast<double>(total);
    if (c.true_positive + c.false_negative > 0)
        m.sensitivity =
            static_cast<double>(c.true_positive) / static_cast<double>(c.true_positive + c.false_negative);
    if (c.true_negative + c.false_positive > 0)
        m.specificity =
            static_cast<double>(c.true_negative) / static_cast<double>(c.true_negative + c.false_positive);
    if (c.true_positive + c.false_positive > 0)
        m.precision = static_cast<double>(c.true_positive) / static_cast<double>(c.true_positive + c.false_positive);
    std::size_t f1_den = 2 * c.true_positive + c.false_positive + c.false_negative;
    if (f1_den > 0) m.f1 = 2.0 * static_cast<double>(c.true_positive) / static_cast<double>(f1_den);
    if (m.sensitivity && m.specificity) {
        if (m.accuracy == 0.0 || *m.sensitivity == 0.0 || *m.specificity == 0.0)
            m.harmonic3 = 0.0;
        else
            m.harmonic3 = 3.0 / (1.0 / m.accuracy + 1.0 / *m.sensitivity + 1.0 / *m.specificity);
    }
    return m;
}

std::vector<std::string> scores_to_ranking(const std::vector<std::pair<std::string, double>>& scores,
                                           bool higher_is_better) {
    std::set<std::string> ids;
    for (const auto& [id, _] : scores)
        if (!ids.insert(id).second) throw InconsistentInputs("duplicate id in scores");
    std::vector<std::pair<std::string, double>> sorted = scores;
    std::stable_sort(sorted.begin(), sorted.end(), [&](const auto& x, const auto& y) {
        if (x.second != y.second) return higher_is_better ? x.second > y.second : x.second < y.second;
        return x.first < y.first;
    });
    std::vector<std::string> out;
    out.reserve(sorted.size());
    for (const auto& [id, _] : sorted) out.push_back(id);
    return out;
}

}  // namespace tabx::stats
