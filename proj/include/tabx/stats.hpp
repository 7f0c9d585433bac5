#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tabx::stats {

// Paired-score correlations. Inputs must be equal length and hold at least
// two items; pearson and spearman additionally need nonzero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

// Tau-a: (concordant - discordant) / (n(n-1)/2). Ties contribute zero.
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

// Top-weighted variants operate on rankings: ordered id lists that must be
// permutations of each other.

// Pair (i, j) weighted by 1/(i+1) + 1/(j+1), positions taken in ranking a.
double weighted_kendall(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Rank-biased overlap with persistence p in (0,1), extrapolated over the full
// lists. Identical rankings give 1.
double rbo(const std::vector<std::string>& a, const std::vector<std::string>& b, double p = 0.9);

// Spearman footrule distance normalized to [0,1]; 0 for identical rankings,
// 1 for a full reversal.
double spearman_footrule(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct DetectionCounts {
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_negative = 0;
};

// Ratios with an empty denominator come back unset rather than made up.
struct DetectionMetrics {
    double accuracy = 0.0;
    std::optional<double> sensitivity, specificity, precision, f1;
    // Harmonic mean of accuracy, sensitivity, and specificity; unset when
    // either ratio is, zero when any of the three is zero.
    std::optional<double> harmonic3;
};

DetectionMetrics detection_metrics(const DetectionCounts& counts);

// Deterministic ranking from id/score pairs: sorted by score in the requested
// direction, score ties broken by id.
std::vector<std::string> scores_to_ranking(const std::vector<std::pair<std::string, double>>& scores,
                                           bool higher_is_better);

// Ranks with ties averaged, 1-based.
std::vector<double> average_ranks(const std::vector<double>& x);

}  // namespace tabx::stats
