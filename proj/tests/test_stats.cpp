#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "tabx/errors.hpp"
#include "tabx/stats.hpp"
#include "tabx/util.hpp"

using namespace tabx;
using namespace tabx::stats;

namespace {

// ---- independent reference implementations ------------------------------------

double ref_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
    }
    double cov = sxy - sx * sy / n;
    double vx = sxx - sx * sx / n;
    double vy = syy - sy * sy / n;
    return cov / std::sqrt(vx * vy);
}

std::vector<double> ref_ranks(const std::vector<double>& x) {
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double below = 0, equal = 0;
        for (double v : x) {
            if (v < x[i]) ++below;
            if (v == x[i]) ++equal;
        }
        ranks[i] = below + (equal + 1.0) / 2.0;  // average rank, 1-based
    }
    return ranks;
}

double ref_kendall(const std::vector<double>& x, const std::vector<double>& y) {
    long long c = 0, d = 0;
    std::size_t n = x.size();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < j; ++i) {
            double s = (x[i] - x[j]) * (y[i] - y[j]);
            if (s > 0) ++c;
            if (s < 0) ++d;
        }
    return 2.0 * static_cast<double>(c - d) / (static_cast<double>(n) * (n - 1));
}

std::size_t pos_of(const std::vector<std::string>& r, const std::string& id) {
    return static_cast<std::size_t>(std::find(r.begin(), r.end(), id) - r.begin());
}

double ref_weighted_kendall(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    double num = 0, den = 0;
    for (const auto& u : a)
        for (const auto& v : a) {
            if (u >= v) continue;  // each unordered id pair once
            double pu = static_cast<double>(pos_of(a, u)), pv = static_cast<double>(pos_of(a, v));
            double qu = static_cast<double>(pos_of(b, u)), qv = static_cast<double>(pos_of(b, v));
            double w = 1.0 / (pu + 1.0) + 1.0 / (pv + 1.0);
            num += ((pu - pv) * (qu - qv) > 0 ? 1.0 : -1.0) * w;
            den += w;
        }
    return num / den;
}

double ref_rbo(const std::vector<std::string>& a, const std::vector<std::string>& b, double p) {
    std::size_t n = a.size();
    double sum = 0;
    std::size_t xn = 0;
    for (std::size_t d = 1; d <= n; ++d) {
        std::set<std::string> pa(a.begin(), a.begin() + d), pb(b.begin(), b.begin() + d);
        std::size_t overlap = 0;
        for (const auto& id : pa)
            if (pb.count(id)) ++overlap;
        sum += std::pow(p, static_cast<double>(d - 1)) * static_cast<double>(overlap) / static_cast<double>(d);
        if (d == n) xn = overlap;
    }
    return (1.0 - p) * sum + std::pow(p, static_cast<double>(n)) * static_cast<double>(xn) / static_cast<double>(n);
}

double ref_footrule(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    double dist = 0;
    for (const auto& id : a)
        dist += std::fabs(static_cast<double>(pos_of(a, id)) - static_cast<double>(pos_of(b, id)));
    std::size_t n = a.size();
    double divisor = n % 2 == 0 ? n * n / 2.0 : (n * n - 1.0) / 2.0;
    return dist / divisor;
}

std::vector<std::string> ids_upto(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("id" + std::to_string(i));
    return out;
}

}  // namespace

TEST_CASE("pearson basics and errors") {
    CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
    CHECK(pearson({1, 2, 3}, {6, 4, 2}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), DegenerateInput);
    CHECK_THROWS_AS(pearson({1}, {2}), TooFewItems);
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), InconsistentInputs);
}

TEST_CASE("kendall and spearman endpoints") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> rev{4, 3, 2, 1};
    CHECK(kendall_tau(x, x) == doctest::Approx(1.0));
    CHECK(kendall_tau(x, rev) == doctest::Approx(-1.0));
    CHECK(spearman_rho(x, x) == doctest::Approx(1.0));
    CHECK(spearman_rho(x, rev) == doctest::Approx(-1.0));
}

TEST_CASE("score correlations match references on random data with ties") {
    util::Rng rng(311);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng.below(6);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<double>(rng.below(5));
            y[i] = static_cast<double>(rng.below(5));
        }
        CHECK(kendall_tau(x, y) == doctest::Approx(ref_kendall(x, y)).epsilon(1e-12));
        bool x_flat = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
        bool y_flat = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
        if (!x_flat && !y_flat) {
            CHECK(spearman_rho(x, y) == doctest::Approx(ref_pearson(ref_ranks(x), ref_ranks(y))).epsilon(1e-9));
            CHECK(pearson(x, y) == doctest::Approx(ref_pearson(x, y)).epsilon(1e-9));
        }
    }
}

TEST_CASE("ranking statistics match references on random permutations") {
    util::Rng rng(509);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng.below(6);
        auto a = ids_upto(n), b = ids_upto(n);
        rng.shuffle(a);
        rng.shuffle(b);
        CHECK(weighted_kendall(a, b) == doctest::Approx(ref_weighted_kendall(a, b)).epsilon(1e-12));
        CHECK(rbo(a, b, 0.9) == doctest::Approx(ref_rbo(a, b, 0.9)).epsilon(1e-12));
        CHECK(spearman_footrule(a, b) == doctest::Approx(ref_footrule(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("weighted kendall endpoints and asymmetry") {
    auto a = ids_upto(4);
    auto rev = a;
    std::reverse(rev.begin(), rev.end());
    CHECK(weighted_kendall(a, a) == doctest::Approx(1.0));
    CHECK(weighted_kendall(a, rev) == doctest::Approx(-1.0));

    // weights follow the first argument, so swapping arguments can move the value
    std::vector<std::string> b{"id0", "id1", "id2"};
    std::vector<std::string> c{"id1", "id2", "id0"};
    CHECK(weighted_kendall(b, c) == doctest::Approx(-6.0 / 11.0));
    CHECK(weighted_kendall(c, b) == doctest::Approx(-2.0 / 11.0));
}

TEST_CASE("rbo endpoints and errors") {
    auto a = ids_upto(5);
    CHECK(rbo(a, a, 0.9) == doctest::Approx(1.0));
    CHECK(rbo({"x"}, {"x"}, 0.5) == doctest::Approx(1.0));
    CHECK_THROWS_AS(rbo(a, a, 0.0), InvalidP);
    CHECK_THROWS_AS(rbo(a, a, 1.0), InvalidP);
    CHECK_THROWS_AS(rbo(a, a, -2.0), InvalidP);

    auto shifted = a;
    std::rotate(shifted.begin(), shifted.begin() + 1, shifted.end());
    double v = rbo(a, shifted, 0.9);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
}

TEST_CASE("footrule normalization endpoints") {
    auto a3 = ids_upto(3);
    auto r3 = a3;
    std::reverse(r3.begin(), r3.end());
    CHECK(spearman_footrule(a3, a3) == 0.0);
    CHECK(spearman_footrule(a3, r3) == doctest::Approx(1.0));  // raw 4 over (9-1)/2

    auto a4 = ids_upto(4);
    auto r4 = a4;
    std::reverse(r4.begin(), r4.end());
    CHECK(spearman_footrule(a4, r4) == doctest::Approx(1.0));  // raw 8 over 16/2
    CHECK_THROWS_AS(spearman_footrule({"x"}, {"x"}), TooFewItems);
}

TEST_CASE("one adjacent swap strictly degrades every statistic") {
    auto a = ids_upto(6);
    auto swapped = a;
    std::swap(swapped[2], swapped[3]);
    std::vector<double> sa{6, 5, 4, 3, 2, 1};
    std::vector<double> sb{6, 5, 3, 4, 2, 1};
    CHECK(kendall_tau(sa, sb) < 1.0);
    CHECK(spearman_rho(sa, sb) < 1.0);
    CHECK(rbo(a, swapped, 0.9) < 1.0);
    CHECK(spearman_footrule(a, swapped) > 0.0);
    CHECK(weighted_kendall(a, swapped) < 1.0);
}

TEST_CASE("rankings must be permutations of the same ids") {
    CHECK_THROWS_AS(weighted_kendall({"a", "b"}, {"a", "c"}), InconsistentInputs);
    CHECK_THROWS_AS(rbo({"a", "a"}, {"a", "a"}, 0.9), InconsistentInputs);
    CHECK_THROWS_AS(spearman_footrule({"a", "b"}, {"a"}), InconsistentInputs);
}

TEST_CASE("detection metrics") {
    DetectionCounts perfect{10, 0, 12, 0};
    auto m = detection_metrics(perfect);
    CHECK(m.accuracy == 1.0);
    CHECK(*m.sensitivity == 1.0);
    CHECK(*m.specificity == 1.0);
    CHECK(*m.f1 == 1.0);
    CHECK(*m.harmonic3 == 1.0);

    DetectionCounts mixed{8, 1, 9, 2};
    auto mm = detection_metrics(mixed);
    CHECK(*mm.sensitivity == doctest::Approx(0.8));
    CHECK(*mm.specificity == doctest::Approx(0.9));
    CHECK(mm.accuracy == doctest::Approx(0.85));
    CHECK(*mm.f1 == doctest::Approx(16.0 / 19.0));
    CHECK(*mm.harmonic3 == doctest::Approx(3.0 / (1.0 / 0.85 + 1.0 / 0.8 + 1.0 / 0.9)));

    DetectionCounts all_negative{0, 1, 9, 0};
    auto an = detection_metrics(all_negative);
    CHECK_FALSE(an.sensitivity);

    CHECK_THROWS_AS(detection_metrics(DetectionCounts{}), DegenerateInput);
}

TEST_CASE("scores_to_ranking orientation and tie-break") {
    std::vector<std::pair<std::string, double>> scores{{"b", 0.5}, {"a", 0.5}, {"c", 0.1}};
    auto lower = scores_to_ranking(scores, false);
    CHECK(lower == std::vector<std::string>{"c", "a", "b"});
    auto higher = scores_to_ranking(scores, true);
    CHECK(higher == std::vector<std::string>{"a", "b", "c"});
    CHECK_THROWS_AS(scores_to_ranking({{"a", 1.0}, {"a", 2.0}}, true), InconsistentInputs);
}
