#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fabisearch {

enum class TestType { welch_t, wilcoxon, ks };

std::string_view to_string(TestType t) noexcept;
/// Accepts "welch_t", "t-test", "wilcoxon", "wilcox", "ks".
TestType parse_test_type(std::string_view name);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;  // lower-tail: H1 mean(x) < mean(y)
};

/// One-sided Welch two-sample t-test of H1: mean(x) < mean(y).
/// If both samples have zero variance, p is 0 when mean(x) < mean(y) and 1 otherwise.
WelchResult welch_t_test(std::span<const double> x, std::span<const double> y);

struct RankSumResult {
    double w = 0.0;  // Mann-Whitney statistic: rank sum of x minus n_x (n_x + 1) / 2
    double p = 1.0;  // H1: x is shifted below y
    bool exact = false;
};

/// Two-sample Wilcoxon rank-sum test (Mann-Whitney U) against the alternative
/// that x is shifted below y. Uses the exact permutation distribution of the
/// mid-rank sum when both samples are smaller than 20, otherwise the normal
/// approximation with tie and continuity correction.
RankSumResult rank_sum_test(std::span<const double> x, std::span<const double> y);

struct KsResult {
    double d_plus = 0.0;  // max_t (F_x(t) - F_y(t))
    double p = 1.0;
    bool exact = false;
};

/// One-sided two-sample Kolmogorov-Smirnov test; H1: the CDF of x lies above
/// the CDF of y. The exact permutation p-value (tie-aware lattice-path count)
/// is used unless n_x * n_y is very large.
KsResult ks_test_greater(std::span<const double> x, std::span<const double> y);

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> bh_adjust(std::span<const double> pvalues);

/// Lower-tail CDF of Student's t with (possibly fractional) df.
double student_t_cdf(double t, double df);

}  // namespace fabisearch
