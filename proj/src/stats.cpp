#include "fabisearch/stats.hpp"

#include "fabisearch/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fabisearch {

namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
};

Moments moments(std::span<const double> v) {
    Moments m;
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.variance = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
    return m;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void require_finite(std::span<const double> v, const char* name) {
    for (double x : v)
        if (!std::isfinite(x)) throw ParameterError(std::string(name) + " contains a non-finite value");
}

struct Pooled {
    double value;
    bool from_x;
};

std::vector<Pooled> pool_sorted(std::span<const double> x, std::span<const double> y) {
    std::vector<Pooled> all;
    all.reserve(x.size() + y.size());
    for (double v : x) all.push_back({v, true});
    for (double v : y) all.push_back({v, false});
    std::stable_sort(all.begin(), all.end(), [](const Pooled& a, const Pooled& b) { return a.value < b.value; });
    return all;
}

}  // namespace

std::string_view to_string(TestType t) noexcept {
    switch (t) {
        case TestType::welch_t: return "welch_t";
        case TestType::wilcoxon: return "wilcoxon";
        case TestType::ks: return "ks";
    }
    return "unknown";
}

TestType parse_test_type(std::string_view name) {
    if (name == "welch_t" || name == "t-test" || name == "welch") return TestType::welch_t;
    if (name == "wilcoxon" || name == "wilcox") return TestType::wilcoxon;
    if (name == "ks") return TestType::ks;
    throw ParameterError("unknown test type '" + std::string(name) + "' (expected welch_t, wilcoxon or ks)");
}

double student_t_cdf(double t, double df) {
    if (std::isnan(t) || !(df > 0.0)) throw ParameterError("student_t_cdf: invalid argument");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    if (std::isinf(df)) return normal_cdf(t);
    return boost::math::cdf(boost::math::students_t_distribution<double>(df), t);
}

WelchResult welch_t_test(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || y.size() < 2) throw ParameterError("Welch t-test needs at least 2 observations per sample");
    require_finite(x, "x");
    require_finite(y, "y");
    const Moments mx = moments(x);
    const Moments my = moments(y);
    const double vx = mx.variance / static_cast<double>(x.size());
    const double vy = my.variance / static_cast<double>(y.size());
    const double se2 = vx + vy;

    WelchResult r;
    if (se2 <= 0.0) {
        r.t = mx.mean < my.mean ? -INFINITY : (mx.mean > my.mean ? INFINITY : 0.0);
        r.df = static_cast<double>(x.size() + y.size() - 2);
        r.p = mx.mean < my.mean ? 0.0 : 1.0;
        return r;
    }
    r.t = (mx.mean - my.mean) / std::sqrt(se2);
    r.df = se2 * se2 /
           (vx * vx / static_cast<double>(x.size() - 1) + vy * vy / static_cast<double>(y.size() - 1));
    r.p = student_t_cdf(r.t, r.df);
    return r;
}

RankSumResult rank_sum_test(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw ParameterError("rank-sum test needs non-empty samples");
    require_finite(x, "x");
    require_finite(y, "y");
    const auto nx = static_cast<long>(x.size());
    const auto ny = static_cast<long>(y.size());
    const long n = nx + ny;
    const auto pooled = pool_sorted(x, y);

    // Doubled mid-ranks keep everything integral.
    std::vector<long> rank2(static_cast<std::size_t>(n));
    double tie_term = 0.0;
    for (long i = 0; i < n;) {
        long j = i;
        while (j + 1 < n && pooled[j + 1].value == pooled[i].value) ++j;
        const long doubled = (i + 1) + (j + 1);
        for (long k = i; k <= j; ++k) rank2[k] = doubled;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    long observed2 = 0;
    for (long k = 0; k < n; ++k)
        if (pooled[k].from_x) observed2 += rank2[k];

    RankSumResult r;
    r.w = observed2 / 2.0 - static_cast<double>(nx * (nx + 1)) / 2.0;

    if (nx < 20 && ny < 20) {
        r.exact = true;
        const long max_sum = std::accumulate(rank2.begin(), rank2.end(), 0L);
        // ways[k][s]: number of k-subsets of the pooled items with doubled rank sum s.
        std::vector<std::vector<double>> ways(static_cast<std::size_t>(nx + 1),
                                              std::vector<double>(static_cast<std::size_t>(max_sum + 1), 0.0));
        ways[0][0] = 1.0;
        for (long item = 0; item < n; ++item) {
            const long rv = rank2[item];
            for (long k = std::min(item + 1, nx); k >= 1; --k)
                for (long s = max_sum; s >= rv; --s) ways[k][s] += ways[k - 1][s - rv];
        }
        double total = 0.0;
        double tail = 0.0;
        for (long s = 0; s <= max_sum; ++s) {
            total += ways[nx][s];
            if (s <= observed2) tail += ways[nx][s];
        }
        r.p = std::clamp(tail / total, 0.0, 1.0);
        return r;
    }

    const double dnx = static_cast<double>(nx);
    const double dny = static_cast<double>(ny);
    const double dn = static_cast<double>(n);
    const double variance = dnx * dny / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (variance <= 0.0) {
        r.p = 1.0;
        return r;
    }
    const double z = (r.w - dnx * dny / 2.0 + 0.5) / std::sqrt(variance);
    r.p = std::clamp(normal_cdf(z), 0.0, 1.0);
    return r;
}

KsResult ks_test_greater(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw ParameterError("KS test needs non-empty samples");
    require_finite(x, "x");
    require_finite(y, "y");
    const auto nx = static_cast<long>(x.size());
    const auto ny = static_cast<long>(y.size());
    const long n = nx + ny;
    const auto pooled = pool_sorted(x, y);

    // Checkpoints are the ends of tie groups; the scaled statistic at a
    // lattice point (i, j) is i*ny - j*nx = nx*ny*(F_x - F_y).
    std::vector<char> checkpoint(static_cast<std::size_t>(n + 1), 0);
    long observed = 0;
    {
        long i = 0, j = 0;
        for (long k = 0; k < n; ++k) {
            (pooled[k].from_x ? i : j) += 1;
            if (k + 1 == n || pooled[k + 1].value != pooled[k].value) {
                checkpoint[k + 1] = 1;
                observed = std::max(observed, i * ny - j * nx);
            }
        }
    }

    KsResult r;
    r.d_plus = static_cast<double>(observed) / static_cast<double>(nx * ny);
    if (observed <= 0) {
        r.p = 1.0;
        r.exact = true;
        return r;
    }
    if (static_cast<double>(nx) * static_cast<double>(ny) > 4e6) {
        const double m = static_cast<double>(nx) * static_cast<double>(ny) / static_cast<double>(n);
        r.p = std::clamp(std::exp(-2.0 * m * r.d_plus * r.d_plus), 0.0, 1.0);
        return r;
    }

    // prob(i, j): probability that a uniformly random arrangement passes
    // through (i, j) without having reached the observed statistic.
    r.exact = true;
    const long cols = ny + 1;
    std::vector<double> prob(static_cast<std::size_t>((nx + 1) * cols), 0.0);
    auto at = [&](long i, long j) -> double& { return prob[static_cast<std::size_t>(i * cols + j)]; };
    at(0, 0) = 1.0;
    for (long k = 0; k < n; ++k) {
        for (long i = std::max(0L, k - ny); i <= std::min(k, nx); ++i) {
            const long j = k - i;
            const double mass = at(i, j);
            if (mass == 0.0) continue;
            const double remaining = static_cast<double>(n - k);
            if (i < nx) at(i + 1, j) += mass * static_cast<double>(nx - i) / remaining;
            if (j < ny) at(i, j + 1) += mass * static_cast<double>(ny - j) / remaining;
        }
        if (checkpoint[k + 1])
            for (long i = std::max(0L, k + 1 - ny); i <= std::min(k + 1, nx); ++i) {
                const long j = k + 1 - i;
                if (i * ny - j * nx >= observed) at(i, j) = 0.0;
            }
    }
    r.p = std::clamp(1.0 - at(nx, ny), 0.0, 1.0);
    return r;
}

std::vector<double> bh_adjust(std::span<const double> pvalues) {
    const std::size_t m = pvalues.size();
    for (double p : pvalues)
        if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("p-values must lie in [0, 1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const std::size_t idx = order[r];
        const double scaled = pvalues[idx] * (static_cast<double>(m) / static_cast<double>(r + 1));
        running = std::min(running, scaled);
        // Guards against rounding below p.
        adjusted[idx] = std::max(pvalues[idx], std::min(1.0, running));
    }
    return adjusted;
}

}  // namespace fabisearch
