#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's statistics code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

/// Student t density integrated with composite Simpson on [t, 0] (or [0, t]).
inline double t_cdf(double t, double df, int intervals = 200000) {
    const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) / std::sqrt(df * M_PI);
    auto f = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0); };
    const double a = std::min(t, 0.0), b = std::max(t, 0.0);
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int k = 1; k < intervals; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    const double mass = s * h / 3.0;
    return t < 0 ? 0.5 - mass : 0.5 + mass;
}

struct Welch {
    double t, df;
};

inline Welch welch(const std::vector<double>& x, const std::vector<double>& y) {
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double e : v) s += e;
        return s / v.size();
    };
    auto var = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0;
        for (double e : v) s += (e - m) * (e - m);
        return s / (v.size() - 1);
    };
    const double vx = var(x) / x.size(), vy = var(y) / y.size();
    const double t = (mean(x) - mean(y)) / std::sqrt(vx + vy);
    const double df = (vx + vy) * (vx + vy) / (vx * vx / (x.size() - 1) + vy * vy / (y.size() - 1));
    return {t, df};
}

/// Calls visit(mask) for every way of choosing m of n pooled items as the first sample.
inline void for_each_split(int n, int m, const std::function<void(const std::vector<char>&)>& visit) {
    std::vector<char> mask(n, 0);
    std::fill(mask.begin(), mask.begin() + m, 1);
    std::sort(mask.begin(), mask.end());
    do {
        visit(mask);
    } while (std::next_permutation(mask.begin(), mask.end()));
}

/// Mid-rank sum of x within the pooled sample.
inline double rank_sum(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> all(x);
    all.insert(all.end(), y.begin(), y.end());
    double s = 0;
    for (double v : x) {
        double below = 0, equal = 0;
        for (double w : all) {
            if (w < v) below += 1;
            else if (w == v) equal += 1;
        }
        s += below + (equal + 1) / 2.0;
    }
    return s;
}

inline double d_plus(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> all(x);
    all.insert(all.end(), y.begin(), y.end());
    double best = 0;
    for (double t : all) {
        double fx = 0, fy = 0;
        for (double v : x) fx += v <= t;
        for (double v : y) fy += v <= t;
        best = std::max(best, fx / x.size() - fy / y.size());
    }
    return best;
}

/// Permutation p-value by full enumeration: share of relabelings whose
/// statistic is at least as extreme (stat <= observed when lower_tail, else >=).
inline double permutation_p(const std::vector<double>& x, const std::vector<double>& y,
                            const std::function<double(const std::vector<double>&, const std::vector<double>&)>& stat,
                            bool lower_tail) {
    std::vector<double> pooled(x);
    pooled.insert(pooled.end(), y.begin(), y.end());
    const double observed = stat(x, y);
    const double tol = 1e-9;
    double hits = 0, total = 0;
    for_each_split(static_cast<int>(pooled.size()), static_cast<int>(x.size()), [&](const std::vector<char>& mask) {
        std::vector<double> a, b;
        for (std::size_t k = 0; k < pooled.size(); ++k) (mask[k] ? a : b).push_back(pooled[k]);
        const double s = stat(a, b);
        hits += lower_tail ? (s <= observed + tol) : (s >= observed - tol);
        total += 1;
    });
    return hits / total;
}

/// Step-up rule written directly from its definition:
/// adj_i = min over j with p_j >= p_i of min(1, m p_j / #{l : p_l <= p_j}).
inline std::vector<double> bh(const std::vector<double>& p) {
    const std::size_t m = p.size();
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        double best = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (p[j] < p[i]) continue;
            double rank = 0;
            for (std::size_t l = 0; l < m; ++l) rank += p[l] <= p[j];
            best = std::min(best, m * p[j] / rank);
        }
        out[i] = best;
    }
    return out;
}

/// Best two-block partition of a similarity matrix by exhaustive search:
/// maximizes mean within-block similarity minus mean between-block similarity.
/// Returns labels with node 0 in block 0.
inline std::vector<int> best_two_partition(const std::vector<std::vector<double>>& c) {
    const int p = static_cast<int>(c.size());
    double best = -std::numeric_limits<double>::infinity();
    std::uint32_t best_mask = 0;
    for (std::uint32_t mask = 0; mask < (1u << (p - 1)); ++mask) {
        // Node 0 fixed in block 0; bit k-1 puts node k in block 1.
        auto block = [&](int k) { return k == 0 ? 0 : static_cast<int>((mask >> (k - 1)) & 1u); };
        double within = 0, between = 0;
        int nw = 0, nb = 0;
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) {
                if (block(i) == block(j)) {
                    within += c[i][j];
                    ++nw;
                } else {
                    between += c[i][j];
                    ++nb;
                }
            }
        if (nb == 0 || nw == 0) continue;
        const double score = within / nw - between / nb;
        if (score > best) {
            best = score;
            best_mask = mask;
        }
    }
    std::vector<int> labels(p);
    for (int k = 0; k < p; ++k) labels[k] = k == 0 ? 0 : static_cast<int>((best_mask >> (k - 1)) & 1u);
    return labels;
}

/// Sample correlation matrix of the columns of a row-major table.
inline std::vector<std::vector<double>> correlation(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size(), p = rows.front().size();
    std::vector<double> mean(p, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < p; ++j) mean[j] += r[j] / n;
    std::vector<std::vector<double>> cov(p, std::vector<double>(p, 0.0));
    for (const auto& r : rows)
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
    std::vector<std::vector<double>> cor(p, std::vector<double>(p));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) cor[i][j] = cov[i][j] / std::sqrt(cov[i][i] * cov[j][j]);
    return cor;
}

}  // namespace oracle
