#pragma once

#include "fabisearch/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fabisearch {

struct RescaleOptions {
    double target_mean = 100.0;
    double min_sd = 2.0;
    /// Global multiplier; when absent it is chosen so the smallest column
    /// standard deviation reaches min_sd (never below 1).
    std::optional<double> factor;
    /// Columns whose mean is within this relative distance of target_mean, with
    /// all standard deviations >= min_sd, are returned as they are.
    double mean_tolerance = 0.05;
};

/// Makes raw (typically mean-zero) data NMF-ready: multiply every entry by one
/// global factor, then shift by target_mean. Throws RescaleError if any entry
/// ends up non-positive.
TimeSeriesMatrix rescale(const MatrixRef& raw, const RescaleOptions& options = {});

struct SimulationSpec {
    long variables = 40;
    long time_points = 300;
    std::vector<long> changepoints;  // 1-based; regime changes after each index
    int clusters = 2;                // cluster count in every regime
    double within_corr = 0.75;
    double between_corr = 0.20;
    bool reshuffle = true;           // redraw node labels at each change point
    std::uint64_t master_seed = 0;
    RescaleOptions rescale;

    void validate() const;
};

struct SimulatedData {
    TimeSeriesMatrix data;
    std::vector<long> changepoints;
    std::vector<std::vector<int>> labels;  // one label vector per regime
};

/// Block-correlation covariance: 1 on the diagonal, within_corr for distinct
/// nodes sharing a label, between_corr otherwise.
Matrix block_covariance(const std::vector<int>& labels, double within_corr, double between_corr);

/// Gaussian rows drawn from N(0, Sigma_regime) via Cholesky, rescaled by rescale().
SimulatedData simulate_dataset(const SimulationSpec& spec);

}  // namespace fabisearch
