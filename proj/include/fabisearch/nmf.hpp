#pragma once

#include "fabisearch/types.hpp"

#include <cstdint>
#include <vector>

namespace fabisearch {

enum class NmfAlgorithm {
    multiplicative_kl,  // Lee-Seung / Brunet multiplicative updates for the KL divergence
};

struct NmfConfig {
    int nruns = 50;
    int max_iterations = 2000;
    double tolerance = 1e-6;  // relative loss change between consecutive iterations
    std::uint64_t master_seed = 0;
    NmfAlgorithm algorithm = NmfAlgorithm::multiplicative_kl;
    int threads = 0;  // hint only; results never depend on it

    void validate() const;
};

struct NmfFit {
    Matrix W;  // n x r
    Matrix H;  // r x p
    int rank = 0;
    double loss = 0.0;
    std::uint64_t seed = 0;
    int iterations = 0;
    int run_index = 0;
};

/// Guard added to (WH)_ij inside logs and ratios.
inline constexpr double kReconstructionEpsilon = 1e-12;

/// Generalized KL (I-)divergence D(X | WH) with the 0*log(0/y) = 0 convention.
double kld_loss(const MatrixRef& X, const MatrixRef& W, const MatrixRef& H);

/// Same divergence against a precomputed reconstruction WH.
double kld_loss(const MatrixRef& X, const MatrixRef& WH);

/// One randomly initialized factorization. If loss_trace is given, the loss
/// after every iteration is appended to it.
NmfFit nmf_fit_single(const MatrixRef& X, int rank, std::uint64_t seed, const NmfConfig& config,
                      std::vector<double>* loss_trace = nullptr);

/// Seed of run `run_index` under `master_seed`.
std::uint64_t nmf_run_seed(std::uint64_t master_seed, int run_index) noexcept;

/// Best (minimum loss) of config.nruns restarts; ties go to the lowest run index.
NmfFit nmf_fit_best(const MatrixRef& X, int rank, const NmfConfig& config);

/// label[j] = row index of the largest entry in column j of H (lowest index on ties).
std::vector<int> cluster_assign(const MatrixRef& H);

/// Randomized copy of Y used as the rank-selection baseline: entries are
/// shuffled within every column (across time) and then within every row
/// (across variables), so both temporal and cross-sectional dependence are
/// destroyed while the entry multiset and dimensions are kept.
Matrix permute_matrix(const MatrixRef& Y, std::uint64_t seed);

struct OptRankResult {
    int rank = 0;
    bool reached_max = false;  // stopping rule never fired before r_max
    int max_rank = 0;
    // Indexed by rank - 1 (entry 0 is rank 1). Only evaluated ranks are present.
    std::vector<double> loss;
    std::vector<double> loss_permuted;
};

/// Selects the factorization rank by comparing loss decrements on Y against a
/// permuted copy. Returns the last rank whose decrement still beats the
/// permuted baseline (never below 2).
OptRankResult opt_rank(const TimeSeriesMatrix& Y, const NmfConfig& config);

}  // namespace fabisearch
