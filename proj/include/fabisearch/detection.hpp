#pragma once

#include "fabisearch/nmf.hpp"
#include "fabisearch/stats.hpp"
#include "fabisearch/types.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fabisearch {

/// Receives human-readable progress lines ("35 : 162", "Change Point At: ...").
using ProgressFn = std::function<void(const std::string&)>;

struct DetectionConfig {
    int mindist = 35;
    int nruns = 50;
    int nreps = 100;
    std::optional<double> alpha;  // absent: report adjusted p-values
    std::optional<int> rank;      // absent: select with opt_rank
    TestType testtype = TestType::welch_t;
    std::uint64_t master_seed = 0;
    int max_iterations = 2000;
    double tolerance = 1e-6;
    int threads = 0;
    ProgressFn progress;

    void validate() const;
    /// NMF settings derived from this configuration, with the given master seed.
    NmfConfig nmf_config(std::uint64_t seed) const;
};

enum class SearchStrategy { binary, grid };

/// Result of locating a single candidate inside a search interval.
struct SearchResult {
    long candidate = 0;           // 1-based; last time point of the left block
    double loss_decrease = 0.0;   // split loss sum minus unsplit loss over the searched data
    int split_evaluations = 0;    // number of split points whose two halves were fitted
    std::vector<std::pair<long, long>> intervals;  // active [lo, hi] at each step
};

/// Binary search for one candidate in [lo, hi] (1-based, inclusive).
///
/// The data searched is rows [lo - mindist + 1, hi + mindist]. At each step the
/// span of the active interval is split at the midpoint floor((lo + hi) / 2), both
/// halves get a best-of-nruns fit, and the search continues in the half with the
/// larger per-time-point loss (ties go left) until a single index remains.
SearchResult binary_search_candidate(const TimeSeriesMatrix& Y, long lo, long hi, int rank,
                                     const DetectionConfig& config);

/// Exhaustive baseline: evaluates every split in [lo, hi] and returns the one
/// with the smallest total split loss (lowest index on ties).
SearchResult grid_search_candidate(const TimeSeriesMatrix& Y, long lo, long hi, int rank,
                                   const DetectionConfig& config);

struct Candidate {
    long index = 0;
    double loss_decrease = 0.0;
};

struct CandidateSet {
    std::vector<Candidate> candidates;  // strictly increasing by index
    int split_evaluations = 0;

    std::vector<long> indices() const;
};

/// Recursive candidate discovery over the whole series. A segment is searched
/// only if it has at least 2 * mindist points; a candidate whose split does not
/// reduce the loss is dropped and ends the recursion on that segment.
CandidateSet detect_candidates(const TimeSeriesMatrix& Y, int rank, const DetectionConfig& config,
                               SearchStrategy strategy = SearchStrategy::binary);

/// Boundary set {1, q_1, ..., q_k, T} and the left/right blocks around each candidate.
class SegmentBoundaries {
public:
    SegmentBoundaries(std::vector<long> candidates, long time_points);

    std::size_t size() const noexcept { return points_.size() - 2; }
    long candidate(std::size_t i) const { return points_.at(i + 1); }
    /// Left block (w_i : w_{i+1}) of candidate i (0-based ordinal).
    TimeRange left(std::size_t i) const;
    /// Right block (w_{i+1} + 1 : w_{i+2}).
    TimeRange right(std::size_t i) const;
    const std::vector<long>& points() const noexcept { return points_; }

private:
    std::vector<long> points_;
};

struct LossDistributions {
    std::vector<double> refit;      // l_i
    std::vector<double> reference;  // l*_i (time-permuted)
};

/// nreps independent single-run fits of the candidate's two blocks, and of the
/// same blocks after shuffling the time points of their union.
LossDistributions refit_and_permute(const TimeSeriesMatrix& Y, const SegmentBoundaries& boundaries, std::size_t i,
                                    int nreps, int rank, const DetectionConfig& config);

/// p-value for H1: mean(refit) < mean(reference) under the chosen test.
double stat_test(const LossDistributions& dist, TestType testtype);

struct ChangePointRow {
    long time = 0;
    double p_value = 1.0;  // BH-adjusted
    std::optional<bool> significant;  // set when alpha was given
    double loss_decrease = 0.0;
};

struct ChangePointReport {
    int rank_used = 0;
    std::vector<ChangePointRow> rows;
    std::chrono::duration<double> compute_time{0.0};
    std::optional<double> alpha;
    TestType testtype = TestType::welch_t;
    std::optional<OptRankResult> rank_selection;

    /// Candidates that are significant: by the stored flag when alpha was
    /// given, otherwise adjusted p < alpha_override.
    std::vector<long> significant_points(std::optional<double> alpha_override = std::nullopt) const;
};

/// Full pipeline: rank selection (if needed), candidate discovery, refit/permute
/// inference, BH adjustment across all candidates.
ChangePointReport detect_cps(const TimeSeriesMatrix& Y, const DetectionConfig& config);

}  // namespace fabisearch
