#pragma once

#include "fabisearch/nmf.hpp"
#include "fabisearch/types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace fabisearch {

/// p x p co-clustering frequencies; symmetric with unit diagonal.
struct ConsensusMatrix {
    Matrix values;
    int nruns_used = 0;
};

enum class AdjacencyMode { threshold, clusters };

using BinaryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Symmetric 0/1 matrix with zero diagonal.
struct AdjacencyMatrix {
    BinaryMatrix values;
    AdjacencyMode mode = AdjacencyMode::threshold;
    double parameter = 0.0;  // lambda, or the cluster count

    /// Number of undirected edges (upper-triangular ones).
    long edge_count() const;
};

/// One entry of a lambda specification: a cluster count or a threshold in (0, 1).
struct LambdaValue {
    AdjacencyMode mode = AdjacencyMode::threshold;
    double value = 0.5;

    static LambdaValue clusters(int k) { return {AdjacencyMode::clusters, static_cast<double>(k)}; }
    static LambdaValue threshold(double lambda) { return {AdjacencyMode::threshold, lambda}; }
};

/// Parses "7", "0.4", "0.1,0.2,0.3" or "0.01:0.99:0.01" (start:stop:step).
/// Integers >= 1 select clustering mode, reals in (0, 1) select thresholding.
std::vector<LambdaValue> parse_lambda_spec(std::string_view text);

ConsensusMatrix consensus_matrix(const MatrixRef& segment, int rank, int nruns, std::uint64_t master_seed,
                                 const NmfConfig& base = {});

/// A_ij = 1 iff C_ij > lambda and i != j.
AdjacencyMatrix adjacency_from_threshold(const ConsensusMatrix& C, double lambda);

/// Average-linkage agglomerative clustering on 1 - C cut into k clusters;
/// A_ij = 1 iff i != j share a cluster.
AdjacencyMatrix adjacency_from_clustering(const ConsensusMatrix& C, int k);

/// Average-linkage (UPGMA) labels for a symmetric dissimilarity matrix cut
/// into k clusters. Labels are numbered by first appearance.
std::vector<int> average_linkage_labels(const MatrixRef& dissimilarity, int k);

AdjacencyMatrix make_adjacency(const ConsensusMatrix& C, const LambdaValue& lambda);

/// Segments 1:c_1, c_1+1:c_2, ..., c_k+1:T.
std::vector<TimeRange> segments_from_changepoints(long time_points, const std::vector<long>& changepoints);

struct EstNetOptions {
    std::vector<LambdaValue> lambda;
    std::optional<int> rank;  // absent: opt_rank on the full series
    int nruns = 50;
    std::vector<long> changepoints;
    std::uint64_t master_seed = 0;
    int max_iterations = 2000;
    double tolerance = 1e-6;
    int threads = 0;
};

struct SegmentNetwork {
    TimeRange range;
    ConsensusMatrix consensus;
    std::vector<AdjacencyMatrix> adjacency;  // one per lambda value, in the given order
};

struct NetworkEstimate {
    int rank_used = 0;
    std::vector<SegmentNetwork> segments;
};

NetworkEstimate est_net(const TimeSeriesMatrix& Y, const EstNetOptions& options);

}  // namespace fabisearch
