#include "fabisearch/network.hpp"

#include "fabisearch/errors.hpp"
#include "fabisearch/parallel.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <string>

namespace fabisearch {

namespace {

constexpr std::uint64_t kRankTag = 21;
constexpr std::uint64_t kSegmentTag = 22;

double parse_number(std::string_view token) {
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParameterError("invalid lambda value '" + std::string(token) + "'");
    return v;
}

LambdaValue classify(double v) {
    if (v > 0.0 && v < 1.0) return LambdaValue::threshold(v);
    if (v >= 1.0 && v == std::floor(v)) return LambdaValue::clusters(static_cast<int>(v));
    throw ParameterError("lambda " + std::to_string(v) +
                         " is neither a threshold in (0, 1) nor a positive integer cluster count");
}

}  // namespace

long AdjacencyMatrix::edge_count() const {
    long count = 0;
    for (Eigen::Index j = 0; j < values.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i) count += values(i, j);
    return count;
}

std::vector<LambdaValue> parse_lambda_spec(std::string_view text) {
    std::vector<LambdaValue> out;
    if (text.find(':') != std::string_view::npos) {
        const auto a = text.find(':');
        const auto b = text.find(':', a + 1);
        if (b == std::string_view::npos) throw ParameterError("range lambda must be start:stop:step");
        const double start = parse_number(text.substr(0, a));
        const double stop = parse_number(text.substr(a + 1, b - a - 1));
        const double step = parse_number(text.substr(b + 1));
        if (!(step > 0.0) || stop < start) throw ParameterError("invalid lambda range");
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (long k = 0; k < count; ++k) {
            // Round to the step's precision so 0.01:0.99:0.01 yields exactly 0.01, ..., 0.99.
            const double v = std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12;
            out.push_back(classify(v));
        }
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto token = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        out.push_back(classify(parse_number(token)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

ConsensusMatrix consensus_matrix(const MatrixRef& segment, int rank, int nruns, std::uint64_t master_seed,
                                 const NmfConfig& base) {
    if (nruns < 1) throw ParameterError("nruns must be >= 1");
    if (segment.rows() < 2) throw DegenerateSegmentError("segment must have at least 2 time points");
    NmfConfig config = base;
    config.nruns = nruns;
    config.master_seed = master_seed;

    std::vector<std::vector<int>> labels(static_cast<std::size_t>(nruns));
    parallel_for(labels.size(), config.threads, [&](std::size_t k) {
        const NmfFit fit = nmf_fit_single(segment, rank, nmf_run_seed(master_seed, static_cast<int>(k)), config);
        labels[k] = cluster_assign(fit.H);
    });

    const Eigen::Index p = segment.cols();
    Matrix counts = Matrix::Zero(p, p);
    for (const auto& run : labels)
        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index i = 0; i < p; ++i)
                if (run[i] == run[j]) counts(i, j) += 1.0;
    return {counts / static_cast<double>(nruns), nruns};
}

AdjacencyMatrix adjacency_from_threshold(const ConsensusMatrix& C, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ParameterError("threshold lambda must lie in (0, 1)");
    const Eigen::Index p = C.values.rows();
    AdjacencyMatrix A{BinaryMatrix::Zero(p, p), AdjacencyMode::threshold, lambda};
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < p; ++i)
            if (i != j && C.values(i, j) > lambda) A.values(i, j) = 1;
    return A;
}

std::vector<int> average_linkage_labels(const MatrixRef& dissimilarity, int k) {
    const Eigen::Index p = dissimilarity.rows();
    if (dissimilarity.cols() != p) throw DimensionError("dissimilarity matrix must be square");
    if (k < 1 || k > p) throw ParameterError("cluster count must lie in [1, " + std::to_string(p) + "]");

    Matrix d = dissimilarity;
    std::vector<int> owner(static_cast<std::size_t>(p));
    std::vector<double> size(static_cast<std::size_t>(p), 1.0);
    std::vector<char> active(static_cast<std::size_t>(p), 1);
    for (Eigen::Index i = 0; i < p; ++i) owner[i] = static_cast<int>(i);

    for (Eigen::Index clusters = p; clusters > k; --clusters) {
        Eigen::Index best_a = -1, best_b = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index a = 0; a < p; ++a) {
            if (!active[a]) continue;
            for (Eigen::Index b = a + 1; b < p; ++b)
                if (active[b] && d(a, b) < best) {
                    best = d(a, b);
                    best_a = a;
                    best_b = b;
                }
        }
        if (best_a < 0 || best_b < 0) break;
        // Lance-Williams update for average linkage.
        const double na = size[best_a];
        const double nb = size[best_b];
        for (Eigen::Index x = 0; x < p; ++x) {
            if (!active[x] || x == best_a || x == best_b) continue;
            const double merged = (na * d(best_a, x) + nb * d(best_b, x)) / (na + nb);
            d(best_a, x) = d(x, best_a) = merged;
        }
        size[best_a] = na + nb;
        active[best_b] = 0;
        for (auto& o : owner)
            if (o == best_b) o = static_cast<int>(best_a);
    }

    std::vector<int> labels(static_cast<std::size_t>(p), -1);
    std::vector<int> renumber(static_cast<std::size_t>(p), -1);
    int next = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
        int& id = renumber[owner[i]];
        if (id < 0) id = next++;
        labels[i] = id;
    }
    return labels;
}

AdjacencyMatrix adjacency_from_clustering(const ConsensusMatrix& C, int k) {
    const Eigen::Index p = C.values.rows();
    if (k < 1 || k > p) throw ParameterError("cluster count " + std::to_string(k) + " must lie in [1, " +
                                             std::to_string(p) + "]");
    const Matrix dissimilarity = (1.0 - C.values.array()).matrix();
    const std::vector<int> labels = average_linkage_labels(dissimilarity, k);
    AdjacencyMatrix A{BinaryMatrix::Zero(p, p), AdjacencyMode::clusters, static_cast<double>(k)};
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < p; ++i)
            if (i != j && labels[i] == labels[j]) A.values(i, j) = 1;
    return A;
}

AdjacencyMatrix make_adjacency(const ConsensusMatrix& C, const LambdaValue& lambda) {
    return lambda.mode == AdjacencyMode::threshold
               ? adjacency_from_threshold(C, lambda.value)
               : adjacency_from_clustering(C, static_cast<int>(lambda.value));
}

std::vector<TimeRange> segments_from_changepoints(long time_points, const std::vector<long>& changepoints) {
    std::vector<TimeRange> out;
    long first = 1;
    for (long c : changepoints) {
        if (c < first || c >= time_points)
            throw RangeError("change points must be strictly increasing within [1, T - 1]");
        out.push_back({first, c});
        first = c + 1;
    }
    out.push_back({first, time_points});
    return out;
}

NetworkEstimate est_net(const TimeSeriesMatrix& Y, const EstNetOptions& options) {
    if (options.lambda.empty()) throw ParameterError("at least one lambda value is required");
    NmfConfig base;
    base.nruns = options.nruns;
    base.max_iterations = options.max_iterations;
    base.tolerance = options.tolerance;
    base.threads = options.threads;
    base.validate();

    const auto ranges = segments_from_changepoints(Y.time_points(), options.changepoints);
    for (const auto& r : ranges)
        if (r.length() < 2)
            throw DegenerateSegmentError("segment " + std::to_string(r.first) + ":" + std::to_string(r.last) +
                                         " has fewer than 2 time points");

    NetworkEstimate estimate;
    if (options.rank) {
        estimate.rank_used = *options.rank;
    } else {
        NmfConfig cfg = base;
        cfg.master_seed = derive_seed(options.master_seed, {kRankTag});
        estimate.rank_used = opt_rank(Y, cfg).rank;
    }

    for (std::size_t s = 0; s < ranges.size(); ++s) {
        SegmentNetwork net;
        net.range = ranges[s];
        net.consensus = consensus_matrix(rows_of(Y.values(), ranges[s]), estimate.rank_used, options.nruns,
                                         derive_seed(options.master_seed, {kSegmentTag, s}), base);
        for (const auto& lambda : options.lambda) net.adjacency.push_back(make_adjacency(net.consensus, lambda));
        estimate.segments.push_back(std::move(net));
    }
    return estimate;
}

}  // namespace fabisearch
