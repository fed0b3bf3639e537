#include "fabisearch/detection.hpp"

#include "fabisearch/errors.hpp"
#include "fabisearch/parallel.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace fabisearch {

namespace {

constexpr std::uint64_t kRankTag = 1;
constexpr std::uint64_t kSearchTag = 2;
constexpr std::uint64_t kInferenceTag = 3;
constexpr std::uint64_t kFitTag = 4;

void report(const DetectionConfig& config, const std::string& line) {
    if (config.progress) config.progress(line);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

// Best-of-nruns loss on a row range. The seed depends only on the range, so the
// same block always yields the same fit no matter which search evaluates it.
double best_range_loss(const Matrix& data, TimeRange range, int rank, const DetectionConfig& config) {
    const NmfConfig nmf = config.nmf_config(derive_seed(config.master_seed,
                                                        {kSearchTag, kFitTag, static_cast<std::uint64_t>(range.first),
                                                         static_cast<std::uint64_t>(range.last)}));
    return nmf_fit_best(rows_of(data, range), rank, nmf).loss;
}

void check_interval(const TimeSeriesMatrix& Y, long lo, long hi, const DetectionConfig& config) {
    const long T = Y.time_points();
    if (hi < lo || lo < config.mindist || hi > T - config.mindist)
        throw RangeError("search interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         "] must be non-empty and lie within [" + std::to_string(config.mindist) + ", " +
                         std::to_string(T - config.mindist) + "]");
}

double split_loss(const Matrix& data, TimeRange span, long q, int rank, const DetectionConfig& config) {
    return best_range_loss(data, {span.first, q}, rank, config) +
           best_range_loss(data, {q + 1, span.last}, rank, config);
}

}  // namespace

void DetectionConfig::validate() const {
    if (mindist < 2) throw ParameterError("mindist must be >= 2");
    if (nruns < 1) throw ParameterError("nruns must be >= 1");
    if (nreps < 2) throw ParameterError("nreps must be >= 2");
    if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    if (rank && *rank < 1) throw ParameterError("rank must be a positive integer");
    nmf_config(master_seed).validate();
}

NmfConfig DetectionConfig::nmf_config(std::uint64_t seed) const {
    NmfConfig c;
    c.nruns = nruns;
    c.max_iterations = max_iterations;
    c.tolerance = tolerance;
    c.master_seed = seed;
    c.threads = threads;
    return c;
}

SearchResult binary_search_candidate(const TimeSeriesMatrix& Y, long lo, long hi, int rank,
                                     const DetectionConfig& config) {
    config.validate();
    check_interval(Y, lo, hi, config);
    const Matrix& data = Y.values();
    const long margin = config.mindist;
    const TimeRange span{lo - margin + 1, hi + margin};

    SearchResult result;
    while (true) {
        result.intervals.emplace_back(lo, hi);
        report(config, std::to_string(lo) + " : " + std::to_string(hi));
        if (lo >= hi) break;
        const long mid = lo + (hi - lo) / 2;
        const TimeRange left{lo - margin + 1, mid};
        const TimeRange right{mid + 1, hi + margin};
        double left_loss = 0.0;
        double right_loss = 0.0;
        parallel_for(2, config.threads, [&](std::size_t side) {
            if (side == 0)
                left_loss = best_range_loss(data, left, rank, config) / static_cast<double>(left.length());
            else
                right_loss = best_range_loss(data, right, rank, config) / static_cast<double>(right.length());
        });
        ++result.split_evaluations;
        if (left_loss >= right_loss)
            hi = mid;
        else
            lo = mid + 1;
    }

    result.candidate = lo;
    result.loss_decrease =
        split_loss(data, span, lo, rank, config) - best_range_loss(data, span, rank, config);
    ++result.split_evaluations;
    return result;
}

SearchResult grid_search_candidate(const TimeSeriesMatrix& Y, long lo, long hi, int rank,
                                   const DetectionConfig& config) {
    config.validate();
    check_interval(Y, lo, hi, config);
    const Matrix& data = Y.values();
    const TimeRange span{lo - config.mindist + 1, hi + config.mindist};
    report(config, std::to_string(lo) + " : " + std::to_string(hi));

    std::vector<double> losses(static_cast<std::size_t>(hi - lo + 1));
    parallel_for(losses.size(), config.threads, [&](std::size_t k) {
        losses[k] = split_loss(data, span, lo + static_cast<long>(k), rank, config);
    });
    const auto best = static_cast<long>(std::min_element(losses.begin(), losses.end()) - losses.begin());

    SearchResult result;
    result.intervals.emplace_back(lo, hi);
    result.candidate = lo + best;
    result.split_evaluations = static_cast<int>(losses.size());
    result.loss_decrease = losses[static_cast<std::size_t>(best)] - best_range_loss(data, span, rank, config);
    return result;
}

std::vector<long> CandidateSet::indices() const {
    std::vector<long> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) out.push_back(c.index);
    return out;
}

CandidateSet detect_candidates(const TimeSeriesMatrix& Y, int rank, const DetectionConfig& config,
                               SearchStrategy strategy) {
    config.validate();
    const long delta = config.mindist;
    CandidateSet set;

    std::function<void(long, long)> search = [&](long first, long last) {
        if (last - first + 1 < 2 * delta) return;
        const long lo = first - 1 + delta;
        const long hi = last - delta;
        const SearchResult found = strategy == SearchStrategy::binary
                                       ? binary_search_candidate(Y, lo, hi, rank, config)
                                       : grid_search_candidate(Y, lo, hi, rank, config);
        set.split_evaluations += found.split_evaluations;
        if (found.loss_decrease >= 0.0) {
            report(config, "No loss decrease at " + std::to_string(found.candidate) + " , Delta Loss: " +
                               format_double(found.loss_decrease));
            return;
        }
        report(config, "Change Point At: " + std::to_string(found.candidate) +
                           " , Delta Loss: " + format_double(found.loss_decrease));
        set.candidates.push_back({found.candidate, found.loss_decrease});
        search(first, found.candidate);
        search(found.candidate + 1, last);
    };
    search(1, Y.time_points());

    std::sort(set.candidates.begin(), set.candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.index < b.index; });
    return set;
}

SegmentBoundaries::SegmentBoundaries(std::vector<long> candidates, long time_points) {
    points_.reserve(candidates.size() + 2);
    points_.push_back(1);
    long previous = 0;
    for (long q : candidates) {
        if (q <= previous || q < 1 || q >= time_points)
            throw RangeError("candidates must be strictly increasing within [1, T - 1]");
        points_.push_back(q);
        previous = q;
    }
    points_.push_back(time_points);
}

TimeRange SegmentBoundaries::left(std::size_t i) const {
    if (i >= size()) throw RangeError("candidate ordinal out of range");
    return {points_[i], points_[i + 1]};
}

TimeRange SegmentBoundaries::right(std::size_t i) const {
    if (i >= size()) throw RangeError("candidate ordinal out of range");
    return {points_[i + 1] + 1, points_[i + 2]};
}

LossDistributions refit_and_permute(const TimeSeriesMatrix& Y, const SegmentBoundaries& boundaries, std::size_t i,
                                    int nreps, int rank, const DetectionConfig& config) {
    if (nreps < 2) throw ParameterError("nreps must be >= 2");
    const TimeRange left = boundaries.left(i);
    const TimeRange right = boundaries.right(i);
    if (left.length() < 2 || right.length() < 2)
        throw DegenerateSegmentError("blocks around candidate " + std::to_string(boundaries.candidate(i)) +
                                     " must each have at least 2 time points");

    const Matrix& data = Y.values();
    const TimeRange whole{left.first, right.last};
    const Matrix block = rows_of(data, whole);
    const long split = left.length();
    const auto candidate = static_cast<std::uint64_t>(boundaries.candidate(i));
    const NmfConfig nmf = config.nmf_config(config.master_seed);
    auto seed = [&](std::uint64_t kind, std::size_t rep, std::uint64_t side) {
        return derive_seed(config.master_seed, {kInferenceTag, kind, candidate, rep, side});
    };

    LossDistributions dist;
    dist.refit.resize(static_cast<std::size_t>(nreps));
    dist.reference.resize(static_cast<std::size_t>(nreps));
    parallel_for(2 * static_cast<std::size_t>(nreps), config.threads, [&](std::size_t task) {
        const std::size_t rep = task / 2;
        if (task % 2 == 0) {
            dist.refit[rep] = nmf_fit_single(block.topRows(split), rank, seed(0, rep, 0), nmf).loss +
                              nmf_fit_single(block.bottomRows(block.rows() - split), rank, seed(0, rep, 1), nmf).loss;
        } else {
            std::vector<Eigen::Index> order(static_cast<std::size_t>(block.rows()));
            std::iota(order.begin(), order.end(), 0);
            std::mt19937_64 rng(seed(1, rep, 2));
            std::shuffle(order.begin(), order.end(), rng);
            Matrix shuffled(block.rows(), block.cols());
            for (std::size_t r = 0; r < order.size(); ++r) shuffled.row(static_cast<Eigen::Index>(r)) = block.row(order[r]);
            dist.reference[rep] =
                nmf_fit_single(shuffled.topRows(split), rank, seed(1, rep, 0), nmf).loss +
                nmf_fit_single(shuffled.bottomRows(shuffled.rows() - split), rank, seed(1, rep, 1), nmf).loss;
        }
    });
    return dist;
}

double stat_test(const LossDistributions& dist, TestType testtype) {
    switch (testtype) {
        case TestType::welch_t: return welch_t_test(dist.refit, dist.reference).p;
        case TestType::wilcoxon: return rank_sum_test(dist.refit, dist.reference).p;
        case TestType::ks: return ks_test_greater(dist.refit, dist.reference).p;
    }
    throw ParameterError("unknown test type");
}

std::vector<long> ChangePointReport::significant_points(std::optional<double> alpha_override) const {
    std::vector<long> out;
    for (const auto& row : rows) {
        const bool keep = alpha_override ? row.p_value < *alpha_override : row.significant.value_or(false);
        if (keep) out.push_back(row.time);
    }
    return out;
}

ChangePointReport detect_cps(const TimeSeriesMatrix& Y, const DetectionConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    config.validate();

    ChangePointReport out;
    out.alpha = config.alpha;
    out.testtype = config.testtype;
    if (config.rank) {
        out.rank_used = *config.rank;
    } else {
        report(config, "Finding optimal rank");
        out.rank_selection = opt_rank(Y, config.nmf_config(derive_seed(config.master_seed, {kRankTag})));
        out.rank_used = out.rank_selection->rank;
        report(config, "Optimal rank: " + std::to_string(out.rank_used));
    }
    if (out.rank_used >= Y.variables())
        throw RankError("rank " + std::to_string(out.rank_used) + " must be smaller than the variable count " +
                        std::to_string(Y.variables()));

    DetectionConfig search_config = config;
    search_config.master_seed = derive_seed(config.master_seed, {kSearchTag});
    const CandidateSet candidates = detect_candidates(Y, out.rank_used, search_config);

    const SegmentBoundaries boundaries(candidates.indices(), Y.time_points());
    DetectionConfig inference_config = config;
    inference_config.master_seed = derive_seed(config.master_seed, {kInferenceTag});
    std::vector<double> raw;
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        report(config, "Refitting split at " + std::to_string(boundaries.candidate(i)));
        report(config, "Permuting split at " + std::to_string(boundaries.candidate(i)));
        const LossDistributions dist =
            refit_and_permute(Y, boundaries, i, config.nreps, out.rank_used, inference_config);
        raw.push_back(stat_test(dist, config.testtype));
    }
    const std::vector<double> adjusted = bh_adjust(raw);

    for (std::size_t i = 0; i < adjusted.size(); ++i) {
        ChangePointRow row;
        row.time = candidates.candidates[i].index;
        row.loss_decrease = candidates.candidates[i].loss_decrease;
        row.p_value = adjusted[i];
        if (config.alpha) row.significant = adjusted[i] < *config.alpha;
        out.rows.push_back(row);
    }
    out.compute_time = std::chrono::steady_clock::now() - start;
    return out;
}

}  // namespace fabisearch
