#include "fabisearch/nmf.hpp"

#include "fabisearch/errors.hpp"
#include "fabisearch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace fabisearch {

namespace {

constexpr std::uint64_t kOptRankTag = 0x6f7074;  // "opt"

void require_finite_nonnegative(const MatrixRef& X, const char* what) {
    if (X.size() == 0) throw DataError(std::string(what) + " is empty");
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double v = X(i, j);
            if (!std::isfinite(v))
                throw DataError(std::string(what) + " has a non-finite entry at (" + std::to_string(i + 1) + ", " +
                                std::to_string(j + 1) + ")");
            if (v < 0.0)
                throw DataError(std::string(what) + " has a negative entry at (" + std::to_string(i + 1) + ", " +
                                std::to_string(j + 1) + ")");
        }
}

// Sum of x*log(ratio) - x + wh over all entries, ratio = x / (wh + eps).
// Entries with x == 0 contribute wh (ratio is 0 there, clamped before the log).
double divergence_from_ratio(const MatrixRef& X, const Matrix& WH, const Matrix& ratio) {
    return (X.array() * ratio.array().max(1e-300).log() - X.array() + WH.array()).sum();
}

}  // namespace

TimeSeriesMatrix::TimeSeriesMatrix(Matrix values, std::vector<std::string> column_labels,
                                   std::vector<std::string> row_labels)
    : values_(std::move(values)), column_labels_(std::move(column_labels)), row_labels_(std::move(row_labels)) {
    if (values_.rows() < 2 || values_.cols() < 2)
        throw DataError("time series must have at least 2 time points and 2 variables (got " +
                        std::to_string(values_.rows()) + " x " + std::to_string(values_.cols()) + ")");
    for (Eigen::Index j = 0; j < values_.cols(); ++j)
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            const double v = values_(i, j);
            if (!std::isfinite(v) || v <= 0.0)
                throw DataError("all entries must be finite and strictly positive; offending value " +
                                std::to_string(v) + " at row " + std::to_string(i + 1) + ", column " +
                                std::to_string(j + 1));
        }
    if (!column_labels_.empty() && column_labels_.size() != static_cast<std::size_t>(values_.cols()))
        throw DataError("column label count does not match variable count");
    if (!row_labels_.empty() && row_labels_.size() != static_cast<std::size_t>(values_.rows()))
        throw DataError("row label count does not match time point count");
}

void NmfConfig::validate() const {
    if (nruns < 1) throw ParameterError("nruns must be >= 1");
    if (max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw ParameterError("tolerance must be > 0");
}

double kld_loss(const MatrixRef& X, const MatrixRef& WH) {
    if (X.rows() != WH.rows() || X.cols() != WH.cols())
        throw DimensionError("X is " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                             " but WH is " + std::to_string(WH.rows()) + "x" + std::to_string(WH.cols()));
    double total = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double x = X(i, j);
            const double y = WH(i, j);
            if (x < 0.0 || y < 0.0) throw DataError("kld_loss requires nonnegative inputs");
            if (x > 0.0) {
                if (y == 0.0)
                    throw SingularReconstructionError("reconstruction is zero at (" + std::to_string(i + 1) + ", " +
                                                      std::to_string(j + 1) + ") where data is positive");
                // y > 0 is checked above, so the exact ratio is safe here.
                total += x * std::log(x / y) - x + y;
            } else {
                total += y;
            }
        }
    return total;
}

double kld_loss(const MatrixRef& X, const MatrixRef& W, const MatrixRef& H) {
    if (W.rows() != X.rows() || H.cols() != X.cols() || W.cols() != H.rows())
        throw DimensionError("factor shapes do not conform: X " + std::to_string(X.rows()) + "x" +
                             std::to_string(X.cols()) + ", W " + std::to_string(W.rows()) + "x" +
                             std::to_string(W.cols()) + ", H " + std::to_string(H.rows()) + "x" +
                             std::to_string(H.cols()));
    const Matrix WH = W * H;
    return kld_loss(X, WH);
}

NmfFit nmf_fit_single(const MatrixRef& X, int rank, std::uint64_t seed, const NmfConfig& config,
                      std::vector<double>* loss_trace) {
    config.validate();
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n < 2) throw DegenerateSegmentError("segment must have at least 2 time points");
    if (rank < 1 || rank >= std::min(n, p))
        throw RankError("rank " + std::to_string(rank) + " must satisfy 1 <= rank < min(" + std::to_string(n) + ", " +
                        std::to_string(p) + ")");
    require_finite_nonnegative(X, "input matrix");
    const double xmax = X.maxCoeff();
    if (xmax <= 0.0) throw DataError("input matrix is identically zero");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // (0, max] rather than [0, max): zeros are fixed points of the updates.
    auto draw = [&] { return (1.0 - unit(rng)) * xmax; };

    NmfFit fit;
    fit.rank = rank;
    fit.seed = seed;
    fit.W.resize(n, rank);
    fit.H.resize(rank, p);
    for (Eigen::Index k = 0; k < fit.W.size(); ++k) fit.W.data()[k] = draw();
    for (Eigen::Index k = 0; k < fit.H.size(); ++k) fit.H.data()[k] = draw();

    Matrix& W = fit.W;
    Matrix& H = fit.H;
    Matrix WH = W * H;
    Matrix ratio = X.array() / (WH.array() + kReconstructionEpsilon);
    Matrix numer;
    double previous = divergence_from_ratio(X, WH, ratio);
    double loss = previous;

    int it = 0;
    while (it < config.max_iterations) {
        ++it;
        const Eigen::ArrayXd w_sums = W.colwise().sum().transpose().array() + kReconstructionEpsilon;
        numer.noalias() = W.transpose() * ratio;
        H.array() *= numer.array().colwise() / w_sums;

        WH.noalias() = W * H;
        ratio = X.array() / (WH.array() + kReconstructionEpsilon);

        const Eigen::ArrayXd h_sums = H.rowwise().sum().array() + kReconstructionEpsilon;
        numer.noalias() = ratio * H.transpose();
        W.array() *= numer.array().rowwise() / h_sums.transpose();

        WH.noalias() = W * H;
        ratio = X.array() / (WH.array() + kReconstructionEpsilon);
        loss = divergence_from_ratio(X, WH, ratio);
        if (loss_trace) loss_trace->push_back(loss);

        if (!std::isfinite(loss)) throw DataError("factorization diverged (non-finite loss)");
        const double scale = std::max(std::abs(previous), 1e-300);
        if (loss == 0.0 || std::abs(previous - loss) / scale < config.tolerance) break;
        previous = loss;
    }

    fit.loss = loss;
    fit.iterations = it;
    return fit;
}

std::uint64_t nmf_run_seed(std::uint64_t master_seed, int run_index) noexcept {
    return derive_seed(master_seed, {static_cast<std::uint64_t>(run_index)});
}

NmfFit nmf_fit_best(const MatrixRef& X, int rank, const NmfConfig& config) {
    config.validate();
    std::vector<NmfFit> fits(static_cast<std::size_t>(config.nruns));
    parallel_for(fits.size(), config.threads, [&](std::size_t k) {
        fits[k] = nmf_fit_single(X, rank, nmf_run_seed(config.master_seed, static_cast<int>(k)), config);
        fits[k].run_index = static_cast<int>(k);
    });
    std::size_t best = 0;
    for (std::size_t k = 1; k < fits.size(); ++k)
        if (fits[k].loss < fits[best].loss) best = k;
    return std::move(fits[best]);
}

std::vector<int> cluster_assign(const MatrixRef& H) {
    if (H.rows() == 0 || H.cols() == 0) throw DataError("coefficient matrix is empty");
    std::vector<int> labels(static_cast<std::size_t>(H.cols()), 0);
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < H.rows(); ++r)
            if (H(r, j) > H(best, j)) best = r;
        labels[static_cast<std::size_t>(j)] = static_cast<int>(best);
    }
    return labels;
}

Matrix permute_matrix(const MatrixRef& Y, std::uint64_t seed) {
    Matrix out = Y;
    std::mt19937_64 rng(seed);
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        auto col = out.col(j);
        std::shuffle(col.begin(), col.end(), rng);
    }
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        auto row = out.row(i);
        std::shuffle(row.begin(), row.end(), rng);
    }
    return out;
}

OptRankResult opt_rank(const TimeSeriesMatrix& Y, const NmfConfig& config) {
    config.validate();
    const Matrix& data = Y.values();
    const int max_rank = static_cast<int>(std::min(data.rows(), data.cols())) - 1;
    if (max_rank < 2)
        throw DataError("matrix of size " + std::to_string(data.rows()) + "x" + std::to_string(data.cols()) +
                        " is too small for rank 2");

    const Matrix permuted = permute_matrix(data, derive_seed(config.master_seed, {kOptRankTag, 0}));

    OptRankResult result;
    result.max_rank = max_rank;
    auto evaluate = [&](int rank) {
        NmfConfig cfg = config;
        cfg.master_seed = derive_seed(config.master_seed, {kOptRankTag, 1, static_cast<std::uint64_t>(rank)});
        result.loss.push_back(nmf_fit_best(data, rank, cfg).loss);
        cfg.master_seed = derive_seed(config.master_seed, {kOptRankTag, 2, static_cast<std::uint64_t>(rank)});
        result.loss_permuted.push_back(nmf_fit_best(permuted, rank, cfg).loss);
    };

    evaluate(1);
    for (int k = 2; k <= max_rank; ++k) {
        evaluate(k);
        const auto i = static_cast<std::size_t>(k - 1);
        const double decrease = result.loss[i - 1] - result.loss[i];
        const double decrease_permuted = result.loss_permuted[i - 1] - result.loss_permuted[i];
        if (decrease < decrease_permuted) {
            result.rank = std::max(2, k - 1);
            return result;
        }
    }
    result.rank = max_rank;
    result.reached_max = true;
    return result;
}

}  // namespace fabisearch
