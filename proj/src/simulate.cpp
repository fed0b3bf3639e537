#include "fabisearch/simulate.hpp"

#include "fabisearch/errors.hpp"
#include "fabisearch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace fabisearch {

namespace {
constexpr std::uint64_t kLabelTag = 11;
constexpr std::uint64_t kNoiseTag = 12;
}  // namespace

TimeSeriesMatrix rescale(const MatrixRef& raw, const RescaleOptions& options) {
    if (raw.rows() < 2 || raw.cols() < 1) throw DataError("rescale needs at least 2 rows");
    if (!raw.allFinite()) throw DataError("rescale input contains non-finite values");
    if (!(options.min_sd > 0.0)) throw ParameterError("min_sd must be > 0");
    if (options.factor && !(*options.factor > 0.0)) throw ParameterError("rescale factor must be > 0");

    const Eigen::RowVectorXd means = raw.colwise().mean();
    const Eigen::RowVectorXd sds =
        ((raw.rowwise() - means).array().square().colwise().sum() / static_cast<double>(raw.rows() - 1)).sqrt();
    const double min_sd = sds.minCoeff();

    const bool already_ready =
        !options.factor && min_sd >= options.min_sd &&
        ((means.array() - options.target_mean).abs() <= options.mean_tolerance * std::abs(options.target_mean)).all();
    if (already_ready && (raw.array() > 0.0).all()) return TimeSeriesMatrix(raw);

    double factor = 1.0;
    if (options.factor) {
        factor = *options.factor;
    } else if (min_sd < options.min_sd) {
        if (min_sd <= 0.0) throw RescaleError("a column has zero standard deviation; it cannot be scaled up");
        factor = options.min_sd / min_sd;
    }

    Matrix out = (raw.array() * factor + options.target_mean).matrix();
    Eigen::Index r = 0, c = 0;
    const double lowest = out.minCoeff(&r, &c);
    if (lowest <= 0.0)
        throw RescaleError("rescaled value " + std::to_string(lowest) + " at row " + std::to_string(r + 1) +
                           ", column " + std::to_string(c + 1) +
                           " is not positive; use a smaller factor or a larger target mean");
    return TimeSeriesMatrix(std::move(out));
}

void SimulationSpec::validate() const {
    if (variables < 2 || time_points < 2) throw SpecError("simulation needs at least 2 variables and 2 time points");
    if (clusters < 1 || clusters > variables) throw SpecError("cluster count must lie in [1, variables]");
    if (!(std::abs(within_corr) < 1.0) || !(std::abs(between_corr) < 1.0))
        throw SpecError("correlations must lie strictly between -1 and 1");
    long previous = 0;
    for (long t : changepoints) {
        if (t <= previous || t >= time_points)
            throw SpecError("change points must be strictly increasing within [1, T - 1]");
        previous = t;
    }
}

Matrix block_covariance(const std::vector<int>& labels, double within_corr, double between_corr) {
    const auto p = static_cast<Eigen::Index>(labels.size());
    Matrix sigma(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            sigma(i, j) = i == j ? 1.0 : (labels[i] == labels[j] ? within_corr : between_corr);
    return sigma;
}

SimulatedData simulate_dataset(const SimulationSpec& spec) {
    spec.validate();
    const auto p = static_cast<std::size_t>(spec.variables);

    // Regime 0: contiguous balanced blocks. Later regimes shuffle that label
    // vector, which keeps cluster sizes fixed.
    std::vector<std::vector<int>> labels;
    std::vector<int> base(p);
    for (std::size_t j = 0; j < p; ++j) base[j] = static_cast<int>(j * static_cast<std::size_t>(spec.clusters) / p);
    labels.push_back(base);
    std::mt19937_64 label_rng(derive_seed(spec.master_seed, {kLabelTag}));
    for (std::size_t k = 0; k < spec.changepoints.size(); ++k) {
        std::vector<int> next = labels.back();
        if (spec.reshuffle) std::shuffle(next.begin(), next.end(), label_rng);
        labels.push_back(std::move(next));
    }

    std::vector<Matrix> factors;
    for (const auto& regime : labels) {
        const Matrix sigma = block_covariance(regime, spec.within_corr, spec.between_corr);
        Eigen::LLT<Matrix> llt(sigma);
        if (llt.info() != Eigen::Success)
            throw SpecError("covariance with within_corr=" + std::to_string(spec.within_corr) +
                            " and between_corr=" + std::to_string(spec.between_corr) +
                            " is not positive definite");
        factors.emplace_back(llt.matrixL());
    }

    Matrix raw(spec.time_points, static_cast<Eigen::Index>(p));
    std::mt19937_64 noise_rng(derive_seed(spec.master_seed, {kNoiseTag}));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(static_cast<Eigen::Index>(p));
    std::size_t regime = 0;
    for (long t = 0; t < spec.time_points; ++t) {
        while (regime < spec.changepoints.size() && t >= spec.changepoints[regime]) ++regime;
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = normal(noise_rng);
        raw.row(t) = (factors[regime] * z).transpose();
    }

    return SimulatedData{rescale(raw, spec.rescale), spec.changepoints, std::move(labels)};
}

}  // namespace fabisearch
