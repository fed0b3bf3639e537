#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fabisearch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const Matrix>;

/// T x p multivariate time series: rows are time points, columns are variables.
///
/// Every entry is finite and strictly positive, and T, p >= 2. The invariant is
/// checked on construction; instances are immutable afterwards.
class TimeSeriesMatrix {
public:
    explicit TimeSeriesMatrix(Matrix values,
                              std::vector<std::string> column_labels = {},
                              std::vector<std::string> row_labels = {});

    const Matrix& values() const noexcept { return values_; }
    Eigen::Index time_points() const noexcept { return values_.rows(); }
    Eigen::Index variables() const noexcept { return values_.cols(); }

    const std::vector<std::string>& column_labels() const noexcept { return column_labels_; }
    const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }

private:
    Matrix values_;
    std::vector<std::string> column_labels_;
    std::vector<std::string> row_labels_;
};

/// Inclusive 1-based time range [first, last].
struct TimeRange {
    long first = 1;
    long last = 1;

    long length() const noexcept { return last - first + 1; }
    friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

/// Rows [range.first, range.last] (1-based, inclusive) of a matrix.
inline auto rows_of(const Matrix& m, TimeRange range) {
    return m.middleRows(range.first - 1, range.length());
}

}  // namespace fabisearch
