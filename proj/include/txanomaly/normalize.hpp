#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "txanomaly/errors.hpp"

namespace txanomaly {

/// Per-column min-max scaling to [0, 1]. Constant columns map to 0; values outside the
/// fitted range are clamped.
template <typename Scalar>
class MinMaxScaler {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    MinMaxScaler() = default;

    /// Builds a scaler from stored extrema (e.g. scaler.json). Requires max >= min per column.
    MinMaxScaler(Vector min, Vector max) : min_(std::move(min)), max_(std::move(max)) {
        if (min_.size() != max_.size() || min_.size() == 0)
            throw ValidationError("scaler extrema must be non-empty and of equal length");
        for (Eigen::Index c = 0; c < min_.size(); ++c)
            if (!(max_(c) >= min_(c)))
                throw ValidationError("scaler column " + std::to_string(c) + " has max < min");
    }

    template <typename Derived>
    static MinMaxScaler fit(const Eigen::MatrixBase<Derived>& data) {
        if (data.rows() == 0) throw ValidationError("cannot fit a scaler on an empty matrix");
        if (!data.allFinite()) throw ValidationError("cannot fit a scaler on non-finite data");
        return MinMaxScaler(data.colwise().minCoeff().transpose(), data.colwise().maxCoeff().transpose());
    }

    template <typename Derived>
    Matrix transform(const Eigen::MatrixBase<Derived>& data) const {
        if (data.cols() != cols())
            throw ValidationError("scaler has " + std::to_string(cols()) + " columns, matrix has " +
                                  std::to_string(data.cols()));
        Matrix out(data.rows(), data.cols());
        for (Eigen::Index c = 0; c < cols(); ++c) {
            const Scalar lo = min_(c);
            const Scalar span = max_(c) - lo;
            if (span == Scalar(0)) {
                out.col(c).setZero();
                continue;
            }
            for (Eigen::Index r = 0; r < data.rows(); ++r)
                out(r, c) = std::clamp((Scalar(data(r, c)) - lo) / span, Scalar(0), Scalar(1));
        }
        return out;
    }

    Eigen::Index cols() const noexcept { return min_.size(); }
    const Vector& min() const noexcept { return min_; }
    const Vector& max() const noexcept { return max_; }

    friend bool operator==(const MinMaxScaler& a, const MinMaxScaler& b) {
        return a.min_.size() == b.min_.size() && a.min_ == b.min_ && a.max_ == b.max_;
    }

private:
    Vector min_;
    Vector max_;
};

/// scaler.json: {"columns": [{"name", "min", "max"}, ...]}. Doubles round-trip exactly.
std::string scaler_to_json(const MinMaxScaler<double>& scaler, const std::vector<std::string>& names);
MinMaxScaler<double> scaler_from_json(const std::string& text, std::vector<std::string>* names = nullptr);

}  // namespace txanomaly
