#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <vector>

#include "txanomaly/cluster.hpp"
#include "txanomaly/errors.hpp"

namespace txanomaly {

/// Exact trimmed K-means optimum by exhaustive search over every trim subset and every
/// assignment of the retained rows to k clusters. Test oracle only: refuses n > 12, k > 2 or
/// more than two trimmed rows. Shares no code with trimmed_kmeans besides trim_count.
template <typename Derived>
double brute_force_trimmed_kmeans(const Eigen::MatrixBase<Derived>& data, std::size_t k, double alpha) {
    const auto n = static_cast<std::size_t>(data.rows());
    const std::size_t trimmed = trim_count(alpha, n);
    if (n > 12 || k < 1 || k > 2 || trimmed > 2)
        throw ConfigError("brute force oracle limited to n <= 12, 1 <= k <= 2, trim <= 2");
    if (n - trimmed < k) throw ConfigError("brute force oracle: fewer retained rows than clusters");

    const Eigen::MatrixXd x = data.template cast<double>();
    const auto cost = [&](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& group) {
        double total = 0;
        for (std::size_t c = 0; c < k; ++c) {
            Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.cols());
            std::size_t count = 0;
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (group[i] == c) {
                    mean += x.row(static_cast<Eigen::Index>(rows[i]));
                    ++count;
                }
            if (count == 0) continue;
            mean /= static_cast<double>(count);
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (group[i] == c) total += (x.row(static_cast<Eigen::Index>(rows[i])) - mean).squaredNorm();
        }
        return total;
    };

    double best = std::numeric_limits<double>::infinity();
    // trim masks over n bits with exactly `trimmed` bits set
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcountll(mask)) != trimmed) continue;
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < n; ++i)
            if (!(mask >> i & 1)) rows.push_back(i);
        std::vector<std::size_t> group(rows.size(), 0);
        while (true) {
            best = std::min(best, cost(rows, group));
            std::size_t pos = 0;
            while (pos < group.size() && group[pos] == k - 1) group[pos++] = 0;
            if (pos == group.size()) break;
            ++group[pos];
        }
    }
    return best;
}

}  // namespace txanomaly
