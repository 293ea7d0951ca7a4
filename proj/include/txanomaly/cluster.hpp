#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "txanomaly/errors.hpp"
#include "txanomaly/parallel.hpp"
#include "txanomaly/random.hpp"

namespace txanomaly {

struct TrimmedKMeansConfig {
    std::size_t k = 8;
    double alpha = 0.01;
    std::size_t n_starts = 10;
    std::size_t max_iter = 100;
    double tol = 1e-9;
    std::uint64_t seed = 42;
    unsigned threads = 1;  // never changes results
};

/// ceil(alpha * n), snapping products that land within floating noise of an integer
/// (0.07 * 100 evaluates to 7.000000000000001).
inline std::size_t trim_count(double alpha, std::size_t n) {
    const double raw = alpha * static_cast<double>(n);
    const double nearest = std::round(raw);
    if (std::abs(raw - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(raw));
}

/// Data-independent parameter checks. Throws ConfigError.
inline void validate_parameters(const TrimmedKMeansConfig& cfg) {
    if (cfg.k < 1) throw ConfigError("k must be at least 1");
    if (!(cfg.alpha >= 0.0 && cfg.alpha < 1.0))
        throw ConfigError("alpha must lie in [0, 1), got " + std::to_string(cfg.alpha));
    if (cfg.n_starts < 1) throw ConfigError("n_starts must be at least 1");
    if (cfg.max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
}

/// Throws ConfigError when the configuration cannot be run on n rows.
inline void validate_config(const TrimmedKMeansConfig& cfg, std::size_t n) {
    validate_parameters(cfg);
    const std::size_t trimmed = trim_count(cfg.alpha, n);
    if (n < trimmed || n - trimmed < cfg.k)
        throw ConfigError("infeasible clustering: " + std::to_string(n) + " rows, " +
                          std::to_string(trimmed) + " trimmed, k=" + std::to_string(cfg.k));
}

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct ClusterModel {
    RowMatrix<Scalar> centers;  // row c is cluster label c + 1; rows in lexicographic order
    Scalar objective = 0;
    std::size_t best_start = 0;
    std::size_t iterations = 0;
    std::vector<Scalar> objective_trace;  // per concentration step of the winning start
};

template <typename Scalar>
struct Assignment {
    std::vector<std::size_t> labels;  // 0 = trimmed, 1..k = cluster
    std::vector<Scalar> distances;    // Euclidean distance to the nearest (= assigned) center
};

template <typename Scalar>
struct ClusterResult {
    ClusterModel<Scalar> model;
    Assignment<Scalar> assignment;
};

namespace detail {

template <typename Scalar, typename Derived>
Scalar squared_distance(const Eigen::MatrixBase<Derived>& data, Eigen::Index row,
                        const RowMatrix<Scalar>& centers, Eigen::Index c) {
    Scalar s = 0;
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const Scalar d = Scalar(data(row, j)) - centers(c, j);
        s += d * d;
    }
    return s;
}

template <typename Scalar, typename Derived>
RowMatrix<Scalar> kmeans_plus_plus(const Eigen::MatrixBase<Derived>& data, std::size_t k,
                                   std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(data.rows());
    RowMatrix<Scalar> centers(static_cast<Eigen::Index>(k), data.cols());
    std::size_t pick = uniform_index(rng, n);
    centers.row(0) = data.row(static_cast<Eigen::Index>(pick)).template cast<Scalar>();
    std::vector<Scalar> d2(n);
    for (std::size_t i = 0; i < n; ++i)
        d2[i] = squared_distance<Scalar>(data, static_cast<Eigen::Index>(i), centers, 0);
    for (std::size_t c = 1; c < k; ++c) {
        Scalar total = 0;
        for (Scalar v : d2) total += v;
        if (total > Scalar(0)) {
            const Scalar target = Scalar(unit_uniform(rng)) * total;
            Scalar cumulative = 0;
            pick = n;
            std::size_t last_positive = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= Scalar(0)) continue;
                last_positive = i;
                cumulative += d2[i];
                if (cumulative > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) pick = last_positive;
        } else {
            pick = uniform_index(rng, n);
        }
        const auto ci = static_cast<Eigen::Index>(c);
        centers.row(ci) = data.row(static_cast<Eigen::Index>(pick)).template cast<Scalar>();
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], squared_distance<Scalar>(data, static_cast<Eigen::Index>(i), centers, ci));
    }
    return centers;
}

template <typename Scalar>
struct Step {
    std::vector<std::size_t> labels;  // 0 trimmed, else nearest center index + 1
    std::vector<Scalar> d2;           // squared distance to nearest center
    Scalar objective = 0;
};

// One concentration step: nearest centers, trim the largest distances, assign the rest.
template <typename Scalar, typename Derived>
Step<Scalar> concentrate(const Eigen::MatrixBase<Derived>& data, const RowMatrix<Scalar>& centers,
                         std::size_t trimmed, unsigned threads) {
    const auto n = static_cast<std::size_t>(data.rows());
    const auto k = centers.rows();
    Step<Scalar> s;
    s.labels.assign(n, 0);
    s.d2.assign(n, 0);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Scalar best = std::numeric_limits<Scalar>::infinity();
            Eigen::Index arg = 0;
            for (Eigen::Index c = 0; c < k; ++c) {
                const Scalar d = squared_distance<Scalar>(data, static_cast<Eigen::Index>(i), centers, c);
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            s.d2[i] = best;
            s.labels[i] = static_cast<std::size_t>(arg) + 1;
        }
    });
    if (trimmed > 0) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        // total order on (distance, index): equal distances keep the lower index
        const auto closer = [&](std::size_t a, std::size_t b) {
            return s.d2[a] < s.d2[b] || (s.d2[a] == s.d2[b] && a < b);
        };
        const auto cut = order.begin() + static_cast<std::ptrdiff_t>(n - trimmed);
        std::nth_element(order.begin(), cut, order.end(), closer);
        for (auto it = cut; it != order.end(); ++it) s.labels[*it] = 0;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (s.labels[i] != 0) s.objective += s.d2[i];
    return s;
}

template <typename Scalar, typename Derived>
RowMatrix<Scalar> update_centers(const Eigen::MatrixBase<Derived>& data, const Step<Scalar>& step,
                                 const RowMatrix<Scalar>& previous) {
    const auto k = previous.rows();
    RowMatrix<Scalar> sums = RowMatrix<Scalar>::Zero(k, data.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < step.labels.size(); ++i) {
        if (step.labels[i] == 0) continue;
        const auto c = static_cast<Eigen::Index>(step.labels[i] - 1);
        sums.row(c) += data.row(static_cast<Eigen::Index>(i)).template cast<Scalar>();
        ++counts[static_cast<std::size_t>(c)];
    }
    std::vector<bool> used(step.labels.size(), false);
    for (Eigen::Index c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
            sums.row(c) /= Scalar(counts[static_cast<std::size_t>(c)]);
            continue;
        }
        // empty cluster: reseed at the retained row farthest from its center
        std::size_t far = step.labels.size();
        for (std::size_t i = 0; i < step.labels.size(); ++i) {
            if (step.labels[i] == 0 || used[i]) continue;
            if (far == step.labels.size() || step.d2[i] > step.d2[far]) far = i;
        }
        if (far == step.labels.size()) {
            sums.row(c) = previous.row(c);
        } else {
            used[far] = true;
            sums.row(c) = data.row(static_cast<Eigen::Index>(far)).template cast<Scalar>();
        }
    }
    return sums;
}

}  // namespace detail

/// Trimmed within-cluster sum of squares: rows labeled 0 are excluded.
template <typename Scalar, typename Derived>
Scalar objective(const Eigen::MatrixBase<Derived>& data, const RowMatrix<Scalar>& centers,
                 const std::vector<std::size_t>& labels) {
    if (labels.size() != static_cast<std::size_t>(data.rows()))
        throw ValidationError("objective: one label per row required");
    if (centers.cols() != data.cols()) throw ValidationError("objective: dimension mismatch");
    Scalar total = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 0) continue;
        if (labels[i] > static_cast<std::size_t>(centers.rows()))
            throw ValidationError("objective: label " + std::to_string(labels[i]) + " out of range");
        total += detail::squared_distance<Scalar>(data, static_cast<Eigen::Index>(i), centers,
                                                  static_cast<Eigen::Index>(labels[i] - 1));
    }
    return total;
}

/// Trimmed K-means by concentration steps with seeded k-means++ multi-start. Exactly
/// trim_count(alpha, n) rows get label 0, and every trimmed row is at least as far from its
/// nearest center as any retained row. Centers are numbered 1..k in lexicographic order.
template <typename Derived, typename Scalar = typename Derived::Scalar>
ClusterResult<Scalar> trimmed_kmeans(const Eigen::MatrixBase<Derived>& data, const TrimmedKMeansConfig& cfg) {
    const auto n = static_cast<std::size_t>(data.rows());
    validate_config(cfg, n);
    if (!data.allFinite()) throw ValidationError("clustering input contains non-finite values");
    const std::size_t trimmed = trim_count(cfg.alpha, n);

    ClusterResult<Scalar> best;
    bool have_best = false;
    for (std::size_t start = 0; start < cfg.n_starts; ++start) {
        std::mt19937_64 rng(cfg.seed + start);
        RowMatrix<Scalar> centers = detail::kmeans_plus_plus<Scalar>(data, cfg.k, rng);
        detail::Step<Scalar> step;
        std::vector<Scalar> trace;
        std::vector<std::size_t> prev_labels;
        Scalar prev_obj = std::numeric_limits<Scalar>::infinity();
        std::size_t iter = 0;
        while (true) {
            step = detail::concentrate<Scalar>(data, centers, trimmed, cfg.threads);
            ++iter;
            if (step.objective > prev_obj * (Scalar(1) + Scalar(1e-12)) + std::numeric_limits<Scalar>::min())
                throw std::logic_error("trimmed_kmeans: objective increased between concentration steps");
            trace.push_back(step.objective);
            const bool unchanged = step.labels == prev_labels;
            const bool stalled = std::isfinite(prev_obj) && (prev_obj - step.objective) < Scalar(cfg.tol) * prev_obj;
            if (unchanged || stalled || iter >= cfg.max_iter) break;
            centers = detail::update_centers<Scalar>(data, step, centers);
            prev_obj = step.objective;
            prev_labels = step.labels;
        }
        if (!have_best || step.objective < best.model.objective) {
            have_best = true;
            best.model.centers = std::move(centers);
            best.model.objective = step.objective;
            best.model.best_start = start;
            best.model.iterations = iter;
            best.model.objective_trace = std::move(trace);
            best.assignment.labels = std::move(step.labels);
            best.assignment.distances.resize(n);
            for (std::size_t i = 0; i < n; ++i) best.assignment.distances[i] = std::sqrt(step.d2[i]);
        }
    }

    // Renumber clusters by lexicographic order of their centers.
    const auto k = static_cast<std::size_t>(best.model.centers.rows());
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& C = best.model.centers;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (Eigen::Index j = 0; j < C.cols(); ++j) {
            const auto ai = static_cast<Eigen::Index>(a), bi = static_cast<Eigen::Index>(b);
            if (C(ai, j) != C(bi, j)) return C(ai, j) < C(bi, j);
        }
        return false;
    });
    RowMatrix<Scalar> sorted(C.rows(), C.cols());
    std::vector<std::size_t> new_label(k + 1, 0);
    for (std::size_t r = 0; r < k; ++r) {
        sorted.row(static_cast<Eigen::Index>(r)) = C.row(static_cast<Eigen::Index>(order[r]));
        new_label[order[r] + 1] = r + 1;
    }
    best.model.centers = std::move(sorted);
    for (auto& l : best.assignment.labels) l = new_label[l];
    return best;
}

/// Plain Lloyd K-means: trimmed_kmeans with nothing trimmed.
template <typename Derived, typename Scalar = typename Derived::Scalar>
ClusterResult<Scalar> lloyd_kmeans(const Eigen::MatrixBase<Derived>& data, TrimmedKMeansConfig cfg) {
    cfg.alpha = 0.0;
    return trimmed_kmeans(data, cfg);
}

}  // namespace txanomaly
