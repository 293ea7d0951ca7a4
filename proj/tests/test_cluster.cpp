#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "txanomaly/brute_force.hpp"
#include "txanomaly/cluster.hpp"
#include "txanomaly/errors.hpp"

using namespace txanomaly;
using Mat = RowMatrix<double>;

namespace {

Mat random_points(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mat m(n, d);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < d; ++c) m(r, c) = u(rng);
    return m;
}

void check_trim_and_separation(const ClusterResult<double>& res, std::size_t n, double alpha) {
    const auto& labels = res.assignment.labels;
    const auto& dist = res.assignment.distances;
    CHECK(static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0u)) == trim_count(alpha, n));
    double retained_max = 0, trimmed_min = INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == 0)
            trimmed_min = std::min(trimmed_min, dist[i]);
        else
            retained_max = std::max(retained_max, dist[i]);
    }
    CHECK(retained_max <= trimmed_min);
}

}  // namespace

TEST_CASE("trim count") {
    CHECK(trim_count(0.25, 4) == 1);
    CHECK(trim_count(0.1, 10) == 1);
    CHECK(trim_count(0.01, 10000) == 100);
    CHECK(trim_count(0.01, 10050) == 101);
    CHECK(trim_count(0.07, 100) == 7);
    CHECK(trim_count(0.0, 100) == 0);
    CHECK(trim_count(0.01, 1) == 1);
}

TEST_CASE("one-dimensional trimmed example matches the exhaustive oracle") {
    Mat x(4, 1);
    x << 0, 1, 2, 100;
    CHECK(brute_force_trimmed_kmeans(x, 1, 0.25) == doctest::Approx(2.0).epsilon(1e-12));
    TrimmedKMeansConfig cfg;
    cfg.k = 1;
    cfg.alpha = 0.25;
    const auto res = trimmed_kmeans(x, cfg);
    CHECK(res.assignment.labels == std::vector<std::size_t>{1, 1, 1, 0});
    CHECK(res.model.centers(0, 0) == 1.0);
    CHECK(res.model.objective == 2.0);
    CHECK(objective<double>(x, res.model.centers, res.assignment.labels) == 2.0);
}

TEST_CASE("symmetric two-cluster optimum") {
    Mat x(4, 2);
    x << 0, 0, 0, 1, 10, 0, 10, 1;
    TrimmedKMeansConfig cfg;
    cfg.k = 2;
    cfg.alpha = 0;
    const auto res = trimmed_kmeans(x, cfg);
    CHECK(res.model.objective == 1.0);
    CHECK(res.model.centers(0, 0) == 0);
    CHECK(res.model.centers(0, 1) == 0.5);
    CHECK(res.model.centers(1, 0) == 10);
    CHECK(res.model.centers(1, 1) == 0.5);
    CHECK(res.assignment.labels == std::vector<std::size_t>{1, 1, 2, 2});
}

TEST_CASE("default settings give nine label categories") {
    std::mt19937_64 rng(3);
    const Mat x = random_points(rng, 500, 10);
    TrimmedKMeansConfig cfg;  // k = 8, alpha = 0.01
    cfg.n_starts = 3;
    const auto res = trimmed_kmeans(x, cfg);
    const auto max_label = *std::max_element(res.assignment.labels.begin(), res.assignment.labels.end());
    CHECK(max_label == 8);
    CHECK(res.model.centers.rows() == 8);
    check_trim_and_separation(res, 500, 0.01);
}

TEST_CASE("lloyd baseline special cases") {
    std::mt19937_64 rng(8);
    const Mat x = random_points(rng, 6, 3);
    TrimmedKMeansConfig cfg;
    cfg.alpha = 0.3;  // ignored

    cfg.k = 6;
    const auto all = lloyd_kmeans(x, cfg);
    CHECK(all.model.objective == 0);
    CHECK(std::count(all.assignment.labels.begin(), all.assignment.labels.end(), 0u) == 0);

    cfg.k = 1;
    const auto one = lloyd_kmeans(x, cfg);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    CHECK((one.model.centers.row(0) - mean).cwiseAbs().maxCoeff() <= 1e-12);
    const double ss = (x.rowwise() - mean).squaredNorm();
    CHECK(one.model.objective == doctest::Approx(ss).epsilon(1e-12));
}

TEST_CASE("objective function") {
    Mat x(3, 1);
    x << 1, 2, 9;
    Mat c(1, 1);
    c << 2;
    CHECK(objective<double>(x, c, {0, 0, 0}) == 0);
    CHECK(objective<double>(x, c, {0, 1, 0}) == 0);
    CHECK(objective<double>(x, c, {1, 1, 0}) == 1);
    CHECK_THROWS_AS(objective<double>(x, c, {2, 1, 0}), ValidationError);
    CHECK_THROWS_AS(objective<double>(x, c, {1, 1}), ValidationError);
}

TEST_CASE("brute force oracle closed forms and guards") {
    std::mt19937_64 rng(21);
    const Mat x = random_points(rng, 7, 2);
    const double ss = (x.rowwise() - x.colwise().mean()).squaredNorm();
    CHECK(brute_force_trimmed_kmeans(x, 1, 0.0) == doctest::Approx(ss).epsilon(1e-12));
    const Mat pair = random_points(rng, 2, 3);
    CHECK(brute_force_trimmed_kmeans(pair, 2, 0.0) == 0.0);
    CHECK_THROWS_AS(brute_force_trimmed_kmeans(random_points(rng, 13, 1), 1, 0.0), ConfigError);
    CHECK_THROWS_AS(brute_force_trimmed_kmeans(x, 3, 0.0), ConfigError);
    CHECK_THROWS_AS(brute_force_trimmed_kmeans(x, 1, 0.5), ConfigError);
}

TEST_CASE("configuration and input validation") {
    Mat x(4, 1);
    x << 0, 1, 2, 3;
    TrimmedKMeansConfig cfg;
    cfg.k = 1;
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(trimmed_kmeans(x, cfg), ConfigError);
    cfg.alpha = -0.1;
    CHECK_THROWS_AS(trimmed_kmeans(x, cfg), ConfigError);
    cfg.alpha = 0.5;
    cfg.k = 3;  // 4 rows - 2 trimmed < 3
    CHECK_THROWS_AS(trimmed_kmeans(x, cfg), ConfigError);
    cfg.k = 0;
    CHECK_THROWS_AS(trimmed_kmeans(x, cfg), ConfigError);
    cfg.k = 1;
    cfg.n_starts = 0;
    CHECK_THROWS_AS(trimmed_kmeans(x, cfg), ConfigError);
    cfg.n_starts = 1;
    cfg.tol = 0;
    CHECK_THROWS_AS(trimmed_kmeans(x, cfg), ConfigError);
    cfg.tol = 1e-9;
    x(2, 0) = NAN;
    CHECK_THROWS_AS(trimmed_kmeans(x, cfg), ValidationError);
}

TEST_CASE("trim ties retain the lower row index") {
    Mat x(5, 1);
    x << 0, 5, 1, -5, -1;
    Mat c(1, 1);
    c << 0;
    const auto step = detail::concentrate<double>(x, c, 1, 1);
    CHECK(step.labels == std::vector<std::size_t>{1, 1, 1, 0, 1});
    const auto two = detail::concentrate<double>(x, c, 3, 1);
    CHECK(two.labels == std::vector<std::size_t>{1, 0, 1, 0, 0});
}

TEST_CASE("duplicated points and empty clusters stay well-defined") {
    Mat x(8, 2);
    x.setZero();
    x.row(7) << 1, 1;
    TrimmedKMeansConfig cfg;
    cfg.k = 3;
    cfg.alpha = 0;
    const auto res = trimmed_kmeans(x, cfg);
    CHECK(res.model.objective == 0);
    CHECK(res.model.centers.allFinite());
}

TEST_CASE("random instances: invariants, oracle bound, reduction, determinism") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = static_cast<std::size_t>(4 + rng() % 8);
        const Mat x = random_points(rng, static_cast<Eigen::Index>(n), 2);
        TrimmedKMeansConfig cfg;
        cfg.k = 1 + rng() % 2;
        cfg.alpha = (rng() % 2) ? 0.1 : 0.2;
        cfg.n_starts = 5;
        cfg.seed = rng();
        if (n - trim_count(cfg.alpha, n) < cfg.k) continue;
        const auto res = trimmed_kmeans(x, cfg);
        check_trim_and_separation(res, n, cfg.alpha);

        const auto& trace = res.model.objective_trace;
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
        CHECK(res.model.objective == trace.back());
        CHECK(objective<double>(x, res.model.centers, res.assignment.labels) ==
              doctest::Approx(res.model.objective).epsilon(1e-12));
        if (trim_count(cfg.alpha, n) <= 2)
            CHECK(res.model.objective >= brute_force_trimmed_kmeans(x, cfg.k, cfg.alpha) - 1e-9);

        // centers come out in lexicographic order
        for (Eigen::Index r = 1; r < res.model.centers.rows(); ++r) {
            const auto prev = res.model.centers.row(r - 1), cur = res.model.centers.row(r);
            const bool ordered = !std::lexicographical_compare(cur.begin(), cur.end(), prev.begin(), prev.end());
            CHECK(ordered);
        }

        auto threaded = cfg;
        threaded.threads = 3;
        const auto again = trimmed_kmeans(x, threaded);
        CHECK(again.assignment.labels == res.assignment.labels);
        CHECK(again.model.centers == res.model.centers);
        CHECK(again.model.objective == res.model.objective);

        auto zero = cfg;
        zero.alpha = 0;
        const auto a = trimmed_kmeans(x, zero);
        const auto b = lloyd_kmeans(x, cfg);
        CHECK(a.assignment.labels == b.assignment.labels);
        CHECK(a.assignment.distances == b.assignment.distances);
        CHECK(a.model.centers == b.model.centers);
    }
}

TEST_CASE("float scalar instantiation") {
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(4, 1);
    x << 0, 1, 2, 100;
    TrimmedKMeansConfig cfg;
    cfg.k = 1;
    cfg.alpha = 0.25;
    const auto res = trimmed_kmeans(x, cfg);
    static_assert(std::is_same_v<decltype(res.model.objective), float>);
    CHECK(res.model.objective == 2.0f);
}
