#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "halearn/dtw.hpp"

using namespace halearn;

namespace {

Eigen::MatrixXd col(std::initializer_list<double> v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}

double cost(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const AlignmentPath& p) {
    double s = 0.0;
    for (auto [a, b] : p) {
        s += (x.row(static_cast<Eigen::Index>(a)) - y.row(static_cast<Eigen::Index>(b))).norm();
    }
    return s;
}

// Enumerates every alignment path by depth-first search.
double brute_force(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto m = static_cast<std::size_t>(y.rows());
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
        acc += (x.row(static_cast<Eigen::Index>(i)) - y.row(static_cast<Eigen::Index>(j))).norm();
        if (i + 1 == n && j + 1 == m) {
            best = std::min(best, acc);
            return;
        }
        if (i + 1 < n) walk(i + 1, j, acc);
        if (j + 1 < m) walk(i, j + 1, acc);
        if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
    };
    walk(0, 0, 0.0);
    return best;
}

void expect_valid_path(const AlignmentPath& p, std::size_t n, std::size_t m) {
    ASSERT_FALSE(p.empty());
    EXPECT_EQ(p.front(), std::make_pair(std::size_t{0}, std::size_t{0}));
    EXPECT_EQ(p.back(), std::make_pair(n - 1, m - 1));
    EXPECT_GE(p.size(), std::max(n, m));
    EXPECT_LE(p.size(), n + m - 1);
    for (std::size_t k = 1; k < p.size(); ++k) {
        auto di = p[k].first - p[k - 1].first;
        auto dj = p[k].second - p[k - 1].second;
        EXPECT_TRUE((di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1));
    }
}

Eigen::MatrixXd random_seq(std::mt19937_64& rng, int len, int dim) {
    std::uniform_int_distribution<int> u(-2, 2);
    Eigen::MatrixXd s(len, dim);
    for (int i = 0; i < len; ++i) {
        for (int d = 0; d < dim; ++d) s(i, d) = u(rng);
    }
    return s;
}

} // namespace

TEST(Dtw, SinglePointAgainstThree) {
    auto r = dtw_distance(col({0}), col({1, 2, 3}));
    EXPECT_DOUBLE_EQ(r.distance, 6.0);
    AlignmentPath expect{{0, 0}, {0, 1}, {0, 2}};
    EXPECT_EQ(r.path, expect);
}

TEST(Dtw, RepeatedValueAlignsAtZeroCost) {
    auto r = dtw_distance(col({0, 1}), col({0, 0, 1}));
    EXPECT_DOUBLE_EQ(r.distance, 0.0);
    AlignmentPath expect{{0, 0}, {0, 1}, {1, 2}};
    EXPECT_EQ(r.path, expect);
    EXPECT_NEAR(path_correlation(r.path), std::sqrt(3.0) / 2.0, 1e-12);
}

TEST(Dtw, IdenticalSequences) {
    auto x = col({1, 3, 2, 5});
    auto r = dtw_distance(x, x);
    EXPECT_EQ(r.distance, 0.0);
    EXPECT_EQ(r.path.size(), 4u);
    EXPECT_DOUBLE_EQ(path_correlation(r.path), 1.0);
}

TEST(Dtw, MultivariateUsesEuclideanNorm) {
    Eigen::MatrixXd x(1, 2), y(1, 2);
    x << 0, 0;
    y << 3, 4;
    EXPECT_DOUBLE_EQ(dtw_distance(x, y).distance, 5.0);
}

TEST(Dtw, InputErrors) {
    EXPECT_THROW(dtw_distance(Eigen::MatrixXd(0, 1), col({1})), Error);
    EXPECT_THROW(dtw_distance(Eigen::MatrixXd::Zero(2, 2), col({1})), Error);
    EXPECT_THROW(dtw_distance_only(Eigen::MatrixXd(0, 1), col({1})), Error);
}

TEST(Dtw, DegenerateCorrelationIsZero) {
    EXPECT_EQ(path_correlation({{0, 0}}), 0.0);
    EXPECT_EQ(path_correlation({{0, 0}, {0, 1}, {0, 2}}), 0.0);
    EXPECT_EQ(path_correlation({}), 0.0);
}

TEST(Dtw, MatchesBruteForceEnumeration) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const int m = 1 + static_cast<int>(rng() % 6);
        const int dim = 1 + trial % 2;
        auto x = random_seq(rng, n, dim);
        auto y = random_seq(rng, m, dim);
        auto r = dtw_distance(x, y);
        const double ref = brute_force(x, y);
        EXPECT_NEAR(r.distance, ref, 1e-12);
        expect_valid_path(r.path, static_cast<std::size_t>(n), static_cast<std::size_t>(m));
        EXPECT_NEAR(cost(x, y, r.path), r.distance, 1e-12);
        EXPECT_NEAR(dtw_distance_only(x, y), r.distance, 1e-12);
    }
}

TEST(Dtw, Properties) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 30);
        const int m = 1 + static_cast<int>(rng() % 30);
        Eigen::MatrixXd x(n, 2), y(m, 2);
        for (int i = 0; i < n; ++i) x.row(i) << u(rng), u(rng);
        for (int i = 0; i < m; ++i) y.row(i) << u(rng), u(rng);

        auto r = dtw_distance(x, y);
        EXPECT_GE(r.distance, 0.0);
        EXPECT_EQ(dtw_distance(x, x).distance, 0.0);
        EXPECT_NEAR(r.distance, dtw_distance(y, x).distance, 1e-9);
        expect_valid_path(r.path, static_cast<std::size_t>(n), static_cast<std::size_t>(m));
        double corr = path_correlation(r.path);
        EXPECT_GE(corr, -1.0);
        EXPECT_LE(corr, 1.0);

        // equal lengths: the diagonal path is one candidate
        if (n == m) {
            double diag = 0.0;
            for (int i = 0; i < n; ++i) diag += (x.row(i) - y.row(i)).norm();
            EXPECT_LE(r.distance, diag + 1e-12);
        }

        // early abandoning never changes a result that is below the bound
        EXPECT_NEAR(dtw_distance_only(x, y), r.distance, 1e-9);
        EXPECT_NEAR(dtw_distance_only(x, y, r.distance * 1.01 + 1e-9), r.distance, 1e-9);
        // above the bound the result is either abandoned or still exact
        double low = dtw_distance_only(x, y, r.distance * 0.99);
        EXPECT_TRUE(std::isinf(low) || std::abs(low - r.distance) < 1e-9);
        EXPECT_TRUE(std::isinf(dtw_distance_only(x, y, 0.0)));
    }
}

TEST(Dtw, TracebackTieBreakPrefersDiagonal) {
    // all-zero cost matrix: every path costs 0, the diagonal is chosen
    auto r = dtw_distance(col({1, 1, 1}), col({1, 1, 1}));
    AlignmentPath expect{{0, 0}, {1, 1}, {2, 2}};
    EXPECT_EQ(r.path, expect);
    // a 2x3 zero matrix: from (1,2) diag (0,1) and left (1,1) tie, diag wins
    auto r2 = dtw_distance(col({0, 0}), col({0, 0, 0}));
    AlignmentPath expect2{{0, 0}, {0, 1}, {1, 2}};
    EXPECT_EQ(r2.path, expect2);
}
