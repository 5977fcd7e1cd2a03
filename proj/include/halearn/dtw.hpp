#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "halearn/error.hpp"

namespace halearn {

/// Sequence of 0-based index pairs (a_k, b_k) aligning two sequences.
using AlignmentPath = std::vector<std::pair<std::size_t, std::size_t>>;

struct DtwResult {
    double distance = 0.0;
    AlignmentPath path;
};

namespace detail {

// Rows of X and Y are the sequence elements.
inline double point_distance(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
                             Eigen::Index i, Eigen::Index j) {
    if (x.cols() == 1) return std::abs(x(i, 0) - y(j, 0));
    double s = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        double d = x(i, c) - y(j, c);
        s += d * d;
    }
    return std::sqrt(s);
}

inline void check_inputs(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y) {
    require(x.rows() > 0 && y.rows() > 0, "DTW: empty sequence");
    require(x.cols() == y.cols(), "DTW: dimension mismatch");
}

} // namespace detail

/// Minimum over alignment paths of the summed Euclidean point distances, with
/// an optimal path. Ties in the traceback prefer the diagonal step, then the
/// (0,1) step, then the (1,0) step.
inline DtwResult dtw_distance(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y) {
    detail::check_inputs(x, y);
    const Eigen::Index n = x.rows();
    const Eigen::Index m = y.rows();
    std::vector<double> acc(static_cast<std::size_t>(n * m));
    auto at = [&](Eigen::Index i, Eigen::Index j) -> double& { return acc[static_cast<std::size_t>(i * m + j)]; };
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            double d = detail::point_distance(x, y, i, j);
            if (i == 0 && j == 0) {
                at(i, j) = d;
            } else if (i == 0) {
                at(i, j) = d + at(i, j - 1);
            } else if (j == 0) {
                at(i, j) = d + at(i - 1, j);
            } else {
                at(i, j) = d + std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
            }
        }
    }
    DtwResult res;
    res.distance = at(n - 1, m - 1);
    Eigen::Index i = n - 1;
    Eigen::Index j = m - 1;
    res.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            double diag = at(i - 1, j - 1);
            double left = at(i, j - 1);
            double up = at(i - 1, j);
            if (diag <= left && diag <= up) {
                --i;
                --j;
            } else if (left <= up) {
                --j;
            } else {
                --i;
            }
        }
        res.path.emplace_back(i, j);
    }
    std::reverse(res.path.begin(), res.path.end());
    return res;
}

/// DTW distance in O(min) memory. Returns +inf as soon as the distance is
/// known to reach `bound`.
inline double dtw_distance_only(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
                                double bound = std::numeric_limits<double>::infinity()) {
    detail::check_inputs(x, y);
    const Eigen::Index n = x.rows();
    const Eigen::Index m = y.rows();
    std::vector<double> prev(static_cast<std::size_t>(m));
    std::vector<double> cur(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_min = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < m; ++j) {
            double d = detail::point_distance(x, y, i, j);
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else if (i == 0) {
                best = cur[static_cast<std::size_t>(j - 1)];
            } else if (j == 0) {
                best = prev[0];
            } else {
                best = std::min({prev[static_cast<std::size_t>(j - 1)], prev[static_cast<std::size_t>(j)],
                                 cur[static_cast<std::size_t>(j - 1)]});
            }
            cur[static_cast<std::size_t>(j)] = d + best;
            row_min = std::min(row_min, cur[static_cast<std::size_t>(j)]);
        }
        // Every path crosses every row, so the row minimum bounds the result from below.
        if (row_min >= bound) return std::numeric_limits<double>::infinity();
        std::swap(prev, cur);
    }
    return prev[static_cast<std::size_t>(m - 1)];
}

/// Pearson correlation of the two index sequences of a path; 0 when either is constant.
inline double path_correlation(const AlignmentPath& path) {
    const std::size_t l = path.size();
    if (l < 2) return 0.0;
    double ma = 0.0;
    double mb = 0.0;
    for (const auto& [a, b] : path) {
        ma += static_cast<double>(a);
        mb += static_cast<double>(b);
    }
    ma /= static_cast<double>(l);
    mb /= static_cast<double>(l);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (const auto& [a, b] : path) {
        double da = static_cast<double>(a) - ma;
        double db = static_cast<double>(b) - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline double dtw_correlation(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y) {
    return path_correlation(dtw_distance(x, y).path);
}

} // namespace halearn
