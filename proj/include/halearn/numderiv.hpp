#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "halearn/error.hpp"
#include "halearn/trajectory.hpp"

namespace halearn {

inline constexpr int kMaxBdfOrder = 8;

/// Backward differentiation stencil: x'(t_n) ~ (1/h) * sum_m coeffs[m] * x(t_{n-m}).
struct BdfStencil {
    int order = 0;
    std::vector<double> coeffs;
};

namespace detail {

// Derivative at the newest node of the Lagrange interpolant through the
// nodes 0, -1, ..., -M (unit spacing): c_0 = H_M, c_m = (-1)^m C(M,m) / m.
inline BdfStencil make_stencil(int order) {
    BdfStencil s;
    s.order = order;
    s.coeffs.assign(static_cast<std::size_t>(order) + 1, 0.0);
    double binom = 1.0;
    for (int m = 1; m <= order; ++m) {
        binom = binom * (order - m + 1) / m;
        s.coeffs[0] += 1.0 / m;
        s.coeffs[static_cast<std::size_t>(m)] = ((m % 2 == 0) ? 1.0 : -1.0) * binom / m;
    }
    return s;
}

inline const std::array<BdfStencil, kMaxBdfOrder + 1>& stencil_table() {
    static const auto table = [] {
        std::array<BdfStencil, kMaxBdfOrder + 1> t{};
        for (int m = 1; m <= kMaxBdfOrder; ++m) t[static_cast<std::size_t>(m)] = make_stencil(m);
        return t;
    }();
    return table;
}

} // namespace detail

inline const BdfStencil& bdf_coefficients(int order) {
    require(order >= 1 && order <= kMaxBdfOrder,
            "BDF order must be in [1, " + std::to_string(kMaxBdfOrder) + "], got " + std::to_string(order));
    return detail::stencil_table()[static_cast<std::size_t>(order)];
}

/// Backward estimate at row i of `values` (uses rows i, i-1, ..., i-M).
inline Eigen::VectorXd backward_bdf(const Eigen::Ref<const Eigen::MatrixXd>& values, double h, std::size_t i,
                                    int order) {
    const auto& st = bdf_coefficients(order);
    require(i >= static_cast<std::size_t>(order), "backward BDF: insufficient history at index " + std::to_string(i));
    require(i < static_cast<std::size_t>(values.rows()), "backward BDF: index out of range");
    Eigen::VectorXd d = Eigen::VectorXd::Zero(values.cols());
    for (int m = 0; m <= order; ++m) {
        d += st.coeffs[static_cast<std::size_t>(m)] * values.row(static_cast<Eigen::Index>(i) - m).transpose();
    }
    return d / h;
}

/// Forward estimate at row i (uses rows i, i+1, ..., i+M; mirrored stencil).
inline Eigen::VectorXd forward_bdf(const Eigen::Ref<const Eigen::MatrixXd>& values, double h, std::size_t i,
                                   int order) {
    const auto& st = bdf_coefficients(order);
    require(i + static_cast<std::size_t>(order) < static_cast<std::size_t>(values.rows()),
            "forward BDF: insufficient lookahead at index " + std::to_string(i));
    Eigen::VectorXd d = Eigen::VectorXd::Zero(values.cols());
    for (int m = 0; m <= order; ++m) {
        d += st.coeffs[static_cast<std::size_t>(m)] * values.row(static_cast<Eigen::Index>(i) + m).transpose();
    }
    return -d / h;
}

/// Trajectory overloads; every column of `traj` is differentiated, so pass an
/// output projection when only outputs are wanted.
inline Eigen::VectorXd backward_bdf(const Trajectory& traj, std::size_t i, int order) {
    return backward_bdf(traj.values(), traj.step(), i, order);
}

inline Eigen::VectorXd forward_bdf(const Trajectory& traj, std::size_t i, int order) {
    return forward_bdf(traj.values(), traj.step(), i, order);
}

/// ||u - v|| / (||u|| + ||v||), with rd(0, 0) = 0.
inline double relative_difference(const Eigen::Ref<const Eigen::VectorXd>& u,
                                  const Eigen::Ref<const Eigen::VectorXd>& v) {
    require(u.size() == v.size(), "relative difference: dimension mismatch");
    double denom = u.norm() + v.norm();
    if (denom == 0.0) return 0.0;
    return std::min(1.0, (u - v).norm() / denom);
}

} // namespace halearn
