#pragma once

#include <Eigen/Dense>

namespace halearn {

inline constexpr double kRidgeLambda = 1e-8;

struct LeastSquaresSolution {
    Eigen::MatrixXd coeffs; // columns x targets
    bool regularized = false;
    Eigen::Index rank = 0;
};

/// Solves min ||A X - B||_F column by column. Full column rank systems use a
/// column-pivoting QR; rank-deficient ones fall back to the ridge-regularized
/// normal equations (A^T A + lambda I) X = A^T B.
inline LeastSquaresSolution solve_least_squares(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                                const Eigen::Ref<const Eigen::MatrixXd>& b,
                                                double ridge = kRidgeLambda) {
    LeastSquaresSolution sol;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    sol.rank = qr.rank();
    if (a.rows() >= a.cols() && sol.rank == a.cols()) {
        sol.coeffs = qr.solve(b);
        return sol;
    }
    sol.regularized = true;
    Eigen::MatrixXd normal = a.transpose() * a;
    normal.diagonal().array() += ridge;
    sol.coeffs = normal.ldlt().solve(a.transpose() * b);
    return sol;
}

} // namespace halearn
