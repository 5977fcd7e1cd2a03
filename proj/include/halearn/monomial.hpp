#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "halearn/error.hpp"

namespace halearn {

/// All monomials of total degree <= `degree` in `n_vars` variables, graded
/// (by total degree) and lexicographically descending inside each degree. The
/// constant monomial is always element 0.
class MonomialBasis {
public:
    MonomialBasis() = default;

    MonomialBasis(std::size_t n_vars, int degree) : n_vars_(n_vars), degree_(degree) {
        require(degree >= 0, "monomial basis: negative degree");
        std::vector<int> e(n_vars, 0);
        for (int d = 0; d <= degree; ++d) {
            std::function<void(std::size_t, int)> rec = [&](std::size_t var, int left) {
                if (var + 1 == n_vars || n_vars == 0) {
                    if (n_vars == 0) {
                        if (left == 0) exponents_.push_back(e);
                        return;
                    }
                    e[var] = left;
                    exponents_.push_back(e);
                    e[var] = 0;
                    return;
                }
                for (int k = left; k >= 0; --k) {
                    e[var] = k;
                    rec(var + 1, left - k);
                }
                e[var] = 0;
            };
            rec(0, d);
        }
    }

    /// Basis from an explicit exponent list (as stored in model files).
    MonomialBasis(std::size_t n_vars, int degree, std::vector<std::vector<int>> exponents)
        : n_vars_(n_vars), degree_(degree), exponents_(std::move(exponents)) {
        for (const auto& e : exponents_) {
            require(e.size() == n_vars_, "monomial basis: exponent vector has wrong length");
            int total = 0;
            for (int k : e) {
                require(k >= 0, "monomial basis: negative exponent");
                total += k;
            }
            require(total <= degree_, "monomial basis: exponent exceeds degree");
        }
    }

    std::size_t n_vars() const { return n_vars_; }
    int degree() const { return degree_; }
    std::size_t size() const { return exponents_.size(); }
    const std::vector<std::vector<int>>& exponents() const { return exponents_; }

    Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
        require(static_cast<std::size_t>(x.size()) == n_vars_, "monomial basis: valuation has wrong dimension");
        Eigen::VectorXd f(static_cast<Eigen::Index>(exponents_.size()));
        for (std::size_t j = 0; j < exponents_.size(); ++j) {
            double v = 1.0;
            for (std::size_t k = 0; k < n_vars_; ++k) {
                for (int p = 0; p < exponents_[j][k]; ++p) v *= x(static_cast<Eigen::Index>(k));
            }
            f(static_cast<Eigen::Index>(j)) = v;
        }
        return f;
    }

    /// Rows of `points` mapped through the basis.
    Eigen::MatrixXd design_matrix(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
        Eigen::MatrixXd a(points.rows(), static_cast<Eigen::Index>(exponents_.size()));
        for (Eigen::Index r = 0; r < points.rows(); ++r) a.row(r) = evaluate(points.row(r).transpose()).transpose();
        return a;
    }

    /// Human-readable name of monomial j, e.g. "x*v^2".
    std::string term_name(std::size_t j, const std::vector<std::string>& names) const {
        std::string s;
        for (std::size_t k = 0; k < n_vars_; ++k) {
            int p = exponents_.at(j)[k];
            if (p == 0) continue;
            if (!s.empty()) s += "*";
            s += k < names.size() ? names[k] : "x" + std::to_string(k);
            if (p > 1) s += "^" + std::to_string(p);
        }
        return s.empty() ? "1" : s;
    }

    friend bool operator==(const MonomialBasis&, const MonomialBasis&) = default;

private:
    std::size_t n_vars_ = 0;
    int degree_ = 0;
    std::vector<std::vector<int>> exponents_;
};

} // namespace halearn
