#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "halearn/clustering.hpp"
#include "halearn/error.hpp"
#include "halearn/least_squares.hpp"
#include "halearn/monomial.hpp"
#include "halearn/trajectory.hpp"

namespace halearn {

/// Polynomial vector field for the outputs: dx_o/dt = coeffs.row(o) . basis(valuation).
/// The basis ranges over every variable (inputs included).
struct FlowModel {
    MonomialBasis basis;
    Eigen::MatrixXd coeffs; // |O| x |basis|

    Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& valuation) const {
        return coeffs * basis.evaluate(valuation);
    }
};

/// Paired samples: full valuations and the output derivatives estimated at them.
struct RegressionSet {
    Eigen::MatrixXd states; // P x |X|
    Eigen::MatrixXd derivs; // P x |O|
    std::vector<std::size_t> used_segments;
};

/// Gathers (valuation, derivative) pairs from at most `max_segments` members
/// of the cluster: the longest ones, ties broken by input order.
inline RegressionSet build_regression_set(const Cluster& cluster, const std::vector<Segment>& segments,
                                          std::size_t max_segments) {
    require(max_segments >= 1, "regression set: max_segments must be >= 1");
    std::vector<std::size_t> chosen = cluster.members;
    std::stable_sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
        if (segments[a].size() != segments[b].size()) return segments[a].size() > segments[b].size();
        return a < b;
    });
    if (chosen.size() > max_segments) chosen.resize(max_segments);
    std::sort(chosen.begin(), chosen.end());

    Eigen::Index total = 0;
    for (auto k : chosen) total += segments[k].derivs.rows();
    if (total == 0) {
        fail(ErrorKind::pipeline, "cluster " + std::to_string(cluster.id) + " has no points with derivative estimates");
    }
    const auto& first = segments[chosen.front()];
    RegressionSet set;
    set.states.resize(total, static_cast<Eigen::Index>(first.source->dim()));
    set.derivs.resize(total, first.derivs.cols());
    set.used_segments = chosen;
    Eigen::Index row = 0;
    for (auto k : chosen) {
        const auto& s = segments[k];
        for (Eigen::Index r = 0; r < s.derivs.rows(); ++r, ++row) {
            set.states.row(row) = s.point(s.deriv_offset + static_cast<std::size_t>(r)).transpose();
            set.derivs.row(row) = s.derivs.row(r);
        }
    }
    return set;
}

struct FlowFit {
    FlowModel model;
    Eigen::VectorXd rms_residual; // per output
    bool regularized = false;
};

/// Ordinary least squares per output variable; ridge fallback when rank deficient.
inline FlowFit fit_flow_detailed(const RegressionSet& set, const MonomialBasis& basis) {
    require(static_cast<std::size_t>(set.states.cols()) == basis.n_vars(), "fit_flow: basis dimension mismatch");
    if (static_cast<std::size_t>(set.states.rows()) < basis.size()) {
        fail(ErrorKind::pipeline, "fit_flow: too few points (" + std::to_string(set.states.rows()) + ") for " +
                                      std::to_string(basis.size()) + " basis terms");
    }
    Eigen::MatrixXd a = basis.design_matrix(set.states);
    auto sol = solve_least_squares(a, set.derivs);
    FlowFit fit;
    fit.model.basis = basis;
    fit.model.coeffs = sol.coeffs.transpose();
    fit.regularized = sol.regularized;
    Eigen::MatrixXd resid = a * sol.coeffs - set.derivs;
    fit.rms_residual = (resid.colwise().squaredNorm() / static_cast<double>(resid.rows())).cwiseSqrt().transpose();
    return fit;
}

inline FlowModel fit_flow(const RegressionSet& set, const MonomialBasis& basis) {
    return fit_flow_detailed(set, basis).model;
}

/// Clusters holding the chronologically first retained segment of some trajectory.
inline std::set<int> identify_initial_locations(const std::vector<Cluster>& clusters,
                                                const std::vector<Segment>& segments) {
    auto labels = cluster_labels(clusters, segments.size());
    std::set<int> ids;
    const Trajectory* current = nullptr;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        if (segments[k].source.get() == current) continue;
        current = segments[k].source.get();
        if (labels[k] >= 0) ids.insert(labels[k]);
    }
    return ids;
}

} // namespace halearn
