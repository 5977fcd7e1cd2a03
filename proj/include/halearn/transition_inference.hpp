#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "halearn/automaton.hpp"
#include "halearn/clustering.hpp"
#include "halearn/error.hpp"
#include "halearn/least_squares.hpp"
#include "halearn/monomial.hpp"
#include "halearn/trajectory.hpp"

namespace halearn {

/// Points around a segment boundary: second-last and last sample of a segment
/// and the first sample of its successor in the same trajectory.
struct ConnectionTriple {
    Eigen::VectorXd pre;
    Eigen::VectorXd exit;
    Eigen::VectorXd entry;
    double t_pre = 0.0;
    double t_exit = 0.0;
    double t_entry = 0.0;
};

using ClusterPair = std::pair<int, int>;
using TripleMap = std::map<ClusterPair, std::vector<ConnectionTriple>>;

/// One triple per pair of consecutive retained segments of a trajectory,
/// filed under (cluster of the earlier segment, cluster of the later one).
/// Segments of one trajectory must be contiguous and chronological in `segments`.
inline TripleMap collect_connection_triples(const std::vector<Cluster>& clusters,
                                            const std::vector<Segment>& segments) {
    auto labels = cluster_labels(clusters, segments.size());
    TripleMap out;
    for (std::size_t k = 0; k + 1 < segments.size(); ++k) {
        const auto& a = segments[k];
        const auto& b = segments[k + 1];
        if (a.source != b.source) continue;
        require(a.end < b.start, "connection triples: segments out of chronological order");
        require(labels[k] >= 0 && labels[k + 1] >= 0, "connection triples: unclustered segment");
        ConnectionTriple t;
        t.pre = a.point(a.size() - 2);
        t.exit = a.point(a.size() - 1);
        t.entry = b.point(0);
        t.t_pre = a.time(a.size() - 2);
        t.t_exit = a.time(a.size() - 1);
        t.t_entry = b.time(0);
        out[{labels[k], labels[k + 1]}].push_back(std::move(t));
    }
    return out;
}

struct SvmParams {
    long iterations = 100000;
    double regularization = 1e-3;
};

namespace detail {

inline bool same_point_sets(std::vector<Eigen::VectorXd> a, std::vector<Eigen::VectorXd> b) {
    auto less = [](const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
        return std::lexicographical_compare(p.data(), p.data() + p.size(), q.data(), q.data() + q.size());
    };
    std::sort(a.begin(), a.end(), less);
    std::sort(b.begin(), b.end(), less);
    a.erase(std::unique(a.begin(), a.end()), a.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return a == b;
}

} // namespace detail

/// Soft-margin linear SVM over the polynomial features of the second-last
/// points (guard violated) and the last points (guard satisfied). Features are
/// standardized, trained by deterministic full-batch projected sub-gradient
/// descent on the regularized hinge loss, and folded back into raw units.
inline Guard fit_guard(const std::vector<ConnectionTriple>& triples, int guard_degree, const SvmParams& svm = {}) {
    require(!triples.empty(), "fit_guard: no connection triples");
    require(guard_degree >= 1, "fit_guard: guard degree must be >= 1");
    require(svm.iterations >= 1 && svm.regularization > 0.0, "fit_guard: bad SVM parameters");
    const auto nx = static_cast<std::size_t>(triples.front().exit.size());
    MonomialBasis basis(nx, guard_degree);

    std::vector<Eigen::VectorXd> violated;
    std::vector<Eigen::VectorXd> satisfied;
    for (const auto& t : triples) {
        violated.push_back(t.pre);
        satisfied.push_back(t.exit);
    }
    if (detail::same_point_sets(violated, satisfied)) fail(ErrorKind::pipeline, "inseparable guard data");

    const auto n = static_cast<Eigen::Index>(2 * triples.size());
    const auto d = static_cast<Eigen::Index>(basis.size()) - 1;
    Eigen::MatrixXd z(n, d);
    Eigen::VectorXd y(n);
    for (std::size_t k = 0; k < triples.size(); ++k) {
        auto r = static_cast<Eigen::Index>(2 * k);
        z.row(r) = basis.evaluate(violated[k]).tail(d).transpose();
        y(r) = 1.0;
        z.row(r + 1) = basis.evaluate(satisfied[k]).tail(d).transpose();
        y(r + 1) = -1.0;
    }
    Eigen::VectorXd mean = z.colwise().mean().transpose();
    Eigen::VectorXd scale(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double var = (z.col(j).array() - mean(j)).square().mean();
        scale(j) = var > 0.0 ? std::sqrt(var) : 0.0;
        if (scale(j) > 0.0) {
            z.col(j) = (z.col(j).array() - mean(j)) / scale(j);
        } else {
            z.col(j).setZero();
        }
    }
    if (scale.maxCoeff() == 0.0) fail(ErrorKind::pipeline, "inseparable guard data");

    // Bias is treated as a weight on a constant feature.
    const double lambda = svm.regularization;
    const double radius = 1.0 / std::sqrt(lambda);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(d + 1);
    long averaged = 0;
    const long burn_in = svm.iterations / 2;
    Eigen::VectorXd grad(d + 1);
    for (long t = 1; t <= svm.iterations; ++t) {
        grad.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            double f = z.row(i).dot(w.head(d)) + w(d);
            if (y(i) * f < 1.0) {
                grad.head(d) += y(i) * z.row(i).transpose();
                grad(d) += y(i);
            }
        }
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        w = (1.0 - eta * lambda) * w + (eta / static_cast<double>(n)) * grad;
        double norm = w.norm();
        if (norm > radius) w *= radius / norm;
        if (t > burn_in) {
            avg += w;
            ++averaged;
        }
    }
    w = avg / static_cast<double>(averaged);

    Halfspace h;
    h.weights.assign(static_cast<std::size_t>(d), 0.0);
    h.bias = w(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (scale(j) == 0.0) continue;
        h.weights[static_cast<std::size_t>(j)] = w(j) / scale(j);
        h.bias -= w(j) * mean(j) / scale(j);
    }
    if (std::all_of(h.weights.begin(), h.weights.end(), [](double v) { return v == 0.0; })) {
        fail(ErrorKind::pipeline, "inseparable guard data");
    }
    Guard g;
    g.basis = basis;
    g.terms.push_back(h);
    std::size_t correct = 0;
    for (std::size_t k = 0; k < triples.size(); ++k) {
        if (!g.satisfied(violated[k])) ++correct;
        if (g.satisfied(satisfied[k])) ++correct;
    }
    g.training_accuracy = static_cast<double>(correct) / static_cast<double>(2 * triples.size());
    return g;
}

struct AssignmentFit {
    Assignment assignment;
    std::vector<std::string> warnings;
};

/// Affine reset from the last point of a segment to the first point of its
/// successor. `annotations` is indexed by variable; annotations on inputs are ignored.
inline AssignmentFit fit_assignment_detailed(const std::vector<ConnectionTriple>& triples, const VariableRoles& roles,
                                             const std::vector<VariableAnnotation>& annotations) {
    require(!triples.empty(), "fit_assignment: no connection triples");
    require(annotations.empty() || annotations.size() == roles.size(),
            "fit_assignment: one annotation per variable expected");
    const auto nx = static_cast<Eigen::Index>(roles.size());
    const auto no = static_cast<Eigen::Index>(roles.outputs.size());
    const auto m = static_cast<Eigen::Index>(triples.size());
    AssignmentFit fit;
    Assignment& a = fit.assignment;
    a.matrix = Eigen::MatrixXd::Zero(no, nx);
    a.intercept = Eigen::VectorXd::Zero(no);
    a.tags.assign(static_cast<std::size_t>(no), "none");

    auto annotation_of = [&](std::size_t var) {
        return annotations.empty() ? VariableAnnotation{} : annotations[var];
    };

    std::vector<Eigen::Index> free_rows;
    for (Eigen::Index k = 0; k < no; ++k) {
        const auto var = roles.outputs[static_cast<std::size_t>(k)];
        const auto ann = annotation_of(var);
        a.tags[static_cast<std::size_t>(k)] = ann.to_string();
        switch (ann.kind) {
        case AnnotationKind::no_assignment:
            a.matrix(k, static_cast<Eigen::Index>(var)) = 1.0;
            break;
        case AnnotationKind::constant_pool: {
            require(!ann.pool.empty(), "fit_assignment: empty constant pool for '" + roles.names[var] + "'");
            std::vector<std::size_t> counts(ann.pool.size(), 0);
            for (const auto& t : triples) {
                double v = t.entry(static_cast<Eigen::Index>(var));
                std::size_t best = 0;
                for (std::size_t p = 1; p < ann.pool.size(); ++p) {
                    if (std::abs(ann.pool[p] - v) < std::abs(ann.pool[best] - v)) best = p;
                }
                ++counts[best];
            }
            std::size_t pick = 0;
            for (std::size_t p = 1; p < ann.pool.size(); ++p) {
                if (counts[p] > counts[pick] || (counts[p] == counts[pick] && ann.pool[p] < ann.pool[pick])) pick = p;
            }
            a.intercept(k) = ann.pool[pick];
            break;
        }
        case AnnotationKind::unconstrained:
            free_rows.push_back(k);
            break;
        }
    }
    if (free_rows.empty()) return fit;

    Eigen::MatrixXd design(m, nx + 1);
    Eigen::MatrixXd target(m, static_cast<Eigen::Index>(free_rows.size()));
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto& t = triples[static_cast<std::size_t>(r)];
        design.row(r).head(nx) = t.exit.transpose();
        design(r, nx) = 1.0;
        for (std::size_t c = 0; c < free_rows.size(); ++c) {
            target(r, static_cast<Eigen::Index>(c)) =
                t.entry(static_cast<Eigen::Index>(roles.outputs[static_cast<std::size_t>(free_rows[c])]));
        }
    }
    auto sol = solve_least_squares(design, target);
    if (sol.regularized) {
        fit.warnings.push_back("assignment fit under-determined (" + std::to_string(m) + " triples, " +
                               std::to_string(nx + 1) + " unknowns, rank " + std::to_string(sol.rank) +
                               "); ridge-regularized");
    }
    for (std::size_t c = 0; c < free_rows.size(); ++c) {
        a.matrix.row(free_rows[c]) = sol.coeffs.col(static_cast<Eigen::Index>(c)).head(nx).transpose();
        a.intercept(free_rows[c]) = sol.coeffs(nx, static_cast<Eigen::Index>(c));
    }
    return fit;
}

inline Assignment fit_assignment(const std::vector<ConnectionTriple>& triples, const VariableRoles& roles,
                                 const std::vector<VariableAnnotation>& annotations) {
    return fit_assignment_detailed(triples, roles, annotations).assignment;
}

/// One location per cluster (invariant true), one transition per connected cluster pair.
inline HybridAutomaton assemble_automaton(const VariableRoles& roles, const std::vector<Cluster>& clusters,
                                          const std::map<int, FlowModel>& flows, const std::set<int>& initial_ids,
                                          const std::map<ClusterPair, Guard>& guards,
                                          const std::map<ClusterPair, Assignment>& assignments,
                                          const std::map<int, std::vector<ValueRange>>& initial_ranges = {}) {
    HybridAutomaton ha;
    ha.roles = roles;
    for (const auto& c : clusters) {
        auto it = flows.find(c.id);
        if (it == flows.end()) fail(ErrorKind::pipeline, "assemble: cluster " + std::to_string(c.id) + " has no flow");
        Location l;
        l.id = c.id;
        l.name = "loc" + std::to_string(c.id);
        l.flow = it->second;
        ha.locations.push_back(std::move(l));
    }
    for (const auto& [pair, guard] : guards) {
        auto it = assignments.find(pair);
        if (it == assignments.end()) {
            fail(ErrorKind::pipeline, "assemble: transition " + std::to_string(pair.first) + " -> " +
                                          std::to_string(pair.second) + " has no assignment");
        }
        ha.transitions.push_back(Transition{pair.first, pair.second, guard, it->second});
    }
    for (const auto& [pair, asg] : assignments) {
        if (guards.count(pair) == 0) {
            fail(ErrorKind::pipeline, "assemble: transition " + std::to_string(pair.first) + " -> " +
                                          std::to_string(pair.second) + " has no guard");
        }
    }
    for (int id : initial_ids) {
        InitialCondition ic;
        ic.location = id;
        if (auto it = initial_ranges.find(id); it != initial_ranges.end()) ic.ranges = it->second;
        ha.initial.push_back(std::move(ic));
    }
    ha.validate();
    return ha;
}

} // namespace halearn
