#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "halearn/dtw.hpp"
#include "halearn/error.hpp"
#include "halearn/numderiv.hpp"
#include "halearn/parallel.hpp"
#include "halearn/trajectory.hpp"

namespace halearn {

/// Which per-sample vectors of a segment are compared.
enum class ShapeView { derivatives, values };

struct ClusterParams {
    double distance_threshold = 1.0;
    double correlation_threshold = 0.8;
    ShapeView view = ShapeView::derivatives;
    // Divide the DTW sum by the alignment path length, so segments of
    // different durations are judged on a per-sample scale.
    bool normalize = true;
};

/// Output-space sequence a segment is compared on. Short segments without
/// cached derivatives fall back to a lower-order stencil over their own points.
inline Eigen::MatrixXd segment_shape(const Segment& seg, ShapeView view) {
    if (view == ShapeView::values) return seg.output_values();
    if (seg.derivs.rows() > 0) return seg.derivs;
    const Eigen::MatrixXd out = seg.output_values();
    const int order = static_cast<int>(std::min<std::size_t>(seg.size() - 1, kMaxBdfOrder));
    Eigen::MatrixXd d(out.rows() - order, out.cols());
    for (Eigen::Index k = 0; k < d.rows(); ++k) {
        d.row(k) = backward_bdf(out, seg.source->step(), static_cast<std::size_t>(k + order), order).transpose();
    }
    return d;
}

/// Distance and correlation between two shapes under `params`; distance is
/// +inf when it provably exceeds the threshold (correlation then not computed).
inline std::pair<double, double> shape_similarity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                                  const ClusterParams& params) {
    const double inf = std::numeric_limits<double>::infinity();
    if (!params.normalize) {
        double d = dtw_distance_only(a, b, params.distance_threshold);
        if (!(d < params.distance_threshold)) return {inf, 0.0};
        return {d, dtw_correlation(a, b)};
    }
    // a path has at most |a|+|b|-1 steps, which bounds the raw sum
    const double bound = params.distance_threshold * static_cast<double>(a.rows() + b.rows() - 1);
    if (!(dtw_distance_only(a, b, bound) < bound)) return {inf, 0.0};
    auto full = dtw_distance(a, b);
    return {full.distance / static_cast<double>(full.path.size()), path_correlation(full.path)};
}

/// Members index into the segment list handed to cluster_segments.
struct Cluster {
    int id = 0;
    std::size_t seed = 0;
    std::vector<std::size_t> members;
};

/// Seed-based clustering: the first unassigned segment seeds a cluster that
/// absorbs every unassigned segment whose shape is within the distance threshold
/// of the seed and whose alignment correlation exceeds the correlation threshold.
inline std::vector<Cluster> cluster_segments(const std::vector<Segment>& segments, const ClusterParams& params,
                                             std::size_t threads = 1) {
    require(!std::isnan(params.distance_threshold) && params.distance_threshold >= 0.0,
            "clustering: distance threshold must be non-negative");
    std::vector<Eigen::MatrixXd> shapes;
    shapes.reserve(segments.size());
    for (const auto& s : segments) shapes.push_back(segment_shape(s, params.view));

    std::vector<char> assigned(segments.size(), 0);
    std::vector<Cluster> clusters;
    for (std::size_t seed = 0; seed < segments.size(); ++seed) {
        if (assigned[seed]) continue;
        Cluster c;
        c.id = static_cast<int>(clusters.size());
        c.seed = seed;
        std::vector<std::size_t> pool;
        for (std::size_t k = seed + 1; k < segments.size(); ++k) {
            if (!assigned[k]) pool.push_back(k);
        }
        std::vector<char> accept(pool.size(), 0);
        parallel_for(pool.size(), threads, [&](std::size_t p) {
            auto [d, r] = shape_similarity(shapes[seed], shapes[pool[p]], params);
            accept[p] = d < params.distance_threshold && r > params.correlation_threshold;
        });
        c.members.push_back(seed);
        assigned[seed] = 1;
        for (std::size_t p = 0; p < pool.size(); ++p) {
            if (accept[p]) {
                c.members.push_back(pool[p]);
                assigned[pool[p]] = 1;
            }
        }
        clusters.push_back(std::move(c));
    }
    return clusters;
}

/// cluster id of every segment.
inline std::vector<int> cluster_labels(const std::vector<Cluster>& clusters, std::size_t n_segments) {
    std::vector<int> labels(n_segments, -1);
    for (const auto& c : clusters) {
        for (auto m : c.members) labels.at(m) = c.id;
    }
    return labels;
}

} // namespace halearn
