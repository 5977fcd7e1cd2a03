#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "halearn/error.hpp"
#include "halearn/numderiv.hpp"
#include "halearn/trajectory.hpp"

namespace halearn {

struct SegmentationParams {
    int order = 5;
    double fwd_bwd_threshold = 0.1;
    double bwd_bwd_threshold = 0.01;

    void validate() const {
        require(order >= 1 && order <= kMaxBdfOrder, "segmentation: BDF order out of range");
        require(fwd_bwd_threshold > 0.0 && fwd_bwd_threshold <= 1.0,
                "segmentation: forward/backward threshold must be in (0, 1]");
        require(bwd_bwd_threshold > 0.0 && bwd_bwd_threshold <= 1.0,
                "segmentation: backward/backward threshold must be in (0, 1]");
    }
};

inline constexpr std::size_t kMinSegmentPoints = 3;

/// Change points of one trajectory (0-based, ascending). Only output columns are examined.
inline std::vector<std::size_t> find_change_points(const Trajectory& traj, const SegmentationParams& params) {
    params.validate();
    const auto m = static_cast<std::size_t>(params.order);
    const std::size_t n = traj.size();
    if (n < 2 * m + 2) {
        fail(ErrorKind::invalid_argument, "trajectory '" + traj.id() + "' too short for segmentation: " +
                                              std::to_string(n) + " samples, need at least " +
                                              std::to_string(2 * m + 2));
    }
    const Eigen::MatrixXd out = traj.output_values();
    const double h = traj.step();

    // Interior indices with a full stencil on both sides: m .. n-1-m.
    const std::size_t lo = m;
    const std::size_t hi = n - 1 - m;
    std::vector<char> candidate(n, 0);
    std::vector<Eigen::VectorXd> bwd(n);
    for (std::size_t i = lo; i <= hi; ++i) {
        bwd[i] = backward_bdf(out, h, i, params.order);
        Eigen::VectorXd fwd = forward_bdf(out, h, i, params.order);
        if (relative_difference(fwd, bwd[i]) > params.fwd_bwd_threshold) candidate[i] = 1;
    }
    auto bwd_at = [&](std::size_t i) -> const Eigen::VectorXd& {
        if (bwd[i].size() == 0) bwd[i] = backward_bdf(out, h, i, params.order);
        return bwd[i];
    };

    std::vector<std::size_t> cps;
    for (std::size_t i = lo; i <= hi; ++i) {
        if (!candidate[i]) continue;
        candidate[i] = 0;
        bool next_is_candidate = i + 1 <= hi && candidate[i + 1];
        if (!next_is_candidate || relative_difference(bwd_at(i), bwd_at(i + 1)) >= params.bwd_bwd_threshold) {
            cps.push_back(i);
            while (i + 1 <= hi && candidate[i + 1]) {
                candidate[i + 1] = 0;
                ++i;
            }
        }
    }
    return cps;
}

/// Backward-BDF output derivatives for each index of `seg` with `order` points of history inside the segment.
inline void cache_derivatives(Segment& seg, int order) {
    const auto m = static_cast<std::size_t>(order);
    seg.deriv_offset = m;
    const Eigen::MatrixXd out = seg.output_values();
    const std::size_t n = seg.size();
    const std::size_t usable = n > m ? n - m : 0;
    seg.derivs.resize(static_cast<Eigen::Index>(usable), out.cols());
    for (std::size_t k = 0; k < usable; ++k) {
        seg.derivs.row(static_cast<Eigen::Index>(k)) = backward_bdf(out, seg.source->step(), k + m, order).transpose();
    }
}

/// Splits at the change points (which are dropped) and discards pieces shorter than three samples.
inline std::vector<Segment> segment_trajectory(const TrajectoryPtr& traj, const std::vector<std::size_t>& cps,
                                               const SegmentationParams& params) {
    require(traj != nullptr, "segment_trajectory: null trajectory");
    for (std::size_t k = 0; k < cps.size(); ++k) {
        require(cps[k] < traj->size(), "segment_trajectory: change point out of range");
        require(k == 0 || cps[k] > cps[k - 1], "segment_trajectory: change points must be strictly increasing");
    }
    std::vector<Segment> segs;
    auto emit = [&](std::size_t a, std::size_t b) {
        if (b + 1 < a || b + 1 - a < kMinSegmentPoints) return;
        Segment s = slice(traj, a, b);
        cache_derivatives(s, params.order);
        segs.push_back(std::move(s));
    };
    std::size_t begin = 0;
    for (auto cp : cps) {
        if (cp > begin) emit(begin, cp - 1);
        begin = cp + 1;
    }
    if (begin < traj->size()) emit(begin, traj->size() - 1);
    return segs;
}

/// Segments every trajectory, in input order.
inline std::vector<Segment> segment_all(const std::vector<TrajectoryPtr>& trajs, const SegmentationParams& params) {
    std::vector<Segment> all;
    for (const auto& t : trajs) {
        auto cps = find_change_points(*t, params);
        auto segs = segment_trajectory(t, cps, params);
        for (auto& s : segs) all.push_back(std::move(s));
    }
    return all;
}

} // namespace halearn
