#pragma once

#include <chrono>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "halearn/automaton.hpp"
#include "halearn/clustering.hpp"
#include "halearn/config.hpp"
#include "halearn/error.hpp"
#include "halearn/flow_inference.hpp"
#include "halearn/parallel.hpp"
#include "halearn/segmentation.hpp"
#include "halearn/trajectory.hpp"
#include "halearn/transition_inference.hpp"
#include "halearn/version.hpp"

namespace halearn {

/// What the pipeline saw and produced, stage by stage.
struct LearnLog {
    std::size_t n_trajectories = 0;
    std::vector<std::size_t> segments_per_trajectory;
    std::size_t n_segments = 0;
    std::vector<std::size_t> cluster_sizes;
    std::map<int, std::vector<std::size_t>> flow_segments; // segments used per cluster
    std::map<int, Eigen::VectorXd> flow_residuals;         // rms per output
    std::map<ClusterPair, std::size_t> triple_counts;
    std::map<ClusterPair, double> guard_accuracy;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["trajectories"] = n_trajectories;
        j["segments_per_trajectory"] = segments_per_trajectory;
        j["segments"] = n_segments;
        j["cluster_sizes"] = cluster_sizes;
        auto flows = nlohmann::json::array();
        for (const auto& [id, used] : flow_segments) {
            const auto& r = flow_residuals.at(id);
            flows.push_back({{"cluster", id},
                             {"segments_used", used.size()},
                             {"rms_residual", std::vector<double>(r.data(), r.data() + r.size())}});
        }
        j["flows"] = flows;
        auto trans = nlohmann::json::array();
        for (const auto& [pair, n] : triple_counts) {
            trans.push_back({{"src", pair.first},
                             {"dst", pair.second},
                             {"triples", n},
                             {"guard_accuracy", guard_accuracy.at(pair)}});
        }
        j["transitions"] = trans;
        j["warnings"] = warnings;
        j["wall_seconds"] = wall_seconds;
        return j;
    }

    std::string to_text() const {
        std::ostringstream o;
        o << "trajectories: " << n_trajectories << "\n";
        o << "segments: " << n_segments << "\n";
        o << "clusters: " << cluster_sizes.size() << " (sizes";
        for (auto s : cluster_sizes) o << " " << s;
        o << ")\n";
        for (const auto& [id, r] : flow_residuals) {
            o << "flow loc" << id << ": " << flow_segments.at(id).size() << " segments, rms residual";
            for (Eigen::Index k = 0; k < r.size(); ++k) o << " " << r(k);
            o << "\n";
        }
        for (const auto& [pair, n] : triple_counts) {
            o << "transition loc" << pair.first << " -> loc" << pair.second << ": " << n
              << " triples, guard accuracy " << guard_accuracy.at(pair) << "\n";
        }
        for (const auto& w : warnings) o << "warning: " << w << "\n";
        o << "wall time: " << wall_seconds << " s\n";
        return o.str();
    }
};

struct LearnResult {
    HybridAutomaton model;
    LearnLog log;
    std::vector<Segment> segments;
    std::vector<Cluster> clusters;
};

namespace detail {

template <typename Fn>
auto run_stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        fail(e.kind(), std::string(name) + ": " + e.what());
    }
}

} // namespace detail

/// Learns a hybrid automaton from trajectories that share roles and sampling step.
inline LearnResult learn(const std::vector<TrajectoryPtr>& trajs, const LearnConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    cfg.validate();
    if (trajs.empty()) fail(ErrorKind::invalid_argument, "no trajectories");
    const VariableRoles& roles = trajs.front()->roles();
    if (!cfg.variables.empty()) {
        require(roles == cfg.roles(), "learn: trajectory variables do not match the configuration");
    }
    common_step(trajs);
    const std::size_t threads = resolve_threads(cfg.threads);

    LearnResult res;
    LearnLog& log = res.log;
    log.n_trajectories = trajs.size();

    detail::run_stage("segmentation", [&] {
        const auto params = cfg.segmentation();
        std::vector<std::vector<Segment>> per(trajs.size());
        parallel_for(trajs.size(), threads, [&](std::size_t k) {
            per[k] = segment_trajectory(trajs[k], find_change_points(*trajs[k], params), params);
        });
        for (auto& segs : per) {
            log.segments_per_trajectory.push_back(segs.size());
            for (auto& s : segs) res.segments.push_back(std::move(s));
        }
        if (res.segments.empty()) fail(ErrorKind::pipeline, "no segments with at least 3 samples");
        log.n_segments = res.segments.size();
    });
    const auto& segments = res.segments;

    detail::run_stage("clustering", [&] {
        res.clusters = cluster_segments(segments, cfg.clustering(), threads);
        for (const auto& c : res.clusters) log.cluster_sizes.push_back(c.members.size());
    });
    const auto& clusters = res.clusters;

    std::map<int, FlowModel> flows;
    detail::run_stage("flow", [&] {
        const MonomialBasis basis(roles.size(), cfg.ode_degree);
        std::vector<FlowFit> fits(clusters.size());
        std::vector<std::vector<std::size_t>> used(clusters.size());
        parallel_for(clusters.size(), threads, [&](std::size_t k) {
            auto set = build_regression_set(clusters[k], segments, cfg.max_segments);
            fits[k] = fit_flow_detailed(set, basis);
            used[k] = set.used_segments;
        });
        for (std::size_t k = 0; k < clusters.size(); ++k) {
            const int id = clusters[k].id;
            flows[id] = fits[k].model;
            log.flow_residuals[id] = fits[k].rms_residual;
            log.flow_segments[id] = used[k];
            if (fits[k].regularized) log.warnings.push_back("flow of loc" + std::to_string(id) + " ridge-regularized");
        }
    });

    const std::set<int> initial_ids = identify_initial_locations(clusters, segments);

    std::map<ClusterPair, Guard> guards;
    std::map<ClusterPair, Assignment> assignments;
    detail::run_stage("transitions", [&] {
        const TripleMap triples = collect_connection_triples(clusters, segments);
        const auto annotations = cfg.annotation_vector(roles);
        std::vector<ClusterPair> pairs;
        for (const auto& [pair, list] : triples) pairs.push_back(pair);
        std::vector<Guard> g(pairs.size());
        std::vector<AssignmentFit> a(pairs.size());
        parallel_for(pairs.size(), threads, [&](std::size_t k) {
            const auto& list = triples.at(pairs[k]);
            try {
                g[k] = fit_guard(list, cfg.guard_degree, cfg.svm());
            } catch (const Error& e) {
                fail(e.kind(), "loc" + std::to_string(pairs[k].first) + " -> loc" + std::to_string(pairs[k].second) +
                                   ": " + e.what());
            }
            a[k] = fit_assignment_detailed(list, roles, annotations);
        });
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            guards[pairs[k]] = g[k];
            assignments[pairs[k]] = a[k].assignment;
            log.triple_counts[pairs[k]] = triples.at(pairs[k]).size();
            log.guard_accuracy[pairs[k]] = g[k].training_accuracy.value_or(0.0);
            for (const auto& w : a[k].warnings) {
                log.warnings.push_back("loc" + std::to_string(pairs[k].first) + " -> loc" +
                                       std::to_string(pairs[k].second) + ": " + w);
            }
        }
    });

    // Initial region per initial location: bounding box of the first samples
    // of the trajectories whose first segment landed there.
    std::map<int, std::vector<ValueRange>> initial_ranges;
    {
        auto labels = cluster_labels(clusters, segments.size());
        const Trajectory* current = nullptr;
        for (std::size_t k = 0; k < segments.size(); ++k) {
            if (segments[k].source.get() == current) continue;
            current = segments[k].source.get();
            Eigen::VectorXd x0 = current->point(0);
            auto& ranges = initial_ranges[labels[k]];
            if (ranges.empty()) {
                for (Eigen::Index v = 0; v < x0.size(); ++v) ranges.push_back({x0(v), x0(v)});
            } else {
                for (Eigen::Index v = 0; v < x0.size(); ++v) {
                    auto& r = ranges[static_cast<std::size_t>(v)];
                    r.lo = std::min(r.lo, x0(v));
                    r.hi = std::max(r.hi, x0(v));
                }
            }
        }
    }

    detail::run_stage("assemble", [&] {
        res.model = assemble_automaton(roles, clusters, flows, initial_ids, guards, assignments, initial_ranges);
    });

    log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    res.model.meta["config"] = cfg.to_json();
    res.model.meta["segment_selection"] = "longest first, ties by input order";
    res.model.meta["svm"] = {{"iterations", cfg.svm_iterations}, {"regularization", cfg.svm_regularization}};
    res.model.meta["learn"] = log.to_json();
    res.model.meta["versions"] = {{"halearn", kVersion}};
    return res;
}

} // namespace halearn
