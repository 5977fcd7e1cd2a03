#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "halearn/automaton.hpp"
#include "halearn/dtw.hpp"
#include "halearn/error.hpp"
#include "halearn/parallel.hpp"
#include "halearn/sampling.hpp"
#include "halearn/trajectory.hpp"

namespace halearn {

struct DistanceStats {
    std::string variable;
    std::size_t count = 0;
    double min = 0.0;
    double max = 0.0;
    double avg = 0.0;
    double std = 0.0; // population deviation
};

/// Summary statistics in a fixed summation order.
inline DistanceStats summarize(std::string variable, const std::vector<double>& values) {
    DistanceStats s;
    s.variable = std::move(variable);
    s.count = values.size();
    if (values.empty()) {
        s.min = s.max = s.avg = s.std = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.avg = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - s.avg) * (v - s.avg);
    s.std = std::sqrt(sq / static_cast<double>(values.size()));
    // keep min <= avg <= max despite rounding
    s.avg = std::clamp(s.avg, s.min, s.max);
    return s;
}

struct CaseFailure {
    std::size_t index = 0;
    std::string message;
};

struct EvalReport {
    std::vector<DistanceStats> outputs;
    std::size_t n_cases = 0;
    std::vector<CaseFailure> failures;
    std::optional<double> learn_wall_seconds;
    nlohmann::json config = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json j;
        auto outs = nlohmann::json::array();
        for (const auto& s : outputs) {
            auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
            outs.push_back({{"variable", s.variable},
                            {"count", s.count},
                            {"min", num(s.min)},
                            {"max", num(s.max)},
                            {"avg", num(s.avg)},
                            {"std", num(s.std)}});
        }
        j["outputs"] = outs;
        j["cases"] = n_cases;
        auto fails = nlohmann::json::array();
        for (const auto& f : failures) fails.push_back({{"case", f.index}, {"error", f.message}});
        j["failures"] = fails;
        j["learn_wall_seconds"] = learn_wall_seconds ? nlohmann::json(*learn_wall_seconds) : nlohmann::json(nullptr);
        j["config"] = config;
        return j;
    }

    std::string to_table() const {
        std::ostringstream o;
        o << std::left << std::setw(12) << "variable" << std::right << std::setw(14) << "min" << std::setw(14) << "max"
          << std::setw(14) << "avg" << std::setw(14) << "std" << "\n";
        for (const auto& s : outputs) {
            o << std::left << std::setw(12) << s.variable << std::right << std::setprecision(6);
            for (double v : {s.min, s.max, s.avg, s.std}) o << std::setw(14) << v;
            o << "\n";
        }
        o << "cases: " << n_cases << ", failed: " << failures.size() << "\n";
        if (learn_wall_seconds) o << "learning time: " << *learn_wall_seconds << " s\n";
        return o.str();
    }
};

/// Original and learned trajectory of one test case.
struct TrajectoryPair {
    std::size_t index = 0;
    Trajectory original;
    Trajectory learned;
};

struct EvalResult {
    EvalReport report;
    std::vector<TrajectoryPair> pairs; // successful cases, in case order
};

/// Initial location for a learned model: the first initial condition whose
/// output ranges contain x0, else the lowest initial id.
inline int choose_start_location(const HybridAutomaton& ha, const Eigen::VectorXd& x0) {
    require(!ha.initial.empty() || !ha.locations.empty(), "evaluate: model has no locations");
    if (ha.initial.empty()) return ha.locations.front().id;
    for (const auto& ic : ha.initial) {
        if (ic.ranges.empty()) continue;
        bool inside = true;
        for (auto var : ha.roles.outputs) {
            const auto& r = ic.ranges[var];
            double v = x0(static_cast<Eigen::Index>(var));
            inside = inside && v >= r.lo && v <= r.hi;
        }
        if (inside) return ic.location;
    }
    int best = ha.initial.front().location;
    for (const auto& ic : ha.initial) best = std::min(best, ic.location);
    return best;
}

/// Per-output whole-trajectory DTW distances between two runs.
inline std::vector<double> per_output_distances(const Trajectory& a, const Trajectory& b) {
    require(a.roles() == b.roles(), "evaluate: trajectories have different variables");
    std::vector<double> d;
    for (auto var : a.roles().outputs) {
        const auto c = static_cast<Eigen::Index>(var);
        d.push_back(dtw_distance_only(a.values().col(c), b.values().col(c)));
    }
    return d;
}

/// Core of evaluate: `original(k)` yields the reference trajectory of case k.
inline EvalResult evaluate_cases(const std::function<Trajectory(std::size_t)>& original,
                                 const HybridAutomaton& learned, const std::vector<TestCase>& cases,
                                 const SimulationOptions& sim, std::size_t threads = 1) {
    const auto& roles = learned.roles;
    std::vector<std::optional<TrajectoryPair>> done(cases.size());
    std::vector<std::vector<double>> dist(cases.size());
    std::vector<std::string> errors(cases.size());
    parallel_for(cases.size(), threads, [&](std::size_t k) {
        try {
            Trajectory ref = original(k);
            require(ref.roles() == roles, "original and learned models have different variables");
            const auto& tc = cases[k];
            int loc = choose_start_location(learned, tc.x0);
            Trajectory got = simulate(learned, loc, tc.x0, tc.input, sim, "learned" + std::to_string(k)).trajectory;
            dist[k] = per_output_distances(ref, got);
            done[k] = TrajectoryPair{k, std::move(ref), std::move(got)};
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::invalid_argument) throw;
            errors[k] = e.what();
        }
    });
    EvalResult res;
    res.report.n_cases = cases.size();
    for (std::size_t o = 0; o < roles.outputs.size(); ++o) {
        std::vector<double> vals;
        for (std::size_t k = 0; k < cases.size(); ++k) {
            if (done[k]) vals.push_back(dist[k][o]);
        }
        res.report.outputs.push_back(summarize(roles.names[roles.outputs[o]], vals));
    }
    for (std::size_t k = 0; k < cases.size(); ++k) {
        if (done[k]) {
            res.pairs.push_back(std::move(*done[k]));
        } else {
            res.report.failures.push_back({k, errors[k]});
        }
    }
    return res;
}

/// Replays every test case through both models.
inline EvalResult evaluate(const HybridAutomaton& original, const HybridAutomaton& learned,
                           const std::vector<TestCase>& cases, const SimulationOptions& sim, std::size_t threads = 1) {
    require(original.roles == learned.roles, "evaluate: models have different variables");
    return evaluate_cases(
        [&](std::size_t k) {
            return simulate(original, cases[k].location, cases[k].x0, cases[k].input, sim, "original" + std::to_string(k))
                .trajectory;
        },
        learned, cases, sim, threads);
}

/// Same, against recorded reference trajectories (one per case).
inline EvalResult evaluate(const std::vector<Trajectory>& recorded, const HybridAutomaton& learned,
                           const std::vector<TestCase>& cases, const SimulationOptions& sim, std::size_t threads = 1) {
    require(recorded.size() == cases.size(), "evaluate: one recorded trajectory per test case expected");
    return evaluate_cases([&](std::size_t k) { return recorded[k]; }, learned, cases, sim, threads);
}

/// Writes `time,original,learned` for one variable. Returns a warning when the
/// trajectories differ in length and the output was truncated.
inline std::optional<std::string> emit_plot_data(const Trajectory& original, const Trajectory& learned,
                                                 std::size_t variable, std::ostream& out) {
    require(variable < original.dim() && variable < learned.dim(), "plot data: variable index out of range");
    const std::size_t n = std::min(original.size(), learned.size());
    out << "time,original,learned\n";
    for (std::size_t i = 0; i < n; ++i) {
        out << format_double(original.time(i)) << ',' << format_double(original.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(variable)))
            << ',' << format_double(learned.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(variable))) << '\n';
    }
    if (original.size() != learned.size()) {
        return "plot data truncated to " + std::to_string(n) + " samples (lengths " + std::to_string(original.size()) +
               " and " + std::to_string(learned.size()) + ")";
    }
    return std::nullopt;
}

inline std::optional<std::string> emit_plot_data(const Trajectory& original, const Trajectory& learned,
                                                 std::size_t variable, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write " + path.string());
    auto w = emit_plot_data(original, learned, variable, out);
    if (!out) fail(ErrorKind::io, "error writing " + path.string());
    return w;
}

} // namespace halearn
