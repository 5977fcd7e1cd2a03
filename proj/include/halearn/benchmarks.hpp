#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "halearn/automaton.hpp"
#include "halearn/error.hpp"
#include "halearn/sampling.hpp"

namespace halearn {

/// A reference automaton together with the run distribution used to sample it.
struct Benchmark {
    std::string name;
    HybridAutomaton ha;
    SamplingSpec sampling;
};

namespace detail {

inline FlowModel affine_flow(std::size_t n_vars, const std::vector<std::vector<double>>& rows) {
    // rows: one per output, each {constant, coeff of var 0, coeff of var 1, ...}
    FlowModel f;
    f.basis = MonomialBasis(n_vars, 1);
    f.coeffs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_vars + 1));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c <= n_vars; ++c) {
            f.coeffs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return f;
}

// w . x + b <= 0 (strict: < 0) over a degree-1 basis.
inline Halfspace linear(std::vector<double> w, double b, bool strict = false) {
    return Halfspace{std::move(w), b, strict};
}

inline Guard linear_guard(std::size_t n_vars, std::vector<Halfspace> terms) {
    Guard g;
    g.basis = MonomialBasis(n_vars, 1);
    g.terms = std::move(terms);
    return g;
}

inline Location make_location(int id, std::string name, FlowModel flow) {
    Location l;
    l.id = id;
    l.name = std::move(name);
    l.flow = std::move(flow);
    return l;
}

} // namespace detail

/// Bouncing ball. Variables (g, x, v) with the gravity g as input.
inline Benchmark ball_benchmark() {
    using namespace detail;
    Benchmark b;
    b.name = "ball";
    auto& ha = b.ha;
    ha.roles = VariableRoles::from_names({"g", "x", "v"}, {"g"});
    // dx/dt = v, dv/dt = g
    ha.locations.push_back(make_location(0, "fall", affine_flow(3, {{0, 0, 0, 1}, {0, 1, 0, 0}})));
    Transition bounce;
    bounce.source = 0;
    bounce.target = 0;
    bounce.guard = linear_guard(3, {linear({0, 1, 0}, 0.0), linear({0, 0, 1}, 0.0, true)}); // x <= 0 && v < 0
    bounce.assignment = Assignment::identity(ha.roles);
    bounce.assignment.matrix(1, 2) = -0.8; // v := -0.8 v
    ha.transitions.push_back(bounce);
    ha.initial.push_back(InitialCondition{0, {{-9.9, -9.5}, {10.2, 10.5}, {15.0, 15.0}}});
    ha.meta["source"] = "bouncing ball; reset factor -0.8";
    b.sampling.location = 0;
    b.sampling.init = {{10.2, 10.5}, {15.0, 15.0}};
    b.sampling.inputs = {{-9.9, -9.5}};
    b.sampling.hold_period = 13.0;
    b.sampling.sim = SimulationOptions{13.0, 0.001};
    ha.validate();
    return b;
}

/// Two tanks with valves v1, v2 and external flow input u. Variables (u, x1, x2).
inline Benchmark tanks_benchmark() {
    using namespace detail;
    Benchmark b;
    b.name = "tanks";
    auto& ha = b.ha;
    ha.roles = VariableRoles::from_names({"u", "x1", "x2"}, {"u"});
    enum : int { off_off = 0, on_off = 1, off_on = 2, on_on = 3 };
    // rows: {1, u, x1, x2}
    ha.locations.push_back(make_location(off_off, "off_off", affine_flow(3, {{-2, 1, -1, 0}, {0, 1, 1, 0}})));
    ha.locations.push_back(make_location(on_off, "on_off", affine_flow(3, {{3, 1, -1, 0}, {0, 1, 1, 0}})));
    ha.locations.push_back(make_location(off_on, "off_on", affine_flow(3, {{-2, 1, -1, 0}, {-5, 1, 1, -1}})));
    ha.locations.push_back(make_location(on_on, "on_on", affine_flow(3, {{3, 1, -1, 0}, {-5, 1, 1, -1}})));
    auto edge = [&](int from, int to, Halfspace h) {
        Transition t;
        t.source = from;
        t.target = to;
        t.guard = linear_guard(3, {std::move(h)});
        t.assignment = Assignment::identity(ha.roles);
        ha.transitions.push_back(std::move(t));
    };
    const auto x2_ge_1 = linear({0, 0, -1}, 1.0);
    const auto x2_le_0 = linear({0, 0, 1}, 0.0);
    const auto x1_le_m1 = linear({0, 1, 0}, 1.0);
    const auto x1_ge_1 = linear({0, -1, 0}, 1.0);
    edge(off_off, on_off, x1_le_m1);
    edge(off_off, off_on, x2_ge_1);
    edge(on_off, off_on, x2_ge_1);
    edge(off_on, off_off, x2_le_0);
    edge(off_on, on_on, x1_le_m1);
    edge(on_on, on_off, x2_le_0);
    edge(on_on, off_on, x1_ge_1);
    ha.initial.push_back(InitialCondition{off_off, {{-0.1, 0.1}, {1.2, 1.2}, {1.0, 1.0}}});
    ha.meta["source"] = "two tanks; four valve locations, identity resets";
    b.sampling.location = off_off;
    b.sampling.init = {{1.2, 1.2}, {1.0, 1.0}};
    b.sampling.inputs = {{-0.1, 0.1}};
    b.sampling.hold_period = 9.3;
    b.sampling.sim = SimulationOptions{9.3, 0.001};
    ha.validate();
    return b;
}

/// Switched oscillator without filters; no inputs. Variables (x, y).
inline Benchmark osci_benchmark() {
    using namespace detail;
    Benchmark b;
    b.name = "osci";
    auto& ha = b.ha;
    ha.roles = VariableRoles::from_names({"x", "y"}, {});
    constexpr double k = 0.714286;
    // rows: {1, x, y}
    auto towards_pos = affine_flow(2, {{1.4, -2, 0}, {-0.7, 0, -1}});
    auto towards_neg = affine_flow(2, {{-1.4, -2, 0}, {0.7, 0, -1}});
    ha.locations.push_back(make_location(0, "loc1", towards_pos));
    ha.locations.push_back(make_location(1, "loc2", towards_neg));
    ha.locations.push_back(make_location(2, "loc3", towards_neg));
    ha.locations.push_back(make_location(3, "loc4", towards_pos));
    const auto below = linear({k, 1}, 0.0, true);   // y + k x < 0
    const auto above = linear({-k, -1}, 0.0, true); // y + k x > 0
    const auto x_pos = linear({-1, 0}, 0.0, true);
    const auto x_neg = linear({1, 0}, 0.0, true);
    auto edge = [&](int from, int to, Halfspace h) {
        Transition t;
        t.source = from;
        t.target = to;
        t.guard = linear_guard(2, {std::move(h)});
        t.assignment = Assignment::identity(ha.roles);
        ha.transitions.push_back(std::move(t));
    };
    edge(0, 1, below);
    edge(0, 3, x_pos);
    edge(1, 0, above);
    edge(1, 2, x_pos);
    edge(2, 1, x_neg);
    edge(2, 3, above);
    edge(3, 0, x_neg);
    edge(3, 2, below);
    ha.initial.push_back(InitialCondition{0, {{0.01, 0.09}, {0.01, 0.09}}});
    ha.meta["source"] = "switched oscillator; loc1/loc4 and loc2/loc3 share dynamics";
    b.sampling.location = 0;
    b.sampling.init = {{0.01, 0.09}, {0.01, 0.09}};
    b.sampling.sim = SimulationOptions{10.0, 0.01};
    ha.validate();
    return b;
}

/// Excitable cell action potential; single voltage variable x, no inputs.
inline Benchmark cells_benchmark() {
    using namespace detail;
    Benchmark b;
    b.name = "cells";
    auto& ha = b.ha;
    ha.roles = VariableRoles::from_names({"x"}, {});
    enum : int { upstroke = 0, early_repol = 1, plateau = 2, final_repol = 3, stimulate_rest = 4 };
    // rows: {1, x}
    ha.locations.push_back(make_location(upstroke, "Upstroke", affine_flow(1, {{25.0, -0.5}})));
    ha.locations.push_back(make_location(early_repol, "Early_Repolarization", affine_flow(1, {{0.0, -0.2}})));
    ha.locations.push_back(make_location(plateau, "Plateau", affine_flow(1, {{-0.6, -0.02}})));
    ha.locations.push_back(make_location(final_repol, "Final_Repolarization", affine_flow(1, {{-8.0, -0.1}})));
    ha.locations.push_back(make_location(stimulate_rest, "Stimulate_Rest", affine_flow(1, {{0.0, 0.0}})));
    auto edge = [&](int from, int to, Halfspace h) {
        Transition t;
        t.source = from;
        t.target = to;
        t.guard = linear_guard(1, {std::move(h)});
        t.assignment = Assignment::identity(ha.roles);
        ha.transitions.push_back(std::move(t));
    };
    edge(upstroke, early_repol, linear({-1}, 30.0));       // x >= 30
    edge(early_repol, plateau, linear({1}, -10.0));        // x <= 10
    edge(plateau, final_repol, linear({1}, 10.0));         // x <= -10
    edge(final_repol, upstroke, linear({1}, 75.0));        // x <= -75
    edge(final_repol, stimulate_rest, linear({1}, 75.0));  // same guard, lower priority
    edge(stimulate_rest, upstroke, linear({1}, 75.0));
    ha.initial.push_back(InitialCondition{upstroke, {{-76.0, -74.0}}});
    ha.meta["source"] = "excitable cell; Stimulate_Rest shadowed by the higher-priority jump to Upstroke";
    b.sampling.location = upstroke;
    b.sampling.init = {{-76.0, -74.0}};
    b.sampling.sim = SimulationOptions{500.0, 0.01};
    ha.validate();
    return b;
}

inline std::vector<std::string> benchmark_names() { return {"ball", "tanks", "osci", "cells"}; }

inline Benchmark builtin_benchmark(std::string_view name) {
    if (name == "ball") return ball_benchmark();
    if (name == "tanks") return tanks_benchmark();
    if (name == "osci") return osci_benchmark();
    if (name == "cells") return cells_benchmark();
    fail(ErrorKind::invalid_argument, "unknown model '" + std::string(name) + "'");
}

inline std::vector<Benchmark> builtin_benchmarks() {
    std::vector<Benchmark> out;
    for (const auto& n : benchmark_names()) out.push_back(builtin_benchmark(n));
    return out;
}

} // namespace halearn
