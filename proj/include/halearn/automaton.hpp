#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "halearn/error.hpp"
#include "halearn/flow_inference.hpp"
#include "halearn/monomial.hpp"
#include "halearn/trajectory.hpp"

namespace halearn {

/// One polynomial inequality w . phi(x) + b <= 0 (or < 0 when strict), where
/// phi is the basis without its constant term.
struct Halfspace {
    std::vector<double> weights;
    double bias = 0.0;
    bool strict = false;

    double margin(const Eigen::Ref<const Eigen::VectorXd>& features) const {
        double s = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * features(static_cast<Eigen::Index>(j) + 1);
        return s;
    }

    bool holds(const Eigen::Ref<const Eigen::VectorXd>& features) const {
        double m = margin(features);
        return strict ? m < 0.0 : m <= 0.0;
    }

    friend bool operator==(const Halfspace&, const Halfspace&) = default;
};

/// Guard over all variables. Learned guards have a single halfspace; the
/// benchmark library also uses conjunctions.
struct Guard {
    MonomialBasis basis;
    std::vector<Halfspace> terms;
    std::optional<double> training_accuracy;

    bool satisfied(const Eigen::Ref<const Eigen::VectorXd>& valuation) const {
        Eigen::VectorXd f = basis.evaluate(valuation);
        return std::all_of(terms.begin(), terms.end(), [&](const Halfspace& h) { return h.holds(f); });
    }

    /// Value of the first term's left-hand side.
    double margin(const Eigen::Ref<const Eigen::VectorXd>& valuation) const {
        return terms.at(0).margin(basis.evaluate(valuation));
    }
};

enum class AnnotationKind { unconstrained, no_assignment, constant_pool };

struct VariableAnnotation {
    AnnotationKind kind = AnnotationKind::unconstrained;
    std::vector<double> pool;

    static VariableAnnotation parse(std::string_view text) {
        auto t = detail::trim(text);
        if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
        VariableAnnotation a;
        if (t == "none" || t.empty()) return a;
        if (t == "no-assignment") {
            a.kind = AnnotationKind::no_assignment;
            return a;
        }
        if (t.rfind("pool:", 0) == 0) {
            auto body = detail::trim(t.substr(5));
            if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
                fail(ErrorKind::parse, "annotation: expected pool:[v1,v2,...], got '" + std::string(text) + "'");
            }
            body = body.substr(1, body.size() - 2);
            for (auto cell : detail::split_csv_line(body)) {
                double v = 0.0;
                if (!detail::parse_double(cell, v)) {
                    fail(ErrorKind::parse, "annotation: bad pool value '" + std::string(cell) + "'");
                }
                a.pool.push_back(v);
            }
            a.kind = AnnotationKind::constant_pool;
            return a;
        }
        fail(ErrorKind::parse, "annotation: unknown kind '" + std::string(text) + "'");
    }

    std::string to_string() const {
        switch (kind) {
        case AnnotationKind::unconstrained: return "none";
        case AnnotationKind::no_assignment: return "no-assignment";
        case AnnotationKind::constant_pool: {
            std::string s = "pool:[";
            for (std::size_t k = 0; k < pool.size(); ++k) s += (k ? "," : "") + format_double(pool[k]);
            return s + "]";
        }
        }
        return "none";
    }
};

/// Affine map into the outputs: x_O' = matrix * x + intercept.
struct Assignment {
    Eigen::MatrixXd matrix;    // |O| x |X|
    Eigen::VectorXd intercept; // |O|
    std::vector<std::string> tags;

    Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& valuation, const VariableRoles& roles) const {
        Eigen::VectorXd next = valuation;
        Eigen::VectorXd img = matrix * valuation + intercept;
        for (std::size_t k = 0; k < roles.outputs.size(); ++k) {
            next(static_cast<Eigen::Index>(roles.outputs[k])) = img(static_cast<Eigen::Index>(k));
        }
        return next;
    }

    static Assignment identity(const VariableRoles& roles) {
        Assignment a;
        a.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(roles.outputs.size()),
                                         static_cast<Eigen::Index>(roles.size()));
        for (std::size_t k = 0; k < roles.outputs.size(); ++k) {
            a.matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(roles.outputs[k])) = 1.0;
        }
        a.intercept = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(roles.outputs.size()));
        return a;
    }
};

struct Location {
    int id = 0;
    std::string name;
    FlowModel flow;
    /// Conjunction; empty means true. Not enforced by the simulator.
    std::vector<Halfspace> invariant;
};

struct Transition {
    int source = 0;
    int target = 0;
    Guard guard;
    Assignment assignment;
};

struct ValueRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct InitialCondition {
    int location = 0;
    /// Per-variable ranges over all variables; a point valuation has lo == hi.
    std::vector<ValueRange> ranges;
};

struct HybridAutomaton {
    VariableRoles roles;
    std::vector<Location> locations;
    std::vector<Transition> transitions;
    std::vector<InitialCondition> initial;
    nlohmann::json meta = nlohmann::json::object();

    const Location& location(int id) const {
        for (const auto& l : locations) {
            if (l.id == id) return l;
        }
        fail(ErrorKind::invalid_argument, "automaton has no location " + std::to_string(id));
    }

    bool has_location(int id) const {
        return std::any_of(locations.begin(), locations.end(), [&](const Location& l) { return l.id == id; });
    }

    int location_id(std::string_view name) const {
        for (const auto& l : locations) {
            if (l.name == name) return l.id;
        }
        fail(ErrorKind::invalid_argument, "automaton has no location named '" + std::string(name) + "'");
    }

    /// Outgoing transitions of `id`, ascending by target id.
    std::vector<const Transition*> outgoing(int id) const {
        std::vector<const Transition*> out;
        for (const auto& t : transitions) {
            if (t.source == id) out.push_back(&t);
        }
        std::stable_sort(out.begin(), out.end(),
                         [](const Transition* a, const Transition* b) { return a->target < b->target; });
        return out;
    }

    /// Throws unless ids are unique, references resolve, pairs are unique and dimensions agree.
    void validate() const {
        roles.validate();
        const auto nx = roles.size();
        const auto no = static_cast<Eigen::Index>(roles.outputs.size());
        std::vector<int> ids;
        for (const auto& l : locations) {
            require(std::find(ids.begin(), ids.end(), l.id) == ids.end(),
                    "automaton: duplicate location id " + std::to_string(l.id));
            ids.push_back(l.id);
            require(l.flow.basis.n_vars() == nx, "automaton: flow of location " + std::to_string(l.id) +
                                                     " has wrong variable count");
            require(l.flow.coeffs.rows() == no &&
                        static_cast<std::size_t>(l.flow.coeffs.cols()) == l.flow.basis.size(),
                    "automaton: flow coefficients of location " + std::to_string(l.id) + " have wrong shape");
        }
        std::vector<std::pair<int, int>> pairs;
        for (const auto& t : transitions) {
            require(has_location(t.source) && has_location(t.target), "automaton: transition references unknown location");
            auto p = std::make_pair(t.source, t.target);
            require(std::find(pairs.begin(), pairs.end(), p) == pairs.end(),
                    "automaton: more than one transition " + std::to_string(t.source) + " -> " +
                        std::to_string(t.target));
            pairs.push_back(p);
            require(t.guard.basis.n_vars() == nx, "automaton: guard has wrong variable count");
            require(!t.guard.terms.empty(), "automaton: guard without terms");
            for (const auto& h : t.guard.terms) {
                require(h.weights.size() + 1 == t.guard.basis.size(), "automaton: guard weights have wrong length");
            }
            require(t.assignment.matrix.rows() == no &&
                        static_cast<std::size_t>(t.assignment.matrix.cols()) == nx &&
                        t.assignment.intercept.size() == no,
                    "automaton: assignment has wrong shape");
        }
        for (const auto& ic : initial) {
            require(has_location(ic.location), "automaton: initial location " + std::to_string(ic.location) +
                                                   " does not exist");
            require(ic.ranges.empty() || ic.ranges.size() == nx, "automaton: initial ranges have wrong length");
        }
    }
};

/// Piecewise-constant input signal: value k holds on [breakpoints[k], breakpoints[k+1]).
struct InputSignal {
    std::vector<double> breakpoints;
    std::vector<Eigen::VectorXd> values;

    static InputSignal constant(const Eigen::VectorXd& v) { return InputSignal{{0.0}, {v}}; }

    Eigen::VectorXd at(double t) const {
        if (values.empty()) return {};
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
        std::size_t k = it == breakpoints.begin() ? 0 : static_cast<std::size_t>(it - breakpoints.begin()) - 1;
        return values[k];
    }

    void validate(std::size_t n_inputs) const {
        require(breakpoints.size() == values.size(), "input signal: breakpoint/value count mismatch");
        require(std::is_sorted(breakpoints.begin(), breakpoints.end()), "input signal: breakpoints must be sorted");
        for (const auto& v : values) {
            require(static_cast<std::size_t>(v.size()) == n_inputs, "input signal: value has wrong dimension");
        }
        require(n_inputs == 0 || !values.empty(), "input signal: no values for a model with inputs");
    }
};

inline constexpr int kMaxTransitionsPerStep = 10;

struct SimulationOptions {
    double horizon = 1.0;
    double dt = 0.01;
    int max_transitions_per_step = kMaxTransitionsPerStep;
};

/// Sampled run: trajectory plus the active location at each sample.
struct Run {
    Trajectory trajectory;
    std::vector<int> locations;
    std::size_t transitions_fired = 0;
};

inline std::size_t sample_count(double horizon, double dt) {
    require(dt > 0.0 && std::isfinite(dt), "simulate: dt must be positive");
    require(horizon >= 0.0 && std::isfinite(horizon), "simulate: horizon must be non-negative");
    return static_cast<std::size_t>(std::floor(horizon / dt + 1e-9)) + 1;
}

/// Fixed-step RK4 with urgent transitions: after every step (and at t = 0) the
/// outgoing transitions of the active location are tried in ascending target
/// order and the first enabled one fires. Inputs follow `u` and are held
/// constant during a step.
inline Run simulate(const HybridAutomaton& ha, int loc0, const Eigen::VectorXd& x0, const InputSignal& u,
                    const SimulationOptions& opt, const std::string& id = {}) {
    const auto& roles = ha.roles;
    require(static_cast<std::size_t>(x0.size()) == roles.size(), "simulate: initial valuation has wrong dimension");
    require(x0.allFinite(), "simulate: initial valuation is not finite");
    u.validate(roles.inputs.size());
    const std::size_t n = sample_count(opt.horizon, opt.dt);

    std::map<int, std::vector<const Transition*>> out_edges;
    std::map<int, const Location*> locs;
    for (const auto& l : ha.locations) {
        locs[l.id] = &l;
        out_edges[l.id] = ha.outgoing(l.id);
    }
    require(locs.count(loc0) == 1, "simulate: unknown initial location " + std::to_string(loc0));

    auto set_inputs = [&](Eigen::VectorXd& x, double t) {
        if (roles.inputs.empty()) return;
        Eigen::VectorXd uv = u.at(t);
        for (std::size_t k = 0; k < roles.inputs.size(); ++k) {
            x(static_cast<Eigen::Index>(roles.inputs[k])) = uv(static_cast<Eigen::Index>(k));
        }
    };
    auto vector_field = [&](int loc, const Eigen::VectorXd& x) {
        Eigen::VectorXd dx = Eigen::VectorXd::Zero(x.size());
        Eigen::VectorXd f = locs[loc]->flow.evaluate(x);
        for (std::size_t k = 0; k < roles.outputs.size(); ++k) {
            dx(static_cast<Eigen::Index>(roles.outputs[k])) = f(static_cast<Eigen::Index>(k));
        }
        return dx;
    };

    Run run;
    std::vector<double> times(n);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(roles.size()));
    run.locations.resize(n);

    int loc = loc0;
    Eigen::VectorXd x = x0;
    auto fire_transitions = [&](double t) {
        for (int fired = 0;; ++fired) {
            const Transition* taken = nullptr;
            for (const Transition* tr : out_edges[loc]) {
                if (tr->guard.satisfied(x)) {
                    taken = tr;
                    break;
                }
            }
            if (taken == nullptr) return;
            Eigen::VectorXd next = taken->assignment.apply(x, roles);
            // A self-loop that leaves the valuation unchanged is a stutter, not a jump.
            if (taken->target == loc && next == x) return;
            if (fired >= opt.max_transitions_per_step) {
                fail(ErrorKind::numeric, "simulate: more than " + std::to_string(opt.max_transitions_per_step) +
                                             " transitions at t=" + format_double(t));
            }
            x = std::move(next);
            loc = taken->target;
            ++run.transitions_fired;
            if (!x.allFinite()) fail(ErrorKind::numeric, "simulate: non-finite state at t=" + format_double(t));
        }
    };

    set_inputs(x, 0.0);
    fire_transitions(0.0);
    times[0] = 0.0;
    values.row(0) = x.transpose();
    run.locations[0] = loc;
    const double h = opt.dt;
    for (std::size_t k = 1; k < n; ++k) {
        const double t1 = static_cast<double>(k) * h;
        Eigen::VectorXd k1 = vector_field(loc, x);
        Eigen::VectorXd k2 = vector_field(loc, x + 0.5 * h * k1);
        Eigen::VectorXd k3 = vector_field(loc, x + 0.5 * h * k2);
        Eigen::VectorXd k4 = vector_field(loc, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) fail(ErrorKind::numeric, "simulate: non-finite state at t=" + format_double(t1));
        set_inputs(x, t1);
        fire_transitions(t1);
        times[k] = t1;
        values.row(static_cast<Eigen::Index>(k)) = x.transpose();
        run.locations[k] = loc;
    }
    run.trajectory = Trajectory(std::move(times), std::move(values), roles, id);
    return run;
}

} // namespace halearn
