#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "halearn/automaton.hpp"
#include "halearn/error.hpp"

namespace halearn {

/// Uniform draws in [lo, hi] from a 64-bit Mersenne Twister. The mapping from
/// raw bits to doubles is explicit so runs are reproducible across standard libraries.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

    double next(double lo, double hi) {
        double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * unit;
    }

private:
    std::mt19937_64 engine_;
};

/// One run request: start location, initial valuation over all variables, input signal.
struct TestCase {
    int location = 0;
    Eigen::VectorXd x0;
    InputSignal input;
};

struct SamplingSpec {
    int location = 0;
    std::vector<ValueRange> init;   // per output variable (in roles.outputs order)
    std::vector<ValueRange> inputs; // per input variable
    double hold_period = 0.0;       // <= 0 means horizon / 10
    SimulationOptions sim;
};

/// Draws `n` reproducible test cases: initial outputs uniform in their
/// ranges, inputs piecewise constant and redrawn every hold period.
inline std::vector<TestCase> draw_test_cases(const HybridAutomaton& ha, std::size_t n, std::uint64_t seed,
                                             const SamplingSpec& spec) {
    require(n >= 1, "sample_runs: n must be >= 1");
    const auto& roles = ha.roles;
    require(spec.init.size() == roles.outputs.size(), "sample_runs: one initial range per output expected");
    require(spec.inputs.size() == roles.inputs.size(), "sample_runs: one range per input expected");
    const double hold = spec.hold_period > 0.0 ? spec.hold_period : spec.sim.horizon / 10.0;
    UniformSource rng(seed);
    std::vector<TestCase> cases;
    cases.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        TestCase tc;
        tc.location = spec.location;
        tc.x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(roles.size()));
        for (std::size_t k = 0; k < roles.outputs.size(); ++k) {
            tc.x0(static_cast<Eigen::Index>(roles.outputs[k])) = rng.next(spec.init[k].lo, spec.init[k].hi);
        }
        if (!roles.inputs.empty()) {
            std::size_t pieces = 1;
            if (hold > 0.0 && spec.sim.horizon > 0.0) {
                pieces = static_cast<std::size_t>(std::ceil(spec.sim.horizon / hold - 1e-9));
                pieces = std::max<std::size_t>(pieces, 1);
            }
            for (std::size_t p = 0; p < pieces; ++p) {
                Eigen::VectorXd v(static_cast<Eigen::Index>(roles.inputs.size()));
                for (std::size_t k = 0; k < roles.inputs.size(); ++k) {
                    v(static_cast<Eigen::Index>(k)) = rng.next(spec.inputs[k].lo, spec.inputs[k].hi);
                }
                tc.input.breakpoints.push_back(static_cast<double>(p) * hold);
                tc.input.values.push_back(std::move(v));
            }
            for (std::size_t k = 0; k < roles.inputs.size(); ++k) {
                tc.x0(static_cast<Eigen::Index>(roles.inputs[k])) = tc.input.values[0](static_cast<Eigen::Index>(k));
            }
        }
        cases.push_back(std::move(tc));
    }
    return cases;
}

inline Run run_test_case(const HybridAutomaton& ha, const TestCase& tc, const SimulationOptions& sim,
                         const std::string& id = {}) {
    return simulate(ha, tc.location, tc.x0, tc.input, sim, id);
}

/// `n` simulated trajectories, fully determined by `seed`.
inline std::vector<Run> sample_runs(const HybridAutomaton& ha, std::size_t n, std::uint64_t seed,
                                    const SamplingSpec& spec) {
    auto cases = draw_test_cases(ha, n, seed, spec);
    std::vector<Run> runs;
    runs.reserve(n);
    for (std::size_t r = 0; r < cases.size(); ++r) {
        runs.push_back(run_test_case(ha, cases[r], spec.sim, "run" + std::to_string(r)));
    }
    return runs;
}

} // namespace halearn
