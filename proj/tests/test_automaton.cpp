#include <cmath>

#include <gtest/gtest.h>

#include "halearn/benchmarks.hpp"
#include "halearn/sampling.hpp"

using namespace halearn;

namespace {

HybridAutomaton scalar(double constant, double slope) {
    HybridAutomaton ha;
    ha.roles = VariableRoles::from_names({"x"}, {});
    Location l;
    l.flow.basis = MonomialBasis(1, 1);
    l.flow.coeffs.resize(1, 2);
    l.flow.coeffs << constant, slope;
    ha.locations.push_back(l);
    return ha;
}

Transition self_loop(const VariableRoles& roles, double shift) {
    Transition t;
    t.guard.basis = MonomialBasis(roles.size(), 1);
    t.guard.terms.push_back(Halfspace{std::vector<double>(roles.size(), 0.0), -1.0, false}); // always true
    t.assignment = Assignment::identity(roles);
    t.assignment.intercept(0) = shift;
    return t;
}

// No outgoing transition may be enabled at a recorded sample, except a stutter.
void expect_urgent(const HybridAutomaton& ha, const Run& run) {
    const auto& tr = run.trajectory;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        Eigen::VectorXd x = tr.point(k);
        for (const Transition* t : ha.outgoing(run.locations[k])) {
            if (!t->guard.satisfied(x)) continue;
            bool stutter = t->target == run.locations[k] && t->assignment.apply(x, ha.roles) == x;
            ASSERT_TRUE(stutter) << "enabled transition at sample " << k;
        }
    }
}

} // namespace

TEST(Simulate, ZeroFlowIsConstant) {
    auto run = simulate(scalar(0.0, 0.0), 0, Eigen::VectorXd::Constant(1, 2.5), {}, {1.0, 0.1});
    EXPECT_EQ(run.trajectory.size(), 11u);
    for (std::size_t k = 0; k < run.trajectory.size(); ++k) EXPECT_EQ(run.trajectory.point(k)(0), 2.5);
    EXPECT_EQ(run.transitions_fired, 0u);
}

TEST(Simulate, ExponentialGrowth) {
    auto run = simulate(scalar(0.0, 1.0), 0, Eigen::VectorXd::Constant(1, 1.0), {}, {1.0, 0.01});
    EXPECT_NEAR(run.trajectory.point(run.trajectory.size() - 1)(0), std::exp(1.0), 1e-6);
    EXPECT_NEAR(run.trajectory.time(100), 1.0, 1e-12);
}

TEST(Simulate, FourthOrderConvergence) {
    auto ha = scalar(1.0, -2.0); // x' = 1 - 2x, x(t) = 0.5 + (x0 - 0.5) e^{-2t}
    const double exact = 0.5 + 1.5 * std::exp(-2.0);
    auto err = [&](double h) {
        auto run = simulate(ha, 0, Eigen::VectorXd::Constant(1, 2.0), {}, {1.0, h});
        return std::abs(run.trajectory.point(run.trajectory.size() - 1)(0) - exact);
    };
    for (double h : {0.1, 0.05, 0.02}) {
        double ratio = err(h) / err(h / 2);
        EXPECT_GE(ratio, 8.0) << h;
        EXPECT_LE(ratio, 32.0) << h;
    }
}

TEST(Simulate, BallBouncesLikeClosedForm) {
    auto b = ball_benchmark();
    const double dt = 0.001, g = -9.8, x0 = 10.35, v0 = 15.0;
    auto run = simulate(b.ha, 0, Eigen::Vector3d(g, x0, v0), InputSignal::constant(Eigen::VectorXd::Constant(1, g)),
                        {13.0, dt});
    const auto& tr = run.trajectory;
    // first bounce from the closed-form parabola
    const double hit = (-v0 - std::sqrt(v0 * v0 - 2.0 * g * x0)) / g;
    std::size_t k = 1;
    while (tr.point(k)(2) <= tr.point(k - 1)(2)) ++k; // velocity jumps up at the bounce
    EXPECT_NEAR(tr.time(k), hit, 2 * dt);
    // reset: the post-bounce velocity is -0.8 times the impact velocity, up to one step of gravity
    const double before = tr.point(k - 1)(2) + g * dt;
    EXPECT_NEAR(tr.point(k)(2), -0.8 * before, 1e-9);
    EXPECT_GT(run.transitions_fired, 2u);
    expect_urgent(b.ha, run);
}

TEST(Simulate, UrgencyOnBenchmarks) {
    for (const auto& b : builtin_benchmarks()) {
        auto spec = b.sampling;
        if (b.name == "cells") spec.sim.horizon = 100.0;
        for (const auto& run : sample_runs(b.ha, 3, 5, spec)) expect_urgent(b.ha, run);
    }
}

TEST(Simulate, TankPriorityAndCycle) {
    auto b = tanks_benchmark();
    auto runs = sample_runs(b.ha, 1, 1, b.sampling);
    const auto& locs = runs[0].locations;
    // x2 starts at 1, so off_off jumps to off_on at t = 0
    EXPECT_EQ(locs[0], 2);
    std::set<int> visited(locs.begin(), locs.end());
    EXPECT_GE(visited.size(), 3u);
}

TEST(Simulate, Deterministic) {
    auto b = osci_benchmark();
    auto a = sample_runs(b.ha, 2, 9, b.sampling);
    auto c = sample_runs(b.ha, 2, 9, b.sampling);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].trajectory.values(), c[k].trajectory.values());
        EXPECT_EQ(a[k].locations, c[k].locations);
    }
}

TEST(Simulate, StutterIsNotAJump) {
    auto ha = scalar(0.0, 1.0);
    ha.transitions.push_back(self_loop(ha.roles, 0.0));
    auto run = simulate(ha, 0, Eigen::VectorXd::Constant(1, 1.0), {}, {0.5, 0.1});
    EXPECT_EQ(run.transitions_fired, 0u);
}

TEST(Simulate, ZenoRunIsReported) {
    auto ha = scalar(0.0, 0.0);
    ha.transitions.push_back(self_loop(ha.roles, 1.0));
    try {
        simulate(ha, 0, Eigen::VectorXd::Constant(1, 0.0), {}, {0.5, 0.1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numeric);
    }
}

TEST(Simulate, InputErrors) {
    auto b = ball_benchmark();
    EXPECT_THROW(simulate(b.ha, 0, Eigen::Vector3d(-9.8, 1, 0), {}, {1.0, 0.01}), Error);
    EXPECT_THROW(simulate(b.ha, 7, Eigen::Vector3d(-9.8, 1, 0),
                          InputSignal::constant(Eigen::VectorXd::Constant(1, -9.8)), {1.0, 0.01}),
                 Error);
    EXPECT_THROW(simulate(b.ha, 0, Eigen::Vector2d(1, 0),
                          InputSignal::constant(Eigen::VectorXd::Constant(1, -9.8)), {1.0, 0.01}),
                 Error);
    EXPECT_THROW(sample_count(1.0, 0.0), Error);
}

TEST(Sampling, ReproducibleAndInRange) {
    auto b = tanks_benchmark();
    b.sampling.sim.horizon = 2.0;
    b.sampling.hold_period = 0.5;
    auto c1 = draw_test_cases(b.ha, 64, 42, b.sampling);
    auto c2 = draw_test_cases(b.ha, 64, 42, b.sampling);
    auto c3 = draw_test_cases(b.ha, 64, 43, b.sampling);
    ASSERT_EQ(c1.size(), 64u);
    bool differs = false;
    for (std::size_t k = 0; k < c1.size(); ++k) {
        EXPECT_EQ(c1[k].x0, c2[k].x0);
        EXPECT_EQ(c1[k].input.breakpoints, c2[k].input.breakpoints);
        differs = differs || c1[k].input.values[0] != c3[k].input.values[0];
        // zero-width ranges give the exact value
        EXPECT_EQ(c1[k].x0(1), 1.2);
        EXPECT_EQ(c1[k].x0(2), 1.0);
        ASSERT_EQ(c1[k].input.values.size(), 4u);
        for (const auto& v : c1[k].input.values) {
            EXPECT_GE(v(0), -0.1);
            EXPECT_LE(v(0), 0.1);
        }
        EXPECT_EQ(c1[k].x0(0), c1[k].input.values[0](0));
    }
    EXPECT_TRUE(differs);
}

TEST(Sampling, InputsFollowTheSignal) {
    auto b = tanks_benchmark();
    b.sampling.sim.horizon = 2.0;
    b.sampling.hold_period = 0.5;
    auto cases = draw_test_cases(b.ha, 4, 7, b.sampling);
    for (const auto& tc : cases) {
        auto run = run_test_case(b.ha, tc, b.sampling.sim);
        const auto& tr = run.trajectory;
        for (std::size_t k = 0; k < tr.size(); ++k) EXPECT_EQ(tr.point(k)(0), tc.input.at(tr.time(k))(0));
    }
}

TEST(Sampling, NoInputs) {
    auto b = osci_benchmark();
    auto cases = draw_test_cases(b.ha, 5, 1, b.sampling);
    for (const auto& tc : cases) {
        EXPECT_TRUE(tc.input.values.empty());
        EXPECT_GE(tc.x0(0), 0.01);
        EXPECT_LE(tc.x0(0), 0.09);
    }
    EXPECT_THROW(draw_test_cases(b.ha, 0, 1, b.sampling), Error);
}

TEST(Sampling, UniformSourceBits) {
    UniformSource a(5), b(5);
    std::mt19937_64 raw(5);
    for (int k = 0; k < 100; ++k) {
        double v = a.next(0.0, 1.0);
        EXPECT_EQ(v, static_cast<double>(raw() >> 11) * 0x1.0p-53);
        EXPECT_EQ(b.next(-2.0, 2.0), -2.0 + 4.0 * v);
        EXPECT_LT(v, 1.0);
    }
}
