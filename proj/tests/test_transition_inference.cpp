#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "halearn/benchmarks.hpp"
#include "halearn/sampling.hpp"
#include "halearn/segmentation.hpp"
#include "halearn/transition_inference.hpp"

using namespace halearn;

namespace {

TrajectoryPtr ramp(std::size_t n, std::size_t dim = 1) {
    std::vector<double> t(n);
    Eigen::MatrixXd v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = static_cast<double>(i);
        for (std::size_t d = 0; d < dim; ++d) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = i + 100.0 * d;
    }
    std::vector<std::string> names;
    for (std::size_t d = 0; d < dim; ++d) names.push_back("x" + std::to_string(d));
    return std::make_shared<const Trajectory>(t, v, VariableRoles::from_names(names, {}));
}

ConnectionTriple triple1(double pre, double exit, double entry) {
    ConnectionTriple t;
    t.pre = Eigen::VectorXd::Constant(1, pre);
    t.exit = Eigen::VectorXd::Constant(1, exit);
    t.entry = Eigen::VectorXd::Constant(1, entry);
    return t;
}

struct BallData {
    HybridAutomaton truth;
    std::vector<Segment> segments;
    std::vector<Cluster> clusters;
    TripleMap triples;
};

BallData ball_data(double dt) {
    auto b = ball_benchmark();
    b.sampling.sim.dt = dt;
    BallData d;
    d.truth = b.ha;
    std::vector<TrajectoryPtr> trajs;
    for (auto& r : sample_runs(b.ha, 8, 3, b.sampling)) trajs.push_back(std::make_shared<const Trajectory>(r.trajectory));
    d.segments = segment_all(trajs, {5, 0.1, 0.01});
    d.clusters = cluster_segments(d.segments, {9.0, 0.8});
    d.triples = collect_connection_triples(d.clusters, d.segments);
    return d;
}

} // namespace

TEST(Triples, ConsecutiveSegments) {
    auto t = ramp(30);
    std::vector<Segment> segs{slice(t, 0, 9), slice(t, 11, 19), slice(t, 21, 29)};
    std::vector<Cluster> cs(2);
    cs[0].id = 0;
    cs[0].members = {0, 2};
    cs[1].id = 1;
    cs[1].members = {1};
    auto m = collect_connection_triples(cs, segs);
    ASSERT_EQ(m.size(), 2u);
    ASSERT_EQ(m.at({0, 1}).size(), 1u);
    const auto& tr = m.at({0, 1})[0];
    EXPECT_EQ(tr.pre(0), 8.0);
    EXPECT_EQ(tr.exit(0), 9.0);
    EXPECT_EQ(tr.entry(0), 11.0);
    EXPECT_EQ(tr.t_entry, 11.0);
    EXPECT_EQ(m.at({1, 0})[0].entry(0), 21.0);
}

TEST(Triples, SingleSegmentOrSeparateTrajectories) {
    auto a = ramp(10);
    auto b = ramp(10);
    std::vector<Segment> segs{slice(a, 0, 9), slice(b, 0, 9)};
    std::vector<Cluster> cs(1);
    cs[0].members = {0, 1};
    EXPECT_TRUE(collect_connection_triples(cs, segs).empty());
}

TEST(Guard, OneDimensionalThreshold) {
    // violated at x = 0.5 .. 0.9, satisfied at 1.0 .. 1.4 : guard is x >= ~0.95
    std::vector<ConnectionTriple> ts;
    for (int k = 0; k < 5; ++k) ts.push_back(triple1(0.5 + 0.1 * k, 1.0 + 0.1 * k, 0.0));
    auto g = fit_guard(ts, 1);
    ASSERT_EQ(g.terms.size(), 1u);
    for (const auto& t : ts) {
        EXPECT_FALSE(g.satisfied(t.pre));
        EXPECT_TRUE(g.satisfied(t.exit));
    }
    EXPECT_DOUBLE_EQ(*g.training_accuracy, 1.0);
    // crossing point between the classes
    const auto& h = g.terms[0];
    double root = -h.bias / h.weights[0];
    EXPECT_GT(root, 0.9);
    EXPECT_LT(root, 1.0);
    // monotone: larger x stays satisfied
    EXPECT_TRUE(g.satisfied(Eigen::VectorXd::Constant(1, 10.0)));
    EXPECT_FALSE(g.satisfied(Eigen::VectorXd::Constant(1, -10.0)));
}

TEST(Guard, IdenticalSetsAreInseparable) {
    std::vector<ConnectionTriple> ts{triple1(1.0, 2.0, 0.0), triple1(2.0, 1.0, 0.0)};
    try {
        fit_guard(ts, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::pipeline);
        EXPECT_NE(std::string(e.what()).find("inseparable guard data"), std::string::npos);
    }
    EXPECT_THROW(fit_guard({}, 1), Error);
}

TEST(Guard, InvariantToFeatureScaling) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<ConnectionTriple> a, b;
    for (int k = 0; k < 20; ++k) {
        double y = noise(rng) * 10;
        ConnectionTriple t;
        t.pre = Eigen::Vector2d(0.8 + noise(rng), y);
        t.exit = Eigen::Vector2d(1.2 + noise(rng), y);
        t.entry = t.exit;
        a.push_back(t);
        t.pre(0) *= 1000.0;
        t.exit(0) *= 1000.0;
        b.push_back(t);
    }
    auto ga = fit_guard(a, 1);
    auto gb = fit_guard(b, 1);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(ga.satisfied(a[k].pre), gb.satisfied(b[k].pre));
        EXPECT_EQ(ga.satisfied(a[k].exit), gb.satisfied(b[k].exit));
    }
    EXPECT_NEAR(*ga.training_accuracy, *gb.training_accuracy, 1e-12);
    EXPECT_GE(*ga.training_accuracy, 0.95);
}

TEST(Guard, AccuracyMatchesRecount) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<ConnectionTriple> ts;
    for (int k = 0; k < 30; ++k) ts.push_back(triple1(u(rng), u(rng) + 0.3, 0.0));
    auto g = fit_guard(ts, 2);
    std::size_t correct = 0;
    for (const auto& t : ts) correct += (!g.satisfied(t.pre)) + g.satisfied(t.exit);
    EXPECT_DOUBLE_EQ(*g.training_accuracy, static_cast<double>(correct) / 60.0);
}

TEST(Assignment, AffineRecovery) {
    auto roles = VariableRoles::from_names({"x", "y"}, {});
    std::vector<ConnectionTriple> ts;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int k = 0; k < 10; ++k) {
        ConnectionTriple t;
        t.exit = Eigen::Vector2d(u(rng), u(rng));
        t.pre = t.exit;
        t.entry = Eigen::Vector2d(2.0 * t.exit(0) - t.exit(1) + 1.0, -0.5 * t.exit(1));
        ts.push_back(t);
    }
    auto a = fit_assignment(ts, roles, {});
    Eigen::MatrixXd expect(2, 2);
    expect << 2.0, -1.0, 0.0, -0.5;
    EXPECT_LT((a.matrix - expect).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(a.intercept(0), 1.0, 1e-9);
    EXPECT_NEAR(a.intercept(1), 0.0, 1e-9);
}

TEST(Assignment, NoAssignmentIsIdentityRow) {
    auto roles = VariableRoles::from_names({"x", "y"}, {});
    std::vector<ConnectionTriple> ts;
    for (int k = 0; k < 4; ++k) {
        ConnectionTriple t;
        t.exit = Eigen::Vector2d(k, 2 * k + 1);
        t.pre = t.exit;
        t.entry = Eigen::Vector2d(7.0, 3.0 * k);
        ts.push_back(t);
    }
    std::vector<VariableAnnotation> ann{VariableAnnotation::parse("no-assignment"), VariableAnnotation{}};
    auto a = fit_assignment(ts, roles, ann);
    EXPECT_EQ(a.matrix(0, 0), 1.0);
    EXPECT_EQ(a.matrix(0, 1), 0.0);
    EXPECT_EQ(a.intercept(0), 0.0);
    EXPECT_EQ(a.tags[0], "no-assignment");
    Eigen::Vector2d probe(4.0, -2.0);
    EXPECT_EQ(a.apply(probe, roles)(0), 4.0);
}

TEST(Assignment, ConstantPoolPicksMostFrequent) {
    auto roles = VariableRoles::from_names({"x"}, {});
    std::vector<ConnectionTriple> ts{triple1(0, 0, 1.0), triple1(0, 0, 1.0), triple1(0, 0, 0.0)};
    std::vector<VariableAnnotation> ann{VariableAnnotation::parse("pool:[0,1]")};
    auto a = fit_assignment(ts, roles, ann);
    EXPECT_EQ(a.matrix(0, 0), 0.0);
    EXPECT_EQ(a.intercept(0), 1.0);
    // a tie goes to the smaller constant
    std::vector<ConnectionTriple> tie{triple1(0, 0, 0.9), triple1(0, 0, 0.1)};
    EXPECT_EQ(fit_assignment(tie, roles, ann).intercept(0), 0.0);
}

TEST(Assignment, UnderdeterminedWarns) {
    auto roles = VariableRoles::from_names({"x", "y"}, {});
    ConnectionTriple t;
    t.exit = Eigen::Vector2d(1, 2);
    t.pre = t.exit;
    t.entry = Eigen::Vector2d(3, 4);
    auto fit = fit_assignment_detailed({t}, roles, {});
    EXPECT_FALSE(fit.warnings.empty());
    EXPECT_TRUE(fit.assignment.matrix.allFinite());
}

TEST(Ball, GuardAndResetLearned) {
    auto d = ball_data(0.001);
    ASSERT_EQ(d.clusters.size(), 1u);
    ASSERT_EQ(d.triples.size(), 1u);
    const auto& ts = d.triples.at({0, 0});
    ASSERT_GE(ts.size(), 8u);

    auto roles = d.truth.roles;
    auto a = fit_assignment(ts, roles, {});
    // output rows: x, v ; columns g, x, v
    EXPECT_NEAR(a.matrix(1, 2), -0.8, 0.02) << a.matrix;
    auto g = fit_guard(ts, 1);
    EXPECT_GE(*g.training_accuracy, 0.95);
    // the learned guard holds near the ground and fails high up while falling
    EXPECT_TRUE(g.satisfied(Eigen::Vector3d(-9.8, -0.01, -20.0)));
    EXPECT_FALSE(g.satisfied(Eigen::Vector3d(-9.8, 5.0, -10.0)));

    std::vector<VariableAnnotation> ann(3);
    ann[1] = VariableAnnotation::parse("no-assignment");
    auto an = fit_assignment(ts, roles, ann);
    EXPECT_EQ(an.matrix(0, 1), 1.0);
    EXPECT_NEAR(an.matrix(1, 2), -0.8, 0.02);
}

TEST(Assemble, BuildsAutomaton) {
    auto roles = VariableRoles::from_names({"x"}, {});
    std::vector<Cluster> cs(2);
    cs[0].id = 0;
    cs[1].id = 1;
    FlowModel f;
    f.basis = MonomialBasis(1, 1);
    f.coeffs = Eigen::MatrixXd::Zero(1, 2);
    std::map<int, FlowModel> flows{{0, f}, {1, f}};
    std::vector<ConnectionTriple> ts{triple1(0.0, 1.0, 1.0), triple1(0.2, 1.2, 1.2)};
    auto g = fit_guard(ts, 1);
    auto a = fit_assignment(ts, roles, {});
    auto ha = assemble_automaton(roles, cs, flows, {0}, {{{0, 1}, g}}, {{{0, 1}, a}});
    EXPECT_EQ(ha.locations.size(), 2u);
    ASSERT_EQ(ha.transitions.size(), 1u);
    EXPECT_EQ(ha.transitions[0].source, 0);
    EXPECT_EQ(ha.transitions[0].target, 1);
    ASSERT_EQ(ha.initial.size(), 1u);
    EXPECT_EQ(ha.initial[0].location, 0);
    EXPECT_THROW(assemble_automaton(roles, cs, flows, {0}, {{{0, 1}, g}}, {}), Error);
    EXPECT_THROW(assemble_automaton(roles, cs, {{0, f}}, {0}, {}, {}), Error);
}
