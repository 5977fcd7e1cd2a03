#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "halearn/trajectory.hpp"

using namespace halearn;

namespace {

VariableRoles ball_roles() { return VariableRoles::from_names({"g", "x", "v"}, {"g"}); }

Trajectory parse(const std::string& text, const VariableRoles& roles) {
    std::istringstream in(text);
    return parse_trajectory_csv(in, roles, "t");
}

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("halearn_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST(Roles, FromNamesPartitionsVariables) {
    auto r = ball_roles();
    EXPECT_EQ(r.inputs, std::vector<std::size_t>{0});
    EXPECT_EQ(r.outputs, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(r.output_slot(2), 1);
    EXPECT_EQ(r.output_slot(0), -1);
}

TEST(Roles, RejectsAllInputs) {
    EXPECT_THROW(VariableRoles::from_names({"u"}, {"u"}), Error);
    EXPECT_THROW(VariableRoles::from_names({"x"}, {"nope"}), Error);
}

TEST(Load, TwoRowFile) {
    auto roles = VariableRoles::from_names({"x", "v"}, {});
    auto t = parse("time,x,v\n0,10.2,15\n0.001,10.215,14.99\n", roles);
    EXPECT_EQ(t.size(), 2u);
    EXPECT_NEAR(t.step(), 0.001, 1e-15);
    EXPECT_DOUBLE_EQ(t.values()(1, 1), 14.99);
}

TEST(Load, DuplicatedTimestampIsNonMonotone) {
    auto roles = VariableRoles::from_names({"x"}, {});
    try {
        parse("time,x\n0.0,1\n0.5,2\n0.5,3\n", roles);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("non-monotone time"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("row"), std::string::npos);
    }
}

TEST(Load, RejectsNonUniformStep) {
    auto roles = VariableRoles::from_names({"x"}, {});
    EXPECT_THROW(parse("time,x\n0,1\n0.1,2\n0.3,3\n", roles), Error);
}

TEST(Load, HeaderMustMatchRoles) {
    auto roles = VariableRoles::from_names({"x", "v"}, {});
    EXPECT_THROW(parse("time,v,x\n0,1,2\n", roles), Error);
    EXPECT_THROW(parse("time,x\n0,1\n", roles), Error);
    EXPECT_THROW(parse("t,x,v\n0,1,2\n", roles), Error);
}

TEST(Load, MalformedNumberReportsRow) {
    auto roles = VariableRoles::from_names({"x"}, {});
    try {
        parse("time,x\n0,1\n0.1,abc\n", roles);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
        EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
    }
}

TEST(Load, LongFileAtPaperHorizon) {
    std::ostringstream s;
    s << "time,x\n";
    for (int i = 0; i <= 13000; ++i) s << format_double(i * 0.001) << "," << i << "\n";
    auto t = parse(s.str(), VariableRoles::from_names({"x"}, {}));
    EXPECT_EQ(t.size(), 13001u);
}

TEST(Load, DirectoryIsSortedAndShared) {
    auto dir = temp_dir("dir");
    auto roles = VariableRoles::from_names({"x"}, {});
    for (const char* name : {"b.csv", "a.csv"}) {
        std::ofstream(dir / name) << "time,x\n0,1\n0.5,2\n1,3\n";
    }
    std::ofstream(dir / "notes.txt") << "ignored";
    auto ts = load_trajectories(dir, roles);
    ASSERT_EQ(ts.size(), 2u);
    EXPECT_EQ(ts[0]->id(), "a");
    EXPECT_DOUBLE_EQ(common_step(ts), 0.5);
}

TEST(Load, MixedStepsRejected) {
    auto roles = VariableRoles::from_names({"x"}, {});
    std::vector<TrajectoryPtr> ts{
        std::make_shared<const Trajectory>(std::vector<double>{0, 1, 2}, Eigen::MatrixXd::Zero(3, 1), roles),
        std::make_shared<const Trajectory>(std::vector<double>{0, 2, 4}, Eigen::MatrixXd::Zero(3, 1), roles)};
    EXPECT_THROW(common_step(ts), Error);
}

TEST(Project, SelectsOutputs) {
    auto roles = ball_roles();
    Eigen::MatrixXd v(2, 3);
    v << -9.8, 1, 2, -9.8, 3, 4;
    Trajectory t({0, 0.1}, v, roles);
    auto p = project_outputs(t);
    EXPECT_EQ(p.dim(), 2u);
    EXPECT_EQ(p.values(), v.rightCols(2));
    EXPECT_EQ(p.times(), t.times());
    auto pp = project_outputs(p);
    EXPECT_EQ(pp.values(), p.values());
    EXPECT_EQ(pp.roles(), p.roles());
}

TEST(Project, NoInputsIsIdentity) {
    auto roles = VariableRoles::from_names({"x", "y"}, {});
    Trajectory t({0, 1}, Eigen::MatrixXd::Random(2, 2), roles);
    EXPECT_EQ(project_outputs(t).values(), t.values());
}

TEST(Project, ThirdColumnOnly) {
    auto roles = VariableRoles::from_names({"a", "b", "c"}, {"a", "b"});
    Eigen::MatrixXd v = Eigen::MatrixXd::Random(4, 3);
    Trajectory t({0, 1, 2, 3}, v, roles);
    EXPECT_EQ(project_outputs(t).values(), v.col(2));
}

TEST(Slice, IndexArithmetic) {
    auto roles = VariableRoles::from_names({"x"}, {});
    Eigen::MatrixXd v(12, 1);
    for (int i = 0; i < 12; ++i) v(i, 0) = i * i;
    auto t = std::make_shared<const Trajectory>(std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, v, roles);
    auto whole = slice(t, 0, 11);
    EXPECT_EQ(whole.size(), 12u);
    auto s = slice(t, 2, 9);
    EXPECT_EQ(s.point(3), t->point(5));
    EXPECT_THROW(slice(t, 5, 4), Error);
    EXPECT_THROW(slice(t, 3, 12), Error);
    // every point equals its source point
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_EQ(s.point(k), t->point(s.start + k));
}

TEST(RoundTrip, WriteThenLoadIsExact) {
    auto roles = ball_roles();
    Eigen::MatrixXd v(3, 3);
    v << -9.8, 10.2, 15, -9.8, 0.1 + 0.2, 1.0 / 3.0, -9.8, 1e-300, -2.5e17;
    Trajectory t({0, 0.001, 0.002}, v, roles, "r");
    std::ostringstream out;
    write_trajectory(t, out);
    auto back = parse(out.str(), roles);
    EXPECT_EQ(back.values(), t.values());
    EXPECT_EQ(back.times(), t.times());
    std::ostringstream again;
    write_trajectory(back, again);
    EXPECT_EQ(again.str(), out.str());
}
