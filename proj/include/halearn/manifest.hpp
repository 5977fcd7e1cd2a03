#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "halearn/automaton.hpp"
#include "halearn/error.hpp"
#include "halearn/sampling.hpp"

namespace halearn {

/// Record of a `simulate` run: enough to replay every test case exactly.
struct Manifest {
    std::string model;
    std::uint64_t seed = 0;
    SamplingSpec sampling;
    std::vector<std::string> names;  // variables
    std::vector<std::string> inputs; // input variable names
    std::vector<TestCase> cases;
    std::vector<std::string> files; // trajectory CSV per case, relative to the manifest
    nlohmann::json meta = nlohmann::json::object();
};

namespace detail {

inline nlohmann::json ranges_json(const std::vector<ValueRange>& rs) {
    auto a = nlohmann::json::array();
    for (const auto& r : rs) a.push_back({r.lo, r.hi});
    return a;
}

inline std::vector<ValueRange> ranges_from_json(const nlohmann::json& a) {
    std::vector<ValueRange> out;
    for (const auto& p : a) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return out;
}

} // namespace detail

inline nlohmann::json manifest_to_json(const Manifest& m) {
    nlohmann::json j;
    j["model"] = m.model;
    j["seed"] = m.seed;
    j["variables"] = {{"names", m.names}, {"inputs", m.inputs}};
    j["simulation"] = {{"horizon", m.sampling.sim.horizon},
                       {"dt", m.sampling.sim.dt},
                       {"max_transitions_per_step", m.sampling.sim.max_transitions_per_step}};
    j["sampling"] = {{"location", m.sampling.location},
                     {"init", detail::ranges_json(m.sampling.init)},
                     {"inputs", detail::ranges_json(m.sampling.inputs)},
                     {"hold_period", m.sampling.hold_period}};
    auto cases = nlohmann::json::array();
    for (std::size_t k = 0; k < m.cases.size(); ++k) {
        const auto& tc = m.cases[k];
        auto values = nlohmann::json::array();
        for (const auto& v : tc.input.values) values.push_back(std::vector<double>(v.data(), v.data() + v.size()));
        nlohmann::json c{{"location", tc.location},
                         {"x0", std::vector<double>(tc.x0.data(), tc.x0.data() + tc.x0.size())},
                         {"input", {{"breakpoints", tc.input.breakpoints}, {"values", values}}}};
        if (k < m.files.size()) c["file"] = m.files[k];
        cases.push_back(std::move(c));
    }
    j["cases"] = cases;
    j["meta"] = m.meta;
    return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
    Manifest m;
    try {
        m.model = j.at("model").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.names = j.at("variables").at("names").get<std::vector<std::string>>();
        m.inputs = j.at("variables").at("inputs").get<std::vector<std::string>>();
        const auto& sim = j.at("simulation");
        m.sampling.sim.horizon = sim.at("horizon").get<double>();
        m.sampling.sim.dt = sim.at("dt").get<double>();
        m.sampling.sim.max_transitions_per_step = sim.value("max_transitions_per_step", kMaxTransitionsPerStep);
        const auto& s = j.at("sampling");
        m.sampling.location = s.at("location").get<int>();
        m.sampling.init = detail::ranges_from_json(s.at("init"));
        m.sampling.inputs = detail::ranges_from_json(s.at("inputs"));
        m.sampling.hold_period = s.at("hold_period").get<double>();
        for (const auto& c : j.at("cases")) {
            TestCase tc;
            tc.location = c.at("location").get<int>();
            auto x0 = c.at("x0").get<std::vector<double>>();
            tc.x0 = Eigen::Map<Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
            tc.input.breakpoints = c.at("input").at("breakpoints").get<std::vector<double>>();
            for (const auto& v : c.at("input").at("values")) {
                auto vv = v.get<std::vector<double>>();
                tc.input.values.emplace_back(Eigen::Map<Eigen::VectorXd>(vv.data(), static_cast<Eigen::Index>(vv.size())));
            }
            m.cases.push_back(std::move(tc));
            m.files.push_back(c.value("file", std::string{}));
        }
        if (j.contains("meta")) m.meta = j.at("meta");
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::schema, std::string("manifest: ") + e.what());
    }
    return m;
}

inline void write_manifest(const Manifest& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write manifest " + path.string());
    out << manifest_to_json(m).dump(2) << "\n";
}

inline Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::parse, "manifest " + path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

} // namespace halearn
