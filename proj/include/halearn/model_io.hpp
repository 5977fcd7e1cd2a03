#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "halearn/automaton.hpp"
#include "halearn/error.hpp"
#include "halearn/monomial.hpp"

// Model file layout:
//   variables   {names, inputs, outputs}            (inputs/outputs as names)
//   locations   [{id, name, basis{degree, exponents}, coeffs, invariant?}]
//   transitions [{src, dst, guard{degree, exponents, weights, bias, strict, and?, training_accuracy?},
//                 assignment{matrix, intercept, tags?}}]
//   initial     [{location, ranges | valuation}]
//   meta        free-form object
// Doubles are written in shortest round-trip form, so reading back is exact.

namespace halearn {

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline nlohmann::json halfspace_json(const Halfspace& h) {
    nlohmann::json j{{"weights", h.weights}, {"bias", h.bias}};
    if (h.strict) j["strict"] = true;
    return j;
}

inline nlohmann::json basis_json(const MonomialBasis& b) {
    return {{"degree", b.degree()}, {"exponents", b.exponents()}};
}

/// Walks a JSON document and reports schema violations with their path.
class SchemaReader {
public:
    SchemaReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const nlohmann::json& json() const { return j_; }
    const std::string& path() const { return path_; }

    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorKind::schema, "model file: " + (path_.empty() ? std::string("<root>") : path_) + ": " + what);
    }

    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

    SchemaReader at(const char* key) const {
        if (!j_.is_object()) error("expected an object");
        if (!j_.contains(key)) SchemaReader(j_, join(key)).error("missing required field");
        return SchemaReader(j_.at(key), join(key));
    }

    SchemaReader at(std::size_t k) const { return SchemaReader(j_.at(k), path_ + "[" + std::to_string(k) + "]"); }

    std::size_t array_size() const {
        if (!j_.is_array()) error("expected an array");
        return j_.size();
    }

    double number() const {
        if (!j_.is_number()) error("expected a number");
        return j_.get<double>();
    }

    int integer() const {
        if (!j_.is_number_integer()) error("expected an integer");
        return j_.get<int>();
    }

    bool boolean() const {
        if (!j_.is_boolean()) error("expected a boolean");
        return j_.get<bool>();
    }

    std::string string() const {
        if (!j_.is_string()) error("expected a string");
        return j_.get<std::string>();
    }

    std::vector<double> numbers() const {
        std::vector<double> out(array_size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(k).number();
        return out;
    }

    std::vector<std::string> strings() const {
        std::vector<std::string> out(array_size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(k).string();
        return out;
    }

    Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) const {
        if (array_size() != static_cast<std::size_t>(rows)) error("expected " + std::to_string(rows) + " rows");
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            auto row = at(static_cast<std::size_t>(r));
            if (row.array_size() != static_cast<std::size_t>(cols)) {
                row.error("expected " + std::to_string(cols) + " columns");
            }
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).number();
        }
        return m;
    }

private:
    std::string join(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

    const nlohmann::json& j_;
    std::string path_;
};

inline MonomialBasis read_basis(const SchemaReader& r, std::size_t n_vars) {
    const int degree = r.at("degree").integer();
    if (degree < 0) r.at("degree").error("negative degree");
    if (!r.has("exponents")) return MonomialBasis(n_vars, degree);
    auto ex = r.at("exponents");
    std::vector<std::vector<int>> exps(ex.array_size());
    for (std::size_t k = 0; k < exps.size(); ++k) {
        auto row = ex.at(k);
        if (row.array_size() != n_vars) row.error("expected " + std::to_string(n_vars) + " exponents");
        for (std::size_t v = 0; v < n_vars; ++v) exps[k].push_back(row.at(v).integer());
    }
    try {
        return MonomialBasis(n_vars, degree, std::move(exps));
    } catch (const Error& e) {
        ex.error(e.what());
    }
}

inline Halfspace read_halfspace(const SchemaReader& r, std::size_t n_weights) {
    Halfspace h;
    h.weights = r.at("weights").numbers();
    if (h.weights.size() != n_weights) r.at("weights").error("expected " + std::to_string(n_weights) + " weights");
    h.bias = r.at("bias").number();
    if (r.has("strict")) h.strict = r.at("strict").boolean();
    return h;
}

inline std::size_t name_index(const SchemaReader& r, const std::vector<std::string>& names, const std::string& name) {
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k] == name) return k;
    }
    r.error("unknown variable '" + name + "'");
}

} // namespace detail

inline nlohmann::json model_to_json(const HybridAutomaton& ha) {
    using namespace detail;
    const auto& roles = ha.roles;
    nlohmann::json j;
    std::vector<std::string> ins, outs;
    for (auto k : roles.inputs) ins.push_back(roles.names[k]);
    for (auto k : roles.outputs) outs.push_back(roles.names[k]);
    j["variables"] = {{"names", roles.names}, {"inputs", ins}, {"outputs", outs}};

    auto locs = nlohmann::json::array();
    for (const auto& l : ha.locations) {
        nlohmann::json lj{{"id", l.id},
                          {"name", l.name},
                          {"basis", basis_json(l.flow.basis)},
                          {"coeffs", matrix_json(l.flow.coeffs)}};
        if (!l.invariant.empty()) {
            auto inv = nlohmann::json::array();
            for (const auto& h : l.invariant) inv.push_back(halfspace_json(h));
            lj["invariant"] = inv;
        }
        locs.push_back(std::move(lj));
    }
    j["locations"] = locs;

    auto trans = nlohmann::json::array();
    for (const auto& t : ha.transitions) {
        nlohmann::json g = basis_json(t.guard.basis);
        const auto first = halfspace_json(t.guard.terms.at(0));
        g.update(first);
        if (t.guard.terms.size() > 1) {
            auto rest = nlohmann::json::array();
            for (std::size_t k = 1; k < t.guard.terms.size(); ++k) rest.push_back(halfspace_json(t.guard.terms[k]));
            g["and"] = rest;
        }
        if (t.guard.training_accuracy) g["training_accuracy"] = *t.guard.training_accuracy;
        nlohmann::json a{{"matrix", matrix_json(t.assignment.matrix)}, {"intercept", vector_json(t.assignment.intercept)}};
        if (!t.assignment.tags.empty()) a["tags"] = t.assignment.tags;
        trans.push_back({{"src", t.source}, {"dst", t.target}, {"guard", g}, {"assignment", a}});
    }
    j["transitions"] = trans;

    auto init = nlohmann::json::array();
    for (const auto& ic : ha.initial) {
        nlohmann::json ij{{"location", ic.location}};
        auto ranges = nlohmann::json::array();
        for (const auto& r : ic.ranges) ranges.push_back({r.lo, r.hi});
        ij["ranges"] = ranges;
        init.push_back(std::move(ij));
    }
    j["initial"] = init;
    j["meta"] = ha.meta;
    return j;
}

inline HybridAutomaton model_from_json(const nlohmann::json& root) {
    using namespace detail;
    SchemaReader r(root, "");
    HybridAutomaton ha;

    auto vars = r.at("variables");
    auto names = vars.at("names").strings();
    auto inputs = vars.has("inputs") ? vars.at("inputs").strings() : std::vector<std::string>{};
    for (const auto& in : inputs) (void)name_index(vars.at("inputs"), names, in);
    try {
        ha.roles = VariableRoles::from_names(names, inputs);
    } catch (const Error& e) {
        vars.error(e.what());
    }
    if (vars.has("outputs")) {
        auto outs = vars.at("outputs").strings();
        std::vector<std::string> expect;
        for (auto k : ha.roles.outputs) expect.push_back(names[k]);
        if (outs != expect) vars.at("outputs").error("outputs must be the non-input variables in declaration order");
    }
    const std::size_t nx = ha.roles.size();
    const auto no = static_cast<Eigen::Index>(ha.roles.outputs.size());

    auto locs = r.at("locations");
    for (std::size_t k = 0; k < locs.array_size(); ++k) {
        auto lj = locs.at(k);
        Location l;
        l.id = lj.at("id").integer();
        l.name = lj.has("name") ? lj.at("name").string() : "loc" + std::to_string(l.id);
        l.flow.basis = read_basis(lj.at("basis"), nx);
        l.flow.coeffs = lj.at("coeffs").matrix(no, static_cast<Eigen::Index>(l.flow.basis.size()));
        if (lj.has("invariant")) {
            auto inv = lj.at("invariant");
            for (std::size_t h = 0; h < inv.array_size(); ++h) {
                l.invariant.push_back(read_halfspace(inv.at(h), l.flow.basis.size() - 1));
            }
        }
        ha.locations.push_back(std::move(l));
    }

    auto trans = r.at("transitions");
    for (std::size_t k = 0; k < trans.array_size(); ++k) {
        auto tj = trans.at(k);
        Transition t;
        t.source = tj.at("src").integer();
        t.target = tj.at("dst").integer();
        auto gj = tj.at("guard");
        t.guard.basis = read_basis(gj, nx);
        const std::size_t nw = t.guard.basis.size() - 1;
        t.guard.terms.push_back(read_halfspace(gj, nw));
        if (gj.has("and")) {
            auto rest = gj.at("and");
            for (std::size_t h = 0; h < rest.array_size(); ++h) t.guard.terms.push_back(read_halfspace(rest.at(h), nw));
        }
        if (gj.has("training_accuracy")) t.guard.training_accuracy = gj.at("training_accuracy").number();
        auto aj = tj.at("assignment");
        t.assignment.matrix = aj.at("matrix").matrix(no, static_cast<Eigen::Index>(nx));
        auto ic = aj.at("intercept").numbers();
        if (ic.size() != static_cast<std::size_t>(no)) aj.at("intercept").error("expected one value per output");
        t.assignment.intercept = Eigen::Map<Eigen::VectorXd>(ic.data(), no);
        if (aj.has("tags")) t.assignment.tags = aj.at("tags").strings();
        ha.transitions.push_back(std::move(t));
    }

    if (r.has("initial")) {
        auto init = r.at("initial");
        for (std::size_t k = 0; k < init.array_size(); ++k) {
            auto ij = init.at(k);
            InitialCondition ic;
            ic.location = ij.at("location").integer();
            if (ij.has("ranges")) {
                auto rs = ij.at("ranges");
                for (std::size_t v = 0; v < rs.array_size(); ++v) {
                    auto pair = rs.at(v).numbers();
                    if (pair.size() != 2 || pair[0] > pair[1]) rs.at(v).error("expected [lo, hi] with lo <= hi");
                    ic.ranges.push_back({pair[0], pair[1]});
                }
            } else if (ij.has("valuation")) {
                for (double v : ij.at("valuation").numbers()) ic.ranges.push_back({v, v});
            }
            ha.initial.push_back(std::move(ic));
        }
    }
    if (r.has("meta")) ha.meta = root.at("meta");
    try {
        ha.validate();
    } catch (const Error& e) {
        r.error(e.what());
    }
    return ha;
}

inline void write_model(const HybridAutomaton& ha, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write model file " + path.string());
    out << model_to_json(ha).dump(2) << "\n";
    if (!out) fail(ErrorKind::io, "error writing model file " + path.string());
}

inline HybridAutomaton read_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open model file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::parse, "model file " + path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

} // namespace halearn
