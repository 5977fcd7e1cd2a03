#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "halearn/automaton.hpp"
#include "halearn/clustering.hpp"
#include "halearn/error.hpp"
#include "halearn/segmentation.hpp"
#include "halearn/trajectory.hpp"
#include "halearn/transition_inference.hpp"

namespace halearn {

/// Every knob of the learning pipeline plus the simulation settings used by
/// `simulate` and `evaluate`.
struct LearnConfig {
    std::vector<std::string> variables;
    std::vector<std::string> inputs;

    int order = 5;
    double fwd_bwd_threshold = 0.1;
    double bwd_bwd_threshold = 0.01;
    double distance_threshold = 1.0;
    double correlation_threshold = 0.8;
    ShapeView cluster_view = ShapeView::derivatives;
    bool cluster_normalize = true;
    int ode_degree = 1;
    int guard_degree = 1;
    std::size_t max_segments = 50;
    long svm_iterations = 100000;
    double svm_regularization = 1e-3;
    std::map<std::string, VariableAnnotation> annotations;

    std::uint64_t seed = 0;
    double dt = 0.01;
    double horizon = 10.0;
    long threads = 0;

    SegmentationParams segmentation() const { return {order, fwd_bwd_threshold, bwd_bwd_threshold}; }
    ClusterParams clustering() const {
        return {distance_threshold, correlation_threshold, cluster_view, cluster_normalize};
    }
    SvmParams svm() const { return {svm_iterations, svm_regularization}; }

    VariableRoles roles() const {
        require(!variables.empty(), "config: 'variables' is not set");
        return VariableRoles::from_names(variables, inputs);
    }

    /// Annotations indexed by variable position (all "none" when unset).
    std::vector<VariableAnnotation> annotation_vector(const VariableRoles& r) const {
        std::vector<VariableAnnotation> out(r.size());
        for (const auto& [name, ann] : annotations) out[r.index_of(name)] = ann;
        return out;
    }

    void validate() const {
        segmentation().validate();
        require(distance_threshold >= 0.0, "config: distance_threshold must be non-negative");
        require(correlation_threshold > -1.0 && correlation_threshold < 1.0,
                "config: correlation_threshold must lie in (-1, 1)");
        require(ode_degree >= 1 && guard_degree >= 1, "config: degrees must be >= 1");
        require(max_segments >= 1, "config: max_segments must be >= 1");
        require(svm_iterations >= 1 && svm_regularization > 0.0, "config: bad SVM parameters");
        require(dt > 0.0 && horizon > 0.0, "config: dt and horizon must be positive");
        if (!variables.empty()) {
            (void)roles();
            for (const auto& [name, ann] : annotations) {
                require(std::find(variables.begin(), variables.end(), name) != variables.end(),
                        "config: annotation for unknown variable '" + name + "'");
            }
        }
    }

    /// Sets one field from its textual form. Keys accept '-' or '_'.
    void set(std::string_view raw_key, std::string_view raw_value);

    nlohmann::json to_json() const;
};

namespace detail {

inline std::string normalize_key(std::string_view key) {
    std::string k(trim(key));
    for (auto& c : k) {
        if (c == '-') c = '_';
    }
    return k;
}

inline double config_double(std::string_view key, std::string_view v) {
    double d = 0.0;
    if (!parse_double(v, d)) fail(ErrorKind::parse, "config: '" + std::string(key) + "' expects a number, got '" +
                                                        std::string(v) + "'");
    return d;
}

inline long config_long(std::string_view key, std::string_view v) {
    double d = config_double(key, v);
    if (d != static_cast<double>(static_cast<long>(d))) {
        fail(ErrorKind::parse, "config: '" + std::string(key) + "' expects an integer");
    }
    return static_cast<long>(d);
}

inline bool config_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(ErrorKind::parse, "config: '" + std::string(key) + "' expects true/false");
}

inline std::vector<std::string> config_list(std::string_view v) {
    std::vector<std::string> out;
    if (trim(v).empty()) return out;
    for (auto cell : split_csv_line(v)) out.emplace_back(trim(cell));
    return out;
}

} // namespace detail

inline void LearnConfig::set(std::string_view raw_key, std::string_view raw_value) {
    const std::string key = detail::normalize_key(raw_key);
    const std::string_view v = detail::trim(raw_value);
    if (key.rfind("annotation.", 0) == 0) {
        annotations[key.substr(11)] = VariableAnnotation::parse(v);
    } else if (key == "variables") {
        variables = detail::config_list(v);
    } else if (key == "inputs") {
        inputs = detail::config_list(v);
    } else if (key == "order" || key == "m" || key == "M") {
        order = static_cast<int>(detail::config_long(key, v));
    } else if (key == "fwd_bwd_threshold") {
        fwd_bwd_threshold = detail::config_double(key, v);
    } else if (key == "bwd_bwd_threshold") {
        bwd_bwd_threshold = detail::config_double(key, v);
    } else if (key == "distance_threshold") {
        distance_threshold = detail::config_double(key, v);
    } else if (key == "correlation_threshold") {
        correlation_threshold = detail::config_double(key, v);
    } else if (key == "cluster_view") {
        if (v == "derivatives") {
            cluster_view = ShapeView::derivatives;
        } else if (v == "values") {
            cluster_view = ShapeView::values;
        } else {
            fail(ErrorKind::parse, "config: cluster_view must be 'derivatives' or 'values'");
        }
    } else if (key == "cluster_normalize") {
        cluster_normalize = detail::config_bool(key, v);
    } else if (key == "ode_degree") {
        ode_degree = static_cast<int>(detail::config_long(key, v));
    } else if (key == "guard_degree") {
        guard_degree = static_cast<int>(detail::config_long(key, v));
    } else if (key == "max_segments") {
        long n = detail::config_long(key, v);
        require(n >= 1, "config: max_segments must be >= 1");
        max_segments = static_cast<std::size_t>(n);
    } else if (key == "svm_iterations") {
        svm_iterations = detail::config_long(key, v);
    } else if (key == "svm_regularization") {
        svm_regularization = detail::config_double(key, v);
    } else if (key == "seed") {
        long s = detail::config_long(key, v);
        require(s >= 0, "config: seed must be non-negative");
        seed = static_cast<std::uint64_t>(s);
    } else if (key == "dt") {
        dt = detail::config_double(key, v);
    } else if (key == "horizon") {
        horizon = detail::config_double(key, v);
    } else if (key == "threads") {
        threads = detail::config_long(key, v);
    } else {
        fail(ErrorKind::parse, "config: unknown key '" + std::string(raw_key) + "'");
    }
}

inline nlohmann::json LearnConfig::to_json() const {
    nlohmann::json j;
    j["variables"] = variables;
    j["inputs"] = inputs;
    j["order"] = order;
    j["fwd_bwd_threshold"] = fwd_bwd_threshold;
    j["bwd_bwd_threshold"] = bwd_bwd_threshold;
    j["distance_threshold"] = distance_threshold;
    j["correlation_threshold"] = correlation_threshold;
    j["cluster_view"] = cluster_view == ShapeView::derivatives ? "derivatives" : "values";
    j["cluster_normalize"] = cluster_normalize;
    j["ode_degree"] = ode_degree;
    j["guard_degree"] = guard_degree;
    j["max_segments"] = max_segments;
    j["svm_iterations"] = svm_iterations;
    j["svm_regularization"] = svm_regularization;
    nlohmann::json ann = nlohmann::json::object();
    for (const auto& [name, a] : annotations) ann[name] = a.to_string();
    j["annotations"] = ann;
    j["seed"] = seed;
    j["dt"] = dt;
    j["horizon"] = horizon;
    return j;
}

/// Reads `key = value` lines. Keys before the first `[section]` header apply
/// always; keys inside `[section]` apply only when `section` matches. `#` and
/// `;` start comments.
inline void apply_config_text(LearnConfig& cfg, std::istream& in, std::string_view section = {}) {
    std::string line;
    std::string current;
    bool seen_section = section.empty();
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        auto hash = line.find_first_of("#;");
        std::string_view t = detail::trim(std::string_view(line).substr(0, hash));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(ErrorKind::parse, "config line " + std::to_string(row) + ": bad section header");
            current = std::string(detail::trim(t.substr(1, t.size() - 2)));
            if (current == section) seen_section = true;
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            fail(ErrorKind::parse, "config line " + std::to_string(row) + ": expected key = value");
        }
        if (!current.empty() && current != section) continue;
        try {
            cfg.set(t.substr(0, eq), t.substr(eq + 1));
        } catch (const Error& e) {
            fail(e.kind(), "config line " + std::to_string(row) + ": " + e.what());
        }
    }
    if (!seen_section) fail(ErrorKind::parse, "config: no section [" + std::string(section) + "]");
}

inline void apply_config_file(LearnConfig& cfg, const std::filesystem::path& path, std::string_view section = {}) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open config file " + path.string());
    apply_config_text(cfg, in, section);
}

inline std::vector<std::string> preset_names() { return {"ball", "tanks", "osci", "cells"}; }

/// Settings used for the built-in benchmarks.
inline LearnConfig preset_config(std::string_view name) {
    LearnConfig c;
    if (name == "ball") {
        c.variables = {"g", "x", "v"};
        c.inputs = {"g"};
        c.fwd_bwd_threshold = 0.1;
        c.distance_threshold = 9.0;
        c.correlation_threshold = 0.8;
        c.horizon = 13.0;
        c.dt = 0.001;
    } else if (name == "tanks") {
        c.variables = {"u", "x1", "x2"};
        c.inputs = {"u"};
        c.fwd_bwd_threshold = 0.01;
        c.distance_threshold = 1.5;
        c.correlation_threshold = 0.7;
        c.horizon = 9.3;
        c.dt = 0.001;
    } else if (name == "osci") {
        c.variables = {"x", "y"};
        c.fwd_bwd_threshold = 0.1;
        c.distance_threshold = 1.0;
        c.correlation_threshold = 0.89;
        c.horizon = 10.0;
        c.dt = 0.01;
    } else if (name == "cells") {
        c.variables = {"x"};
        c.fwd_bwd_threshold = 0.01;
        c.distance_threshold = 1.0;
        c.correlation_threshold = 0.92;
        c.max_segments = 3;
        c.horizon = 500.0;
        c.dt = 0.01;
    } else {
        fail(ErrorKind::invalid_argument, "unknown preset '" + std::string(name) + "'");
    }
    return c;
}

} // namespace halearn
