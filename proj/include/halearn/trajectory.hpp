#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "halearn/error.hpp"

namespace halearn {

/// Variable names plus the input/output partition of the non-time columns.
struct VariableRoles {
    std::vector<std::string> names;
    std::vector<std::size_t> inputs;
    std::vector<std::size_t> outputs;

    std::size_t size() const { return names.size(); }

    /// Throws unless inputs and outputs are disjoint, cover every column, and outputs is non-empty.
    void validate() const {
        require(!outputs.empty(), "variable roles: at least one output variable is required");
        std::vector<int> seen(names.size(), 0);
        for (auto i : inputs) {
            require(i < names.size(), "variable roles: input index out of range");
            ++seen[i];
        }
        for (auto o : outputs) {
            require(o < names.size(), "variable roles: output index out of range");
            ++seen[o];
        }
        for (std::size_t k = 0; k < seen.size(); ++k) {
            require(seen[k] == 1, "variable roles: variable '" + names[k] +
                                      "' must be exactly one of input or output");
        }
    }

    std::size_t index_of(std::string_view name) const {
        auto it = std::find(names.begin(), names.end(), name);
        require(it != names.end(), "unknown variable '" + std::string(name) + "'");
        return static_cast<std::size_t>(it - names.begin());
    }

    bool is_output(std::size_t var) const {
        return std::find(outputs.begin(), outputs.end(), var) != outputs.end();
    }

    /// Position of `var` inside `outputs`, or -1.
    int output_slot(std::size_t var) const {
        auto it = std::find(outputs.begin(), outputs.end(), var);
        return it == outputs.end() ? -1 : static_cast<int>(it - outputs.begin());
    }

    /// Roles built from names, with every name not listed as input treated as output.
    static VariableRoles from_names(std::vector<std::string> names, const std::vector<std::string>& input_names) {
        VariableRoles r;
        r.names = std::move(names);
        for (std::size_t k = 0; k < r.names.size(); ++k) {
            bool is_in = std::find(input_names.begin(), input_names.end(), r.names[k]) != input_names.end();
            (is_in ? r.inputs : r.outputs).push_back(k);
        }
        for (const auto& n : input_names) r.index_of(n);
        r.validate();
        return r;
    }

    friend bool operator==(const VariableRoles&, const VariableRoles&) = default;
};

inline constexpr double kDefaultStepTolerance = 1e-6;

/// Uniformly sampled multivariate time series. Immutable once constructed.
class Trajectory {
public:
    Trajectory() = default;

    Trajectory(std::vector<double> times, Eigen::MatrixXd values, VariableRoles roles, std::string id = {},
               double step_tolerance = kDefaultStepTolerance)
        : times_(std::move(times)), values_(std::move(values)), roles_(std::move(roles)), id_(std::move(id)) {
        roles_.validate();
        require(!times_.empty(), "trajectory: at least one sample is required");
        require(static_cast<std::size_t>(values_.rows()) == times_.size(),
                "trajectory: timestamp count does not match row count");
        require(static_cast<std::size_t>(values_.cols()) == roles_.size(),
                "trajectory: column count does not match variable roles");
        for (std::size_t i = 1; i < times_.size(); ++i) {
            if (!(times_[i] > times_[i - 1])) {
                fail(ErrorKind::parse, "non-monotone time at row " + std::to_string(i + 1) + " of trajectory '" +
                                           id_ + "'");
            }
        }
        if (times_.size() >= 2) {
            step_ = (times_.back() - times_.front()) / static_cast<double>(times_.size() - 1);
            for (std::size_t i = 1; i < times_.size(); ++i) {
                double dev = std::abs((times_[i] - times_[i - 1]) - step_) / step_;
                if (dev >= step_tolerance) {
                    fail(ErrorKind::parse, "non-uniform sampling at row " + std::to_string(i + 1) +
                                               " of trajectory '" + id_ + "'");
                }
            }
        }
    }

    std::size_t size() const { return times_.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(values_.cols()); }
    double step() const { return step_; }
    const std::string& id() const { return id_; }
    const VariableRoles& roles() const { return roles_; }
    const std::vector<double>& times() const { return times_; }
    double time(std::size_t i) const { return times_.at(i); }
    const Eigen::MatrixXd& values() const { return values_; }
    Eigen::VectorXd point(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)).transpose(); }

    /// N x |O| matrix holding only the output columns.
    Eigen::MatrixXd output_values() const {
        Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(roles_.outputs.size()));
        for (std::size_t k = 0; k < roles_.outputs.size(); ++k) {
            out.col(static_cast<Eigen::Index>(k)) = values_.col(static_cast<Eigen::Index>(roles_.outputs[k]));
        }
        return out;
    }

private:
    std::vector<double> times_;
    Eigen::MatrixXd values_;
    VariableRoles roles_;
    double step_ = 0.0;
    std::string id_;
};

using TrajectoryPtr = std::shared_ptr<const Trajectory>;

/// Keeps only the output columns; times are unchanged.
inline Trajectory project_outputs(const Trajectory& traj) {
    const auto& roles = traj.roles();
    if (roles.inputs.empty() && std::is_sorted(roles.outputs.begin(), roles.outputs.end())) return traj;
    VariableRoles projected;
    for (std::size_t k = 0; k < roles.outputs.size(); ++k) {
        projected.names.push_back(roles.names[roles.outputs[k]]);
        projected.outputs.push_back(k);
    }
    return Trajectory(traj.times(), traj.output_values(), std::move(projected), traj.id());
}

/// Jump-free slice [start, end] of a trajectory. `derivs` holds backward-BDF
/// estimates of the outputs for the indices start + deriv_offset ... end.
struct Segment {
    TrajectoryPtr source;
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t deriv_offset = 0;
    Eigen::MatrixXd derivs;

    std::size_t size() const { return end - start + 1; }
    Eigen::VectorXd point(std::size_t k) const { return source->point(start + k); }
    double time(std::size_t k) const { return source->time(start + k); }

    /// size() x |O| block of output values.
    Eigen::MatrixXd output_values() const {
        const auto& roles = source->roles();
        Eigen::MatrixXd out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(roles.outputs.size()));
        for (std::size_t c = 0; c < roles.outputs.size(); ++c) {
            out.col(static_cast<Eigen::Index>(c)) =
                source->values().col(static_cast<Eigen::Index>(roles.outputs[c])).segment(
                    static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(size()));
        }
        return out;
    }
};

inline Segment slice(const TrajectoryPtr& traj, std::size_t start, std::size_t end) {
    require(traj != nullptr, "slice: null trajectory");
    require(start <= end, "slice: empty range [" + std::to_string(start) + ", " + std::to_string(end) + "]");
    require(end < traj->size(), "slice: index " + std::to_string(end) + " out of range");
    Segment s;
    s.source = traj;
    s.start = start;
    s.end = end;
    return s;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace detail

/// Formats a double with 17 significant digits.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Parses one trajectory in the `time,<v1>,<v2>,...` CSV format.
inline Trajectory parse_trajectory_csv(std::istream& in, const VariableRoles& roles, const std::string& id) {
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) fail(ErrorKind::parse, id + ": empty file");
    ++row;
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
    auto header = detail::split_csv_line(line);
    if (header.empty() || detail::trim(header[0]) != "time") {
        fail(ErrorKind::parse, id + ": row 1: header must start with 'time'");
    }
    if (header.size() - 1 != roles.size()) {
        fail(ErrorKind::parse, id + ": row 1: expected " + std::to_string(roles.size()) + " variable columns, found " +
                                   std::to_string(header.size() - 1));
    }
    for (std::size_t k = 0; k < roles.size(); ++k) {
        if (detail::trim(header[k + 1]) != roles.names[k]) {
            fail(ErrorKind::parse, id + ": row 1: column " + std::to_string(k + 2) + " is '" +
                                       std::string(detail::trim(header[k + 1])) + "', expected '" + roles.names[k] +
                                       "'");
        }
    }
    std::vector<double> times;
    std::vector<double> flat;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != roles.size() + 1) {
            fail(ErrorKind::parse, id + ": row " + std::to_string(row) + ": expected " +
                                       std::to_string(roles.size() + 1) + " fields, found " +
                                       std::to_string(cells.size()));
        }
        double t = 0.0;
        if (!detail::parse_double(cells[0], t)) {
            fail(ErrorKind::parse, id + ": row " + std::to_string(row) + ": malformed number in column 1");
        }
        if (!times.empty() && !(t > times.back())) {
            fail(ErrorKind::parse, id + ": row " + std::to_string(row) + ": non-monotone time");
        }
        times.push_back(t);
        for (std::size_t k = 1; k < cells.size(); ++k) {
            double v = 0.0;
            if (!detail::parse_double(cells[k], v)) {
                fail(ErrorKind::parse, id + ": row " + std::to_string(row) + ": malformed number in column " +
                                           std::to_string(k + 1));
            }
            flat.push_back(v);
        }
    }
    if (times.empty()) fail(ErrorKind::parse, id + ": no samples");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(roles.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t k = 0; k < roles.size(); ++k) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = flat[i * roles.size() + k];
        }
    }
    return Trajectory(std::move(times), std::move(values), roles, id);
}

inline Trajectory load_trajectory(const std::filesystem::path& path, const VariableRoles& roles) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open trajectory file " + path.string());
    return parse_trajectory_csv(in, roles, path.stem().string());
}

/// Loads one file, or every *.csv in a directory (sorted by file name).
inline std::vector<TrajectoryPtr> load_trajectories(const std::filesystem::path& path, const VariableRoles& roles) {
    namespace fs = std::filesystem;
    std::vector<TrajectoryPtr> out;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out.push_back(std::make_shared<const Trajectory>(load_trajectory(f, roles)));
    } else if (fs::exists(path)) {
        out.push_back(std::make_shared<const Trajectory>(load_trajectory(path, roles)));
    } else {
        fail(ErrorKind::io, "no such file or directory: " + path.string());
    }
    return out;
}

inline void write_trajectory(const Trajectory& traj, std::ostream& out) {
    out << "time";
    for (const auto& n : traj.roles().names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << format_double(traj.time(i));
        for (std::size_t k = 0; k < traj.dim(); ++k) {
            out << ',' << format_double(traj.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
        }
        out << '\n';
    }
}

inline void write_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write " + path.string());
    write_trajectory(traj, out);
}

/// Throws unless every trajectory shares the same roles and sampling period.
inline double common_step(const std::vector<TrajectoryPtr>& trajs, double rel_tol = kDefaultStepTolerance) {
    require(!trajs.empty(), "no trajectories");
    double h = 0.0;
    for (const auto& t : trajs) {
        if (t->size() < 2) continue;
        if (h == 0.0) {
            h = t->step();
        } else if (std::abs(t->step() - h) / h >= rel_tol) {
            fail(ErrorKind::invalid_argument, "trajectory '" + t->id() + "' has sampling period " +
                                                  format_double(t->step()) + ", expected " + format_double(h));
        }
        if (!(t->roles() == trajs.front()->roles())) {
            fail(ErrorKind::invalid_argument, "trajectory '" + t->id() + "' has different variable roles");
        }
    }
    return h;
}

} // namespace halearn
