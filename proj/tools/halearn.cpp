// halearn command-line driver: simulate, learn, evaluate, report.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "halearn/halearn.hpp"

namespace fs = std::filesystem;
using namespace halearn;

namespace {

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument: return 2;
    case ErrorKind::parse: return 3;
    case ErrorKind::io: return 4;
    case ErrorKind::schema: return 5;
    case ErrorKind::numeric: return 6;
    case ErrorKind::pipeline: return 7;
    }
    return 1;
}

bool is_builtin(const std::string& name) {
    for (const auto& n : benchmark_names()) {
        if (n == name) return true;
    }
    return false;
}

HybridAutomaton load_any_model(const std::string& spec) {
    if (is_builtin(spec)) return builtin_benchmark(spec).ha;
    if (!fs::exists(spec)) fail(ErrorKind::invalid_argument, "unknown model '" + spec + "' (not a built-in name or file)");
    return read_model(spec);
}

// Sampling distribution for a model file: its first initial condition.
SamplingSpec sampling_from_model(const HybridAutomaton& ha) {
    require(!ha.initial.empty() && !ha.initial.front().ranges.empty(),
            "model has no initial ranges; cannot draw runs from it");
    const auto& ic = ha.initial.front();
    SamplingSpec s;
    s.location = ic.location;
    for (auto k : ha.roles.outputs) s.init.push_back(ic.ranges[k]);
    for (auto k : ha.roles.inputs) s.inputs.push_back(ic.ranges[k]);
    return s;
}

std::string read_first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

std::vector<std::string> csv_header_names(const fs::path& dir) {
    fs::path first = dir;
    if (fs::is_directory(dir)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
        }
        if (files.empty()) fail(ErrorKind::invalid_argument, "no trajectories in " + dir.string());
        std::sort(files.begin(), files.end());
        first = files.front();
    }
    auto cells = detail::split_csv_line(read_first_line(first));
    std::vector<std::string> names;
    for (std::size_t k = 1; k < cells.size(); ++k) names.emplace_back(detail::trim(cells[k]));
    return names;
}

struct SimulateArgs {
    std::string model;
    std::size_t n = 1;
    std::uint64_t seed = 0;
    std::optional<double> horizon;
    std::optional<double> dt;
    std::optional<double> hold;
    std::string out;
};

void cmd_simulate(const SimulateArgs& a) {
    HybridAutomaton ha;
    SamplingSpec spec;
    if (is_builtin(a.model)) {
        auto b = builtin_benchmark(a.model);
        ha = std::move(b.ha);
        spec = b.sampling;
    } else {
        ha = load_any_model(a.model);
        spec = sampling_from_model(ha);
        spec.sim.horizon = 10.0;
    }
    if (a.horizon) {
        spec.sim.horizon = *a.horizon;
        // a built-in hold period equal to the old horizon means "constant input"
        if (!a.hold && is_builtin(a.model) && spec.hold_period >= builtin_benchmark(a.model).sampling.sim.horizon) {
            spec.hold_period = *a.horizon;
        }
    }
    if (a.dt) spec.sim.dt = *a.dt;
    if (a.hold) spec.hold_period = *a.hold;

    fs::create_directories(a.out);
    Manifest m;
    m.model = a.model;
    m.seed = a.seed;
    m.sampling = spec;
    m.names = ha.roles.names;
    for (auto k : ha.roles.inputs) m.inputs.push_back(ha.roles.names[k]);
    m.cases = draw_test_cases(ha, a.n, a.seed, spec);
    m.meta = {{"tool", "halearn"}, {"version", kVersion}};
    for (std::size_t k = 0; k < m.cases.size(); ++k) {
        const std::string file = "run" + std::to_string(k) + ".csv";
        auto run = run_test_case(ha, m.cases[k], spec.sim, "run" + std::to_string(k));
        write_trajectory(run.trajectory, fs::path(a.out) / file);
        m.files.push_back(file);
    }
    write_manifest(m, fs::path(a.out) / "manifest.json");
    std::cout << "wrote " << m.cases.size() << " trajectories to " << a.out << "\n";
}

struct LearnArgs {
    std::string trajectories;
    std::string config;
    std::string section;
    std::string preset;
    std::string out;
    std::string log;
    std::map<std::string, std::string> overrides;
    std::vector<std::string> annotations;
};

void cmd_learn(const LearnArgs& a) {
    LearnConfig cfg;
    if (!a.preset.empty()) cfg = preset_config(a.preset);
    if (!a.config.empty()) apply_config_file(cfg, a.config, a.section);
    for (const auto& [key, value] : a.overrides) cfg.set(key, value);
    for (const auto& ann : a.annotations) {
        auto eq = ann.find('=');
        if (eq == std::string::npos) fail(ErrorKind::parse, "--annotation expects VAR=KIND, got '" + ann + "'");
        cfg.set("annotation." + ann.substr(0, eq), ann.substr(eq + 1));
    }
    if (!fs::exists(a.trajectories)) fail(ErrorKind::io, "no such trajectory path " + a.trajectories);
    if (cfg.variables.empty()) cfg.variables = csv_header_names(a.trajectories);
    cfg.validate();
    auto trajs = load_trajectories(a.trajectories, cfg.roles());
    if (trajs.empty()) fail(ErrorKind::invalid_argument, "no trajectories in " + a.trajectories);

    auto res = learn(trajs, cfg);
    write_model(res.model, a.out);
    const std::string text = res.log.to_text();
    std::cout << text;
    if (!a.log.empty()) {
        std::ofstream out(a.log);
        if (!out) fail(ErrorKind::io, "cannot write " + a.log);
        out << res.log.to_json().dump(2) << "\n";
    }
    std::cout << "model: " << res.model.locations.size() << " locations, " << res.model.transitions.size()
              << " transitions -> " << a.out << "\n";
}

struct EvaluateArgs {
    std::string original;
    std::string learned;
    std::string manifest;
    std::string out;
    bool recorded = false;
    std::size_t plot_case = 0;
    long threads = 0;
};

void cmd_evaluate(const EvaluateArgs& a) {
    if (!fs::exists(a.manifest)) fail(ErrorKind::io, "missing test manifest " + a.manifest);
    const Manifest m = read_manifest(a.manifest);
    const HybridAutomaton learned = load_any_model(a.learned);
    const std::size_t threads = resolve_threads(a.threads);
    EvalResult res;
    if (a.recorded) {
        std::vector<Trajectory> refs;
        const auto base = fs::path(a.manifest).parent_path();
        for (const auto& f : m.files) {
            require(!f.empty(), "manifest case without a trajectory file");
            refs.push_back(load_trajectory(base / f, learned.roles));
        }
        res = evaluate(refs, learned, m.cases, m.sampling.sim, threads);
    } else {
        const HybridAutomaton original = load_any_model(a.original);
        if (!(original.roles == learned.roles)) {
            fail(ErrorKind::invalid_argument, "original and learned models have different variables");
        }
        res = evaluate(original, learned, m.cases, m.sampling.sim, threads);
    }
    if (learned.meta.contains("learn") && learned.meta["learn"].contains("wall_seconds")) {
        res.report.learn_wall_seconds = learned.meta["learn"]["wall_seconds"].get<double>();
    }
    res.report.config = {{"original", a.recorded ? std::string("recorded") : a.original},
                         {"learned", a.learned},
                         {"manifest", a.manifest},
                         {"seed", m.seed},
                         {"horizon", m.sampling.sim.horizon},
                         {"dt", m.sampling.sim.dt},
                         {"version", kVersion}};
    if (learned.meta.contains("config")) res.report.config["learn_config"] = learned.meta["config"];

    fs::create_directories(a.out);
    {
        std::ofstream j(fs::path(a.out) / "report.json");
        j << res.report.to_json().dump(2) << "\n";
        std::ofstream t(fs::path(a.out) / "report.txt");
        t << res.report.to_table();
        if (!j || !t) fail(ErrorKind::io, "cannot write report into " + a.out);
    }
    for (const auto& f : res.report.failures) std::cerr << "case " << f.index << " failed: " << f.message << "\n";
    std::cout << res.report.to_table();

    const TrajectoryPair* pick = nullptr;
    for (const auto& p : res.pairs) {
        if (p.index == a.plot_case) pick = &p;
    }
    if (pick == nullptr && !res.pairs.empty()) pick = &res.pairs.front();
    if (pick != nullptr) {
        for (auto var : learned.roles.outputs) {
            auto path = fs::path(a.out) / ("plot_" + learned.roles.names[var] + ".csv");
            if (auto w = emit_plot_data(pick->original, pick->learned, var, path)) std::cerr << "warning: " << *w << "\n";
        }
    }
}

void cmd_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open report " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::parse, "report " + path + ": " + e.what());
    }
    EvalReport r;
    try {
        for (const auto& o : j.at("outputs")) {
            DistanceStats s;
            auto num = [](const nlohmann::json& v) {
                return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
            };
            s.variable = o.at("variable").get<std::string>();
            s.count = o.at("count").get<std::size_t>();
            s.min = num(o.at("min"));
            s.max = num(o.at("max"));
            s.avg = num(o.at("avg"));
            s.std = num(o.at("std"));
            r.outputs.push_back(s);
        }
        r.n_cases = j.at("cases").get<std::size_t>();
        for (const auto& f : j.at("failures")) {
            r.failures.push_back({f.at("case").get<std::size_t>(), f.at("error").get<std::string>()});
        }
        if (!j.at("learn_wall_seconds").is_null()) r.learn_wall_seconds = j.at("learn_wall_seconds").get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::schema, "report " + path + ": " + e.what());
    }
    std::cout << r.to_table();
}

// Learn flags mirror LearnConfig keys.
const std::vector<std::string> kLearnFlags = {
    "variables",      "inputs",        "order",        "fwd-bwd-threshold", "bwd-bwd-threshold",
    "distance-threshold", "correlation-threshold", "cluster-view", "cluster-normalize", "ode-degree",
    "guard-degree",   "max-segments",  "svm-iterations", "svm-regularization", "seed"};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learn hybrid automata from trajectories, simulate and evaluate them"};
    app.require_subcommand(1);
    long threads = 0;
    app.add_option("--threads", threads, "worker threads (default: HALEARN_THREADS or 1)");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "sample trajectories from a built-in or saved model");
    s->add_option("model", sim.model, "built-in name (ball, tanks, osci, cells) or model file")->required();
    s->add_option("--n", sim.n, "number of trajectories")->check(CLI::PositiveNumber);
    s->add_option("--seed", sim.seed, "random seed");
    s->add_option("--horizon", sim.horizon, "simulated time");
    s->add_option("--dt", sim.dt, "sampling step");
    s->add_option("--hold", sim.hold, "input hold period");
    s->add_option("--out", sim.out, "output directory")->required();

    LearnArgs lrn;
    std::map<std::string, std::string> flag_values;
    auto* l = app.add_subcommand("learn", "learn a hybrid automaton from a trajectory directory");
    l->add_option("trajectories", lrn.trajectories, "CSV file or directory of CSV files")->required();
    l->add_option("--config", lrn.config, "key = value configuration file");
    l->add_option("--section", lrn.section, "configuration section to apply");
    l->add_option("--preset", lrn.preset, "built-in settings: ball, tanks, osci, cells");
    l->add_option("--out", lrn.out, "model file to write")->required();
    l->add_option("--log", lrn.log, "write the learn log as JSON");
    l->add_option("--annotation", lrn.annotations, "VAR=none|no-assignment|pool:[v1,...]");
    for (const auto& f : kLearnFlags) l->add_option("--" + f, flag_values[f]);

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "compare a learned model with the original on recorded test cases");
    std::vector<std::string> models;
    e->add_option("models", models, "ORIGINAL LEARNED, or only LEARNED with --recorded")->required()->expected(1, 2);
    e->add_option("--manifest", ev.manifest, "manifest.json written by simulate")->required();
    e->add_option("--out", ev.out, "report directory")->required();
    e->add_flag("--recorded", ev.recorded, "use the manifest's trajectory files instead of simulating the original");
    e->add_option("--plot-case", ev.plot_case, "test case used for plot data");

    std::string report_path;
    auto* r = app.add_subcommand("report", "print a stored evaluation report as a table");
    r->add_option("report", report_path, "report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }

    try {
        if (*s) {
            cmd_simulate(sim);
        } else if (*l) {
            for (const auto& f : kLearnFlags) {
                if (l->count("--" + f) > 0) lrn.overrides[f] = flag_values[f];
            }
            if (threads > 0) lrn.overrides["threads"] = std::to_string(threads);
            cmd_learn(lrn);
        } else if (*e) {
            if (models.size() == 2) {
                ev.original = models[0];
                ev.learned = models[1];
            } else if (ev.recorded) {
                ev.learned = models[0];
            } else {
                fail(ErrorKind::invalid_argument, "evaluate: give ORIGINAL and LEARNED models, or --recorded");
            }
            ev.threads = threads;
            cmd_evaluate(ev);
        } else if (*r) {
            cmd_report(report_path);
        }
    } catch (const Error& err) {
        std::cerr << "error[" << to_string(err.kind()) << "]: " << err.what() << "\n";
        return exit_code(err.kind());
    } catch (const std::exception& err) {
        std::cerr << "error[internal]: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
