#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cfd/netlist/bench.hpp"
#include "cfd/netlist/transform.hpp"
#include "cfd/scheduler/scheduler.hpp"
#include "cfd/sta_sim/simulator.hpp"
#include "cfd/sta_sim/sta.hpp"
#include "cfd/timing/cell_library.hpp"
#include "cfd/tuner/tuner.hpp"

#ifndef CFD_VERSION
#define CFD_VERSION "0.0.0"
#endif

namespace cfd::cli {

namespace fs = std::filesystem;
using netlist::CircuitGraph;

namespace {

// Unreadable or malformed input of any kind.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Outcome : std::runtime_error {
    Exit code;
    Outcome(Exit c, const std::string& what) : std::runtime_error(what), code(c) {}
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError(fmt::format("cannot read '{}'", p.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out || !(out << text)) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
}

// .bench netlists get splitter trees; graph dumps are taken as they are.
CircuitGraph load_circuit(const fs::path& p) {
    const std::string text = read_file(p);
    try {
        if (text.rfind("# cfdsynth graph", 0) == 0) return netlist::parse_graph_dump(text);
        return netlist::insert_splitter_trees(netlist::parse_bench(text));
    } catch (const netlist::ParseError& e) {
        throw InputError(fmt::format("{}:{}:{}: {}", p.string(), e.line(), e.column(), e.what()));
    }
}

struct Common {
    std::string lib_path;
    std::string out_dir = "cfdsynth-out";
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

struct Loaded {
    timing::CellLibrary lib;
    std::string source;  // file path or "builtin"
};

Loaded load_library(const Common& c) {
    std::string path = c.lib_path;
    if (path.empty()) {
        if (const char* env = std::getenv(kLibraryEnv); env != nullptr && *env != '\0') path = env;
    }
    if (path.empty()) return {timing::CellLibrary::defaults(), "builtin"};
    try {
        return {timing::CellLibrary::load(path), path};
    } catch (const timing::LibraryError& e) {
        throw InputError(e.what());
    }
}

timing::VariationSpec variation_of(double p) {
    return p > 0.0 ? timing::VariationSpec::fractional(p) : timing::VariationSpec{};
}

struct Manifest {
    std::string command;
    std::vector<std::string> inputs;
    std::string library;
    double period = 0.0;
    double variation = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> args;
};

void write_manifest(const fs::path& dir, const Manifest& m) {
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["inputs"] = m.inputs;
    j["library"] = m.library;
    j["period_ps"] = m.period;
    j["variation"] = m.variation;
    j["seed"] = m.seed;
    j["output_dir"] = dir.string();
    j["tool_version"] = CFD_VERSION;
    j["args"] = m.args;
    write_file(dir / (m.command + ".manifest.json"), j.dump(2) + "\n");
}

fs::path prepare_out(const Common& c) {
    const fs::path dir = c.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    return dir;
}

// Fixed point with trailing zeros removed, so reports do not show
// accumulated rounding noise.
std::string num(double x) {
    std::string s = fmt::format("{:.6f}", x);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s == "-0" ? "0" : s;
}

std::string synth_summary(const std::string& name, const scheduler::SynthesisResult& r) {
    const auto& s = r.schedule;
    return fmt::format(
        "circuit {}\ntarget_ps {}\nachieved_ps {}\ntarget_met {}\niterations {}\ninserted_dffs {}\njtl_count {}\n"
        "cell_area {}\njtl_area {}\narea {}\nadp {}\nverified {}\n",
        name, num(s.target), num(s.period), r.target_met ? 1 : 0, r.log.size(), s.inserted_dffs, s.jtl_count,
        num(s.cell_area), num(s.jtl_area), num(s.area), num(s.area * s.period), s.verified ? 1 : 0);
}

std::string iterations_csv(const scheduler::SynthesisResult& r) {
    std::string out = "iteration,threshold,min_period_ps,relaxation,inserted,total\n";
    for (const auto& l : r.log) {
        out += fmt::format("{},{},{},{},{},{}\n", l.iteration, num(l.threshold), num(l.min_period), num(l.relaxation),
                           l.inserted, l.total);
    }
    return out;
}

// A synthesized run directory: graph.txt and schedule.txt.
struct Run {
    CircuitGraph graph;
    scheduler::ClockSchedule schedule;
};

Run load_run(const fs::path& dir) {
    Run r;
    r.graph = load_circuit(dir / "graph.txt");
    try {
        r.schedule = scheduler::read_schedule(read_file(dir / "schedule.txt"), r.graph);
    } catch (const InputError&) {
        throw;
    } catch (const std::runtime_error& e) {
        throw InputError(e.what());
    }
    return r;
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Clock-follow-data synthesis for SFQ circuits", "cfdsynth"};
    app.require_subcommand(1);
    app.set_version_flag("--version", CFD_VERSION);

    Common common;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--lib", common.lib_path, fmt::format("Cell library file (default: ${} or built-in)", kLibraryEnv));
        sub->add_option("-o,--out", common.out_dir, "Output directory");
    };
    const auto add_threads = [&](CLI::App* sub) {
        sub->add_option("-j,--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
    };

    std::string netlist_path;
    std::vector<std::string> netlists;
    std::string run_dir;
    double tau = 22.0;
    double variation = 0.0;
    bool exact = false;
    int max_iterations = 15;
    double from = 18.0, to = 400.0, step = 2.0;
    std::size_t waves = 1000;
    std::uint64_t seed = 1;
    double scale = 1.0;
    std::optional<double> period_override;
    bool waveform = false;
    std::size_t trials = 10;
    double band = 0.2;
    bool no_passive = false;

    auto* synth = app.add_subcommand("synth", "Insert DFFs and schedule clocks for a target period");
    synth->add_option("netlist", netlist_path, "ISCAS .bench netlist or graph dump")->required();
    synth->add_option("-t,--tau", tau, "Target period (ps)");
    synth->add_option("--variation", variation, "Fractional delay variation to absorb, e.g. 0.2");
    synth->add_flag("--exact", exact, "Integer DFF counts by branch and bound");
    synth->add_option("--max-iter", max_iterations, "Iteration cap")->check(CLI::PositiveNumber);
    add_common(synth);

    auto* fpb = app.add_subcommand("fpb", "Full path balancing baseline");
    fpb->add_option("netlist", netlist_path, "ISCAS .bench netlist or graph dump")->required();
    add_common(fpb);

    auto* sweep = app.add_subcommand("sweep", "Synthesize over a range of target periods");
    sweep->add_option("netlist", netlist_path, "ISCAS .bench netlist or graph dump")->required();
    sweep->add_option("--from", from, "First period (ps)");
    sweep->add_option("--to", to, "Last period (ps)");
    sweep->add_option("--step", step, "Period step (ps)")->check(CLI::PositiveNumber);
    sweep->add_option("--variation", variation, "Fractional delay variation to absorb");
    add_common(sweep);
    add_threads(sweep);

    const auto add_run = [&](CLI::App* sub) {
        sub->add_option("run", run_dir, "Directory written by synth (graph.txt, schedule.txt)")->required();
        sub->add_option("-t,--tau", period_override, "Period (ps); default: the schedule's achieved period");
        add_common(sub);
    };

    auto* sim = app.add_subcommand("sim", "Pulse-level simulation of a synthesized schedule");
    add_run(sim);
    sim->add_option("--waves", waves, "Data waves")->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "Input vector seed");
    sim->add_option("--scale", scale, "Clock delay multiplier")->check(CLI::PositiveNumber);
    sim->add_flag("--waveform", waveform, "Write every pulse to waveform.txt");

    auto* sta = app.add_subcommand("sta", "Static timing check of a synthesized schedule");
    add_run(sta);
    sta->add_option("--scale", scale, "Clock delay multiplier")->check(CLI::PositiveNumber);

    const auto add_trials = [&](CLI::App* sub) {
        sub->add_option("--trials", trials, "Number of seeded trials")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "First trial seed");
        sub->add_option("--band", band, "Multipliers uniform in [1-band, 1+band]");
        sub->add_flag("--no-passive", no_passive, "Keep splitter delays nominal");
        add_threads(sub);
    };

    auto* perturb = app.add_subcommand("perturb", "Timing violations under random delay variation");
    add_run(perturb);
    add_trials(perturb);

    auto* tune = app.add_subcommand("tune", "Post-fabrication clock scaling and period relaxation");
    add_run(tune);
    add_trials(tune);

    auto* compare = app.add_subcommand("compare", "Area-delay product against full path balancing");
    compare->add_option("netlists", netlists, "ISCAS .bench netlists")->required();
    compare->add_option("-t,--tau", tau, "Target period (ps)");
    add_common(compare);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(Exit::Usage);
    }

    Manifest m;
    m.args = args;
    m.seed = seed;
    try {
        const fs::path dir = prepare_out(common);
        const Loaded lib = load_library(common);
        m.library = lib.source;

        if (synth->parsed()) {
            m.command = "synth";
            m.inputs = {netlist_path};
            m.period = tau;
            m.variation = variation;
            m.seed = 0;
            const CircuitGraph g = load_circuit(netlist_path);
            scheduler::SchedulerConfig cfg;
            cfg.period = tau;
            cfg.max_iterations = max_iterations;
            cfg.variation = variation_of(variation);
            cfg.mode = exact ? scheduler::SolveMode::ExactMilp : scheduler::SolveMode::HeuristicLp;
            const auto r = scheduler::synthesize(g, lib.lib, cfg);
            std::ostringstream sched;
            scheduler::write_schedule(sched, r.graph, r.schedule);
            write_file(dir / "graph.txt", netlist::dump_graph(r.graph));
            write_file(dir / "schedule.txt", sched.str());
            write_file(dir / "iterations.csv", iterations_csv(r));
            const std::string summary = synth_summary(stem(netlist_path), r);
            write_file(dir / "summary.txt", summary);
            write_manifest(dir, m);
            out << summary;
            if (!r.target_met) {
                throw Outcome(Exit::IterationCap,
                              fmt::format("target {} ps not met after {} iterations; schedule written at {} ps", tau,
                                          r.log.size(), r.schedule.period));
            }
            if (!r.schedule.verified) throw Outcome(Exit::Verification, "schedule fails static timing");
        } else if (fpb->parsed()) {
            m.command = "fpb";
            m.inputs = {netlist_path};
            m.seed = 0;
            const CircuitGraph g = netlist::full_path_balance(load_circuit(netlist_path));
            const double period = sta::fpb_period(g, lib.lib);
            const double area = scheduler::cell_area(g, lib.lib);
            m.period = period;
            const std::string summary =
                fmt::format("circuit {}\ninserted_dffs {}\nperiod_ps {}\narea {}\nadp {}\n", stem(netlist_path),
                            g.inserted_dff_count(), num(period), num(area), num(area * period));
            write_file(dir / "graph.txt", netlist::dump_graph(g));
            write_file(dir / "summary.txt", summary);
            write_manifest(dir, m);
            out << summary;
        } else if (sweep->parsed()) {
            m.command = "sweep";
            m.inputs = {netlist_path};
            m.variation = variation;
            m.seed = 0;
            if (!(to >= from)) throw std::invalid_argument("--to must not be below --from");
            const CircuitGraph g = load_circuit(netlist_path);
            std::vector<double> periods;
            for (std::size_t k = 0;; ++k) {
                const double p = from + step * static_cast<double>(k);
                if (p > to + 1e-9) break;
                periods.push_back(p);
            }
            scheduler::SchedulerConfig cfg;
            cfg.variation = variation_of(variation);
            const auto points = scheduler::sweep(g, lib.lib, periods, cfg, common.threads);
            const std::string csv = scheduler::sweep_csv(points);
            write_file(dir / "sweep.csv", csv);
            write_manifest(dir, m);
            out << csv;
            for (const auto& p : points) {
                if (!p.ok) err << fmt::format("warning: {} ps: {}\n", p.target, p.error);
            }
        } else if (sim->parsed() || sta->parsed()) {
            const bool is_sim = sim->parsed();
            m.command = is_sim ? "sim" : "sta";
            m.inputs = {run_dir};
            if (!is_sim) m.seed = 0;
            const Run r = load_run(run_dir);
            const double period = period_override.value_or(r.schedule.period);
            m.period = period;
            const auto d = sta::nominal_delays(r.graph, lib.lib);
            bool pass = false;
            std::string report;
            if (is_sim) {
                sta::SimOptions so;
                so.waves = waves;
                so.seed = seed;
                so.clock_scale = scale;
                so.record_waveform = waveform;
                const auto res = sta::simulate(r.graph, r.schedule.clock, d, period, so);
                pass = res.pass();
                std::int64_t latency = 0;
                for (auto l : res.latency) latency = std::max(latency, l);
                report = fmt::format("waves {}\nperiod_ps {}\nscale {}\nevents {}\ntiming_failures {}\nmismatches {}\n"
                                     "collisions {}\nmax_latency_waves {}\nresult {}\n",
                                     res.waves, num(period), num(scale), res.events, res.failures.size(), res.mismatches,
                                     res.collisions, latency, pass ? "PASS" : "FAIL");
                for (std::size_t k = 0; k < res.failures.size() && k < 20; ++k) {
                    const auto& f = res.failures[k];
                    report += fmt::format("  {} at {} wave {}: arrival {} required {}\n", sta::to_string(f.kind),
                                          r.graph.node(f.node).name, f.wave, num(f.time), num(f.required));
                }
                if (waveform) {
                    std::ostringstream w;
                    sta::write_waveform(w, r.graph, res);
                    write_file(dir / "waveform.txt", w.str());
                }
                write_file(dir / "sim.txt", report);
            } else {
                sta::StaOptions so;
                so.clock_scale = scale;
                const auto rep = sta::run_sta(r.graph, r.schedule.clock, d, period, so);
                pass = rep.pass;
                report = rep.summary(r.graph);
                write_file(dir / "sta.txt", report);
            }
            write_manifest(dir, m);
            out << report;
            if (!pass) throw Outcome(Exit::Verification, fmt::format("{} check failed", m.command));
        } else if (perturb->parsed() || tune->parsed()) {
            const bool is_tune = tune->parsed();
            m.command = is_tune ? "tune" : "perturb";
            m.inputs = {run_dir};
            m.variation = band;
            const Run r = load_run(run_dir);
            const double period = period_override.value_or(r.schedule.period);
            m.period = period;
            std::vector<std::uint64_t> seeds(trials);
            std::iota(seeds.begin(), seeds.end(), seed);
            tuner::PerturbOptions popt;
            popt.band = band;
            popt.include_passive = !no_passive;
            const auto records =
                tuner::run_trials(r.graph, lib.lib, r.schedule.clock, period, seeds, popt, {}, common.threads);
            std::string table;
            bool all = true;
            if (is_tune) {
                table = tuner::trials_csv(records);
                double ds = 0.0, dp = 0.0;
                for (const auto& t : records) {
                    all = all && t.result.pass;
                    ds += t.result.scale - 1.0;
                    dp += t.result.period;
                }
                const double n = static_cast<double>(records.size());
                write_file(dir / "tune.csv", table);
                write_file(dir / "tune_summary.txt",
                           fmt::format("trials {}\npassed {}\nmean_scale_increase {}\nmean_period_ps {}\n",
                                       records.size(),
                                       std::count_if(records.begin(), records.end(),
                                                     [](const auto& t) { return t.result.pass; }),
                                       num(ds / n), num(dp / n)));
            } else {
                table = "seed,violations,setup,hold\n";
                for (const auto& t : records) {
                    table += fmt::format("{},{},{},{}\n", t.seed, t.result.violations_before, t.result.setup_before,
                                         t.result.hold_before);
                }
                write_file(dir / "perturb.csv", table);
            }
            write_manifest(dir, m);
            out << table;
            if (is_tune && !all) throw Outcome(Exit::Verification, "some trials could not be tuned");
        } else if (compare->parsed()) {
            m.command = "compare";
            m.inputs = netlists;
            m.period = tau;
            m.seed = 0;
            std::string table =
                "circuit,tau_ps,db_dffs,db_jtls,db_cell_area,db_area,db_adp,fpb_dffs,fpb_period_ps,fpb_area,fpb_adp,"
                "adp_gain,cell_adp_gain\n";
            for (const auto& path : netlists) {
                const CircuitGraph g = load_circuit(path);
                scheduler::SchedulerConfig cfg;
                cfg.period = tau;
                const auto r = scheduler::synthesize(g, lib.lib, cfg);
                const auto& s = r.schedule;
                const CircuitGraph f = netlist::full_path_balance(g);
                const double fp = sta::fpb_period(f, lib.lib);
                const double fa = scheduler::cell_area(f, lib.lib);
                const double db_adp = s.area * s.period;
                const double fpb_adp = fa * fp;
                table += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", stem(path), num(s.period), s.inserted_dffs,
                                     s.jtl_count, num(s.cell_area), num(s.area), num(db_adp), f.inserted_dff_count(),
                                     num(fp), num(fa), num(fpb_adp), num(fpb_adp / db_adp),
                                     num(fpb_adp / (s.cell_area * s.period)));
                if (!r.target_met) err << fmt::format("warning: {} missed {} ps\n", path, tau);
            }
            write_file(dir / "compare.csv", table);
            write_manifest(dir, m);
            out << table;
        }
    } catch (const Outcome& e) {
        err << "cfdsynth: " << e.what() << "\n";
        return static_cast<int>(e.code);
    } catch (const InputError& e) {
        err << "cfdsynth: " << e.what() << "\n";
        return static_cast<int>(Exit::Parse);
    } catch (const scheduler::PeriodBelowFloor& e) {
        err << "cfdsynth: " << e.what() << "\n";
        return static_cast<int>(Exit::PeriodBelowFloor);
    } catch (const std::invalid_argument& e) {
        err << "cfdsynth: " << e.what() << "\n";
        return static_cast<int>(Exit::Usage);
    } catch (const std::exception& e) {
        err << "cfdsynth: internal error: " << e.what() << "\n";
        return static_cast<int>(Exit::Internal);
    }
    return static_cast<int>(Exit::Ok);
}

}  // namespace cfd::cli
