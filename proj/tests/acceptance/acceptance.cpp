// End-to-end acceptance run: prints one PASS/FAIL line per criterion and
// exits with the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cfd/constraints/constraint_system.hpp"
#include "cfd/scheduler/scheduler.hpp"
#include "cfd/sta_sim/simulator.hpp"
#include "cfd/sta_sim/sta.hpp"
#include "cfd/tuner/tuner.hpp"
#include "cli.hpp"
#include "dff_enumerator.hpp"
#include "support.hpp"

using namespace cfd;
using netlist::CircuitGraph;
using netlist::NodeId;
using netlist::NodeKind;

namespace {

using Clock = std::chrono::steady_clock;

const timing::CellLibrary& lib() {
    static const auto l = timing::CellLibrary::defaults();
    return l;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void detail(const std::string& s) {
    std::printf("  %s\n", s.c_str());
    std::fflush(stdout);
}

const std::vector<std::string> kFixtures = {"c432",  "c499",  "c880",  "c1355", "c1908",
                                            "c2670", "c3540", "c5315", "c6288", "c7552"};

CircuitGraph load_iscas(const std::string& name) { return test::load_split("benchmarks/" + name + ".bench"); }

// Synthesis at 22 ps is shared by several criteria.
const scheduler::SynthesisResult& synth22(const std::string& name, double* elapsed = nullptr) {
    static std::map<std::string, std::pair<scheduler::SynthesisResult, double>> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        const auto g = load_iscas(name);
        const auto t0 = Clock::now();
        scheduler::SchedulerConfig cfg;
        cfg.period = 22.0;
        auto r = scheduler::synthesize(g, lib(), cfg);
        it = cache.emplace(name, std::make_pair(std::move(r), seconds_since(t0))).first;
    }
    if (elapsed != nullptr) *elapsed = it->second.second;
    return it->second.first;
}

std::vector<std::uint64_t> trial_seeds() {
    std::vector<std::uint64_t> s;
    for (std::uint64_t k = 1; k <= 10; ++k) s.push_back(k);
    return s;
}

bool criterion1() {
    bool ok = true;
    std::vector<std::pair<std::string, CircuitGraph>> circuits;
    circuits.emplace_back("c17", load_iscas("c17"));
    circuits.emplace_back("c432", CircuitGraph{});
    circuits.emplace_back("c2670", CircuitGraph{});
    for (int k = 0; k < 20; ++k) {
        const int gates = 50 + k * 450 / 19;
        circuits.emplace_back(fmt::format("random{}_{}g", k, gates),
                              netlist::insert_splitter_trees(test::random_dag(5000 + static_cast<std::uint64_t>(k),
                                                                              gates, 8 + gates / 25)));
    }
    for (const auto& [name, graph] : circuits) {
        const auto t0 = Clock::now();
        double synth_time = 0.0;
        scheduler::SynthesisResult local;
        const scheduler::SynthesisResult* r = nullptr;
        if (graph.size() == 0) {
            r = &synth22(name, &synth_time);
        } else {
            scheduler::SchedulerConfig cfg;
            cfg.period = 22.0;
            local = scheduler::synthesize(graph, lib(), cfg);
            synth_time = seconds_since(t0);
            r = &local;
        }
        const auto v0 = Clock::now();
        const auto d = sta::nominal_delays(r->graph, lib());
        const auto rep = sta::run_sta(r->graph, r->schedule.clock, d, r->schedule.period);
        sta::SimOptions so;
        so.waves = 1000;
        const auto sim = sta::simulate(r->graph, r->schedule.clock, d, r->schedule.period, so);
        const double total = synth_time + seconds_since(v0);
        const std::size_t insertions = r->log.empty() ? 0 : r->log.size() - (r->target_met ? 1 : 0);
        const bool pass = r->target_met && r->schedule.period == 22.0 && insertions <= 15 && rep.pass &&
                          sim.pass() && total <= 300.0;
        detail(fmt::format("{:<16} {} dffs={} iterations={} sta={} sim: failures={} mismatches={} collisions={} "
                           "time={:.1f}s",
                           name, pass ? "ok  " : "FAIL", r->schedule.inserted_dffs, insertions,
                           rep.pass ? "pass" : "fail", sim.failures.size(), sim.mismatches, sim.collisions, total));
        ok = ok && pass;
    }
    return ok;
}

bool criterion2() {
    const auto g = test::load_split("tests/data/single_xor.bench");
    const double t = constraints::min_feasible_period(g, lib());
    detail(fmt::format("single XOR minimum period {:.6f} ps (expected 16.4)", t));
    bool clean = false;
    try {
        scheduler::SchedulerConfig cfg;
        cfg.period = 16.0;
        (void)scheduler::synthesize(g, lib(), cfg);
    } catch (const scheduler::PeriodBelowFloor& e) {
        clean = std::abs(e.floor - 16.4) < 1e-6;
        detail(fmt::format("synthesis at 16 ps: {}", e.what()));
    }
    std::ostringstream out, err;
    const int code = cli::run({"synth", test::source_path("tests/data/single_xor.bench"), "-t", "16", "-o",
                               (std::filesystem::temp_directory_path() / "cfdsynth_acceptance_c2").string()},
                              out, err);
    detail(fmt::format("cfdsynth exit code {} (expected {})", code, static_cast<int>(cli::Exit::PeriodBelowFloor)));
    return std::abs(t - 16.4) <= 1e-6 && clean && code == static_cast<int>(cli::Exit::PeriodBelowFloor);
}

bool criterion3() {
    bool ok = true;
    double ratio = 0.0;
    int counted = 0;
    const int instances = 24;
    for (int s = 0; s < instances; ++s) {
        const auto g = netlist::insert_splitter_trees(
            test::random_dag(7000 + static_cast<std::uint64_t>(s), 5 + s % 8, 3 + s % 3));
        scheduler::SchedulerConfig c;
        c.mode = scheduler::SolveMode::ExactMilp;
        const auto exact = scheduler::synthesize(g, lib(), c);
        c.mode = scheduler::SolveMode::HeuristicLp;
        const auto heur = scheduler::synthesize(g, lib(), c);
        test::DffEnumerator en(g, lib(), c.period, c.max_dffs_per_edge);
        const int opt = en.optimum(60);
        const long model = std::lround(exact.model_optimum.value_or(0.0));
        const bool pass = opt >= 0 && exact.target_met && heur.target_met && model == opt &&
                          heur.schedule.inserted_dffs >= static_cast<std::size_t>(opt) &&
                          g.count(NodeKind::Gate) <= 12;
        if (opt > 0) {
            ratio += static_cast<double>(heur.schedule.inserted_dffs) / opt;
            ++counted;
        }
        detail(fmt::format("dag{:<2} gates={:<2} enumeration={} exact={} heuristic={} {}", s, g.count(NodeKind::Gate),
                           opt, model, heur.schedule.inserted_dffs, pass ? "ok" : "FAIL"));
        ok = ok && pass;
    }
    detail(fmt::format("mean heuristic/optimum DFF ratio over {} instances needing DFFs: {:.3f}", counted,
                       counted > 0 ? ratio / counted : 1.0));
    return ok;
}

// Period of the earliest-clock schedule: every clock as early as its setup
// checks allow, with the one-JTL margin on setup and hold that the scheduled
// period also carries.
double asap_period(const CircuitGraph& g) {
    const auto d = sta::nominal_delays(g, lib());
    const double w = lib().jtl_delay();
    const auto arcs = sta::timing_arcs(g, d);
    std::vector<std::vector<const sta::Arc*>> into(g.size());
    for (const auto& a : arcs) into[static_cast<std::size_t>(a.capturer)].push_back(&a);
    std::vector<double> c(g.size(), 0.0);
    double po = 0.0;
    for (NodeId v : g.topological_order()) {
        const auto i = static_cast<std::size_t>(v);
        for (const auto* a : into[i]) {
            c[i] = std::max(c[i], c[static_cast<std::size_t>(a->launcher)] + a->delay + d.setup[i] + w);
        }
        if (g.node(v).kind == NodeKind::PrimaryOutput) po = std::max(po, c[i]);
    }
    for (NodeId o : g.outputs()) c[static_cast<std::size_t>(o)] = po;
    double tau = 0.0;
    for (const auto& a : arcs) {
        const auto j = static_cast<std::size_t>(a.capturer);
        tau = std::max(tau, c[j] - c[static_cast<std::size_t>(a.launcher)] - a.delay + d.hold[j] + w);
    }
    return tau;
}

bool criterion4() {
    const auto fig3 = test::load_split("tests/data/reconvergent_not.bench");
    const double before = constraints::min_feasible_period(fig3, lib());
    scheduler::SchedulerConfig cfg;
    cfg.period = 23.3;
    const auto r = scheduler::synthesize(fig3, lib(), cfg);
    const double after = constraints::min_feasible_period(r.graph, lib());
    const bool exact3 = std::abs(before - 50.1) <= 0.1 && std::abs(after - 23.3) <= 0.1;
    detail(fmt::format("one-DFF circuit: {:.2f} -> {:.2f} ps with {} DFF (reference 50.1 -> 23.3, exact match: {})",
                       before, after, r.schedule.inserted_dffs, exact3 ? "yes" : "no"));

    const auto fig4 = test::load_split("tests/data/scheduled_not.bench");
    const double asap = asap_period(fig4);
    const double scheduled = constraints::min_feasible_period(fig4, lib());
    const bool exact4 = std::abs(asap - 51.4) <= 0.1 && std::abs(scheduled - 31.7) <= 0.1;
    detail(fmt::format("scheduled circuit: earliest clocks {:.2f} -> scheduled {:.2f} ps (reference 51.4 -> 31.7, "
                       "exact match: {})",
                       asap, scheduled, exact4 ? "yes" : "no"));
    return after < before && r.schedule.inserted_dffs == 1 && scheduled < asap;
}

bool criterion5() {
    int above = 0, wins = 0, cell_wins = 0;
    double gain_sum = 0.0, cell_gain_sum = 0.0;
    for (const auto& name : kFixtures) {
        const auto& r = synth22(name);
        const auto f = netlist::full_path_balance(load_iscas(name));
        const double fp = sta::fpb_period(f, lib());
        const double fa = scheduler::cell_area(f, lib());
        const double db = r.schedule.area * r.schedule.period;
        const double db_cells = r.schedule.cell_area * r.schedule.period;
        const double gain = fa * fp / db;
        const double cell_gain = fa * fp / db_cells;
        above += fp > 22.0;
        wins += gain > 1.0;
        cell_wins += cell_gain > 1.0;
        gain_sum += gain;
        cell_gain_sum += cell_gain;
        detail(fmt::format("{:<6} FPB: dffs={} period={:.1f} area={:.1f} | DB: dffs={} jtls={} area={:.1f} "
                           "(cells {:.1f}) | ADP gain {:.3f} (cells only {:.3f})",
                           name, f.inserted_dff_count(), fp, fa, r.schedule.inserted_dffs, r.schedule.jtl_count,
                           r.schedule.area, r.schedule.cell_area, gain, cell_gain));
    }
    const double n = static_cast<double>(kFixtures.size());
    detail(fmt::format("FPB period above 22 ps on {}/{}; ADP wins {}/{} (mean gain {:.3f}, reference 1.48); "
                       "cells-only wins {}/{} (mean {:.3f})",
                       above, kFixtures.size(), wins, kFixtures.size(), gain_sum / n, cell_wins, kFixtures.size(),
                       cell_gain_sum / n));
    return above == static_cast<int>(kFixtures.size()) && wins >= 8;
}

bool criterion6() {
    bool ok = true;
    for (const auto& name : kFixtures) {
        const auto g = load_iscas(name);
        // the graph without DFFs meets any period from its minimum upwards
        const double t0 = std::ceil(constraints::min_feasible_period(g, lib()) * 10.0 - 1e-9) / 10.0;
        const auto pts = scheduler::sweep(g, lib(), {t0, t0 + 50.0}, {});
        scheduler::SchedulerConfig cfg;
        cfg.period = t0;
        const auto r = scheduler::synthesize(g, lib(), cfg);
        const auto rep = sta::run_sta(r.graph, r.schedule.clock, sta::nominal_delays(r.graph, lib()), t0);
        const bool pass = pts[0].ok && pts[0].dffs == 0 && pts[1].ok && pts[1].dffs == 0 && r.target_met &&
                          r.schedule.inserted_dffs == 0 && rep.pass;
        detail(fmt::format("{:<6} zero-DFF period {:.1f} ps, sta={} {}", name, t0, rep.pass ? "pass" : "fail",
                           pass ? "ok" : "FAIL"));
        ok = ok && pass;
    }
    return ok;
}

bool criterion7() {
    bool ok = true;
    double ds = 0.0, tp = 0.0;
    std::size_t n = 0, disturbed = 0;
    for (const auto& name : kFixtures) {
        const auto& r = synth22(name);
        const auto trials = tuner::run_trials(r.graph, lib(), r.schedule.clock, 22.0, trial_seeds());
        double fs = 0.0, fp = 0.0;
        bool all = true;
        for (const auto& t : trials) {
            all = all && t.result.pass && t.result.scale <= 2.0;
            fs += t.result.scale - 1.0;
            fp += t.result.period;
            disturbed += t.result.violations_before > 0;
        }
        ds += fs;
        tp += fp;
        n += trials.size();
        detail(fmt::format("{:<6} 10 trials {}: mean s-1 = {:.2f}%, mean period {:.2f} ps", name,
                           all ? "pass" : "FAIL", 100.0 * fs / trials.size(), fp / trials.size()));
        ok = ok && all;
    }
    detail(fmt::format("{} of {} trials had violations before tuning", disturbed, n));
    detail(fmt::format("overall mean s-1 = {:.2f}% (reference 7.5%), mean period {:.2f} ps (reference 26.5 ps)",
                       100.0 * ds / n, tp / n));
    return ok;
}

bool criterion8() {
    bool ok = true;
    for (const auto& name : kFixtures) {
        const auto g = load_iscas(name);
        for (double tau : {30.0, 40.0}) {
            const auto t0 = Clock::now();
            scheduler::SchedulerConfig cfg;
            cfg.period = tau;
            cfg.variation = timing::VariationSpec::fractional(0.2);
            const double floor = constraints::period_floor(g, lib(), cfg.variation);
            if (floor > tau) {
                detail(fmt::format("{:<6} tau={:.0f} below the variation floor {:.2f} ps FAIL", name, tau, floor));
                ok = false;
                continue;
            }
            const auto r = scheduler::synthesize(g, lib(), cfg);
            const auto trials = tuner::run_trials(r.graph, lib(), r.schedule.clock, tau, trial_seeds());
            std::size_t untouched = 0;
            for (const auto& t : trials) {
                untouched += t.result.pass && t.result.scale == 1.0 && t.result.period == tau;
            }
            const bool pass = r.target_met && untouched == trials.size();
            detail(fmt::format("{:<6} tau={:.0f} dffs={} untouched trials {}/{} ({:.0f}s) {}", name, tau,
                               r.schedule.inserted_dffs, untouched, trials.size(), seconds_since(t0),
                               pass ? "ok" : "FAIL"));
            ok = ok && pass;
        }
    }
    return ok;
}

// Earliest check_only clocks without margins at `tau`.
std::vector<double> earliest_clocks(const CircuitGraph& g, double tau) {
    constraints::BuildOptions opt;
    opt.mode = constraints::Mode::CheckOnly;
    opt.period = tau;
    opt.clock_weight = 1.0;
    opt.jtl_margin = false;
    const auto sys = constraints::build(g, lib(), opt);
    return constraints::clocks_from(sys, lp::solve_lp(sys.program));
}

bool lp_accepts(const CircuitGraph& g, const std::vector<double>& clocks, double tau) {
    std::vector<double> fixed(g.size(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& n : g.nodes()) {
        if (n.is_clocked()) fixed[static_cast<std::size_t>(n.id)] = clocks[static_cast<std::size_t>(n.id)];
    }
    constraints::BuildOptions opt;
    opt.mode = constraints::Mode::CheckOnly;
    opt.period = tau;
    opt.jtl_margin = false;
    opt.fixed_clocks = &fixed;
    return lp::solve_lp(constraints::build(g, lib(), opt).program).status == lp::Status::Optimal;
}

// Nodes that never emit a pulse (constant-low logic) hide their arcs from
// simulation; such graphs are left out of the comparison.
bool has_silent_nodes(const CircuitGraph& g) {
    const double tau = 500.0;
    sta::SimOptions opt;
    opt.waves = 256;
    opt.record_waveform = true;
    const auto r = sta::simulate(g, earliest_clocks(g, tau), sta::nominal_delays(g, lib()), tau, opt);
    std::vector<char> emitted(g.size(), 0);
    for (const auto& p : r.waveform) emitted[static_cast<std::size_t>(p.node)] = 1;
    for (const auto& n : g.nodes()) {
        if (n.kind != NodeKind::PrimaryOutput && !emitted[static_cast<std::size_t>(n.id)]) return true;
    }
    return false;
}

bool criterion9() {
    std::mt19937_64 rng(2024);
    int cases = 0, agree = 0, passing = 0, skipped = 0;
    for (std::uint64_t seed = 1; cases < 150; ++seed) {
        const auto g = netlist::insert_splitter_trees(test::random_dag(9000 + seed, 4 + static_cast<int>(seed % 9), 3));
        if (has_silent_nodes(g)) {
            ++skipped;
            continue;
        }
        const double tau0 = constraints::min_feasible_period(g, lib(), {}, false);
        const auto base = earliest_clocks(g, tau0 + 4.0);
        const auto d = sta::nominal_delays(g, lib());
        std::vector<NodeId> gates;
        for (const auto& n : g.nodes()) {
            if (n.kind == NodeKind::Gate) gates.push_back(n.id);
        }
        for (int rep = 0; rep < 3; ++rep, ++cases) {
            std::uniform_real_distribution<double> noise(-1.5, 3.0);
            auto clocks = base;
            for (int k = static_cast<int>(rng() % 3); k > 0; --k) {
                const auto i = static_cast<std::size_t>(gates[rng() % gates.size()]);
                clocks[i] = std::max(0.0, clocks[i] + noise(rng));
            }
            const double tau = tau0 + std::uniform_real_distribution<double>(-2.0, 8.0)(rng);
            const bool sta_ok = sta::run_sta(g, clocks, d, tau).pass;
            sta::SimOptions opt;
            opt.waves = 400;
            opt.seed = seed;
            const auto sim = sta::simulate(g, clocks, d, tau, opt);
            const bool lp_ok = lp_accepts(g, clocks, tau);
            const bool same = sta_ok == sim.pass() && sta_ok == lp_ok;
            agree += same;
            passing += sta_ok;
            if (!same) {
                detail(fmt::format("disagreement: dag seed {} tau {:.3f}: sta={} sim={} lp={}", 9000 + seed, tau,
                                   sta_ok, sim.pass(), lp_ok));
            }
        }
    }
    detail(fmt::format("{} cases ({} passing timing), {} agree; {} graphs with constant-low logic skipped", cases,
                       passing, agree, skipped));
    return cases >= 100 && agree == cases && passing > 0 && passing < cases;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    app.add_option("--only", only, "Run only these criteria")->delimiter(',')->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<bool()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                         criterion6, criterion7, criterion8, criterion9};
    const std::vector<std::string> titles = {
        "feasibility suite at 22 ps",       "period floor",
        "exact insertion optimality",       "micro-circuit period reduction",
        "ADP against full path balancing",  "zero-DFF sweep point",
        "post-fabrication tuning",          "variation-aware synthesis",
        "STA / simulation / LP agreement"};
    std::vector<std::string> lines;
    int failed = 0;
    for (int k = 1; k <= 9; ++k) {
        if (!only.empty() && std::find(only.begin(), only.end(), k) == only.end()) continue;
        std::printf("criterion %d: %s\n", k, titles[static_cast<std::size_t>(k - 1)].c_str());
        std::fflush(stdout);
        const auto t0 = Clock::now();
        bool pass = false;
        try {
            pass = criteria[static_cast<std::size_t>(k - 1)]();
        } catch (const std::exception& e) {
            detail(fmt::format("error: {}", e.what()));
        }
        failed += !pass;
        lines.push_back(fmt::format("criterion {}: {} ({}, {:.0f}s)", k, pass ? "PASS" : "FAIL",
                                    titles[static_cast<std::size_t>(k - 1)], seconds_since(t0)));
        std::printf("%s\n", lines.back().c_str());
        std::fflush(stdout);
    }
    std::printf("\nsummary\n");
    for (const auto& l : lines) std::printf("%s\n", l.c_str());
    return failed;
}
