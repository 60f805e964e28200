#include "cfd/scheduler/scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <fmt/format.h>

#include "cfd/netlist/transform.hpp"
#include "cfd/sta_sim/sta.hpp"

namespace cfd::scheduler {

using netlist::CircuitGraph;
using netlist::EdgeRef;
using netlist::Node;
using netlist::NodeKind;

double SchedulerConfig::rounding_threshold(int iteration) const {
    return std::max(0.0, 1.0 - rounding_step * iteration);
}

void SchedulerConfig::validate() const {
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw std::invalid_argument(fmt::format("target period must be positive, got {}", period));
    }
    if (max_iterations < 1) throw std::invalid_argument("at least one iteration is required");
    if (max_dffs_per_edge < 1) throw std::invalid_argument("per-edge DFF cap must be at least 1");
    timing::validate(variation);
}

PeriodBelowFloor::PeriodBelowFloor(double p, double f)
    : std::runtime_error(fmt::format("target period {} ps is below the achievable floor of {} ps", p, f)),
      period(p),
      floor(f) {}

double cell_area(const CircuitGraph& g, const timing::CellLibrary& lib) {
    double a = 0.0;
    for (const Node& n : g.nodes()) {
        if (n.kind == NodeKind::Gate) a += lib.cell(n.cell).area;
        if (n.is_splitter()) a += lib.cell(timing::CellKind::Splitter).area;
    }
    return a;
}

double round_to_jtl(double c, double jtl) {
    if (c <= 0.0) return 0.0;
    return std::ceil(c / jtl - 1e-7) * jtl;
}

namespace {

constexpr double kSnap = 1e-6;

// Number of DFFs to materialize from a fractional F.
int round_dffs(double f, double threshold) {
    double whole = std::floor(f);
    double frac = f - whole;
    if (frac < kSnap) return static_cast<int>(whole);
    if (frac > 1.0 - kSnap) return static_cast<int>(whole) + 1;
    return static_cast<int>(whole) + (frac > threshold ? 1 : 0);
}

lp::LpSolution solve_checked(const constraints::ConstraintSystem& sys) {
    return lp::solve_lp(sys.program);
}

}  // namespace

ClockSchedule extract_schedule(const lp::LpSolution& sol, const constraints::ConstraintSystem& sys,
                               const CircuitGraph& g, const timing::CellLibrary& lib) {
    if (sol.status != lp::Status::Optimal) {
        throw std::invalid_argument(fmt::format("cannot extract a schedule from a {} solution", lp::to_string(sol.status)));
    }
    const double w = lib.jtl_delay();
    ClockSchedule s;
    s.target = sys.period;
    s.period = sys.period;
    s.clock = constraints::clocks_from(sys, sol);
    s.jtl.assign(g.size(), 0);
    for (const Node& n : g.nodes()) {
        const auto i = static_cast<std::size_t>(n.id);
        if (!n.is_clocked()) continue;
        s.clock[i] = round_to_jtl(s.clock[i], w);
        s.jtl[i] = std::llround(s.clock[i] / w);
        s.jtl_count += s.jtl[i];
    }
    s.inserted_dffs = g.inserted_dff_count();
    s.cell_area = cell_area(g, lib);
    s.jtl_area = static_cast<double>(s.jtl_count) * lib.cell(timing::CellKind::Jtl).area;
    s.area = s.cell_area + s.jtl_area;
    const auto rep = sta::run_sta(g, s.clock, sta::nominal_delays(g, lib), s.period);
    s.setup_slack = rep.setup_slack;
    s.hold_slack = rep.hold_slack;
    s.verified = rep.pass;
    return s;
}

ClockSchedule schedule_at(const CircuitGraph& g, const timing::CellLibrary& lib, double period,
                          const timing::VariationSpec& variation) {
    constraints::BuildOptions opt;
    opt.mode = constraints::Mode::CheckOnly;
    opt.period = period;
    opt.variation = variation;
    opt.clock_weight = 1.0;
    const auto sys = constraints::build(g, lib, opt);
    return extract_schedule(solve_checked(sys), sys, g, lib);
}

SynthesisResult synthesize(const CircuitGraph& g, const timing::CellLibrary& lib, const SchedulerConfig& cfg) {
    cfg.validate();
    const double floor = constraints::period_floor(g, lib, cfg.variation);
    if (cfg.period < floor - timing::kTimeTolerance) throw PeriodBelowFloor(cfg.period, floor);

    SynthesisResult res;
    res.graph = g;
    CircuitGraph& graph = res.graph;

    for (int k = 0; k < cfg.max_iterations; ++k) {
        IterationLog log;
        log.iteration = k;
        log.threshold = cfg.rounding_threshold(k);
        log.min_period = constraints::min_feasible_period(graph, lib, cfg.variation);
        if (log.min_period <= cfg.period + timing::kTimeTolerance) {
            res.target_met = true;
            log.total = graph.inserted_dff_count();
            res.log.push_back(log);
            break;
        }

        constraints::BuildOptions opt;
        opt.mode = constraints::Mode::InsertDffs;
        opt.period = cfg.period;
        opt.variation = cfg.variation;
        std::vector<std::pair<EdgeRef, int>> plan;
        if (cfg.mode == SolveMode::ExactMilp) {
            opt.max_dffs_per_edge = cfg.max_dffs_per_edge;
            const auto sys = constraints::build(graph, lib, opt);
            std::vector<int> ints;
            for (const auto& ev : sys.edge_vars) ints.push_back(ev.f);
            lp::MilpOptions mopt;
            mopt.node_limit = cfg.milp_node_limit;
            const auto sol = lp::solve_milp(sys.program, ints, mopt);
            if (sol.x.empty()) {
                throw std::runtime_error(fmt::format("DFF insertion program is {}", lp::to_string(sol.status)));
            }
            log.relaxation = sol.objective;
            if (!res.model_optimum) res.model_optimum = sol.objective;
            for (std::size_t e = 0; e < sys.edge_vars.size(); ++e) {
                const int f = static_cast<int>(std::lround(sol.x[static_cast<std::size_t>(sys.edge_vars[e].f)]));
                if (f > 0) plan.push_back({graph.edges()[e].ref(), f});
            }
        } else {
            const auto sys = constraints::build(graph, lib, opt);
            const auto sol = solve_checked(sys);
            if (sol.status != lp::Status::Optimal) {
                throw std::runtime_error(fmt::format("DFF insertion program is {}", lp::to_string(sol.status)));
            }
            log.relaxation = sol.objective;
            for (std::size_t e = 0; e < sys.edge_vars.size(); ++e) {
                const int f = round_dffs(sol.x[static_cast<std::size_t>(sys.edge_vars[e].f)], log.threshold);
                if (f > 0) plan.push_back({graph.edges()[e].ref(), f});
            }
        }
        for (const auto& [ref, f] : plan) log.inserted += static_cast<std::size_t>(f);
        if (!plan.empty()) netlist::insert_dffs(graph, plan);
        log.total = graph.inserted_dff_count();
        res.log.push_back(log);
    }

    if (!res.target_met) {
        res.final_min_period = constraints::min_feasible_period(graph, lib, cfg.variation);
        res.target_met = res.final_min_period <= cfg.period + timing::kTimeTolerance;
        res.iteration_cap = !res.target_met;
    } else {
        res.final_min_period = res.log.back().min_period;
    }
    // A hair above the program's optimum keeps the final solve clear of the
    // feasibility tolerance.
    const double achieved = res.target_met ? cfg.period : res.final_min_period + 1e-6;
    res.schedule = schedule_at(graph, lib, achieved, cfg.variation);
    res.schedule.target = cfg.period;
    return res;
}

std::vector<SweepPoint> sweep(const CircuitGraph& g, const timing::CellLibrary& lib, const std::vector<double>& periods,
                              const SchedulerConfig& base, unsigned threads) {
    std::vector<SweepPoint> out(periods.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < periods.size(); i = next++) {
            SweepPoint& p = out[i];
            p.target = periods[i];
            try {
                SchedulerConfig cfg = base;
                cfg.period = periods[i];
                const auto r = synthesize(g, lib, cfg);
                p.ok = true;
                p.achieved = r.schedule.period;
                p.target_met = r.target_met;
                p.dffs = r.schedule.inserted_dffs;
                p.jtls = r.schedule.jtl_count;
                p.area = r.schedule.area;
                p.iterations = static_cast<int>(r.log.size());
            } catch (const std::exception& e) {
                p.ok = false;
                p.error = e.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(periods.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::string out = "target_ps,ok,achieved_ps,target_met,dffs,jtls,area,iterations,error\n";
    for (const SweepPoint& p : points) {
        out += fmt::format("{},{},{},{},{},{},{},{},\"{}\"\n", p.target, p.ok ? 1 : 0, p.achieved, p.target_met ? 1 : 0,
                           p.dffs, p.jtls, p.area, p.iterations, p.error);
    }
    return out;
}

}  // namespace cfd::scheduler
