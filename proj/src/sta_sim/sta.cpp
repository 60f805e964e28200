#include "cfd/sta_sim/sta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "cfd/kernels/kernels.hpp"

namespace cfd::sta {

using netlist::CircuitGraph;
using netlist::Node;
using netlist::NodeId;

std::string_view to_string(CheckKind k) { return k == CheckKind::Setup ? "setup" : "hold"; }

InstanceDelays nominal_delays(const CircuitGraph& g, const timing::CellLibrary& lib) {
    InstanceDelays d;
    d.setup.resize(g.size());
    d.hold.resize(g.size());
    d.launch.resize(g.size());
    for (const Node& n : g.nodes()) {
        const auto i = static_cast<std::size_t>(n.id);
        const timing::CellTiming& c = lib.cell(netlist::timing_cell(n));
        d.setup[i] = c.setup;
        d.hold[i] = c.hold;
        d.launch[i] = n.is_splitter() ? c.propagation : c.clock_to_q;
    }
    return d;
}

std::vector<Arc> timing_arcs(const CircuitGraph& g, const InstanceDelays& d) {
    // For each splitter: its clocked root and accumulated delay at its input.
    std::vector<NodeId> root(g.size(), netlist::kNoNode);
    std::vector<double> reach(g.size(), 0.0);
    for (NodeId id : g.topological_order()) {
        const Node& n = g.node(id);
        if (!n.is_splitter()) continue;
        const NodeId src = n.fanins.at(0);
        const auto s = static_cast<std::size_t>(src);
        if (g.node(src).is_splitter()) {
            root[static_cast<std::size_t>(id)] = root[s];
            reach[static_cast<std::size_t>(id)] = reach[s] + d.launch[s];
        } else {
            root[static_cast<std::size_t>(id)] = src;
            reach[static_cast<std::size_t>(id)] = d.launch[s];
        }
    }
    std::vector<Arc> arcs;
    const auto edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& edge = edges[e];
        if (!g.node(edge.dst).is_clocked()) continue;
        const auto s = static_cast<std::size_t>(edge.src);
        Arc a;
        a.edge = e;
        a.capturer = edge.dst;
        if (g.node(edge.src).is_splitter()) {
            a.launcher = root[s];
            a.delay = reach[s] + d.launch[s];
        } else {
            a.launcher = edge.src;
            a.delay = d.launch[s];
        }
        arcs.push_back(a);
    }
    return arcs;
}

TimingReport run_sta(const CircuitGraph& g, std::span<const double> clocks, const InstanceDelays& d, double period,
                     const StaOptions& opt) {
    if (clocks.size() < g.size()) {
        throw std::invalid_argument(fmt::format("schedule covers {} of {} nodes", clocks.size(), g.size()));
    }
    for (const Node& n : g.nodes()) {
        if (n.is_clocked() && !std::isfinite(clocks[static_cast<std::size_t>(n.id)])) {
            throw std::invalid_argument(fmt::format("schedule has no clock delay for '{}'", n.name));
        }
    }
    TimingReport r;
    r.arcs = timing_arcs(g, d);
    const std::size_t m = r.arcs.size();
    std::vector<double> cap(m), launch(m), delay(m), setup(m), hold(m);
    for (std::size_t k = 0; k < m; ++k) {
        const Arc& a = r.arcs[k];
        cap[k] = clocks[static_cast<std::size_t>(a.capturer)];
        launch[k] = clocks[static_cast<std::size_t>(a.launcher)];
        delay[k] = a.delay;
        setup[k] = d.setup[static_cast<std::size_t>(a.capturer)];
        hold[k] = d.hold[static_cast<std::size_t>(a.capturer)];
    }
    r.setup_slack.resize(m);
    r.hold_slack.resize(m);
    kernels::edge_slacks({cap, launch, delay, setup, hold}, opt.clock_scale, period, r.setup_slack, r.hold_slack);

    r.min_period = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        // hold slack is linear in the period with unit slope
        r.min_period = std::max(r.min_period, period - r.hold_slack[k]);
        if (r.setup_slack[k] < -opt.tolerance) {
            r.violations.push_back({k, CheckKind::Setup, -r.setup_slack[k]});
            r.setup_ok = false;
        }
        if (r.hold_slack[k] < -opt.tolerance) r.violations.push_back({k, CheckKind::Hold, -r.hold_slack[k]});
    }
    r.pass = r.violations.empty();
    return r;
}

std::string TimingReport::summary(const CircuitGraph& g, std::size_t max_lines) const {
    std::string out = fmt::format("arcs {} violations {} min_period {:.3f} {}\n", arcs.size(), violations.size(),
                                  min_period, pass ? "PASS" : "FAIL");
    for (std::size_t k = 0; k < violations.size() && k < max_lines; ++k) {
        const Violation& v = violations[k];
        const Arc& a = arcs[v.arc];
        out += fmt::format("  {} {} -> {} short by {:.3f} ps\n", to_string(v.kind), g.node(a.launcher).name,
                           g.node(a.capturer).name, v.amount);
    }
    if (violations.size() > max_lines) out += fmt::format("  ... {} more\n", violations.size() - max_lines);
    return out;
}

double fpb_period(const CircuitGraph& g, const timing::CellLibrary& lib) {
    const InstanceDelays d = nominal_delays(g, lib);
    double t = 0.0;
    for (const Arc& a : timing_arcs(g, d)) {
        t = std::max(t, a.delay + d.setup[static_cast<std::size_t>(a.capturer)]);
    }
    return t;
}

}  // namespace cfd::sta
