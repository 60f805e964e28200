#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cfd/netlist/graph.hpp"
#include "cfd/timing/cell_library.hpp"

namespace cfd::sta {

/// Per-instance timing values indexed by node id. `launch` is clock-to-Q for
/// clocked nodes and propagation delay for splitters; setup/hold are unused
/// on splitters.
struct InstanceDelays {
    std::vector<double> setup;
    std::vector<double> hold;
    std::vector<double> launch;
};

InstanceDelays nominal_delays(const netlist::CircuitGraph& g, const timing::CellLibrary& lib);

enum class CheckKind { Setup, Hold };
std::string_view to_string(CheckKind k);

struct Violation {
    std::size_t arc = 0;  // index into TimingReport::arcs
    CheckKind kind = CheckKind::Setup;
    double amount = 0.0;  // positive: how far the check is missed
};

/// A timing arc: data launched by a clocked node, through zero or more
/// splitters, captured by a clocked node.
struct Arc {
    std::size_t edge = 0;  // index of the final edge into the capturing node
    netlist::NodeId launcher = netlist::kNoNode;
    netlist::NodeId capturer = netlist::kNoNode;
    double delay = 0.0;  // clock-to-Q plus splitter propagation
};

struct TimingReport {
    std::vector<Arc> arcs;
    std::vector<double> setup_slack;  // per arc
    std::vector<double> hold_slack;   // per arc
    std::vector<Violation> violations;
    // Smallest period at which every hold check passes with this schedule.
    double min_period = 0.0;
    bool setup_ok = true;
    bool pass = true;

    std::string summary(const netlist::CircuitGraph& g, std::size_t max_lines = 20) const;
};

struct StaOptions {
    // Multiplies every clock delay (global JTL bias scaling).
    double clock_scale = 1.0;
    double tolerance = timing::kTimeTolerance;
};

/// Timing arcs of the graph: one per edge into a clocked node.
std::vector<Arc> timing_arcs(const netlist::CircuitGraph& g, const InstanceDelays& d);

/// Checks every arc directly:
///   setup: s (C_j - C_i) >= delay + sigma_j
///   hold:  s (C_j - C_i) + eta_j <= delay + tau
/// Throws std::invalid_argument if `clocks` does not cover every clocked node.
TimingReport run_sta(const netlist::CircuitGraph& g, std::span<const double> clocks, const InstanceDelays& d,
                     double period, const StaOptions& opt = {});

/// Period of a conventionally clocked (zero-skew) pipeline: the slowest
/// single-stage path, clock-to-Q plus splitter delays plus capture setup.
double fpb_period(const netlist::CircuitGraph& g, const timing::CellLibrary& lib);

}  // namespace cfd::sta
