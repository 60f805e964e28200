#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cfd/netlist/graph.hpp"
#include "cfd/sta_sim/sta.hpp"

namespace cfd::sta {

/// Boolean value of every PO (in declaration order) for one input vector (PI
/// declaration order). Timing is ignored; DFFs and splitters are identities.
std::vector<bool> reference_eval(const netlist::CircuitGraph& g, const std::vector<bool>& inputs);

struct CheckFailure {
    std::size_t edge = 0;  // graph edge index into the capturing node
    CheckKind kind = CheckKind::Setup;
    netlist::NodeId node = netlist::kNoNode;
    std::int64_t wave = 0;
    double time = 0.0;      // pulse arrival
    double required = 0.0;  // latest (setup) or earliest (hold) legal arrival
};

struct PulseRecord {
    netlist::NodeId node = netlist::kNoNode;  // emitting node
    double time = 0.0;
    std::int64_t wave = 0;
};

struct SimOptions {
    std::size_t waves = 1000;
    std::uint64_t seed = 1;
    double clock_scale = 1.0;
    double tolerance = timing::kTimeTolerance;
    bool record_waveform = false;
    // Optional explicit input vectors (one per wave); random when empty.
    std::vector<std::vector<bool>> vectors;
};

struct WaveSimResult {
    std::size_t waves = 0;
    std::size_t mismatches = 0;  // (wave, PO) pairs differing from the reference
    std::size_t collisions = 0;  // a second pulse on an input pin before it was consumed
    std::vector<CheckFailure> failures;
    // Per PO: largest difference between the capturing clock's wave and the
    // wave tag of the captured pulse.
    std::vector<std::int64_t> latency;
    std::vector<PulseRecord> waveform;
    std::size_t events = 0;

    bool timing_ok() const { return failures.empty(); }
    bool pass() const { return failures.empty() && mismatches == 0 && collisions == 0; }
};

/// Pulse-level event-driven simulation. Wave k's clock reaches clocked node i
/// at s*C_i + k*tau. Gates latch the pulses that arrived since their previous
/// clock and emit after clock-to-Q; splitters forward after their
/// propagation delay. A NOT gate emits when no input pulse arrived. Every pulse
/// carries the wave tag of the clock that launched it; arrivals are checked
/// against the capturing node's setup (before its same-wave clock) and hold
/// (after its previous-wave clock).
WaveSimResult simulate(const netlist::CircuitGraph& g, std::span<const double> clocks, const InstanceDelays& d,
                       double period, const SimOptions& opt = {});

/// One line per pulse: "<node> <time> <wave>".
void write_waveform(std::ostream& os, const netlist::CircuitGraph& g, const WaveSimResult& r);

}  // namespace cfd::sta
