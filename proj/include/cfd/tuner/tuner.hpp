#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cfd/netlist/graph.hpp"
#include "cfd/sta_sim/sta.hpp"
#include "cfd/timing/cell_library.hpp"

namespace cfd::tuner {

struct PerturbOptions {
    double band = 0.2;            // multipliers uniform in [1 - band, 1 + band]
    bool include_passive = true;  // perturb splitter propagation too
};

/// Per-instance multipliers and the resulting delays of one random trial.
struct PerturbationTrial {
    std::uint64_t seed = 0;
    double band = 0.0;
    std::vector<double> setup_scale;  // per node id; 1 where not applicable
    std::vector<double> hold_scale;
    std::vector<double> launch_scale;
    sta::InstanceDelays delays;
};

/// Independent uniform multipliers on setup, hold and clock-to-Q of every
/// clocked instance (and splitter propagation when enabled), reproducible
/// from `seed`. Throws std::invalid_argument unless 0 <= band < 1.
PerturbationTrial perturb(const netlist::CircuitGraph& g, const timing::CellLibrary& lib, std::uint64_t seed,
                          const PerturbOptions& opt = {});

struct TuneOptions {
    double step = 0.005;
    double max_scale = 2.0;
};

struct TuneResult {
    double scale = 1.0;   // global JTL delay multiplier s
    double period = 0.0;  // final period tau'
    bool pass = false;
    std::size_t violations_before = 0;  // at s = 1 and the target period
    std::size_t setup_before = 0;
    std::size_t hold_before = 0;
    std::size_t violations_after = 0;   // at (s, tau')
};

/// Raises the JTL scale in fixed steps until every setup check holds, then
/// relaxes the period to the hold-implied minimum at that scale. When no
/// scale up to the cap closes setup, reports the scale with the fewest setup
/// violations and the residual count.
TuneResult tune_post_fab(const netlist::CircuitGraph& g, std::span<const double> clocks, const sta::InstanceDelays& d,
                         double target_period, const TuneOptions& opt = {});

struct TrialRecord {
    std::uint64_t seed = 0;
    TuneResult result;
};

/// One perturbation and tuning run per seed on up to `threads` workers;
/// results follow the seed order.
std::vector<TrialRecord> run_trials(const netlist::CircuitGraph& g, const timing::CellLibrary& lib,
                                    std::span<const double> clocks, double target_period,
                                    const std::vector<std::uint64_t>& seeds, const PerturbOptions& popt = {},
                                    const TuneOptions& topt = {}, unsigned threads = 1);

/// CSV table: seed, s, tau', pass and violation counts.
std::string trials_csv(const std::vector<TrialRecord>& trials);

}  // namespace cfd::tuner
