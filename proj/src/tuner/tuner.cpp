#include "cfd/tuner/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace cfd::tuner {

PerturbationTrial perturb(const netlist::CircuitGraph& g, const timing::CellLibrary& lib, std::uint64_t seed,
                          const PerturbOptions& opt) {
    if (!(opt.band >= 0.0 && opt.band < 1.0)) {
        throw std::invalid_argument(fmt::format("perturbation band must be in [0, 1), got {}", opt.band));
    }
    PerturbationTrial t;
    t.seed = seed;
    t.band = opt.band;
    t.delays = sta::nominal_delays(g, lib);
    t.setup_scale.assign(g.size(), 1.0);
    t.hold_scale.assign(g.size(), 1.0);
    t.launch_scale.assign(g.size(), 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(1.0 - opt.band, 1.0 + opt.band);
    const auto draw = [&] { return opt.band == 0.0 ? 1.0 : u(rng); };
    for (const auto& n : g.nodes()) {
        const auto i = static_cast<std::size_t>(n.id);
        if (n.is_clocked()) {
            t.setup_scale[i] = draw();
            t.hold_scale[i] = draw();
            t.launch_scale[i] = draw();
        } else if (opt.include_passive) {
            t.launch_scale[i] = draw();
        }
        t.delays.setup[i] *= t.setup_scale[i];
        t.delays.hold[i] *= t.hold_scale[i];
        t.delays.launch[i] *= t.launch_scale[i];
    }
    return t;
}

TuneResult tune_post_fab(const netlist::CircuitGraph& g, std::span<const double> clocks, const sta::InstanceDelays& d,
                         double target_period, const TuneOptions& opt) {
    if (!(target_period > 0.0)) throw std::invalid_argument("target period must be positive");
    if (!(opt.step > 0.0) || opt.max_scale < 1.0) throw std::invalid_argument("invalid scale search settings");
    TuneResult r;
    const auto before = sta::run_sta(g, clocks, d, target_period);
    r.violations_before = before.violations.size();
    for (const auto& v : before.violations) (v.kind == sta::CheckKind::Setup ? r.setup_before : r.hold_before)++;

    // Setup slack grows with s, so the first passing grid point is minimal.
    sta::StaOptions so;
    std::size_t best_setup = static_cast<std::size_t>(-1);
    double best_scale = 1.0;
    bool setup_closed = false;
    const int steps = static_cast<int>(std::floor((opt.max_scale - 1.0) / opt.step + 1e-9));
    for (int k = 0; k <= steps; ++k) {
        so.clock_scale = 1.0 + k * opt.step;
        const auto rep = sta::run_sta(g, clocks, d, target_period, so);
        const auto setup = static_cast<std::size_t>(std::count_if(
            rep.violations.begin(), rep.violations.end(), [](const sta::Violation& v) { return v.kind == sta::CheckKind::Setup; }));
        if (setup < best_setup) {
            best_setup = setup;
            best_scale = so.clock_scale;
        }
        if (rep.setup_ok) {
            setup_closed = true;
            break;
        }
    }
    r.scale = best_scale;
    so.clock_scale = best_scale;
    // hold slack has unit slope in the period
    const auto at_target = sta::run_sta(g, clocks, d, target_period, so);
    r.period = std::max(target_period, at_target.min_period);
    const auto after = sta::run_sta(g, clocks, d, r.period, so);
    r.violations_after = after.violations.size();
    r.pass = setup_closed && after.pass;
    return r;
}

std::vector<TrialRecord> run_trials(const netlist::CircuitGraph& g, const timing::CellLibrary& lib,
                                    std::span<const double> clocks, double target_period,
                                    const std::vector<std::uint64_t>& seeds, const PerturbOptions& popt,
                                    const TuneOptions& topt, unsigned threads) {
    std::vector<TrialRecord> out(seeds.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    const auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                const auto trial = perturb(g, lib, seeds[i], popt);
                out[i] = {seeds[i], tune_post_fab(g, clocks, trial.delays, target_period, topt)};
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

std::string trials_csv(const std::vector<TrialRecord>& trials) {
    std::string out = "seed,scale,period_ps,pass,violations_before,setup_before,hold_before,violations_after\n";
    for (const auto& t : trials) {
        const auto& r = t.result;
        out += fmt::format("{},{:.3f},{},{},{},{},{},{}\n", t.seed, r.scale, r.period, r.pass ? 1 : 0,
                           r.violations_before, r.setup_before, r.hold_before, r.violations_after);
    }
    return out;
}

}  // namespace cfd::tuner
