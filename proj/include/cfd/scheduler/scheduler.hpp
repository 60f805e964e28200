#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfd/constraints/constraint_system.hpp"
#include "cfd/netlist/graph.hpp"
#include "cfd/timing/cell_library.hpp"
#include "cfd/timing/variation.hpp"

namespace cfd::scheduler {

enum class SolveMode { HeuristicLp, ExactMilp };

struct SchedulerConfig {
    double period = 22.0;
    int max_iterations = 15;
    timing::VariationSpec variation{};
    SolveMode mode = SolveMode::HeuristicLp;
    double rounding_step = 0.2;  // r(k) = max(0, 1 - step * k)
    // Exact mode: integer F per edge is capped at this value.
    int max_dffs_per_edge = 8;
    std::size_t milp_node_limit = 200000;

    double rounding_threshold(int iteration) const;
    /// Throws std::invalid_argument on a non-positive period or iteration cap.
    void validate() const;
};

/// Raised when the target period is below what any DFF placement can reach.
class PeriodBelowFloor : public std::runtime_error {
public:
    PeriodBelowFloor(double period, double floor);
    double period;
    double floor;
};

struct ClockSchedule {
    std::vector<double> clock;     // per node id, ps; 0 for splitters
    std::vector<std::int64_t> jtl; // per node id, JTL chain length C / w
    double period = 0.0;           // achieved
    double target = 0.0;
    std::size_t inserted_dffs = 0;
    std::int64_t jtl_count = 0;
    double cell_area = 0.0;        // gates, DFFs and splitters
    double jtl_area = 0.0;
    double area = 0.0;
    // Margin-free slacks of every timing arc at the achieved period.
    std::vector<double> setup_slack;
    std::vector<double> hold_slack;
    bool verified = false;  // nominal STA passes at the achieved period
};

struct IterationLog {
    int iteration = 0;
    double threshold = 0.0;
    double min_period = 0.0;   // before this iteration's insertion
    double relaxation = 0.0;   // objective of the insertion program
    std::size_t inserted = 0;  // DFFs added this iteration
    std::size_t total = 0;     // DFFs in the graph afterwards
};

struct SynthesisResult {
    netlist::CircuitGraph graph;
    ClockSchedule schedule;
    std::vector<IterationLog> log;
    bool target_met = false;
    bool iteration_cap = false;  // stopped by the iteration limit before meeting the target
    double final_min_period = 0.0;
    // Exact mode: optimum of the first integer program (DFFs the model needs).
    std::optional<double> model_optimum;
};

/// Iterative DFF insertion followed by clock scheduling on the final graph.
/// Always returns a working schedule; when the target is missed the achieved
/// period is the graph's minimum feasible period.
SynthesisResult synthesize(const netlist::CircuitGraph& g, const timing::CellLibrary& lib,
                           const SchedulerConfig& cfg);

/// Round the clock values of a feasible check_only solution up to JTL
/// multiples and compute area and slacks. Throws std::invalid_argument for a
/// solution that is not optimal.
ClockSchedule extract_schedule(const lp::LpSolution& sol, const constraints::ConstraintSystem& sys,
                               const netlist::CircuitGraph& g, const timing::CellLibrary& lib);

/// Area of gates, DFFs and splitters in library units (no clock JTLs).
double cell_area(const netlist::CircuitGraph& g, const timing::CellLibrary& lib);

/// Clock delay rounded up to the next multiple of the JTL delay.
double round_to_jtl(double c, double jtl);

/// Minimum-period schedule of the graph as it is (no insertion).
ClockSchedule schedule_at(const netlist::CircuitGraph& g, const timing::CellLibrary& lib, double period,
                          const timing::VariationSpec& variation = {});

struct SweepPoint {
    double target = 0.0;
    bool ok = false;
    std::string error;
    double achieved = 0.0;
    bool target_met = false;
    std::size_t dffs = 0;
    std::int64_t jtls = 0;
    double area = 0.0;
    int iterations = 0;
};

/// Independent synthesis runs, one per target period, on up to `threads`
/// workers. Results keep the input order.
std::vector<SweepPoint> sweep(const netlist::CircuitGraph& g, const timing::CellLibrary& lib,
                              const std::vector<double>& periods, const SchedulerConfig& base,
                              unsigned threads = 1);

std::string sweep_csv(const std::vector<SweepPoint>& points);

/// Text schedule file (see docs/formats.md).
void write_schedule(std::ostream& os, const netlist::CircuitGraph& g, const ClockSchedule& s);
/// Reads clock values back for `g`; throws std::runtime_error on unknown or
/// missing nodes.
ClockSchedule read_schedule(std::string_view text, const netlist::CircuitGraph& g);

}  // namespace cfd::scheduler
