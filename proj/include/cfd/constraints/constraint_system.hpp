#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cfd/lp/linear_program.hpp"
#include "cfd/netlist/graph.hpp"
#include "cfd/timing/cell_library.hpp"
#include "cfd/timing/variation.hpp"

namespace cfd::constraints {

enum class Mode {
    InsertDffs,  // tau fixed, F continuous, minimize total F
    MinPeriod,   // F fixed at 0, tau free, minimize tau
    CheckOnly,   // F fixed at 0, tau fixed, feasibility
};

enum class RowTag {
    DffLower,     // F (sigma_D + beta_D + w/2) <= D
    DffUpper,     // D <= F (tau - eta_D + beta_D + w/2)
    SetupGG,
    HoldGG,
    SetupSG,
    HoldSG,
    ArrivalGS,    // A_j = C_i + beta_i + D (late and early copies under variation)
    ArrivalSS,    // A_j = A_i + rho_i + D
    InputClock,   // C = 0 on every PI
    OutputClock,  // every PO shares the reference PO's clock
};
inline constexpr std::size_t kRowTagCount = 10;

std::string_view to_string(RowTag t);
std::string_view to_string(Mode m);

struct BuildOptions {
    Mode mode = Mode::InsertDffs;
    double period = 0.0;  // ignored in MinPeriod mode
    timing::VariationSpec variation{};
    // Drop the one-JTL setup/hold margins (and the half-JTL DFF terms): the
    // exact timing rows, as checked by static timing analysis.
    bool jtl_margin = true;
    // Upper bound on F per edge (InsertDffs mode).
    double max_dffs_per_edge = lp::kInf;
    // Weight of sum(C) in the objective; a small positive value picks the
    // earliest clocks among equally good schedules.
    double clock_weight = 0.0;
    // Pin clock delays per node id (NaN entries stay free).
    const std::vector<double>* fixed_clocks = nullptr;
};

struct EdgeVars {
    int f = -1;  // F_ij
    int d = -1;  // D_ij
};

/// LP of one circuit. Variables are indexed per node / per edge of the graph
/// it was built from; every row carries the tag of the rule that produced it.
struct ConstraintSystem {
    Mode mode = Mode::InsertDffs;
    double period = 0.0;
    lp::LinearProgram program;
    std::vector<int> clock_var;      // per node; -1 for splitters
    std::vector<int> arrival_late;   // per node; -1 for clocked nodes
    std::vector<int> arrival_early;  // same variable as arrival_late without variation
    std::vector<EdgeVars> edge_vars; // per edge index
    int period_var = -1;             // MinPeriod only
    std::vector<RowTag> row_tags;

    std::size_t count(RowTag t) const;
    /// Human-readable listing: one line per row, prefixed by its tag.
    std::string dump() const;
};

/// Throws std::invalid_argument for a non-positive period outside MinPeriod
/// mode or a graph without splitter trees.
ConstraintSystem build(const netlist::CircuitGraph& g, const timing::CellLibrary& lib, const BuildOptions& opt);

/// Smallest period the graph meets with its current DFFs (no insertion).
/// Throws std::runtime_error if the program is infeasible.
double min_feasible_period(const netlist::CircuitGraph& g, const timing::CellLibrary& lib,
                           const timing::VariationSpec& variation = {}, bool jtl_margin = true);

/// Closed-form lower bound on any achievable period: over every timing arc,
/// setup + hold of the capturing cell + two JTL delays, plus the spread
/// between late and early arrival under variation. DFF insertion cannot go
/// below it.
double period_floor(const netlist::CircuitGraph& g, const timing::CellLibrary& lib,
                    const timing::VariationSpec& variation = {});

/// Per-node clock values from an LP solution (0 for splitters).
std::vector<double> clocks_from(const ConstraintSystem& sys, const lp::LpSolution& sol);

}  // namespace cfd::constraints
