#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace cfd::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Term {
    int var = 0;
    double coef = 0.0;
};

struct Variable {
    double lower = 0.0;
    double upper = kInf;
    double cost = 0.0;
    std::string name;
};

struct Constraint {
    std::vector<Term> terms;
    Sense sense = Sense::GreaterEqual;
    double rhs = 0.0;
    std::string name;
};

/// min c'x  s.t.  rows (<=, >=, =), lower <= x <= upper.
class LinearProgram {
public:
    int add_variable(double lower, double upper, double cost = 0.0, std::string name = {});
    /// Duplicate variables in `terms` are merged; zero coefficients dropped.
    int add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string name = {});

    void set_cost(int var, double cost);
    void set_bounds(int var, double lower, double upper);

    std::size_t num_variables() const { return vars_.size(); }
    std::size_t num_constraints() const { return rows_.size(); }
    const Variable& variable(int j) const { return vars_.at(static_cast<std::size_t>(j)); }
    const Constraint& constraint(int i) const { return rows_.at(static_cast<std::size_t>(i)); }
    std::span<const Variable> variables() const { return vars_; }
    std::span<const Constraint> constraints() const { return rows_; }

    /// Objective value of an assignment.
    double objective(std::span<const double> x) const;
    /// Largest bound or row violation of an assignment (0 if feasible).
    double max_violation(std::span<const double> x) const;

    /// Throws std::invalid_argument on unknown variables, lower > upper, or
    /// non-finite coefficients.
    void validate() const;

private:
    std::vector<Variable> vars_;
    std::vector<Constraint> rows_;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, NodeLimit };

std::string_view to_string(Status s);

struct LpSolution {
    Status status = Status::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
    std::size_t iterations = 0;  // simplex pivots, summed over nodes for MILP
    std::size_t nodes = 0;       // branch-and-bound nodes (1 for a plain LP)
};

struct SolverOptions {
    double feasibility_tol = 1e-7;
    double optimality_tol = 1e-7;
    double pivot_tol = 1e-9;
    std::size_t max_iterations = 0;  // 0: automatic, proportional to the size
    std::size_t refactor_interval = 400;
};

/// Bounded-variable revised simplex: a dual phase from the slack basis, then
/// a primal phase with the true costs. Bland's rule takes over after a run of
/// non-improving pivots. Deterministic for identical input.
LpSolution solve_lp(const LinearProgram& p, const SolverOptions& opt = {});

struct MilpOptions {
    std::size_t node_limit = 1'000'000;
    double integrality_tol = 1e-6;
    SolverOptions lp;
};

/// Branch and bound over the LP relaxation. Best-bound node order (FIFO among
/// equal bounds), branching on the most fractional integer variable with ties
/// going to the lowest index. Integer variables must have finite bounds.
LpSolution solve_milp(const LinearProgram& p, std::span<const int> integer_vars, const MilpOptions& opt = {});

/// CPLEX LP text format, for cross-checking with external solvers.
std::string to_lp_format(const LinearProgram& p);

}  // namespace cfd::lp
