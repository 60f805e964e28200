#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <fmt/format.h>

#include "cfd/lp/linear_program.hpp"

namespace cfd::lp {

namespace {

struct BoundChange {
    int var;
    double lower;
    double upper;
};

struct NodeEntry {
    double bound;
    std::size_t seq;
    std::vector<BoundChange> changes;
};

struct WorseFirst {
    bool operator()(const NodeEntry& a, const NodeEntry& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.seq > b.seq;
    }
};

bool objective_is_integral(const LinearProgram& p, std::span<const int> integer_vars) {
    std::vector<bool> is_int(p.num_variables(), false);
    for (int j : integer_vars) is_int[static_cast<std::size_t>(j)] = true;
    for (std::size_t j = 0; j < p.num_variables(); ++j) {
        const double c = p.variable(static_cast<int>(j)).cost;
        if (c == 0.0) continue;
        if (!is_int[j] || c != std::round(c)) return false;
    }
    return true;
}

}  // namespace

LpSolution solve_milp(const LinearProgram& p, std::span<const int> integer_vars, const MilpOptions& opt) {
    p.validate();
    for (int j : integer_vars) {
        const auto& v = p.variable(j);
        if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
            throw std::invalid_argument(fmt::format("integer variable {} needs finite bounds", j));
        }
    }
    const bool integral_obj = objective_is_integral(p, integer_vars);
    const auto prune_bound = [&](double bound) {
        return integral_obj ? std::ceil(bound - 1e-6) : bound;
    };

    LpSolution best;
    best.status = Status::Infeasible;
    double incumbent = kInf;
    std::size_t iterations = 0;
    std::size_t nodes = 0;
    std::size_t seq = 0;

    std::priority_queue<NodeEntry, std::vector<NodeEntry>, WorseFirst> open;
    open.push({-kInf, seq++, {}});
    LinearProgram work = p;
    bool limit_hit = false;
    bool unbounded = false;

    while (!open.empty()) {
        NodeEntry node = open.top();
        open.pop();
        if (prune_bound(node.bound) >= incumbent - 1e-9) continue;
        if (nodes >= opt.node_limit) {
            limit_hit = true;
            break;
        }
        ++nodes;
        for (std::size_t j = 0; j < p.num_variables(); ++j) {
            work.set_bounds(static_cast<int>(j), p.variable(static_cast<int>(j)).lower, p.variable(static_cast<int>(j)).upper);
        }
        for (const BoundChange& c : node.changes) work.set_bounds(c.var, c.lower, c.upper);
        LpSolution relax = solve_lp(work, opt.lp);
        iterations += relax.iterations;
        if (relax.status == Status::Unbounded) {
            unbounded = true;
            break;
        }
        if (relax.status != Status::Optimal) continue;
        if (prune_bound(relax.objective) >= incumbent - 1e-9) continue;

        int branch = -1;
        double most = opt.integrality_tol;
        for (int j : integer_vars) {
            const double v = relax.x[static_cast<std::size_t>(j)];
            const double frac = std::abs(v - std::round(v));
            const bool more = frac > most + 1e-12;
            const bool tie = branch >= 0 && std::abs(frac - most) <= 1e-12 && j < branch;
            if (more || tie) {
                most = frac;
                branch = j;
            }
        }
        if (branch < 0) {
            for (int j : integer_vars) relax.x[static_cast<std::size_t>(j)] = std::round(relax.x[static_cast<std::size_t>(j)]);
            relax.objective = p.objective(relax.x);
            incumbent = relax.objective;
            best = std::move(relax);
            continue;
        }
        const double v = relax.x[static_cast<std::size_t>(branch)];
        const double lo = work.variable(branch).lower;
        const double hi = work.variable(branch).upper;
        auto down = node.changes;
        down.push_back({branch, lo, std::floor(v)});
        auto up = std::move(node.changes);
        up.push_back({branch, std::ceil(v), hi});
        open.push({relax.objective, seq++, std::move(down)});
        open.push({relax.objective, seq++, std::move(up)});
    }

    best.iterations = iterations;
    best.nodes = nodes;
    if (unbounded) {
        best.status = Status::Unbounded;
        best.x.clear();
    } else if (limit_hit) {
        best.status = Status::NodeLimit;
    }
    return best;
}

}  // namespace cfd::lp
