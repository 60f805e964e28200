#include "cfd/constraints/constraint_system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace cfd::constraints {

using netlist::CircuitGraph;
using netlist::Edge;
using netlist::EdgeClass;
using netlist::Node;
using netlist::NodeId;
using netlist::NodeKind;

std::string_view to_string(RowTag t) {
    switch (t) {
        case RowTag::DffLower: return "dff-lower";
        case RowTag::DffUpper: return "dff-upper";
        case RowTag::SetupGG: return "setup-gg";
        case RowTag::HoldGG: return "hold-gg";
        case RowTag::SetupSG: return "setup-sg";
        case RowTag::HoldSG: return "hold-sg";
        case RowTag::ArrivalGS: return "arrival-gs";
        case RowTag::ArrivalSS: return "arrival-ss";
        case RowTag::InputClock: return "input-clock";
        case RowTag::OutputClock: return "output-clock";
    }
    return "?";
}

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::InsertDffs: return "insert_dffs";
        case Mode::MinPeriod: return "min_period";
        case Mode::CheckOnly: return "check_only";
    }
    return "?";
}

std::size_t ConstraintSystem::count(RowTag t) const {
    return static_cast<std::size_t>(std::count(row_tags.begin(), row_tags.end(), t));
}

std::string ConstraintSystem::dump() const {
    std::string out = fmt::format("# mode {} period {}\n", to_string(mode), period);
    for (std::size_t i = 0; i < program.num_constraints(); ++i) {
        const lp::Constraint& c = program.constraint(static_cast<int>(i));
        out += fmt::format("{:<12}", to_string(row_tags[i]));
        bool first = true;
        for (const lp::Term& t : c.terms) {
            const std::string& name = program.variable(t.var).name;
            if (first) {
                out += fmt::format(" {}{} {}", t.coef < 0 ? "-" : "", std::abs(t.coef), name);
            } else {
                out += fmt::format(" {} {} {}", t.coef < 0 ? "-" : "+", std::abs(t.coef), name);
            }
            first = false;
        }
        const char* op = c.sense == lp::Sense::LessEqual ? "<=" : c.sense == lp::Sense::GreaterEqual ? ">=" : "=";
        out += fmt::format(" {} {}\n", op, c.rhs);
    }
    return out;
}

namespace {

class Builder {
public:
    Builder(const CircuitGraph& g, const timing::CellLibrary& lib, const BuildOptions& opt)
        : g_(g), lib_(lib), opt_(opt) {}

    ConstraintSystem run() {
        sys_.mode = opt_.mode;
        sys_.period = opt_.mode == Mode::MinPeriod ? 0.0 : opt_.period;
        margin_ = opt_.jtl_margin ? lib_.jtl_delay() : 0.0;
        add_variables();
        for (std::size_t e = 0; e < g_.edges().size(); ++e) {
            add_dff_rows(e);
            add_edge_rows(e);
        }
        add_boundary_rows();
        return std::move(sys_);
    }

private:
    lp::LinearProgram& p() { return sys_.program; }

    void add_row(RowTag tag, std::vector<lp::Term> terms, lp::Sense s, double rhs) {
        p().add_constraint(std::move(terms), s, rhs, fmt::format("r{}", sys_.row_tags.size()));
        sys_.row_tags.push_back(tag);
    }

    const timing::CellTiming& timing_of(NodeId id) const {
        return lib_.cell(netlist::timing_cell(g_.node(id)));
    }

    // Launch delay of the driver of an edge: clock-to-Q or splitter propagation.
    double launch_delay(NodeId src) const {
        const Node& n = g_.node(src);
        return n.is_splitter() ? lib_.splitter_delay() : timing_of(src).clock_to_q;
    }

    void add_variables() {
        const bool variation = !opt_.variation.is_zero();
        const std::size_t n = g_.size();
        sys_.clock_var.assign(n, -1);
        sys_.arrival_late.assign(n, -1);
        sys_.arrival_early.assign(n, -1);
        for (const Node& node : g_.nodes()) {
            const auto i = static_cast<std::size_t>(node.id);
            if (node.is_clocked()) {
                const int v = p().add_variable(0.0, lp::kInf, opt_.clock_weight, fmt::format("C_{}", node.id));
                sys_.clock_var[i] = v;
                if (opt_.fixed_clocks != nullptr && i < opt_.fixed_clocks->size() &&
                    !std::isnan((*opt_.fixed_clocks)[i])) {
                    const double c = (*opt_.fixed_clocks)[i];
                    p().set_bounds(v, c, c);
                }
            } else if (variation) {
                sys_.arrival_late[i] = p().add_variable(0.0, lp::kInf, 0.0, fmt::format("Ap_{}", node.id));
                sys_.arrival_early[i] = p().add_variable(0.0, lp::kInf, 0.0, fmt::format("Am_{}", node.id));
            } else {
                sys_.arrival_late[i] = p().add_variable(0.0, lp::kInf, 0.0, fmt::format("A_{}", node.id));
                sys_.arrival_early[i] = sys_.arrival_late[i];
            }
        }
        const bool free_f = opt_.mode == Mode::InsertDffs;
        const double f_upper = free_f ? opt_.max_dffs_per_edge : 0.0;
        sys_.edge_vars.resize(g_.edges().size());
        for (std::size_t e = 0; e < g_.edges().size(); ++e) {
            sys_.edge_vars[e].f = p().add_variable(0.0, f_upper, free_f ? 1.0 : 0.0, fmt::format("F_{}", e));
            sys_.edge_vars[e].d = p().add_variable(0.0, lp::kInf, 0.0, fmt::format("D_{}", e));
        }
        if (opt_.mode == Mode::MinPeriod) sys_.period_var = p().add_variable(0.0, lp::kInf, 1.0, "tau");
    }

    void add_dff_rows(std::size_t e) {
        const timing::CellTiming& d = lib_.dff();
        const double half = 0.5 * margin_;
        const EdgeVars& v = sys_.edge_vars[e];
        // F (sigma_D + beta_D + w/2) - D <= 0
        add_row(RowTag::DffLower, {{v.f, d.setup + d.clock_to_q + half}, {v.d, -1.0}}, lp::Sense::LessEqual, 0.0);
        if (opt_.mode == Mode::MinPeriod) {
            // F is fixed at zero, which removes the product with the free period.
            add_row(RowTag::DffUpper, {{v.d, 1.0}}, lp::Sense::LessEqual, 0.0);
        } else {
            const double per_dff = opt_.period - d.hold + d.clock_to_q + half;
            add_row(RowTag::DffUpper, {{v.d, 1.0}, {v.f, -per_dff}}, lp::Sense::LessEqual, 0.0);
        }
    }

    void add_edge_rows(std::size_t idx) {
        const Edge& e = g_.edges()[idx];
        const int d = sys_.edge_vars[idx].d;
        const double launch = launch_delay(e.src);
        const timing::EdgeDelta dv = timing::edge_variation(opt_.variation, launch);
        const Node& dst = g_.node(e.dst);

        if (dst.is_clocked()) {
            const timing::CellTiming& cap = timing_of(e.dst);
            const timing::EdgeDelta cv = timing::capture_variation(opt_.variation, cap.setup, cap.hold);
            const int cj = sys_.clock_var[static_cast<std::size_t>(e.dst)];
            const bool from_splitter = e.cls == EdgeClass::SG;
            const int late = from_splitter ? sys_.arrival_late[static_cast<std::size_t>(e.src)]
                                           : sys_.clock_var[static_cast<std::size_t>(e.src)];
            const int early = from_splitter ? sys_.arrival_early[static_cast<std::size_t>(e.src)] : late;
            // setup: C_j - X_i - D >= launch + D+ + sigma_j (+capture) + w
            add_row(from_splitter ? RowTag::SetupSG : RowTag::SetupGG, {{cj, 1.0}, {late, -1.0}, {d, -1.0}},
                    lp::Sense::GreaterEqual, launch + dv.plus + cap.setup + cv.plus + margin_);
            // hold: C_j - X_i - D - tau <= launch - D- - eta_j (-capture) - w
            std::vector<lp::Term> hold{{cj, 1.0}, {early, -1.0}, {d, -1.0}};
            double rhs = launch - dv.minus - cap.hold - cv.minus - margin_;
            if (sys_.period_var >= 0) {
                hold.push_back({sys_.period_var, -1.0});
            } else {
                rhs += opt_.period;
            }
            add_row(from_splitter ? RowTag::HoldSG : RowTag::HoldGG, std::move(hold), lp::Sense::LessEqual, rhs);
            return;
        }

        // Edge into a splitter: arrival equalities.
        const bool from_splitter = e.cls == EdgeClass::SS;
        const RowTag tag = from_splitter ? RowTag::ArrivalSS : RowTag::ArrivalGS;
        const auto j = static_cast<std::size_t>(e.dst);
        const int src_late = from_splitter ? sys_.arrival_late[static_cast<std::size_t>(e.src)]
                                           : sys_.clock_var[static_cast<std::size_t>(e.src)];
        const int src_early = from_splitter ? sys_.arrival_early[static_cast<std::size_t>(e.src)] : src_late;
        add_row(tag, {{sys_.arrival_late[j], 1.0}, {src_late, -1.0}, {d, -1.0}}, lp::Sense::Equal, launch + dv.plus);
        if (sys_.arrival_early[j] != sys_.arrival_late[j]) {
            add_row(tag, {{sys_.arrival_early[j], 1.0}, {src_early, -1.0}, {d, -1.0}}, lp::Sense::Equal,
                    launch - dv.minus);
        }
    }

    void add_boundary_rows() {
        for (NodeId pi : g_.inputs()) {
            add_row(RowTag::InputClock, {{sys_.clock_var[static_cast<std::size_t>(pi)], 1.0}}, lp::Sense::Equal, 0.0);
        }
        const auto outs = g_.outputs();
        for (std::size_t k = 1; k < outs.size(); ++k) {
            add_row(RowTag::OutputClock,
                    {{sys_.clock_var[static_cast<std::size_t>(outs[k])], 1.0},
                     {sys_.clock_var[static_cast<std::size_t>(outs[0])], -1.0}},
                    lp::Sense::Equal, 0.0);
        }
    }

    const CircuitGraph& g_;
    const timing::CellLibrary& lib_;
    const BuildOptions& opt_;
    ConstraintSystem sys_;
    double margin_ = 0.0;
};

void check_splitters(const CircuitGraph& g) {
    for (const Node& n : g.nodes()) {
        if (n.is_clocked() && n.fanouts.size() > 1) {
            throw std::invalid_argument(
                fmt::format("node '{}' drives {} consumers; insert splitter trees first", n.name, n.fanouts.size()));
        }
    }
}

}  // namespace

ConstraintSystem build(const CircuitGraph& g, const timing::CellLibrary& lib, const BuildOptions& opt) {
    if (opt.mode != Mode::MinPeriod && !(opt.period > 0.0 && std::isfinite(opt.period))) {
        throw std::invalid_argument(fmt::format("clock period must be positive, got {}", opt.period));
    }
    timing::validate(opt.variation);
    check_splitters(g);
    return Builder(g, lib, opt).run();
}

double min_feasible_period(const CircuitGraph& g, const timing::CellLibrary& lib,
                           const timing::VariationSpec& variation, bool jtl_margin) {
    BuildOptions opt;
    opt.mode = Mode::MinPeriod;
    opt.variation = variation;
    opt.jtl_margin = jtl_margin;
    const ConstraintSystem sys = build(g, lib, opt);
    const lp::LpSolution sol = lp::solve_lp(sys.program);
    if (sol.status != lp::Status::Optimal) {
        throw std::runtime_error(fmt::format("minimum period program is {}", lp::to_string(sol.status)));
    }
    return sol.x[static_cast<std::size_t>(sys.period_var)];
}

double period_floor(const CircuitGraph& g, const timing::CellLibrary& lib, const timing::VariationSpec& variation) {
    // late minus early arrival accumulated through splitter chains
    std::vector<double> spread(g.size(), 0.0);
    const auto launch_spread = [&](NodeId src) {
        const Node& n = g.node(src);
        const double launch = n.is_splitter() ? lib.splitter_delay() : lib.cell(netlist::timing_cell(n)).clock_to_q;
        const timing::EdgeDelta dv = timing::edge_variation(variation, launch);
        return (n.is_splitter() ? spread[static_cast<std::size_t>(src)] : 0.0) + dv.plus + dv.minus;
    };
    double floor = 0.0;
    for (NodeId id : g.topological_order()) {
        const Node& n = g.node(id);
        if (n.fanins.empty()) continue;
        if (n.is_splitter()) {
            spread[static_cast<std::size_t>(id)] = launch_spread(n.fanins[0]);
            continue;
        }
        const timing::CellTiming& cap = lib.cell(netlist::timing_cell(n));
        const timing::EdgeDelta cv = timing::capture_variation(variation, cap.setup, cap.hold);
        for (NodeId f : n.fanins) {
            floor = std::max(floor, lib.period_floor(netlist::timing_cell(n)) + cv.plus + cv.minus + launch_spread(f));
        }
    }
    return floor;
}

std::vector<double> clocks_from(const ConstraintSystem& sys, const lp::LpSolution& sol) {
    std::vector<double> c(sys.clock_var.size(), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (sys.clock_var[i] >= 0) c[i] = sol.x[static_cast<std::size_t>(sys.clock_var[i])];
    }
    return c;
}

}  // namespace cfd::constraints
