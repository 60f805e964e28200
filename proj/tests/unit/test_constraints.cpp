#include <doctest.h>

#include <cmath>
#include <limits>

#include "cfd/constraints/constraint_system.hpp"
#include "support.hpp"

using namespace cfd;
using namespace cfd::constraints;
using netlist::CircuitGraph;
using netlist::EdgeClass;
using netlist::NodeId;
using timing::CellKind;

namespace {

const timing::CellLibrary& lib() {
    static const auto l = timing::CellLibrary::defaults();
    return l;
}

// a, b -> AND t; t, c -> XOR y
CircuitGraph and_xor() {
    CircuitGraph g;
    const NodeId a = g.add_input("a");
    const NodeId b = g.add_input("b");
    const NodeId c = g.add_input("c");
    const NodeId t = g.add_gate(CellKind::And, "t", {a, b});
    const NodeId y = g.add_gate(CellKind::Xor, "y", {t, c});
    g.add_output("y", y);
    return g;
}

// Row of `tag` that mentions the D variable of edge `e`.
const lp::Constraint* find_row(const ConstraintSystem& s, RowTag tag, std::size_t e) {
    const int d = s.edge_vars[e].d;
    for (std::size_t i = 0; i < s.row_tags.size(); ++i) {
        if (s.row_tags[i] != tag) continue;
        const auto& row = s.program.constraint(static_cast<int>(i));
        for (const auto& t : row.terms) {
            if (t.var == d) return &row;
        }
    }
    return nullptr;
}

double coef(const lp::Constraint& row, int var) {
    for (const auto& t : row.terms) {
        if (t.var == var) return t.coef;
    }
    return 0.0;
}

std::size_t edge_of(const CircuitGraph& g, const char* src, const char* dst) {
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const auto& e = g.edges()[i];
        if (g.node(e.src).name == src && g.node(e.dst).name == dst && g.node(e.dst).kind == netlist::NodeKind::Gate) {
            return i;
        }
    }
    FAIL("edge not found");
    return 0;
}

// Independent feasibility check for a graph with no DFFs to insert: with
// F = D = 0 every row is a difference constraint, so the program is feasible
// exactly when the constraint graph has no negative cycle.
bool difference_feasible(const CircuitGraph& g, double tau, double margin) {
    const auto& L = lib();
    const std::size_t n = g.size() + 1;  // last vertex is the zero reference
    const std::size_t z = g.size();
    struct Arc { std::size_t u, v; double w; };
    std::vector<Arc> arcs;
    // x_v - x_u <= w
    const auto le = [&](std::size_t v, std::size_t u, double w) { arcs.push_back({u, v, w}); };
    for (const auto& node : g.nodes()) {
        const auto i = static_cast<std::size_t>(node.id);
        if (node.is_clocked()) le(z, i, 0.0);  // C >= 0
    }
    for (NodeId pi : g.inputs()) {
        le(static_cast<std::size_t>(pi), z, 0.0);
        le(z, static_cast<std::size_t>(pi), 0.0);
    }
    for (std::size_t k = 1; k < g.outputs().size(); ++k) {
        const auto a = static_cast<std::size_t>(g.outputs()[k]);
        const auto b = static_cast<std::size_t>(g.outputs()[0]);
        le(a, b, 0.0);
        le(b, a, 0.0);
    }
    for (const auto& e : g.edges()) {
        const auto& src = g.node(e.src);
        const auto& dst = g.node(e.dst);
        const double launch = src.is_splitter() ? L.splitter_delay() : L.cell(netlist::timing_cell(src)).clock_to_q;
        const auto i = static_cast<std::size_t>(e.src);
        const auto j = static_cast<std::size_t>(e.dst);
        if (dst.is_splitter()) {
            le(j, i, launch);
            le(i, j, -launch);
        } else {
            const auto& cap = L.cell(netlist::timing_cell(dst));
            le(i, j, -(launch + cap.setup + margin));     // x_j - x_i >= ...
            le(j, i, tau + launch - cap.hold - margin);  // x_j - x_i <= ...
        }
    }
    std::vector<double> dist(n, 0.0);
    for (std::size_t round = 0; round <= n; ++round) {
        bool changed = false;
        for (const Arc& a : arcs) {
            if (dist[a.u] + a.w < dist[a.v] - 1e-9) {
                dist[a.v] = dist[a.u] + a.w;
                changed = true;
            }
        }
        if (!changed) return true;
    }
    return false;
}

double bisect_period(const CircuitGraph& g, double margin) {
    double lo = 0.0, hi = 4096.0;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (difference_feasible(g, mid, margin) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

TEST_CASE("hand-computed rows on an AND to XOR edge") {
    const auto g = netlist::insert_splitter_trees(and_xor());
    const std::size_t e = edge_of(g, "t", "y");
    REQUIRE(g.edges()[e].cls == EdgeClass::GG);

    BuildOptions opt;
    opt.period = 22.0;
    const auto s = build(g, lib(), opt);
    const auto* setup = find_row(s, RowTag::SetupGG, e);
    REQUIRE(setup != nullptr);
    CHECK(setup->sense == lp::Sense::GreaterEqual);
    CHECK(setup->rhs == doctest::Approx(14.6));
    const int cj = s.clock_var[static_cast<std::size_t>(g.edges()[e].dst)];
    const int ci = s.clock_var[static_cast<std::size_t>(g.edges()[e].src)];
    CHECK(coef(*setup, cj) == 1.0);
    CHECK(coef(*setup, ci) == -1.0);
    CHECK(coef(*setup, s.edge_vars[e].d) == -1.0);

    const auto* hold = find_row(s, RowTag::HoldGG, e);
    REQUIRE(hold != nullptr);
    CHECK(hold->sense == lp::Sense::LessEqual);
    CHECK(hold->rhs == doctest::Approx(20.2));
    CHECK(coef(*hold, cj) == 1.0);
    CHECK(coef(*hold, ci) == -1.0);

    // 13.3 F <= D <= 27.0 F
    const auto* lower = find_row(s, RowTag::DffLower, e);
    const auto* upper = find_row(s, RowTag::DffUpper, e);
    REQUIRE(lower != nullptr);
    REQUIRE(upper != nullptr);
    CHECK(coef(*lower, s.edge_vars[e].f) == doctest::Approx(13.3));
    CHECK(coef(*upper, s.edge_vars[e].f) == doctest::Approx(-27.0));
}

TEST_CASE("variation terms") {
    const auto g = netlist::insert_splitter_trees(and_xor());
    const std::size_t e = edge_of(g, "t", "y");
    BuildOptions opt;
    opt.period = 22.0;

    opt.variation = timing::VariationSpec::fractional(0.2, false);
    auto s = build(g, lib(), opt);
    CHECK(find_row(s, RowTag::SetupGG, e)->rhs == doctest::Approx(14.6 + 1.14));
    CHECK(find_row(s, RowTag::HoldGG, e)->rhs == doctest::Approx(20.2 - 1.14));

    opt.variation = timing::VariationSpec::fractional(0.2, true);
    s = build(g, lib(), opt);
    CHECK(find_row(s, RowTag::SetupGG, e)->rhs == doctest::Approx(14.6 + 1.14 + 0.2 * 6.9));
    CHECK(find_row(s, RowTag::HoldGG, e)->rhs == doctest::Approx(20.2 - 1.14 - 0.2 * 5.5));

    opt.variation = timing::VariationSpec::absolute(1.0, 0.5);
    s = build(g, lib(), opt);
    CHECK(find_row(s, RowTag::SetupGG, e)->rhs == doctest::Approx(15.6));
    CHECK(find_row(s, RowTag::HoldGG, e)->rhs == doctest::Approx(19.7));
}

TEST_CASE("splitter arrivals split under variation") {
    const auto g = test::load_split("tests/data/reconvergent_not.bench");
    const std::size_t splitters = g.count(netlist::NodeKind::Splitter);
    REQUIRE(splitters == 1);
    BuildOptions opt;
    opt.period = 30.0;
    auto s = build(g, lib(), opt);
    CHECK(s.count(RowTag::ArrivalGS) == 1);
    for (const auto& n : g.nodes()) {
        if (n.is_splitter()) CHECK(s.arrival_late[static_cast<std::size_t>(n.id)] == s.arrival_early[static_cast<std::size_t>(n.id)]);
    }
    opt.variation = timing::VariationSpec::fractional(0.1);
    s = build(g, lib(), opt);
    CHECK(s.count(RowTag::ArrivalGS) == 2);
    for (const auto& n : g.nodes()) {
        if (!n.is_splitter()) continue;
        const auto i = static_cast<std::size_t>(n.id);
        CHECK(s.arrival_late[i] != s.arrival_early[i]);
        CHECK(s.clock_var[i] == -1);
    }
    // late arrival = C + beta + 0.1 beta, early = C + beta - 0.1 beta
    const double beta = lib().dff().clock_to_q;
    std::vector<double> rhs;
    for (std::size_t i = 0; i < s.row_tags.size(); ++i) {
        if (s.row_tags[i] == RowTag::ArrivalGS) rhs.push_back(s.program.constraint(static_cast<int>(i)).rhs);
    }
    REQUIRE(rhs.size() == 2);
    CHECK(rhs[0] == doctest::Approx(1.1 * beta));
    CHECK(rhs[1] == doctest::Approx(0.9 * beta));
}

TEST_CASE("per-tag row counts follow edge classes") {
    for (const char* file : {"tests/data/and_tree5.bench", "tests/data/reconvergent_not.bench",
                             "tests/data/scheduled_not.bench", "benchmarks/c17.bench"}) {
        CAPTURE(file);
        const auto g = test::load_split(file);
        std::array<std::size_t, 4> cls{};
        for (const auto& e : g.edges()) ++cls[static_cast<std::size_t>(e.cls)];
        for (Mode mode : {Mode::InsertDffs, Mode::MinPeriod, Mode::CheckOnly}) {
            BuildOptions opt;
            opt.mode = mode;
            opt.period = 25.0;
            const auto s = build(g, lib(), opt);
            CHECK(s.count(RowTag::SetupGG) == cls[0]);
            CHECK(s.count(RowTag::HoldGG) == cls[0]);
            CHECK(s.count(RowTag::ArrivalGS) == cls[1]);
            CHECK(s.count(RowTag::SetupSG) == cls[2]);
            CHECK(s.count(RowTag::HoldSG) == cls[2]);
            CHECK(s.count(RowTag::ArrivalSS) == cls[3]);
            CHECK(s.count(RowTag::DffLower) == g.edges().size());
            CHECK(s.count(RowTag::DffUpper) == g.edges().size());
            CHECK(s.count(RowTag::InputClock) == g.inputs().size());
            CHECK(s.count(RowTag::OutputClock) == g.outputs().size() - 1);
            CHECK(s.row_tags.size() == s.program.num_constraints());
            // one C per clocked node, one A per splitter, one (F, D) per edge
            std::size_t clocks = 0, arrivals = 0;
            for (const auto& n : g.nodes()) {
                const auto i = static_cast<std::size_t>(n.id);
                clocks += s.clock_var[i] >= 0;
                arrivals += s.arrival_late[i] >= 0;
                CHECK((s.clock_var[i] >= 0) != (s.arrival_late[i] >= 0));
            }
            CHECK(clocks + arrivals == g.size());
            CHECK(s.program.num_variables() == g.size() + 2 * g.edges().size() + (mode == Mode::MinPeriod));
            if (mode != Mode::InsertDffs) {
                for (const auto& ev : s.edge_vars) CHECK(s.program.variable(ev.f).upper == 0.0);
            }
        }
    }
}

TEST_CASE("rejects bad inputs") {
    BuildOptions opt;
    opt.period = 0.0;
    const auto g = netlist::insert_splitter_trees(and_xor());
    CHECK_THROWS_AS(build(g, lib(), opt), std::invalid_argument);
    opt.period = -3.0;
    CHECK_THROWS_AS(build(g, lib(), opt), std::invalid_argument);
    opt.period = 20.0;
    CHECK_NOTHROW(build(g, lib(), opt));
    // fanout without splitters
    const auto raw = test::load_bench("tests/data/reconvergent_not.bench");
    CHECK_THROWS_AS(build(raw, lib(), opt), std::invalid_argument);
    opt.variation.delta_plus = -1.0;
    CHECK_THROWS_AS(build(g, lib(), opt), std::invalid_argument);
}

TEST_CASE("single XOR gate meets the setup plus hold floor") {
    const auto g = test::load_split("tests/data/single_xor.bench");
    CHECK(min_feasible_period(g, lib()) == doctest::Approx(16.4).epsilon(1e-9));
    CHECK(period_floor(g, lib()) == doctest::Approx(16.4));
}

TEST_CASE("minimum period never drops below the floor") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        CAPTURE(seed);
        const auto g = netlist::insert_splitter_trees(test::random_dag(seed, 8, 3));
        const double t = min_feasible_period(g, lib());
        CHECK(t >= period_floor(g, lib()) - 1e-6);
    }
}

TEST_CASE("minimum period matches a negative-cycle oracle") {
    for (std::uint64_t seed = 100; seed < 160; ++seed) {
        CAPTURE(seed);
        const auto g = netlist::insert_splitter_trees(test::random_dag(seed, 3 + static_cast<int>(seed % 9), 3));
        for (bool margin : {true, false}) {
            CAPTURE(margin);
            const double lp_tau = min_feasible_period(g, lib(), {}, margin);
            const double oracle = bisect_period(g, margin ? lib().jtl_delay() : 0.0);
            CHECK(lp_tau == doctest::Approx(oracle).epsilon(1e-6));
        }
    }
}

TEST_CASE("check_only feasibility matches the oracle around the minimum") {
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        CAPTURE(seed);
        const auto g = netlist::insert_splitter_trees(test::random_dag(seed, 7, 3));
        const double t = min_feasible_period(g, lib());
        for (double tau : {t - 0.5, t + 1e-4, t + 3.0}) {
            BuildOptions opt;
            opt.mode = Mode::CheckOnly;
            opt.period = tau;
            const auto sol = lp::solve_lp(build(g, lib(), opt).program);
            const bool feasible = sol.status == lp::Status::Optimal;
            CHECK(feasible == difference_feasible(g, tau, lib().jtl_delay()));
            CHECK(feasible == (tau >= t));
        }
    }
}

TEST_CASE("micro-circuit periods") {
    const auto fig3 = test::load_split("tests/data/reconvergent_not.bench");
    const double before = min_feasible_period(fig3, lib());
    CHECK(before == doctest::Approx(42.8));
    // one DFF on the direct a -> AND branch
    auto balanced = fig3;
    for (const auto& e : fig3.edges()) {
        if (fig3.node(e.dst).name == "y" && fig3.node(e.dst).kind == netlist::NodeKind::Gate &&
            fig3.node(e.src).is_splitter()) {
            netlist::insert_dffs(balanced, e.ref(), 1);
        }
    }
    REQUIRE(balanced.inserted_dff_count() == 1);
    const double after = min_feasible_period(balanced, lib());
    CHECK(after == doctest::Approx(20.4));
    CHECK(after < before);

    const auto fig4 = test::load_split("tests/data/scheduled_not.bench");
    CHECK(min_feasible_period(fig4, lib()) == doctest::Approx(33.35));
}

TEST_CASE("insert_dffs program trades DFFs for period") {
    const auto g = test::load_split("tests/data/reconvergent_not.bench");
    BuildOptions opt;
    opt.period = 25.0;
    const auto s = build(g, lib(), opt);
    const auto sol = lp::solve_lp(s.program);
    REQUIRE(sol.status == lp::Status::Optimal);
    CHECK(sol.objective > 0.0);
    CHECK(sol.objective <= 1.0 + 1e-9);
    CHECK(s.program.max_violation(sol.x) <= 1e-6);

    opt.period = 60.0;
    const auto relaxed = lp::solve_lp(build(g, lib(), opt).program);
    REQUIRE(relaxed.status == lp::Status::Optimal);
    CHECK(relaxed.objective == doctest::Approx(0.0));
}

TEST_CASE("fixed clocks and clock weight") {
    const auto g = test::load_split("tests/data/single_xor.bench");
    BuildOptions opt;
    opt.mode = Mode::CheckOnly;
    opt.period = 30.0;
    opt.clock_weight = 1.0;
    const auto s = build(g, lib(), opt);
    const auto sol = lp::solve_lp(s.program);
    REQUIRE(sol.status == lp::Status::Optimal);
    const auto c = clocks_from(s, sol);
    // ASAP: XOR clock at beta_D + sigma_X + w, PO right after
    NodeId x = -1;
    for (const auto& n : g.nodes()) {
        if (n.kind == netlist::NodeKind::Gate) x = n.id;
    }
    CHECK(c[static_cast<std::size_t>(x)] == doctest::Approx(7.9 + 6.9 + 2.0));

    std::vector<double> fixed(g.size(), std::numeric_limits<double>::quiet_NaN());
    fixed[static_cast<std::size_t>(x)] = 5.0;  // violates setup
    opt.fixed_clocks = &fixed;
    CHECK(lp::solve_lp(build(g, lib(), opt).program).status == lp::Status::Infeasible);
    fixed[static_cast<std::size_t>(x)] = 20.0;
    const auto s2 = build(g, lib(), opt);
    const auto sol2 = lp::solve_lp(s2.program);
    REQUIRE(sol2.status == lp::Status::Optimal);
    CHECK(clocks_from(s2, sol2)[static_cast<std::size_t>(x)] == doctest::Approx(20.0));
}

TEST_CASE("dump lists every row with its tag") {
    const auto g = test::load_split("tests/data/reconvergent_not.bench");
    BuildOptions opt;
    opt.period = 22.0;
    const auto s = build(g, lib(), opt);
    const std::string d = s.dump();
    std::size_t lines = 0;
    for (char ch : d) lines += ch == '\n';
    CHECK(lines == s.program.num_constraints() + 1);
    CHECK(d.find("setup-sg") != std::string::npos);
    CHECK(d.find("arrival-gs") != std::string::npos);
    CHECK(d.find("input-clock") != std::string::npos);
}
