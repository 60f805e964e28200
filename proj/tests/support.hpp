#pragma once

#include <random>
#include <string>

#include "cfd/netlist/bench.hpp"
#include "cfd/netlist/transform.hpp"

namespace cfd::test {

inline std::string source_path(const std::string& rel) { return std::string(CFD_SOURCE_DIR) + "/" + rel; }

inline netlist::CircuitGraph load_bench(const std::string& rel) {
    return netlist::read_bench(source_path(rel));
}

inline netlist::CircuitGraph load_split(const std::string& rel) {
    return netlist::insert_splitter_trees(load_bench(rel));
}

/// Random combinational DAG: `gates` two-input/NOT gates over `inputs` PIs.
/// Gate fanins are drawn from earlier signals with a bias towards recent ones
/// so the graph gets depth; every sink signal becomes a PO.
inline netlist::CircuitGraph random_dag(std::uint64_t seed, int gates, int inputs) {
    using timing::CellKind;
    std::mt19937_64 rng(seed);
    netlist::CircuitGraph g;
    std::vector<netlist::NodeId> signals;
    for (int i = 0; i < inputs; ++i) signals.push_back(g.add_input("i" + std::to_string(i)));
    const CellKind kinds[] = {CellKind::And, CellKind::Or, CellKind::Xor, CellKind::Not};
    for (int k = 0; k < gates; ++k) {
        const CellKind cell = kinds[rng() % 4];
        const auto pick = [&]() {
            const std::size_t n = signals.size();
            const std::size_t window = std::min<std::size_t>(n, 8);
            const bool recent = rng() % 3 != 0;
            return recent ? signals[n - 1 - rng() % window] : signals[rng() % n];
        };
        std::vector<netlist::NodeId> fanins{pick()};
        if (cell != CellKind::Not) {
            netlist::NodeId b = pick();
            for (int tries = 0; b == fanins[0] && tries < 8; ++tries) b = pick();
            if (b == fanins[0]) b = signals[(rng() % signals.size())];
            fanins.push_back(b);
        }
        signals.push_back(g.add_gate(cell, "g" + std::to_string(k), fanins));
    }
    int out = 0;
    for (netlist::NodeId id : signals) {
        if (g.node(id).kind == netlist::NodeKind::Gate && g.node(id).fanouts.empty()) {
            g.add_output("o" + std::to_string(out++), id);
        }
    }
    return g;
}

}  // namespace cfd::test
