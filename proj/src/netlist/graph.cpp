#include "cfd/netlist/graph.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace cfd::netlist {

std::string_view to_string(EdgeClass c) {
    switch (c) {
        case EdgeClass::GG: return "GG";
        case EdgeClass::GS: return "GS";
        case EdgeClass::SG: return "SG";
        case EdgeClass::SS: return "SS";
    }
    return "?";
}

int cell_arity(timing::CellKind c) {
    using timing::CellKind;
    switch (c) {
        case CellKind::And:
        case CellKind::Or:
        case CellKind::Xor: return 2;
        case CellKind::Not:
        case CellKind::Dff: return 1;
        default: return 0;
    }
}

timing::CellKind timing_cell(const Node& n) {
    switch (n.kind) {
        case NodeKind::PrimaryInput:
        case NodeKind::PrimaryOutput: return timing::CellKind::Dff;
        case NodeKind::Splitter: return timing::CellKind::Splitter;
        case NodeKind::Gate: break;
    }
    return n.cell;
}

NodeId CircuitGraph::append_node(Node n) {
    n.id = static_cast<NodeId>(nodes_.size());
    for (NodeId f : n.fanins) {
        if (f < 0 || static_cast<std::size_t>(f) >= nodes_.size()) {
            throw std::out_of_range(fmt::format("fanin {} of '{}' does not exist", f, n.name));
        }
        nodes_[static_cast<std::size_t>(f)].fanouts.push_back(n.id);
    }
    nodes_.push_back(std::move(n));
    append_edges(nodes_.back());
    return nodes_.back().id;
}

NodeId CircuitGraph::add_input(std::string name) {
    if (input_names_.count(name)) throw std::invalid_argument("duplicate input " + name);
    Node n;
    n.kind = NodeKind::PrimaryInput;
    n.name = name;
    NodeId id = append_node(std::move(n));
    inputs_.push_back(id);
    input_names_.emplace(std::move(name), id);
    return id;
}

NodeId CircuitGraph::add_gate(timing::CellKind cell, std::string name, std::vector<NodeId> fanins) {
    if (!timing::is_clocked(cell)) throw std::invalid_argument("gate cell must be clocked");
    if (static_cast<int>(fanins.size()) != cell_arity(cell)) {
        throw std::invalid_argument(fmt::format("{} '{}' needs {} inputs, got {}", timing::cell_name(cell),
                                                name, cell_arity(cell), fanins.size()));
    }
    Node n;
    n.kind = NodeKind::Gate;
    n.cell = cell;
    n.name = std::move(name);
    n.fanins = std::move(fanins);
    NodeId id = append_node(std::move(n));
    return id;
}

NodeId CircuitGraph::add_splitter(NodeId fanin, std::string name) {
    Node n;
    n.kind = NodeKind::Splitter;
    n.cell = timing::CellKind::Splitter;
    n.fanins = {fanin};
    n.name = std::move(name);
    NodeId id = append_node(std::move(n));
    if (nodes_[static_cast<std::size_t>(id)].name.empty()) {
        nodes_[static_cast<std::size_t>(id)].name = fmt::format("spl${}", id);
    }
    return id;
}

NodeId CircuitGraph::add_output(std::string name, NodeId driver) {
    if (output_names_.count(name)) throw std::invalid_argument("duplicate output " + name);
    Node n;
    n.kind = NodeKind::PrimaryOutput;
    n.name = name;
    n.fanins = {driver};
    NodeId id = append_node(std::move(n));
    outputs_.push_back(id);
    output_names_.emplace(std::move(name), id);
    return id;
}

std::optional<NodeId> CircuitGraph::find_input(std::string_view name) const {
    auto it = input_names_.find(std::string(name));
    if (it == input_names_.end()) return std::nullopt;
    return it->second;
}

std::optional<NodeId> CircuitGraph::find_output(std::string_view name) const {
    auto it = output_names_.find(std::string(name));
    if (it == output_names_.end()) return std::nullopt;
    return it->second;
}

void CircuitGraph::append_edges(const Node& n) {
    first_edge_.push_back(edges_.size());
    for (std::size_t p = 0; p < n.fanins.size(); ++p) {
        const Node& src = nodes_[static_cast<std::size_t>(n.fanins[p])];
        Edge e;
        e.src = src.id;
        e.dst = n.id;
        e.port = static_cast<int>(p);
        const bool s_src = src.is_splitter();
        const bool s_dst = n.is_splitter();
        e.cls = s_src ? (s_dst ? EdgeClass::SS : EdgeClass::SG) : (s_dst ? EdgeClass::GS : EdgeClass::GG);
        const bool from_pi = src.kind == NodeKind::PrimaryInput;
        const bool to_po = n.kind == NodeKind::PrimaryOutput;
        e.boundary = from_pi ? (to_po ? Boundary::InputToOutput : Boundary::FromInput)
                             : (to_po ? Boundary::ToOutput : Boundary::Internal);
        edges_.push_back(e);
    }
}

NodeId CircuitGraph::append_unlinked(Node n) {
    n.id = static_cast<NodeId>(nodes_.size());
    n.fanouts.clear();
    if (n.kind == NodeKind::PrimaryInput) {
        if (!input_names_.emplace(n.name, n.id).second) throw std::invalid_argument("duplicate input " + n.name);
        inputs_.push_back(n.id);
    } else if (n.kind == NodeKind::PrimaryOutput) {
        if (!output_names_.emplace(n.name, n.id).second) throw std::invalid_argument("duplicate output " + n.name);
        outputs_.push_back(n.id);
    }
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
}

void CircuitGraph::relink() {
    for (Node& n : nodes_) n.fanouts.clear();
    for (const Node& n : nodes_) {
        for (NodeId f : n.fanins) {
            if (f < 0 || static_cast<std::size_t>(f) >= nodes_.size()) {
                throw std::out_of_range(fmt::format("fanin {} of '{}' does not exist", f, n.name));
            }
            nodes_[static_cast<std::size_t>(f)].fanouts.push_back(n.id);
        }
    }
    rebuild_edges();
}

void CircuitGraph::rebuild_edges() {
    edges_.clear();
    first_edge_.clear();
    for (const Node& n : nodes_) append_edges(n);
}

std::size_t CircuitGraph::edge_index(EdgeRef ref) const {
    const Node& n = node(ref.dst);
    if (ref.port < 0 || static_cast<std::size_t>(ref.port) >= n.fanins.size()) {
        throw std::out_of_range(fmt::format("node {} has no input port {}", ref.dst, ref.port));
    }
    return first_edge_[static_cast<std::size_t>(ref.dst)] + static_cast<std::size_t>(ref.port);
}

std::vector<NodeId> CircuitGraph::topological_order() const {
    std::vector<int> pending(nodes_.size());
    std::vector<NodeId> ready;
    for (const Node& n : nodes_) {
        pending[static_cast<std::size_t>(n.id)] = static_cast<int>(n.fanins.size());
        if (n.fanins.empty()) ready.push_back(n.id);
    }
    std::vector<NodeId> order;
    order.reserve(nodes_.size());
    // process lowest id first for a deterministic order
    std::reverse(ready.begin(), ready.end());
    while (!ready.empty()) {
        NodeId id = ready.back();
        ready.pop_back();
        order.push_back(id);
        for (NodeId f : nodes_[static_cast<std::size_t>(id)].fanouts) {
            if (--pending[static_cast<std::size_t>(f)] == 0) ready.push_back(f);
        }
    }
    if (order.size() != nodes_.size()) throw std::logic_error("circuit graph contains a cycle");
    return order;
}

std::size_t CircuitGraph::count(NodeKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.kind == kind; }));
}

std::size_t CircuitGraph::count_gates(timing::CellKind cell) const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.is_gate(cell); }));
}

std::size_t CircuitGraph::inserted_dff_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.inserted; }));
}

void CircuitGraph::validate(bool with_splitters) const {
    for (const Node& n : nodes_) {
        const auto fail = [&](std::string_view what) {
            throw std::logic_error(fmt::format("node {} '{}': {}", n.id, n.name, what));
        };
        switch (n.kind) {
            case NodeKind::PrimaryInput:
                if (!n.fanins.empty()) fail("primary input with fanin");
                break;
            case NodeKind::PrimaryOutput:
                if (n.fanins.size() != 1) fail("primary output needs exactly one fanin");
                if (!n.fanouts.empty()) fail("primary output with fanout");
                break;
            case NodeKind::Gate:
                if (static_cast<int>(n.fanins.size()) != cell_arity(n.cell)) fail("arity mismatch");
                break;
            case NodeKind::Splitter:
                if (n.fanins.size() != 1 || n.fanouts.size() != 2) fail("splitter must be 1-in 2-out");
                break;
        }
        if (with_splitters && n.is_clocked() && n.fanouts.size() > 1) fail("clocked node drives more than one edge");
        for (NodeId f : n.fanins) {
            const Node& src = node(f);
            if (std::count(src.fanouts.begin(), src.fanouts.end(), n.id) !=
                std::count(n.fanins.begin(), n.fanins.end(), f)) {
                fail("fanin/fanout lists disagree");
            }
        }
    }
    (void)topological_order();
}

std::string_view kind_token(const Node& n) {
    switch (n.kind) {
        case NodeKind::PrimaryInput: return "PI";
        case NodeKind::PrimaryOutput: return "PO";
        case NodeKind::Splitter: return "SPL";
        case NodeKind::Gate: break;
    }
    switch (n.cell) {
        case timing::CellKind::And: return "AND";
        case timing::CellKind::Or: return "OR";
        case timing::CellKind::Xor: return "XOR";
        case timing::CellKind::Not: return "NOT";
        case timing::CellKind::Dff: return "DFF";
        default: return "?";
    }
}

}  // namespace cfd::netlist
