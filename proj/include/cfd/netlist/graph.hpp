#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cfd/timing/cell_library.hpp"

namespace cfd::netlist {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

enum class NodeKind : std::uint8_t { PrimaryInput, PrimaryOutput, Gate, Splitter };

/// Partition of an edge by endpoint kind: G = clocked (gate, DFF, PI, PO),
/// S = splitter.
enum class EdgeClass : std::uint8_t { GG, GS, SG, SS };

/// Whether an edge touches the circuit boundary.
enum class Boundary : std::uint8_t { Internal, FromInput, ToOutput, InputToOutput };

std::string_view to_string(EdgeClass c);

/// A base connection (src, dst, port) of the graph as it was before any
/// synthesis DFF was inserted.
struct Connection {
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    int port = 0;
    friend bool operator==(const Connection&, const Connection&) = default;
};

struct Node {
    NodeId id = kNoNode;
    NodeKind kind = NodeKind::Gate;
    timing::CellKind cell = timing::CellKind::And;  // gates only
    std::string name;
    std::vector<NodeId> fanins;   // ordered by input port
    std::vector<NodeId> fanouts;  // one entry per outgoing edge
    bool inserted = false;        // DFF added by synthesis
    Connection host;              // for inserted DFFs: the base connection they sit on

    bool is_clocked() const { return kind != NodeKind::Splitter; }
    bool is_splitter() const { return kind == NodeKind::Splitter; }
    bool is_gate(timing::CellKind c) const { return kind == NodeKind::Gate && cell == c; }
};

/// Input pin `port` of node `dst`. Stable across DFF insertions on other edges.
struct EdgeRef {
    NodeId dst = kNoNode;
    int port = 0;
    friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
};

struct Edge {
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    int port = 0;
    EdgeClass cls = EdgeClass::GG;
    Boundary boundary = Boundary::Internal;

    EdgeRef ref() const { return {dst, port}; }
};

/// Fanin count a gate cell requires.
int cell_arity(timing::CellKind c);

/// Short kind name: PI PO AND OR XOR NOT DFF SPL.
std::string_view kind_token(const Node& n);

/// Library cell that times a node: PIs launch and POs capture like DFFs.
timing::CellKind timing_cell(const Node& n);

/// Directed acyclic graph of clocked elements, splitters and circuit
/// boundary nodes. PIs are clocked launch cells; POs are clocked capture
/// cells. Edges are derived from node fanins and listed in (dst, port) order.
class CircuitGraph {
public:
    NodeId add_input(std::string name);
    NodeId add_gate(timing::CellKind cell, std::string name, std::vector<NodeId> fanins);
    NodeId add_splitter(NodeId fanin, std::string name = {});
    NodeId add_output(std::string name, NodeId driver);

    std::size_t size() const { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    std::span<const Node> nodes() const { return nodes_; }
    std::span<const NodeId> inputs() const { return inputs_; }
    std::span<const NodeId> outputs() const { return outputs_; }
    std::span<const Edge> edges() const { return edges_; }

    std::optional<NodeId> find_input(std::string_view name) const;
    std::optional<NodeId> find_output(std::string_view name) const;

    /// Edge index of pin (dst, port); throws std::out_of_range if absent.
    std::size_t edge_index(EdgeRef ref) const;
    const Edge& edge(EdgeRef ref) const { return edges_[edge_index(ref)]; }

    /// Nodes in an order where every fanin precedes its consumers.
    std::vector<NodeId> topological_order() const;

    std::size_t count(NodeKind kind) const;
    std::size_t count_gates(timing::CellKind cell) const;
    std::size_t inserted_dff_count() const;

    /// Checks the structural invariants (arity, splitter shape, acyclicity,
    /// fanin/fanout symmetry). Throws std::logic_error on the first violation.
    /// `with_splitters` additionally requires single fanout on clocked nodes.
    void validate(bool with_splitters) const;

    // Low-level mutation used by the transforms. Appending keeps the edge list
    // current; after editing fanins of existing nodes call rebuild_edges().
    Node& mutable_node(NodeId id) { return nodes_.at(static_cast<std::size_t>(id)); }
    NodeId append_node(Node n);
    void rebuild_edges();

    // Bulk loading with forward references: append nodes whose fanins may not
    // exist yet, then relink() derives fanouts and edges from the fanins.
    NodeId append_unlinked(Node n);
    void relink();

private:
    void append_edges(const Node& n);

    std::vector<Node> nodes_;
    std::vector<NodeId> inputs_;
    std::vector<NodeId> outputs_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> first_edge_;  // per node: index of its port-0 edge
    std::unordered_map<std::string, NodeId> input_names_;
    std::unordered_map<std::string, NodeId> output_names_;
};

}  // namespace cfd::netlist
