#include "cfd/netlist/transform.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace cfd::netlist {

namespace {

using timing::CellKind;

// Leaf drivers of a balanced splitter tree rooted at `driver`, left to right.
void build_tree(CircuitGraph& out, NodeId driver, std::size_t n, std::vector<NodeId>& leaves) {
    if (n == 1) {
        leaves.push_back(driver);
        return;
    }
    NodeId s = out.add_splitter(driver);
    const std::size_t left = (n + 1) / 2;
    build_tree(out, s, left, leaves);
    build_tree(out, s, n - left, leaves);
}

Node copy_shell(const Node& n) {
    Node c;
    c.kind = n.kind;
    c.cell = n.cell;
    c.name = n.name;
    c.inserted = n.inserted;
    c.host = n.host;
    return c;
}

}  // namespace

CircuitGraph insert_splitter_trees(const CircuitGraph& g, std::size_t* dangling) {
    // consumers[u] = edge indices leaving u in (dst, port) order
    std::vector<std::vector<std::size_t>> consumers(g.size());
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        consumers[static_cast<std::size_t>(g.edges()[e].src)].push_back(e);
    }
    CircuitGraph out;
    std::vector<NodeId> slot(g.edges().size(), kNoNode);  // driver for each old edge
    std::size_t loose = 0;
    // PIs first and POs last, each in declaration order, so names keep their order
    std::vector<NodeId> order(g.inputs().begin(), g.inputs().end());
    for (NodeId id : g.topological_order()) {
        const NodeKind k = g.node(id).kind;
        if (k != NodeKind::PrimaryInput && k != NodeKind::PrimaryOutput) order.push_back(id);
    }
    order.insert(order.end(), g.outputs().begin(), g.outputs().end());
    for (NodeId id : order) {
        const Node& n = g.node(id);
        Node c = copy_shell(n);
        for (std::size_t p = 0; p < n.fanins.size(); ++p) {
            c.fanins.push_back(slot[g.edge_index({id, static_cast<int>(p)})]);
        }
        NodeId nid = kNoNode;
        if (n.kind == NodeKind::PrimaryInput) {
            nid = out.add_input(n.name);
        } else if (n.kind == NodeKind::PrimaryOutput) {
            nid = out.add_output(n.name, c.fanins[0]);
        } else if (n.is_splitter()) {
            nid = out.add_splitter(c.fanins[0], n.name);
        } else {
            nid = out.append_node(std::move(c));
        }
        const auto& cons = consumers[static_cast<std::size_t>(id)];
        if (cons.empty()) {
            if (n.kind != NodeKind::PrimaryOutput) ++loose;
            continue;
        }
        if (n.is_splitter()) {
            // existing splitters keep their shape
            for (std::size_t e : cons) slot[e] = nid;
            continue;
        }
        std::vector<NodeId> leaves;
        build_tree(out, nid, cons.size(), leaves);
        for (std::size_t k = 0; k < cons.size(); ++k) slot[cons[k]] = leaves[k];
    }
    if (dangling) *dangling = loose;
    return out;
}

void insert_dffs(CircuitGraph& g, const std::vector<std::pair<EdgeRef, int>>& plan) {
    bool changed = false;
    for (const auto& [ref, count] : plan) {
        if (count < 0) throw std::invalid_argument("negative DFF count");
        const Edge& e = g.edge(ref);  // validates the ref
        if (count == 0) continue;
        const NodeId src = e.src;
        const NodeId dst = e.dst;
        Connection host{src, dst, ref.port};
        if (g.node(src).inserted) {
            host = g.node(src).host;
        } else if (g.node(dst).inserted) {
            host = g.node(dst).host;
        }
        NodeId prev = src;
        for (int k = 0; k < count; ++k) {
            Node d;
            d.kind = NodeKind::Gate;
            d.cell = CellKind::Dff;
            d.inserted = true;
            d.host = host;
            d.name = fmt::format("dff${}", g.size());
            // The first DFF must not register as a fanout of src yet: the
            // src->dst entry is rewritten below instead.
            if (k == 0) {
                d.fanins = {};
                NodeId id = g.append_node(std::move(d));
                g.mutable_node(id).fanins = {src};
                auto& fo = g.mutable_node(src).fanouts;
                auto it = std::find(fo.begin(), fo.end(), dst);
                if (it == fo.end()) throw std::logic_error("fanout list out of sync");
                *it = id;
                prev = id;
            } else {
                d.fanins = {prev};
                prev = g.append_node(std::move(d));
            }
        }
        g.mutable_node(dst).fanins[static_cast<std::size_t>(ref.port)] = prev;
        g.mutable_node(prev).fanouts = {dst};
        changed = true;
    }
    if (changed) g.rebuild_edges();
}

void insert_dffs(CircuitGraph& g, EdgeRef ref, int count) { insert_dffs(g, {{ref, count}}); }

CircuitGraph insert_dff_on_edge(const CircuitGraph& g, EdgeRef ref, int count) {
    CircuitGraph out = g;
    insert_dffs(out, ref, count);
    return out;
}

std::vector<int> fpb_levels(const CircuitGraph& g) {
    std::vector<int> level(g.size(), 0);
    int po_level = 0;
    const auto order = g.topological_order();
    for (NodeId id : order) {
        const Node& n = g.node(id);
        switch (n.kind) {
            case NodeKind::PrimaryInput: level[static_cast<std::size_t>(id)] = 0; break;
            case NodeKind::Splitter: level[static_cast<std::size_t>(id)] = level[static_cast<std::size_t>(n.fanins[0])]; break;
            case NodeKind::PrimaryOutput:
                po_level = std::max(po_level, level[static_cast<std::size_t>(n.fanins[0])] + 1);
                break;
            case NodeKind::Gate: {
                int m = 0;
                for (NodeId f : n.fanins) m = std::max(m, level[static_cast<std::size_t>(f)]);
                level[static_cast<std::size_t>(id)] = m + 1;
                break;
            }
        }
    }
    for (NodeId id : g.outputs()) level[static_cast<std::size_t>(id)] = po_level;
    return level;
}

CircuitGraph full_path_balance(const CircuitGraph& g) {
    const auto level = fpb_levels(g);
    const auto order = g.topological_order();
    // need of an edge: DFFs required between its clocked root and its clocked
    // consumer. For splitters, the minimum need over the subtree.
    constexpr int kUnset = -1;
    std::vector<int> subtree_need(g.size(), kUnset);
    const auto edge_need = [&](const Edge& e) {
        if (g.node(e.dst).is_splitter()) return subtree_need[static_cast<std::size_t>(e.dst)];
        const int root_level = level[static_cast<std::size_t>(e.src)];  // splitters carry the root level
        return level[static_cast<std::size_t>(e.dst)] - root_level - 1;
    };
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const Node& n = g.node(*it);
        if (!n.is_splitter()) continue;
        int m = std::numeric_limits<int>::max();
        for (NodeId f : n.fanouts) {
            const Node& c = g.node(f);
            for (std::size_t p = 0; p < c.fanins.size(); ++p) {
                if (c.fanins[p] == n.id) m = std::min(m, edge_need(g.edge({f, static_cast<int>(p)})));
            }
        }
        subtree_need[static_cast<std::size_t>(n.id)] = m;
    }
    std::vector<std::pair<EdgeRef, int>> plan;
    for (const Edge& e : g.edges()) {
        const int base = g.node(e.src).is_splitter() ? subtree_need[static_cast<std::size_t>(e.src)] : 0;
        const int count = edge_need(e) - base;
        if (count < 0) throw std::logic_error("negative level difference in path balancing");
        if (count > 0) plan.emplace_back(e.ref(), count);
    }
    CircuitGraph out = g;
    insert_dffs(out, plan);
    return out;
}

std::map<std::tuple<NodeId, NodeId, int>, int> dffs_per_connection(const CircuitGraph& g) {
    std::map<std::tuple<NodeId, NodeId, int>, int> out;
    for (const Node& n : g.nodes()) {
        if (n.inserted) ++out[{n.host.src, n.host.dst, n.host.port}];
    }
    return out;
}

NodeId logical_source(const CircuitGraph& g, EdgeRef ref) {
    NodeId id = g.edge(ref).src;
    while (g.node(id).is_splitter() || g.node(id).inserted) id = g.node(id).fanins[0];
    return id;
}

}  // namespace cfd::netlist
