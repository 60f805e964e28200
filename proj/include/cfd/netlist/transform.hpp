#pragma once

#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "cfd/netlist/graph.hpp"

namespace cfd::netlist {

/// Replaces every multi-consumer fanout by a balanced binary splitter tree
/// (n consumers -> n-1 splitters). Consumers are assigned to tree leaves in
/// (dst, port) order; the first ceil(n/2) go to the left subtree. Nets with no
/// consumer are left dangling and counted in `dangling` if given.
CircuitGraph insert_splitter_trees(const CircuitGraph& g, std::size_t* dangling = nullptr);

/// Replaces the edge into pin `ref` by a chain of `count` DFFs (no-op for 0).
/// New DFFs are appended and tagged with the base connection they sit on:
/// the host of an adjacent inserted DFF if there is one, otherwise the edge
/// itself. Throws std::out_of_range for a missing edge.
void insert_dffs(CircuitGraph& g, EdgeRef ref, int count);

/// Batch form: one edge-list rebuild for all insertions. Refs address the
/// graph as it is before the call.
void insert_dffs(CircuitGraph& g, const std::vector<std::pair<EdgeRef, int>>& plan);

/// Value-returning form of insert_dffs.
CircuitGraph insert_dff_on_edge(const CircuitGraph& g, EdgeRef ref, int count);

/// Levels for full path balancing: PIs 0, a clocked node 1 + the maximum level
/// over its clocked fanins (looking through splitters), splitters inherit the
/// level of their clocked root, and every PO sits at one shared level above
/// the deepest PO driver.
std::vector<int> fpb_levels(const CircuitGraph& g);

/// Full path balancing: DFF chains so that every path from a PI to any clocked
/// node crosses the same number of clocked elements. Inside a splitter tree the
/// DFFs are shared as close to the root as the branches allow.
CircuitGraph full_path_balance(const CircuitGraph& g);

/// Number of inserted DFFs on each base connection.
std::map<std::tuple<NodeId, NodeId, int>, int> dffs_per_connection(const CircuitGraph& g);

/// Follows inserted DFFs and splitters backwards from pin `ref` to the first
/// node that is neither.
NodeId logical_source(const CircuitGraph& g, EdgeRef ref);

}  // namespace cfd::netlist
