#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cfd/netlist/graph.hpp"

namespace cfd::netlist {

/// Netlist or graph-dump syntax/semantic error with a 1-based source position.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, const std::string& what);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Parses an ISCAS `.bench` netlist.
///
/// Accepted statements: INPUT(x), OUTPUT(y), and `y = OP(a[, b])` with
/// OP in AND/OR/XOR/NAND/NOR/XNOR (two inputs), NOT/BUFF/DFF (one input).
/// NAND/NOR/XNOR become the base gate followed by a NOT that keeps the
/// original net name; BUFF is an alias. Statements may span or share lines.
/// The result has no splitters: a net with several consumers has several
/// fanout edges.
CircuitGraph parse_bench(std::string_view text);
CircuitGraph read_bench(const std::filesystem::path& path);

/// Writes `.bench` text for a graph. Splitters are folded back into plain
/// fanout; outputs whose net name differs from their driver get a BUFF line.
std::string emit_bench(const CircuitGraph& g);

/// Structured text dump preserving splitters, node ids and DFF provenance:
///
///     # cfdsynth graph v1
///     node <id> <KIND> <name> in <fanin ids...> [host <src> <dst> <port>]
///
/// KIND is one of PI PO AND OR XOR NOT DFF SPL.
std::string dump_graph(const CircuitGraph& g);
CircuitGraph parse_graph_dump(std::string_view text);

}  // namespace cfd::netlist
