#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "cfd/scheduler/scheduler.hpp"

namespace cfd::scheduler {

using netlist::CircuitGraph;
using netlist::Node;
using netlist::NodeId;
using netlist::NodeKind;

void write_schedule(std::ostream& os, const CircuitGraph& g, const ClockSchedule& s) {
    os << "# cfdsynth schedule v1\n";
    os << fmt::format("target {}\nperiod {}\ninserted_dffs {}\njtl_count {}\n", s.target, s.period, s.inserted_dffs,
                      s.jtl_count);
    os << fmt::format("cell_area {}\njtl_area {}\narea {}\nverified {}\n", s.cell_area, s.jtl_area, s.area,
                      s.verified ? 1 : 0);
    for (const Node& n : g.nodes()) {
        if (!n.is_clocked()) continue;
        const auto i = static_cast<std::size_t>(n.id);
        os << fmt::format("node {} {} {} {}\n", netlist::kind_token(n), n.name, s.clock[i], s.jtl[i]);
    }
    // one line per base connection, with the DFFs inserted on it
    for (const auto& e : g.edges()) {
        if (g.node(e.dst).inserted) continue;
        NodeId src = e.src;
        int f = 0;
        while (g.node(src).inserted) {
            ++f;
            src = g.node(src).fanins[0];
        }
        os << fmt::format("edge {} {} {} {} {} {}\n", netlist::kind_token(g.node(src)), g.node(src).name,
                          netlist::kind_token(g.node(e.dst)), g.node(e.dst).name, e.port, f);
    }
}

namespace {

double to_double(const std::string& tok, int line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw std::runtime_error(fmt::format("schedule line {}: bad number '{}'", line, tok));
    }
    return v;
}

}  // namespace

ClockSchedule read_schedule(std::string_view text, const CircuitGraph& g) {
    std::unordered_map<std::string, NodeId> cells;
    for (const Node& n : g.nodes()) {
        if (n.kind == NodeKind::Gate) cells.emplace(n.name, n.id);
    }
    ClockSchedule s;
    s.clock.assign(g.size(), std::nan(""));
    s.jtl.assign(g.size(), 0);
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::istringstream ls(raw);
        std::string key;
        if (!(ls >> key) || key[0] == '#') continue;
        if (key == "node") {
            std::string kind, name, c, n;
            if (!(ls >> kind >> name >> c >> n)) throw std::runtime_error(fmt::format("schedule line {}: truncated node", line));
            std::optional<NodeId> id;
            if (kind == "PI") {
                id = g.find_input(name);
            } else if (kind == "PO") {
                id = g.find_output(name);
            } else if (auto it = cells.find(name); it != cells.end() && netlist::kind_token(g.node(it->second)) == kind) {
                id = it->second;
            }
            if (!id) throw std::runtime_error(fmt::format("schedule line {}: no {} node '{}' in the graph", line, kind, name));
            const auto i = static_cast<std::size_t>(*id);
            s.clock[i] = to_double(c, line);
            s.jtl[i] = static_cast<std::int64_t>(to_double(n, line));
            s.jtl_count += s.jtl[i];
        } else if (key == "edge") {
            continue;
        } else {
            std::string v;
            if (!(ls >> v)) throw std::runtime_error(fmt::format("schedule line {}: missing value for '{}'", line, key));
            const double x = to_double(v, line);
            if (key == "target") s.target = x;
            else if (key == "period") s.period = x;
            else if (key == "inserted_dffs") s.inserted_dffs = static_cast<std::size_t>(x);
            else if (key == "cell_area") s.cell_area = x;
            else if (key == "jtl_area") s.jtl_area = x;
            else if (key == "area") s.area = x;
            else if (key == "verified") s.verified = x != 0.0;
            else if (key != "jtl_count") throw std::runtime_error(fmt::format("schedule line {}: unknown key '{}'", line, key));
        }
    }
    for (const Node& n : g.nodes()) {
        if (n.is_clocked() && std::isnan(s.clock[static_cast<std::size_t>(n.id)])) {
            throw std::runtime_error(fmt::format("schedule has no clock for {} '{}'", netlist::kind_token(n), n.name));
        }
        if (!n.is_clocked()) s.clock[static_cast<std::size_t>(n.id)] = 0.0;
    }
    return s;
}

}  // namespace cfd::scheduler
