#include "cfd/sta_sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace cfd::sta {

using netlist::CircuitGraph;
using netlist::Node;
using netlist::NodeId;
using netlist::NodeKind;
using timing::CellKind;

namespace {

bool gate_value(CellKind cell, std::span<const char> in) {
    switch (cell) {
        case CellKind::And: return in[0] && in[1];
        case CellKind::Or: return in[0] || in[1];
        case CellKind::Xor: return in[0] != in[1];
        case CellKind::Not: return !in[0];
        case CellKind::Dff: return in[0];
        default: break;
    }
    throw std::logic_error("not a logic cell");
}

struct Event {
    double time;
    std::uint8_t type;  // 0 data, 1 clock: data first at equal times
    NodeId node;
    std::uint64_t seq;
    int port;
    std::int64_t wave;
    std::size_t edge;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.type != b.type) return a.type > b.type;
        if (a.node != b.node) return a.node > b.node;
        return a.seq > b.seq;
    }
};

std::size_t clocked_depth(const CircuitGraph& g) {
    std::vector<std::size_t> level(g.size(), 0);
    std::size_t depth = 0;
    for (NodeId id : g.topological_order()) {
        const Node& n = g.node(id);
        std::size_t l = 0;
        for (NodeId f : n.fanins) l = std::max(l, level[static_cast<std::size_t>(f)]);
        level[static_cast<std::size_t>(id)] = l + (n.is_clocked() ? 1 : 0);
        depth = std::max(depth, level[static_cast<std::size_t>(id)]);
    }
    return depth;
}

}  // namespace

std::vector<bool> reference_eval(const CircuitGraph& g, const std::vector<bool>& inputs) {
    if (inputs.size() != g.inputs().size()) {
        throw std::invalid_argument(fmt::format("expected {} input values, got {}", g.inputs().size(), inputs.size()));
    }
    std::vector<char> v(g.size(), 0);
    for (std::size_t k = 0; k < inputs.size(); ++k) v[static_cast<std::size_t>(g.inputs()[k])] = inputs[k];
    char in[2];
    for (NodeId id : g.topological_order()) {
        const Node& n = g.node(id);
        if (n.kind == NodeKind::PrimaryInput) continue;
        if (n.kind != NodeKind::Gate) {
            v[static_cast<std::size_t>(id)] = v[static_cast<std::size_t>(n.fanins[0])];
            continue;
        }
        for (std::size_t p = 0; p < n.fanins.size(); ++p) in[p] = v[static_cast<std::size_t>(n.fanins[p])];
        v[static_cast<std::size_t>(id)] = gate_value(n.cell, {in, n.fanins.size()});
    }
    std::vector<bool> out;
    out.reserve(g.outputs().size());
    for (NodeId o : g.outputs()) out.push_back(v[static_cast<std::size_t>(o)] != 0);
    return out;
}

WaveSimResult simulate(const CircuitGraph& g, std::span<const double> clocks, const InstanceDelays& d, double period,
                       const SimOptions& opt) {
    if (clocks.size() < g.size()) {
        throw std::invalid_argument(fmt::format("schedule covers {} of {} nodes", clocks.size(), g.size()));
    }
    if (!opt.vectors.empty() && opt.vectors.size() != opt.waves) {
        throw std::invalid_argument("explicit vectors must match the wave count");
    }
    const std::size_t n = g.size();
    const auto waves = static_cast<std::int64_t>(opt.waves);
    const auto horizon = waves + static_cast<std::int64_t>(clocked_depth(g));

    std::vector<std::vector<bool>> vectors = opt.vectors;
    if (vectors.empty()) {
        std::mt19937_64 rng(opt.seed);
        vectors.resize(opt.waves);
        for (auto& vec : vectors) {
            vec.resize(g.inputs().size());
            for (std::size_t k = 0; k < vec.size(); ++k) vec[k] = (rng() >> 63) != 0;
        }
    }

    std::vector<std::vector<std::size_t>> out_edges(n);
    const auto edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) out_edges[static_cast<std::size_t>(edges[e].src)].push_back(e);
    std::vector<int> input_index(n, -1), output_index(n, -1);
    for (std::size_t k = 0; k < g.inputs().size(); ++k) input_index[static_cast<std::size_t>(g.inputs()[k])] = static_cast<int>(k);
    for (std::size_t k = 0; k < g.outputs().size(); ++k) output_index[static_cast<std::size_t>(g.outputs()[k])] = static_cast<int>(k);

    // Input pin buffers of clocked nodes.
    std::vector<std::size_t> pin_base(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) pin_base[i + 1] = pin_base[i] + g.node(static_cast<NodeId>(i)).fanins.size();
    std::vector<char> present(pin_base[n], 0);
    std::vector<std::int64_t> tag(pin_base[n], 0);

    WaveSimResult r;
    r.waves = opt.waves;
    r.latency.assign(g.outputs().size(), 0);
    std::vector<std::vector<char>> captured(opt.waves, std::vector<char>(g.outputs().size(), 0));

    std::priority_queue<Event, std::vector<Event>, Later> q;
    std::uint64_t seq = 0;
    const auto clock_time = [&](NodeId id, std::int64_t k) {
        return clocks[static_cast<std::size_t>(id)] * opt.clock_scale + static_cast<double>(k) * period;
    };
    const auto send = [&](NodeId from, double t, std::int64_t wave) {
        if (opt.record_waveform) r.waveform.push_back({from, t, wave});
        for (std::size_t e : out_edges[static_cast<std::size_t>(from)]) {
            q.push({t, 0, edges[e].dst, seq++, edges[e].port, wave, e});
        }
    };
    for (const Node& node : g.nodes()) {
        if (node.is_clocked() && horizon > 0) q.push({clock_time(node.id, 0), 1, node.id, seq++, 0, 0, 0});
    }

    char in[2];
    while (!q.empty()) {
        const Event ev = q.top();
        q.pop();
        ++r.events;
        const auto i = static_cast<std::size_t>(ev.node);
        const Node& node = g.node(ev.node);
        if (ev.type == 0) {
            if (node.is_splitter()) {
                send(ev.node, ev.time + d.launch[i], ev.wave);
                continue;
            }
            const double latest = clock_time(ev.node, ev.wave) - d.setup[i];
            if (ev.time > latest + opt.tolerance) {
                r.failures.push_back({ev.edge, CheckKind::Setup, ev.node, ev.wave, ev.time, latest});
            }
            if (ev.wave >= 1) {
                const double earliest = clock_time(ev.node, ev.wave - 1) + d.hold[i];
                if (ev.time < earliest - opt.tolerance) {
                    r.failures.push_back({ev.edge, CheckKind::Hold, ev.node, ev.wave, ev.time, earliest});
                }
            }
            const std::size_t pin = pin_base[i] + static_cast<std::size_t>(ev.port);
            if (present[pin]) ++r.collisions;
            present[pin] = 1;
            tag[pin] = ev.wave;
            continue;
        }

        // clock edge of wave ev.wave
        const std::int64_t k = ev.wave;
        bool out = false;
        switch (node.kind) {
            case NodeKind::PrimaryInput:
                out = k < waves && vectors[static_cast<std::size_t>(k)][static_cast<std::size_t>(input_index[i])];
                break;
            case NodeKind::PrimaryOutput: {
                const std::size_t pin = pin_base[i];
                if (present[pin]) {
                    auto& lat = r.latency[static_cast<std::size_t>(output_index[i])];
                    lat = std::max(lat, k - tag[pin]);
                }
                if (k < waves) captured[static_cast<std::size_t>(k)][static_cast<std::size_t>(output_index[i])] = present[pin];
                break;
            }
            case NodeKind::Gate:
                for (std::size_t p = 0; p < node.fanins.size(); ++p) in[p] = present[pin_base[i] + p];
                out = gate_value(node.cell, {in, node.fanins.size()});
                break;
            case NodeKind::Splitter: break;
        }
        std::fill(present.begin() + static_cast<std::ptrdiff_t>(pin_base[i]),
                  present.begin() + static_cast<std::ptrdiff_t>(pin_base[i + 1]), 0);
        if (out) send(ev.node, ev.time + d.launch[i], k);
        if (k + 1 < horizon) q.push({clock_time(ev.node, k + 1), 1, ev.node, seq++, 0, k + 1, 0});
    }

    for (std::size_t k = 0; k < opt.waves; ++k) {
        const std::vector<bool> ref = reference_eval(g, vectors[k]);
        for (std::size_t o = 0; o < ref.size(); ++o) r.mismatches += (captured[k][o] != 0) != ref[o];
    }
    return r;
}

void write_waveform(std::ostream& os, const CircuitGraph& g, const WaveSimResult& r) {
    os << "# node time wave\n";
    for (const PulseRecord& p : r.waveform) os << fmt::format("{} {:.4f} {}\n", g.node(p.node).name, p.time, p.wave);
}

}  // namespace cfd::sta
