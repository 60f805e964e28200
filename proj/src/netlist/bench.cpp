#include "cfd/netlist/bench.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

namespace cfd::netlist {

ParseError::ParseError(int line, int column, const std::string& what)
    : std::runtime_error(fmt::format("{}:{}: {}", line, column, what)), line_(line), column_(column) {}

namespace {

using timing::CellKind;

enum class Tok { Ident, LParen, RParen, Comma, Equals, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int column = 1;
};

bool is_ident_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != ',' &&
           c != '=' && c != '#';
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_blank();
        Token t;
        t.line = line_;
        t.column = column_;
        if (pos_ >= text_.size()) return t;
        const char c = text_[pos_];
        switch (c) {
            case '(': t.kind = Tok::LParen; advance(); return t;
            case ')': t.kind = Tok::RParen; advance(); return t;
            case ',': t.kind = Tok::Comma; advance(); return t;
            case '=': t.kind = Tok::Equals; advance(); return t;
            default: break;
        }
        t.kind = Tok::Ident;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) {
            t.text.push_back(text_[pos_]);
            advance();
        }
        return t;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

struct Use {
    std::string net;
    int line;
    int column;
};

struct Definition {
    enum class Kind { Input, Gate, Alias } kind = Kind::Input;
    CellKind cell = CellKind::And;
    bool inverted = false;  // NAND/NOR/XNOR
    std::vector<Use> args;
    int line = 0;
    int column = 0;
};

struct OpInfo {
    CellKind cell;
    bool inverted;
    bool alias;
    int arity;
};

std::optional<OpInfo> lookup_op(std::string_view op) {
    const std::string u = upper(op);
    if (u == "AND") return OpInfo{CellKind::And, false, false, 2};
    if (u == "OR") return OpInfo{CellKind::Or, false, false, 2};
    if (u == "XOR") return OpInfo{CellKind::Xor, false, false, 2};
    if (u == "NAND") return OpInfo{CellKind::And, true, false, 2};
    if (u == "NOR") return OpInfo{CellKind::Or, true, false, 2};
    if (u == "XNOR") return OpInfo{CellKind::Xor, true, false, 2};
    if (u == "NOT" || u == "INV") return OpInfo{CellKind::Not, false, false, 1};
    if (u == "DFF") return OpInfo{CellKind::Dff, false, false, 1};
    if (u == "BUFF" || u == "BUF") return OpInfo{CellKind::Dff, false, true, 1};
    return std::nullopt;
}

std::string base_suffix(CellKind c) {
    switch (c) {
        case CellKind::And: return "$and";
        case CellKind::Or: return "$or";
        default: return "$xor";
    }
}

class BenchParser {
    enum class State : std::uint8_t { Open, Done };

public:
    explicit BenchParser(std::string_view text) : lex_(text) { cur_ = lex_.next(); }

    CircuitGraph run() {
        while (cur_.kind != Tok::End) statement();
        return build();
    }

private:
    [[noreturn]] void fail(const Token& at, const std::string& what) {
        throw ParseError(at.line, at.column, what);
    }

    Token expect(Tok kind, std::string_view what) {
        if (cur_.kind != kind) fail(cur_, fmt::format("expected {}", what));
        Token t = cur_;
        cur_ = lex_.next();
        return t;
    }

    void statement() {
        Token head = expect(Tok::Ident, "identifier");
        const std::string kw = upper(head.text);
        if ((kw == "INPUT" || kw == "OUTPUT") && cur_.kind == Tok::LParen) {
            cur_ = lex_.next();
            Token name = expect(Tok::Ident, "signal name");
            expect(Tok::RParen, "')'");
            if (kw == "INPUT") {
                Definition d;
                d.kind = Definition::Kind::Input;
                d.line = name.line;
                d.column = name.column;
                define(name, std::move(d));
                input_order_.push_back(name.text);
            } else {
                if (std::any_of(outputs_.begin(), outputs_.end(),
                                [&](const Use& u) { return u.net == name.text; })) {
                    fail(name, fmt::format("duplicate output '{}'", name.text));
                }
                outputs_.push_back({name.text, name.line, name.column});
            }
            return;
        }
        expect(Tok::Equals, "'=' or '('");
        Token op = expect(Tok::Ident, "gate type");
        auto info = lookup_op(op.text);
        if (!info) fail(op, fmt::format("unknown gate type '{}'", op.text));
        expect(Tok::LParen, "'('");
        Definition d;
        d.kind = info->alias ? Definition::Kind::Alias : Definition::Kind::Gate;
        d.cell = info->cell;
        d.inverted = info->inverted;
        d.line = head.line;
        d.column = head.column;
        if (cur_.kind != Tok::RParen) {
            for (;;) {
                Token a = expect(Tok::Ident, "signal name");
                d.args.push_back({a.text, a.line, a.column});
                if (cur_.kind != Tok::Comma) break;
                cur_ = lex_.next();
            }
        }
        expect(Tok::RParen, "')'");
        if (static_cast<int>(d.args.size()) != info->arity) {
            fail(op, fmt::format("{} takes {} input{}, got {}", upper(op.text), info->arity,
                                 info->arity == 1 ? "" : "s", d.args.size()));
        }
        define(head, std::move(d));
        gate_order_.push_back(head.text);
    }

    void define(const Token& name, Definition d) {
        auto [it, fresh] = defs_.emplace(name.text, std::move(d));
        if (!fresh) {
            fail(name, fmt::format("'{}' already defined at {}:{}", name.text, it->second.line,
                                   it->second.column));
        }
    }

    const Definition& definition_of(const Use& u) {
        auto it = defs_.find(u.net);
        if (it == defs_.end()) throw ParseError(u.line, u.column, fmt::format("undefined signal '{}'", u.net));
        return it->second;
    }

    // Depth-first resolution with an explicit stack so long chains cannot
    // overflow the call stack. Returns the node driving `net`.
    NodeId resolve(const std::string& root) {
        std::vector<std::pair<std::string, std::size_t>> stack;
        stack.emplace_back(root, 0);
        state_.emplace(root, State::Open);
        while (!stack.empty()) {
            auto& [net, next_arg] = stack.back();
            const Definition& d = defs_.at(net);
            if (next_arg < d.args.size()) {
                const Use& u = d.args[next_arg++];
                (void)definition_of(u);
                auto st = state_.find(u.net);
                if (st == state_.end()) {
                    state_.emplace(u.net, State::Open);
                    stack.emplace_back(u.net, 0);
                } else if (st->second == State::Open) {
                    throw ParseError(u.line, u.column,
                                     fmt::format("combinational cycle through '{}'", u.net));
                }
                continue;
            }
            materialize(net, d);
            state_[net] = State::Done;
            stack.pop_back();
        }
        return driver_.at(root);
    }

    void materialize(const std::string& net, const Definition& d) {
        switch (d.kind) {
            case Definition::Kind::Input: break;  // created up front
            case Definition::Kind::Alias: driver_[net] = driver_.at(d.args[0].net); break;
            case Definition::Kind::Gate: {
                std::vector<NodeId> fanins;
                for (const Use& u : d.args) fanins.push_back(driver_.at(u.net));
                if (d.inverted) {
                    NodeId base = g_.add_gate(d.cell, net + base_suffix(d.cell), std::move(fanins));
                    driver_[net] = g_.add_gate(CellKind::Not, net, {base});
                } else {
                    driver_[net] = g_.add_gate(d.cell, net, std::move(fanins));
                }
                break;
            }
        }
    }

    CircuitGraph build() {
        for (const std::string& name : input_order_) {
            driver_[name] = g_.add_input(name);
            state_[name] = State::Done;
        }
        for (const std::string& name : gate_order_) {
            if (!state_.count(name)) resolve(name);
        }
        for (const Use& u : outputs_) {
            (void)definition_of(u);
            g_.add_output(u.net, driver_.at(u.net));
        }
        return std::move(g_);
    }

    Lexer lex_;
    Token cur_;
    std::unordered_map<std::string, Definition> defs_;
    std::vector<std::string> input_order_;
    std::vector<std::string> gate_order_;
    std::vector<Use> outputs_;
    std::unordered_map<std::string, State> state_;
    std::unordered_map<std::string, NodeId> driver_;
    CircuitGraph g_;
};


NodeId through_splitters(const CircuitGraph& g, NodeId id) {
    while (g.node(id).is_splitter()) id = g.node(id).fanins[0];
    return id;
}

}  // namespace

CircuitGraph parse_bench(std::string_view text) { return BenchParser(text).run(); }

CircuitGraph read_bench(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, 0, fmt::format("cannot open '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_bench(ss.str());
}

std::string emit_bench(const CircuitGraph& g) {
    std::string out;
    for (NodeId id : g.inputs()) out += fmt::format("INPUT({})\n", g.node(id).name);
    for (NodeId id : g.outputs()) out += fmt::format("OUTPUT({})\n", g.node(id).name);
    // gate lines sorted by net name so equal graphs print identically
    std::vector<std::pair<std::string, std::string>> lines;
    for (const Node& n : g.nodes()) {
        if (n.kind != NodeKind::Gate) continue;
        std::string line = fmt::format("{} = {}(", n.name, kind_token(n));
        for (std::size_t p = 0; p < n.fanins.size(); ++p) {
            if (p) line += ", ";
            line += g.node(through_splitters(g, n.fanins[p])).name;
        }
        line += ")\n";
        lines.emplace_back(n.name, std::move(line));
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& [name, line] : lines) out += line;
    for (NodeId id : g.outputs()) {
        const Node& po = g.node(id);
        const Node& drv = g.node(through_splitters(g, po.fanins[0]));
        if (drv.name != po.name) out += fmt::format("{} = BUFF({})\n", po.name, drv.name);
    }
    return out;
}

std::string dump_graph(const CircuitGraph& g) {
    std::string out = "# cfdsynth graph v1\n";
    for (const Node& n : g.nodes()) {
        out += fmt::format("node {} {} {} in", n.id, kind_token(n), n.name);
        for (NodeId f : n.fanins) out += fmt::format(" {}", f);
        if (n.inserted) out += fmt::format(" host {} {} {}", n.host.src, n.host.dst, n.host.port);
        out += '\n';
    }
    return out;
}

CircuitGraph parse_graph_dump(std::string_view text) {
    CircuitGraph g;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) {
            if (end == text.size()) break;
            continue;
        }
        const auto fail = [&](const std::string& what) -> void { throw ParseError(line_no, 1, what); };
        if (word != "node") fail(fmt::format("expected 'node', got '{}'", word));
        long long id = 0;
        std::string kind, name, in;
        if (!(ls >> id >> kind >> name >> in) || in != "in") fail("expected: node <id> <kind> <name> in ...");
        if (id != static_cast<long long>(g.size())) fail(fmt::format("node id {} out of sequence", id));
        Node n;
        n.name = name;
        if (kind == "PI") {
            n.kind = NodeKind::PrimaryInput;
        } else if (kind == "PO") {
            n.kind = NodeKind::PrimaryOutput;
        } else if (kind == "SPL") {
            n.kind = NodeKind::Splitter;
            n.cell = CellKind::Splitter;
        } else {
            auto cell = timing::cell_from_name(kind);
            if (!cell || !timing::is_clocked(*cell)) fail(fmt::format("unknown node kind '{}'", kind));
            n.kind = NodeKind::Gate;
            n.cell = *cell;
        }
        std::string tok;
        while (ls >> tok) {
            if (tok == "host") {
                long long s = 0, d = 0, p = 0;
                if (!(ls >> s >> d >> p)) fail("expected: host <src> <dst> <port>");
                n.inserted = true;
                n.host = {static_cast<NodeId>(s), static_cast<NodeId>(d), static_cast<int>(p)};
                break;
            }
            try {
                std::size_t used = 0;
                long long f = std::stoll(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                n.fanins.push_back(static_cast<NodeId>(f));
            } catch (const std::exception&) {
                fail(fmt::format("bad fanin id '{}'", tok));
            }
        }
        try {
            g.append_unlinked(std::move(n));
        } catch (const std::exception& e) {
            fail(e.what());
        }
        if (end == text.size()) break;
    }
    try {
        g.relink();
        g.validate(false);
    } catch (const std::exception& e) {
        throw ParseError(line_no, 1, e.what());
    }
    return g;
}

}  // namespace cfd::netlist
