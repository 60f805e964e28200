#include "cfd/timing/cell_library.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace cfd::timing {
namespace {

constexpr std::array<std::string_view, kCellKindCount> kNames = {"AND", "OR",       "XOR", "NOT",
                                                                  "DFF", "Splitter", "JTL"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view text, int line) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw LibraryError(fmt::format("line {}: '{}' is not a number", line, text));
    }
    return value;
}

}  // namespace

std::string_view cell_name(CellKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<CellKind> cell_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) return static_cast<CellKind>(i);
    }
    return std::nullopt;
}

CellLibrary CellLibrary::defaults() {
    CellLibrary lib;
    auto set_clocked = [&](CellKind k, double s, double h, double q, double area) {
        lib.cells_[static_cast<std::size_t>(k)] = CellTiming{s, h, q, 0.0, area};
    };
    set_clocked(CellKind::Or, 6.0, 3.0, 5.9, 1.0);
    set_clocked(CellKind::And, 4.5, 4.7, 5.7, 1.0);
    set_clocked(CellKind::Xor, 6.9, 5.5, 7.2, 1.0);
    set_clocked(CellKind::Not, 4.4, 6.9, 9.3, 1.0);
    set_clocked(CellKind::Dff, 4.4, 3.9, 7.9, 0.6);
    lib.cells_[static_cast<std::size_t>(CellKind::Splitter)] = CellTiming{0, 0, 0, 6.6, 0.3};
    lib.cells_[static_cast<std::size_t>(CellKind::Jtl)] = CellTiming{0, 0, 0, 2.0, 0.2};
    return lib;
}

CellLibrary CellLibrary::parse(std::string_view text) {
    struct Seen {
        bool section = false, setup = false, hold = false, clock_to_q = false, propagation = false,
             area = false;
    };
    // area is optional and falls back to the default weight
    CellLibrary lib = defaults();
    for (auto& c : lib.cells_) c.setup = c.hold = c.clock_to_q = c.propagation = 0.0;
    std::array<Seen, kCellKindCount> seen{};
    std::optional<CellKind> current;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw LibraryError(fmt::format("line {}: unterminated section", line_no));
            std::string_view name = trim(line.substr(1, line.size() - 2));
            current = cell_from_name(name);
            if (!current) throw LibraryError(fmt::format("line {}: unknown cell '{}'", line_no, name));
            auto& s = seen[static_cast<std::size_t>(*current)];
            if (s.section) throw LibraryError(fmt::format("line {}: duplicate cell '{}'", line_no, name));
            s.section = true;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw LibraryError(fmt::format("line {}: expected key = value", line_no));
        if (!current) throw LibraryError(fmt::format("line {}: value outside of a cell section", line_no));
        std::string_view key = trim(line.substr(0, eq));
        double value = parse_number(trim(line.substr(eq + 1)), line_no);
        if (value < 0.0) {
            throw LibraryError(fmt::format("line {}: negative value for {}.{}", line_no, cell_name(*current), key));
        }
        auto& cell = lib.cells_[static_cast<std::size_t>(*current)];
        auto& s = seen[static_cast<std::size_t>(*current)];
        const bool clocked = is_clocked(*current);
        if (key == "setup" && clocked) {
            cell.setup = value, s.setup = true;
        } else if (key == "hold" && clocked) {
            cell.hold = value, s.hold = true;
        } else if (key == "clock_to_q" && clocked) {
            cell.clock_to_q = value, s.clock_to_q = true;
        } else if (key == "propagation" && !clocked) {
            cell.propagation = value, s.propagation = true;
        } else if (key == "area") {
            cell.area = value, s.area = true;
        } else {
            throw LibraryError(fmt::format("line {}: key '{}' not valid for cell {}", line_no, key,
                                           cell_name(*current)));
        }
    }

    for (std::size_t i = 0; i < kCellKindCount; ++i) {
        const auto kind = static_cast<CellKind>(i);
        const Seen& s = seen[i];
        if (!s.section) throw LibraryError(fmt::format("missing cell {}", cell_name(kind)));
        const bool complete = is_clocked(kind) ? (s.setup && s.hold && s.clock_to_q) : s.propagation;
        if (!complete) {
            throw LibraryError(fmt::format("cell {} is missing a timing value", cell_name(kind)));
        }
    }
    if (lib.jtl_delay() <= 0.0) throw LibraryError("JTL propagation delay must be positive");
    return lib;
}

CellLibrary CellLibrary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LibraryError(fmt::format("cannot open cell library '{}'", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string CellLibrary::serialize() const {
    // {} prints the shortest representation that round-trips exactly
    std::string out = "# cell library: times in ps, area in library units\n";
    for (std::size_t i = 0; i < kCellKindCount; ++i) {
        const auto kind = static_cast<CellKind>(i);
        const CellTiming& c = cells_[i];
        out += fmt::format("\n[{}]\n", cell_name(kind));
        if (is_clocked(kind)) {
            out += fmt::format("setup = {}\nhold = {}\nclock_to_q = {}\n", c.setup, c.hold, c.clock_to_q);
        } else {
            out += fmt::format("propagation = {}\n", c.propagation);
        }
        out += fmt::format("area = {}\n", c.area);
    }
    return out;
}

double CellLibrary::period_floor(CellKind kind) const {
    const CellTiming& c = cell(kind);
    return c.setup + c.hold + 2.0 * jtl_delay();
}

}  // namespace cfd::timing
