#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cfd::timing {

/// All times are picoseconds. Two times closer than this are considered equal.
inline constexpr double kTimeTolerance = 1e-6;

enum class CellKind { And, Or, Xor, Not, Dff, Splitter, Jtl };
inline constexpr std::size_t kCellKindCount = 7;

std::string_view cell_name(CellKind kind);
std::optional<CellKind> cell_from_name(std::string_view name);

/// Clocked cells (AND/OR/XOR/NOT/DFF) latch data on their clock and define
/// setup, hold and clock-to-Q. Passive cells (splitter, JTL) only propagate.
constexpr bool is_clocked(CellKind kind) {
    return kind != CellKind::Splitter && kind != CellKind::Jtl;
}

struct CellTiming {
    double setup = 0.0;        // sigma
    double hold = 0.0;         // eta
    double clock_to_q = 0.0;   // beta
    double propagation = 0.0;  // rho, passive cells only
    double area = 0.0;         // library units
};

class LibraryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Timing and area values for every cell the synthesis flow can emit.
///
/// Text format (see docs/formats.md):
///
///     # comment
///     [AND]
///     setup = 4.5
///     hold = 4.7
///     clock_to_q = 5.7
///     area = 1.0
///
/// One section per cell; the JTL section's `propagation` is the unit clock
/// delay used for clock scheduling.
class CellLibrary {
public:
    /// The cell table shipped as tables/default_cells.
    static CellLibrary defaults();
    static CellLibrary parse(std::string_view text);
    static CellLibrary load(const std::filesystem::path& path);

    std::string serialize() const;

    const CellTiming& cell(CellKind kind) const { return cells_[static_cast<std::size_t>(kind)]; }
    const CellTiming& dff() const { return cell(CellKind::Dff); }
    double splitter_delay() const { return cell(CellKind::Splitter).propagation; }
    double jtl_delay() const { return cell(CellKind::Jtl).propagation; }

    /// Smallest period any edge into a clocked cell of this kind can meet:
    /// setup + hold + two JTL delays of rounding reserve.
    double period_floor(CellKind kind) const;

private:
    std::array<CellTiming, kCellKindCount> cells_{};
};

}  // namespace cfd::timing
