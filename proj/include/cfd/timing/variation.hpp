#pragma once

namespace cfd::timing {

enum class VariationMode { Absolute, Fractional };

/// Expected delay uncertainty the synthesizer must tolerate.
///
/// Absolute mode: every edge gets `delta_plus` / `delta_minus` picoseconds.
/// Fractional mode: the values are fractions of the nominal launch delay of
/// each edge (clock-to-Q of a clocked driver, propagation of a splitter).
/// With `include_capture` set, fractional mode also budgets the same fraction
/// of the capturing cell's setup (late side) and hold (early side).
struct VariationSpec {
    double delta_plus = 0.0;
    double delta_minus = 0.0;
    VariationMode mode = VariationMode::Fractional;
    bool include_capture = true;

    static VariationSpec fractional(double p, bool capture = true) {
        return {p, p, VariationMode::Fractional, capture};
    }
    static VariationSpec absolute(double plus, double minus) {
        return {plus, minus, VariationMode::Absolute, false};
    }
    bool is_zero() const { return delta_plus == 0.0 && delta_minus == 0.0; }
};

struct EdgeDelta {
    double plus = 0.0;
    double minus = 0.0;
};

/// Launch-side variation (Delta+, Delta-) of one edge whose nominal launch
/// delay is `launch_delay`.
EdgeDelta edge_variation(const VariationSpec& v, double launch_delay);

/// Capture-side margins: extra setup (late) and extra hold (early) for a
/// capturing cell with nominal `setup` / `hold`. Zero unless fractional mode
/// with include_capture.
EdgeDelta capture_variation(const VariationSpec& v, double setup, double hold);

/// Throws std::invalid_argument if a delta is negative or not finite.
void validate(const VariationSpec& v);

}  // namespace cfd::timing
