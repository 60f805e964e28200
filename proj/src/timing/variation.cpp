#include "cfd/timing/variation.hpp"

#include <cmath>
#include <stdexcept>

namespace cfd::timing {

EdgeDelta edge_variation(const VariationSpec& v, double launch_delay) {
    if (v.mode == VariationMode::Absolute) return {v.delta_plus, v.delta_minus};
    return {v.delta_plus * launch_delay, v.delta_minus * launch_delay};
}

EdgeDelta capture_variation(const VariationSpec& v, double setup, double hold) {
    if (v.mode != VariationMode::Fractional || !v.include_capture) return {};
    return {v.delta_plus * setup, v.delta_minus * hold};
}

void validate(const VariationSpec& v) {
    if (!std::isfinite(v.delta_plus) || !std::isfinite(v.delta_minus) || v.delta_plus < 0.0 ||
        v.delta_minus < 0.0) {
        throw std::invalid_argument("variation deltas must be finite and non-negative");
    }
}

}  // namespace cfd::timing
