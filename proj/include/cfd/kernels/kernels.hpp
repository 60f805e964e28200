#pragma once

// Dense data-parallel inner loops shared by the simplex solver and the timing
// checkers. Every kernel has a portable scalar reference; SIMD variants are
// selected once at startup from the detected CPU features and must produce
// bit-identical results to the reference (see tests/unit/test_kernels.cpp).

#include <cstddef>
#include <span>
#include <string_view>

namespace cfd::kernels {

/// Largest bound violation found by max_bound_violation; index < 0 when every
/// entry is within tolerance.
struct Violation {
    std::ptrdiff_t index = -1;
    double amount = 0.0;
};

/// Per-edge timing operands in structure-of-arrays layout. For edge e the data
/// pulse is launched by a clocked element with clock arrival launch_clock[e]
/// and reaches the capturing element launch_delay[e] later (clock-to-Q plus
/// any splitter propagation). The capturing element is clocked at
/// capture_clock[e] and requires setup[e] / hold[e].
struct EdgeTimingView {
    std::span<const double> capture_clock;
    std::span<const double> launch_clock;
    std::span<const double> launch_delay;
    std::span<const double> setup;
    std::span<const double> hold;
};

struct KernelTable {
    const char* name;
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // argmax over i of max(lo[i] - x[i], x[i] - hi[i]), restricted to values > tol.
    // Ties resolve to the lowest index.
    Violation (*max_bound_violation)(const double* x, const double* lo, const double* hi,
                                     std::size_t n, double tol);
    // Clock delays are multiplied by `clock_scale`.
    //   setup_slack = scale*(capture-launch) - launch_delay - setup
    //   hold_slack  = period + launch_delay - hold - scale*(capture-launch)
    void (*edge_slacks)(const double* capture, const double* launch, const double* delay,
                        const double* setup, const double* hold, std::size_t n,
                        double clock_scale, double period, double* setup_slack,
                        double* hold_slack);
};

const KernelTable& scalar_table();

/// nullptr when the build or the running CPU lacks AVX2.
const KernelTable* avx2_table();

/// The table used by the free functions below. Chosen on first use: AVX2 when
/// available unless the CFD_KERNELS environment variable says "scalar".
const KernelTable& active();

/// Force a variant ("scalar", "avx2" or "auto"). Returns false if unavailable.
bool select(std::string_view name);

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), y.size());
}

inline Violation max_bound_violation(std::span<const double> x, std::span<const double> lo,
                                     std::span<const double> hi, double tol) {
    return active().max_bound_violation(x.data(), lo.data(), hi.data(), x.size(), tol);
}

inline void edge_slacks(const EdgeTimingView& v, double clock_scale, double period,
                        std::span<double> setup_slack, std::span<double> hold_slack) {
    active().edge_slacks(v.capture_clock.data(), v.launch_clock.data(), v.launch_delay.data(),
                         v.setup.data(), v.hold.data(), setup_slack.size(), clock_scale, period,
                         setup_slack.data(), hold_slack.data());
}

}  // namespace cfd::kernels
