#include "cfd/kernels/kernels.hpp"

namespace cfd::kernels {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = y[i] + a * x[i];
    }
}

Violation max_bound_violation_scalar(const double* x, const double* lo, const double* hi,
                                     std::size_t n, double tol) {
    Violation best;
    best.amount = tol;
    for (std::size_t i = 0; i < n; ++i) {
        const double below = lo[i] - x[i];
        const double above = x[i] - hi[i];
        const double v = below > above ? below : above;
        if (v > best.amount) {
            best.amount = v;
            best.index = static_cast<std::ptrdiff_t>(i);
        }
    }
    if (best.index < 0) best.amount = 0.0;
    return best;
}

void edge_slacks_scalar(const double* capture, const double* launch, const double* delay,
                        const double* setup, const double* hold, std::size_t n,
                        double clock_scale, double period, double* setup_slack,
                        double* hold_slack) {
    for (std::size_t e = 0; e < n; ++e) {
        const double span = clock_scale * (capture[e] - launch[e]);
        setup_slack[e] = (span - delay[e]) - setup[e];
        hold_slack[e] = ((period + delay[e]) - hold[e]) - span;
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{"scalar", &axpy_scalar, &max_bound_violation_scalar,
                                   &edge_slacks_scalar};
    return table;
}

}  // namespace cfd::kernels
