// Compiled with -mavx2 only (no FMA) so every lane performs the same IEEE
// operations, in the same order, as the scalar reference.

#include "cfd/kernels/kernels.hpp"

#include <immintrin.h>

#include <cstdint>

namespace cfd::kernels {
namespace {

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

Violation max_bound_violation_avx2(const double* x, const double* lo, const double* hi,
                                   std::size_t n, double tol) {
    __m256d best = _mm256_set1_pd(tol);
    __m256i best_idx = _mm256_set1_epi64x(-1);
    __m256i idx = _mm256_setr_epi64x(0, 1, 2, 3);
    const __m256i step = _mm256_set1_epi64x(4);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d below = _mm256_sub_pd(_mm256_loadu_pd(lo + i), vx);
        const __m256d above = _mm256_sub_pd(vx, _mm256_loadu_pd(hi + i));
        // scalar picks `below` when below > above, else `above`
        const __m256d pick_below = _mm256_cmp_pd(below, above, _CMP_GT_OQ);
        const __m256d v = _mm256_blendv_pd(above, below, pick_below);
        const __m256d better = _mm256_cmp_pd(v, best, _CMP_GT_OQ);
        best = _mm256_blendv_pd(best, v, better);
        best_idx = _mm256_castpd_si256(_mm256_blendv_pd(
            _mm256_castsi256_pd(best_idx), _mm256_castsi256_pd(idx), better));
        idx = _mm256_add_epi64(idx, step);
    }
    alignas(32) double lane_best[4];
    alignas(32) std::int64_t lane_idx[4];
    _mm256_store_pd(lane_best, best);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lane_idx), best_idx);

    Violation out;
    out.amount = tol;
    for (int l = 0; l < 4; ++l) {
        if (lane_idx[l] < 0) continue;
        if (lane_best[l] > out.amount ||
            (lane_best[l] == out.amount && out.index >= 0 && lane_idx[l] < out.index)) {
            out.amount = lane_best[l];
            out.index = lane_idx[l];
        }
    }
    for (; i < n; ++i) {
        const double below = lo[i] - x[i];
        const double above = x[i] - hi[i];
        const double v = below > above ? below : above;
        if (v > out.amount) {
            out.amount = v;
            out.index = static_cast<std::ptrdiff_t>(i);
        }
    }
    if (out.index < 0) out.amount = 0.0;
    return out;
}

void edge_slacks_avx2(const double* capture, const double* launch, const double* delay,
                      const double* setup, const double* hold, std::size_t n,
                      double clock_scale, double period, double* setup_slack,
                      double* hold_slack) {
    const __m256d vs = _mm256_set1_pd(clock_scale);
    const __m256d vp = _mm256_set1_pd(period);
    std::size_t e = 0;
    for (; e + 4 <= n; e += 4) {
        const __m256d span = _mm256_mul_pd(
            vs, _mm256_sub_pd(_mm256_loadu_pd(capture + e), _mm256_loadu_pd(launch + e)));
        const __m256d d = _mm256_loadu_pd(delay + e);
        _mm256_storeu_pd(setup_slack + e,
                         _mm256_sub_pd(_mm256_sub_pd(span, d), _mm256_loadu_pd(setup + e)));
        _mm256_storeu_pd(
            hold_slack + e,
            _mm256_sub_pd(_mm256_sub_pd(_mm256_add_pd(vp, d), _mm256_loadu_pd(hold + e)), span));
    }
    for (; e < n; ++e) {
        const double span = clock_scale * (capture[e] - launch[e]);
        setup_slack[e] = (span - delay[e]) - setup[e];
        hold_slack[e] = ((period + delay[e]) - hold[e]) - span;
    }
}

}  // namespace

const KernelTable* avx2_table_impl() {
    static const KernelTable table{"avx2", &axpy_avx2, &max_bound_violation_avx2,
                                   &edge_slacks_avx2};
    return &table;
}

}  // namespace cfd::kernels
