// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 (and without -mfma); only reached after a CPUID check.
#include "kernels_impl.hpp"

#include <immintrin.h>

namespace dtcb::kernels::detail {

void beam_gains_avx2(const double* w_re, const double* w_im, std::size_t M,
                     const double* h_re, const double* h_im, std::size_t K,
                     double* out) {
    std::size_t k = 0;
    // Four channels per lane group; each lane repeats the scalar sequence.
    for (; k + 4 <= K; k += 4) {
        __m256d acc_re = _mm256_setzero_pd();
        __m256d acc_im = _mm256_setzero_pd();
        for (std::size_t m = 0; m < M; ++m) {
            const __m256d wr = _mm256_set1_pd(w_re[m]);
            const __m256d wi = _mm256_set1_pd(w_im[m]);
            const __m256d hr = _mm256_loadu_pd(h_re + m * K + k);
            const __m256d hi = _mm256_loadu_pd(h_im + m * K + k);
            const __m256d pr = _mm256_add_pd(_mm256_mul_pd(wr, hr), _mm256_mul_pd(wi, hi));
            const __m256d pi = _mm256_sub_pd(_mm256_mul_pd(wr, hi), _mm256_mul_pd(wi, hr));
            acc_re = _mm256_add_pd(acc_re, pr);
            acc_im = _mm256_add_pd(acc_im, pi);
        }
        const __m256d g = _mm256_add_pd(_mm256_mul_pd(acc_re, acc_re), _mm256_mul_pd(acc_im, acc_im));
        _mm256_storeu_pd(out + k, g);
    }
    if (k < K) {
        // Tail: same arithmetic on the remaining columns.
        for (; k < K; ++k) {
            double acc_re = 0.0;
            double acc_im = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                const double hr = h_re[m * K + k];
                const double hi = h_im[m * K + k];
                const double pr = w_re[m] * hr + w_im[m] * hi;
                const double pi = w_re[m] * hi - w_im[m] * hr;
                acc_re = acc_re + pr;
                acc_im = acc_im + pi;
            }
            out[k] = acc_re * acc_re + acc_im * acc_im;
        }
    }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc0 = _mm256_add_pd(acc0, acc1);
    const __m128d lo = _mm256_castpd256_pd128(acc0);
    const __m128d hi = _mm256_extractf128_pd(acc0, 1);
    const __m128d s2 = _mm_add_pd(lo, hi);
    double acc = _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

} // namespace dtcb::kernels::detail
