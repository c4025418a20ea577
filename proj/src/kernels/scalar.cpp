// SPDX-License-Identifier: Apache-2.0
#include "kernels_impl.hpp"

namespace dtcb::kernels::detail {

void beam_gains_scalar(const double* w_re, const double* w_im, std::size_t M,
                       const double* h_re, const double* h_im, std::size_t K,
                       double* out) {
    for (std::size_t k = 0; k < K; ++k) {
        double acc_re = 0.0;
        double acc_im = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            const double hr = h_re[m * K + k];
            const double hi = h_im[m * K + k];
            // conj(w) * h
            const double pr = w_re[m] * hr + w_im[m] * hi;
            const double pi = w_re[m] * hi - w_im[m] * hr;
            acc_re = acc_re + pr;
            acc_im = acc_im + pi;
        }
        out[k] = acc_re * acc_re + acc_im * acc_im;
    }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

} // namespace dtcb::kernels::detail
