// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace dtcb::kernels::detail {

void beam_gains_scalar(const double* w_re, const double* w_im, std::size_t M,
                       const double* h_re, const double* h_im, std::size_t K,
                       double* out);
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);

#if defined(DTCB_HAVE_AVX2)
void beam_gains_avx2(const double* w_re, const double* w_im, std::size_t M,
                     const double* h_re, const double* h_im, std::size_t K,
                     double* out);
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
#endif

} // namespace dtcb::kernels::detail
