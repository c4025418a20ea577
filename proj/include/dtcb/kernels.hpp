// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// when the CPU supports it, an AVX2 version selected at runtime.
//
// beam_gains and axpy produce bit-identical results in both variants (the
// SIMD versions vectorize across independent outputs and keep the scalar
// operation order per lane). dot reassociates the sum and agrees with the
// scalar version only to rounding.
namespace dtcb::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
    Backend backend;

    // out[k] = |w^H h_k|^2 for k in [0, K). Channels are stored
    // structure-of-arrays: element m of channel k lives at h_re[m*K + k].
    void (*beam_gains)(const double* w_re, const double* w_im, std::size_t M,
                       const double* h_re, const double* h_im, std::size_t K,
                       double* out);

    double (*dot)(const double* a, const double* b, std::size_t n);

    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();

// Null when the AVX2 variants were not compiled in.
const KernelTable* avx2_table();

bool cpu_has_avx2();

// The table used by the library. Chosen on first use: AVX2 when compiled in
// and supported, unless DTCB_KERNELS=scalar is set in the environment.
const KernelTable& active();

// Throws ConfigError if the requested backend is unavailable.
void set_backend(Backend b);
Backend active_backend();
std::string_view backend_name(Backend b);

} // namespace dtcb::kernels
