// SPDX-License-Identifier: Apache-2.0
#include "dtcb/kernels.hpp"
#include "dtcb/error.hpp"
#include "kernels_impl.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dtcb::kernels {

namespace {

const KernelTable kScalar{Backend::Scalar, &detail::beam_gains_scalar, &detail::dot_scalar,
                          &detail::axpy_scalar};

#if defined(DTCB_HAVE_AVX2)
const KernelTable kAvx2{Backend::Avx2, &detail::beam_gains_avx2, &detail::dot_avx2,
                        &detail::axpy_avx2};
#endif

const KernelTable* choose_default() {
    const char* env = std::getenv("DTCB_KERNELS");
    if (env != nullptr && std::string(env) == "scalar") return &kScalar;
    if (const KernelTable* t = avx2_table(); t != nullptr && cpu_has_avx2()) return t;
    return &kScalar;
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{choose_default()};
    return table;
}

} // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(DTCB_HAVE_AVX2)
    return &kAvx2;
#else
    return nullptr;
#endif
}

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_backend(Backend b) {
    if (b == Backend::Scalar) {
        current().store(&kScalar, std::memory_order_release);
        return;
    }
    const KernelTable* t = avx2_table();
    if (t == nullptr || !cpu_has_avx2())
        throw ConfigError("AVX2 kernels are not available on this build or CPU");
    current().store(t, std::memory_order_release);
}

Backend active_backend() { return active().backend; }

std::string_view backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

} // namespace dtcb::kernels
