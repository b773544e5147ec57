#include <atomic>
#include <cstdlib>
#include <cstring>

#include "vvc/kernels.hpp"

namespace vvc::kernels {

#ifdef VVC_HAVE_AVX2
const KernelTable& avx2_kernels();  // kernels_avx2.cpp
#endif

const KernelTable* avx2_table() {
#ifdef VVC_HAVE_AVX2
    return &avx2_kernels();
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

namespace {

const KernelTable* initial_table() {
    const char* forced = std::getenv("VVC_ISA");
    if (forced && std::strcmp(forced, "scalar") == 0) return &scalar_table();
    if (avx2_table() && cpu_has_avx2()) return avx2_table();
    return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) {
    if (isa == Isa::scalar) {
        current().store(&scalar_table(), std::memory_order_release);
        return true;
    }
    if (!avx2_table() || !cpu_has_avx2()) return false;
    current().store(avx2_table(), std::memory_order_release);
    return true;
}

std::string_view name(Isa isa) { return isa == Isa::scalar ? "scalar" : "avx2"; }

}  // namespace vvc::kernels
