#include "cfd/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace cfd::kernels {

#ifdef CFD_HAVE_AVX2
const KernelTable* avx2_table_impl();
#endif

const KernelTable* avx2_table() {
#if defined(CFD_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? avx2_table_impl() : nullptr;
#else
    return nullptr;
#endif
}

namespace {

const KernelTable* pick_default() {
    if (const char* env = std::getenv("CFD_KERNELS")) {
        if (std::string_view(env) == "scalar") return &scalar_table();
    }
    if (const KernelTable* t = avx2_table()) return t;
    return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{pick_default()};
    return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
    if (name == "scalar") {
        current().store(&scalar_table());
        return true;
    }
    if (name == "avx2") {
        const KernelTable* t = avx2_table();
        if (t == nullptr) return false;
        current().store(t);
        return true;
    }
    if (name == "auto") {
        current().store(avx2_table() ? avx2_table() : &scalar_table());
        return true;
    }
    return false;
}

}  // namespace cfd::kernels
