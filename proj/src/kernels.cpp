#include "hosgd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace hosgd::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Backend* lookup(std::string_view name) {
    if (name == "scalar") return &scalar_backend();
    if (name == "avx2") {
        const Backend* b = avx2_backend();
        return (b != nullptr && cpu_has_avx2()) ? b : nullptr;
    }
    return nullptr;
}

const Backend* default_backend() {
    if (const char* env = std::getenv("HOSGD_KERNELS")) {
        std::string_view want(env);
        if (want != "auto") {
            if (const Backend* b = lookup(want)) return b;
            // Unknown or unsupported request: fall through to auto.
        }
    }
    const Backend* avx2 = avx2_backend();
    if (avx2 != nullptr && cpu_has_avx2()) return avx2;
    return &scalar_backend();
}

std::atomic<const Backend*>& active_slot() {
    static std::atomic<const Backend*> slot{default_backend()};
    return slot;
}

}  // namespace

const Backend& active() { return *active_slot().load(std::memory_order_relaxed); }

bool set_active(std::string_view name) {
    const Backend* b = lookup(name);
    if (b == nullptr) return false;
    active_slot().store(b, std::memory_order_relaxed);
    return true;
}

std::vector<const Backend*> available_backends() {
    std::vector<const Backend*> out{&scalar_backend()};
    if (const Backend* b = avx2_backend(); b != nullptr && cpu_has_avx2()) {
        out.push_back(b);
    }
    return out;
}

}  // namespace hosgd::kernels
