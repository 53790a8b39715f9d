#include "fsb/kernels.hpp"

#include <cstdlib>
#include <mutex>
#include <stdexcept>

namespace fsb::kern {
namespace {

bool cpu_has(const char* feature) {
#if defined(__x86_64__)
    return __builtin_cpu_supports(feature);
#else
    (void)feature;
    return false;
#endif
}

const Impl* resolve() {
    const char* env = std::getenv("FSB_SIMD");
    const std::string want = env ? env : "auto";
    if (want == "scalar") return &detail::scalar_impl;
#if defined(__x86_64__)
    if (want == "avx2") {
        if (!(cpu_has("avx2") && cpu_has("fma")))
            throw std::runtime_error("FSB_SIMD=avx2 requested but CPU lacks avx2/fma");
        return &detail::avx2_impl;
    }
    if (want == "avx512") {
        if (!cpu_has("avx512f"))
            throw std::runtime_error("FSB_SIMD=avx512 requested but CPU lacks avx512f");
        return &detail::avx512_impl;
    }
    if (want != "auto")
        throw std::runtime_error("unknown FSB_SIMD value: " + want);
    if (cpu_has("avx512f")) return &detail::avx512_impl;
    if (cpu_has("avx2") && cpu_has("fma")) return &detail::avx2_impl;
#else
    if (want != "auto" && want != "scalar")
        throw std::runtime_error("FSB_SIMD=" + want + " unavailable on this architecture");
#endif
    return &detail::scalar_impl;
}

}  // namespace

const Impl& active() {
    static const Impl* impl = resolve();
    return *impl;
}

const Impl* impl_by_name(const std::string& name) {
    if (name == "scalar") return &detail::scalar_impl;
#if defined(__x86_64__)
    if (name == "avx2" && cpu_has("avx2") && cpu_has("fma")) return &detail::avx2_impl;
    if (name == "avx512" && cpu_has("avx512f")) return &detail::avx512_impl;
#endif
    return nullptr;
}

}  // namespace fsb::kern
