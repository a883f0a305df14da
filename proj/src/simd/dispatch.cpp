#include <cstdlib>
#include <string>

#include "rsir/simd/kernels.hpp"

namespace rsir::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& select() noexcept {
    const char* forced = std::getenv("RSIR_SIMD");
    if (forced != nullptr) {
        const std::string want(forced);
        if (want == "scalar") return detail::scalar_table();
        if (want == "avx2") {
            if (const auto* t = table_for(Isa::Avx2)) return *t;
        }
        if (want == "neon") {
            if (const auto* t = table_for(Isa::Neon)) return *t;
        }
        // unknown or unavailable request: fall through to auto
    }
    if (const auto* t = table_for(Isa::Avx2)) return *t;
    if (const auto* t = table_for(Isa::Neon)) return *t;
    return detail::scalar_table();
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

const KernelTable* table_for(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return &detail::scalar_table();
        case Isa::Avx2: return cpu_has_avx2() ? detail::avx2_table() : nullptr;
        case Isa::Neon: return detail::neon_table();
    }
    return nullptr;
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
        if (table_for(isa) != nullptr) out.push_back(isa);
    }
    return out;
}

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

}  // namespace rsir::simd
