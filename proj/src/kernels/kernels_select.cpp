#include <cstdlib>
#include <string_view>

#include "mcs/kernels.hpp"

namespace mcs::kernels {

std::string_view to_string(Isa isa) noexcept {
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool avx2_available() noexcept {
#if defined(MCS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable& table_for(Isa isa) noexcept {
#if defined(MCS_HAVE_AVX2)
    if (isa == Isa::Avx2 && avx2_available()) return avx2_table();
#endif
    (void)isa;
    return scalar_table();
}

const KernelTable& active() noexcept {
    static const KernelTable& chosen = [] () -> const KernelTable& {
        const char* forced = std::getenv("MCS_KERNELS");
        if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_table();
        return table_for(Isa::Avx2);
    }();
    return chosen;
}

} // namespace mcs::kernels
