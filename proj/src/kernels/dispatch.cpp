#include <cstdlib>
#include <string_view>

#include "tables.hpp"

namespace rdlab::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(RDLAB_ENABLE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Table& select() {
    if (const char* forced = std::getenv("RDLAB_KERNELS")) {
        const std::string_view want{forced};
        if (want == "scalar") return scalar::kTable;
        if (want == "avx2" && supported(Isa::Avx2)) return table(Isa::Avx2);
    }
    return supported(Isa::Avx2) ? table(Isa::Avx2) : scalar::kTable;
}

}  // namespace

bool supported(Isa isa) {
    if (isa == Isa::Scalar) return true;
    static const bool avx2 = cpu_has_avx2();
    return avx2;
}

const Table& table(Isa isa) {
#if defined(RDLAB_ENABLE_AVX2)
    if (isa == Isa::Avx2 && supported(Isa::Avx2)) return avx2::kTable;
#endif
    (void)isa;
    return scalar::kTable;
}

const Table& active() {
    static const Table& chosen = select();
    return chosen;
}

std::string_view name(Isa isa) {
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

}  // namespace rdlab::kernels
