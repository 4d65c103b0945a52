#include <atomic>
#include <string>
#include <stdexcept>

#include "cloudtrack/kernels.hpp"

namespace cloudtrack::kernels {
namespace {

constexpr Table kScalar{Level::scalar, &scalar::squared_distances, &scalar::gather_axpy8,
                        &scalar::row_dots8};

#if defined(CLOUDTRACK_ENABLE_AVX2)
constexpr Table kAvx2{Level::avx2, &avx2::squared_distances, &avx2::gather_axpy8,
                      &avx2::row_dots8};
#endif

bool cpu_has_avx2() {
#if defined(CLOUDTRACK_ENABLE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Table* detect() {
#if defined(CLOUDTRACK_ENABLE_AVX2)
    if (cpu_has_avx2()) return &kAvx2;
#endif
    return &kScalar;
}

std::atomic<const Table*>& forced() {
    static std::atomic<const Table*> value{nullptr};
    return value;
}

}  // namespace

std::string_view level_name(Level level) {
    switch (level) {
        case Level::scalar: return "scalar";
        case Level::avx2: return "avx2";
    }
    return "unknown";
}

const Table& active() {
    if (const Table* f = forced().load(std::memory_order_acquire)) return *f;
    static const Table* best = detect();
    return *best;
}

const Table& table(Level level) {
    switch (level) {
        case Level::scalar: return kScalar;
        case Level::avx2:
#if defined(CLOUDTRACK_ENABLE_AVX2)
            if (cpu_has_avx2()) return kAvx2;
#endif
            break;
    }
    throw std::runtime_error("kernel level unavailable: " + std::string(level_name(level)));
}

std::vector<Level> available_levels() {
    std::vector<Level> levels{Level::scalar};
    if (cpu_has_avx2()) levels.push_back(Level::avx2);
    return levels;
}

void force_level(Level level) { forced().store(&table(level), std::memory_order_release); }

void reset_level() { forced().store(nullptr, std::memory_order_release); }

}  // namespace cloudtrack::kernels
