#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation; SIMD variants are selected at runtime from what the CPU
// supports and must agree with the reference bit for bit.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace cloudtrack::kernels {

/// Fixed row width of relaxed spin vectors. Ranks below this are zero-padded.
inline constexpr std::size_t kSpinWidth = 8;

enum class Level { scalar, avx2 };

std::string_view level_name(Level level);

struct Table {
    Level level;

    // out[i] = (xs[i]-qx)^2 + (ys[i]-qy)^2 + (zs[i]-qz)^2, evaluated as
    // ((dx*dx + dy*dy) + dz*dz).
    void (*squared_distances)(double qx, double qy, double qz, const double* xs, const double* ys,
                              const double* zs, std::size_t n, double* out);

    // acc[0..8) += sum_k weights[k] * rows[cols[k]*8 .. +8), accumulated in k order.
    void (*gather_axpy8)(const double* weights, const std::uint32_t* cols, std::size_t nnz,
                         const double* rows, double* acc);

    // Per-row dot products: out[i] = sum_d a[i*8+d] * b[i*8+d], summed as a
    // pairwise tree ((0+4)+(2+6)) + ((1+5)+(3+7)) so that lanes map onto SIMD adds.
    void (*row_dots8)(const double* a, const double* b, std::size_t rows, double* out);
};

/// Table for the best level the running CPU supports (or the forced level).
const Table& active();

/// Table for a specific level; throws if unavailable on this CPU/build.
const Table& table(Level level);

std::vector<Level> available_levels();

/// Forces the level returned by active(). Intended for tests and benchmarks.
void force_level(Level level);
void reset_level();

namespace scalar {
void squared_distances(double qx, double qy, double qz, const double* xs, const double* ys,
                       const double* zs, std::size_t n, double* out);
void gather_axpy8(const double* weights, const std::uint32_t* cols, std::size_t nnz,
                  const double* rows, double* acc);
void row_dots8(const double* a, const double* b, std::size_t rows, double* out);
}  // namespace scalar

#if defined(CLOUDTRACK_ENABLE_AVX2)
namespace avx2 {
void squared_distances(double qx, double qy, double qz, const double* xs, const double* ys,
                       const double* zs, std::size_t n, double* out);
void gather_axpy8(const double* weights, const std::uint32_t* cols, std::size_t nnz,
                  const double* rows, double* acc);
void row_dots8(const double* a, const double* b, std::size_t rows, double* out);
}  // namespace avx2
#endif

}  // namespace cloudtrack::kernels
