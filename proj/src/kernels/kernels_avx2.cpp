#include <immintrin.h>

#include "cloudtrack/kernels.hpp"

namespace cloudtrack::kernels::avx2 {

void squared_distances(double qx, double qy, double qz, const double* xs, const double* ys,
                       const double* zs, std::size_t n, double* out) {
    const __m256d vx = _mm256_set1_pd(qx);
    const __m256d vy = _mm256_set1_pd(qy);
    const __m256d vz = _mm256_set1_pd(qz);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vz);
        const __m256d xy = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        _mm256_storeu_pd(out + i, _mm256_add_pd(xy, _mm256_mul_pd(dz, dz)));
    }
    scalar::squared_distances(qx, qy, qz, xs + i, ys + i, zs + i, n - i, out + i);
}

void gather_axpy8(const double* weights, const std::uint32_t* cols, std::size_t nnz,
                  const double* rows, double* acc) {
    __m256d lo = _mm256_loadu_pd(acc);
    __m256d hi = _mm256_loadu_pd(acc + 4);
    for (std::size_t k = 0; k < nnz; ++k) {
        const __m256d w = _mm256_set1_pd(weights[k]);
        const double* row = rows + static_cast<std::size_t>(cols[k]) * kSpinWidth;
        lo = _mm256_add_pd(lo, _mm256_mul_pd(w, _mm256_loadu_pd(row)));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(w, _mm256_loadu_pd(row + 4)));
    }
    _mm256_storeu_pd(acc, lo);
    _mm256_storeu_pd(acc + 4, hi);
}

void row_dots8(const double* a, const double* b, std::size_t rows, double* out) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* x = a + i * kSpinWidth;
        const double* y = b + i * kSpinWidth;
        const __m256d plo = _mm256_mul_pd(_mm256_loadu_pd(x), _mm256_loadu_pd(y));
        const __m256d phi = _mm256_mul_pd(_mm256_loadu_pd(x + 4), _mm256_loadu_pd(y + 4));
        const __m256d s = _mm256_add_pd(plo, phi);  // s0 s1 s2 s3
        const __m128d s01 = _mm256_castpd256_pd128(s);
        const __m128d s23 = _mm256_extractf128_pd(s, 1);
        const __m128d t = _mm_add_pd(s01, s23);  // (s0+s2) (s1+s3)
        const __m128d u = _mm_add_sd(t, _mm_unpackhi_pd(t, t));
        out[i] = _mm_cvtsd_f64(u);
    }
}

}  // namespace cloudtrack::kernels::avx2
