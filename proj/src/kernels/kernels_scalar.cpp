#include "cloudtrack/kernels.hpp"

namespace cloudtrack::kernels::scalar {

void squared_distances(double qx, double qy, double qz, const double* xs, const double* ys,
                       const double* zs, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        const double dz = zs[i] - qz;
        out[i] = (dx * dx + dy * dy) + dz * dz;
    }
}

void gather_axpy8(const double* weights, const std::uint32_t* cols, std::size_t nnz,
                  const double* rows, double* acc) {
    for (std::size_t k = 0; k < nnz; ++k) {
        const double w = weights[k];
        const double* row = rows + static_cast<std::size_t>(cols[k]) * kSpinWidth;
        for (std::size_t d = 0; d < kSpinWidth; ++d) acc[d] += w * row[d];
    }
}

void row_dots8(const double* a, const double* b, std::size_t rows, double* out) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* x = a + i * kSpinWidth;
        const double* y = b + i * kSpinWidth;
        double p[kSpinWidth];
        for (std::size_t d = 0; d < kSpinWidth; ++d) p[d] = x[d] * y[d];
        // Same association as the 4-lane SIMD reduction: lanes (d, d+4) first.
        const double s0 = p[0] + p[4];
        const double s1 = p[1] + p[5];
        const double s2 = p[2] + p[6];
        const double s3 = p[3] + p[7];
        out[i] = (s0 + s2) + (s1 + s3);
    }
}

}  // namespace cloudtrack::kernels::scalar
