#include <immintrin.h>

#include "mcs/kernels.hpp"

namespace mcs::kernels {

namespace {

inline __m256d sq_norm3(__m256d dx, __m256d dy, __m256d dz) {
    return _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                         _mm256_mul_pd(dz, dz));
}

void chord_sq_avx2(UnitVecsView p, double cx, double cy, double cz, std::span<double> out) {
    const std::size_t n = p.size();
    const __m256d vx = _mm256_set1_pd(cx);
    const __m256d vy = _mm256_set1_pd(cy);
    const __m256d vz = _mm256_set1_pd(cz);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(p.x.data() + i), vx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(p.y.data() + i), vy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(p.z.data() + i), vz);
        _mm256_storeu_pd(out.data() + i, sq_norm3(dx, dy, dz));
    }
    for (; i < n; ++i) {
        const double dx = p.x[i] - cx;
        const double dy = p.y[i] - cy;
        const double dz = p.z[i] - cz;
        out[i] = dx * dx + dy * dy + dz * dz;
    }
}

std::size_t within_avx2(UnitVecsView p, double cx, double cy, double cz, double threshold,
                        std::span<std::uint8_t> mask) {
    const std::size_t n = p.size();
    const __m256d vx = _mm256_set1_pd(cx);
    const __m256d vy = _mm256_set1_pd(cy);
    const __m256d vz = _mm256_set1_pd(cz);
    const __m256d vt = _mm256_set1_pd(threshold);
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(p.x.data() + i), vx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(p.y.data() + i), vy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(p.z.data() + i), vz);
        const int bits = _mm256_movemask_pd(_mm256_cmp_pd(sq_norm3(dx, dy, dz), vt, _CMP_LE_OQ));
        for (int lane = 0; lane < 4; ++lane) {
            const std::uint8_t in = (bits >> lane) & 1;
            mask[i + lane] = in;
            count += in;
        }
    }
    for (; i < n; ++i) {
        const double dx = p.x[i] - cx;
        const double dy = p.y[i] - cy;
        const double dz = p.z[i] - cz;
        const bool in = dx * dx + dy * dy + dz * dz <= threshold;
        mask[i] = in ? 1 : 0;
        count += in;
    }
    return count;
}

void sq_dist_avx2(std::span<const double> points, std::size_t n, std::size_t dims,
                  std::span<const double> centroids, std::size_t k, std::span<double> out) {
    alignas(32) double lanes[4];
    for (std::size_t c = 0; c < k; ++c) {
        const double* cen = centroids.data() + c * dims;
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t d = 0; d < dims; ++d) {
                const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(points.data() + d * n + i),
                                                   _mm256_set1_pd(cen[d]));
                acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
            }
            _mm256_store_pd(lanes, acc);
            for (int lane = 0; lane < 4; ++lane) out[(i + lane) * k + c] = lanes[lane];
        }
        for (; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t d = 0; d < dims; ++d) {
                const double diff = points[d * n + i] - cen[d];
                acc = acc + diff * diff;
            }
            out[i * k + c] = acc;
        }
    }
}

} // namespace

const KernelTable& avx2_table() noexcept {
    static const KernelTable table{Isa::Avx2, &chord_sq_avx2, &within_avx2, &sq_dist_avx2};
    return table;
}

} // namespace mcs::kernels
