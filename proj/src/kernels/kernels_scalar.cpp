#include "mcs/kernels.hpp"

namespace mcs::kernels {

namespace {

void chord_sq_scalar(UnitVecsView p, double cx, double cy, double cz, std::span<double> out) {
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = p.x[i] - cx;
        const double dy = p.y[i] - cy;
        const double dz = p.z[i] - cz;
        out[i] = dx * dx + dy * dy + dz * dz;
    }
}

std::size_t within_scalar(UnitVecsView p, double cx, double cy, double cz, double threshold,
                          std::span<std::uint8_t> mask) {
    const std::size_t n = p.size();
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = p.x[i] - cx;
        const double dy = p.y[i] - cy;
        const double dz = p.z[i] - cz;
        const bool in = dx * dx + dy * dy + dz * dz <= threshold;
        mask[i] = in ? 1 : 0;
        count += in;
    }
    return count;
}

void sq_dist_scalar(std::span<const double> points, std::size_t n, std::size_t dims,
                    std::span<const double> centroids, std::size_t k, std::span<double> out) {
    for (std::size_t c = 0; c < k; ++c) {
        const double* cen = centroids.data() + c * dims;
        for (std::size_t i = 0; i < n; ++i) {
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

const KernelTable& scalar_table() noexcept {
    static const KernelTable table{Isa::Scalar, &chord_sq_scalar, &within_scalar, &sq_dist_scalar};
    return table;
}

} // namespace mcs::kernels
