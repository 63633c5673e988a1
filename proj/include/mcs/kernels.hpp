#pragma once

// Batch arithmetic kernels behind the geofence filter and k-means. Each
// kernel has a portable scalar reference and, on x86-64, an AVX2 variant
// chosen at runtime. Both variants evaluate the same operations in the same
// order (no FMA), so their results are bit-identical.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace mcs::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

// Structure-of-arrays view of unit vectors on the sphere.
struct UnitVecsView {
    std::span<const double> x;
    std::span<const double> y;
    std::span<const double> z;

    std::size_t size() const noexcept { return x.size(); }
};

// out[i] = |p_i - c|^2 for unit vectors p_i and centre c.
using ChordSqFn = void (*)(UnitVecsView points, double cx, double cy, double cz,
                           std::span<double> out);

// mask[i] = |p_i - c|^2 <= threshold; returns the number of set entries.
using WithinFn = std::size_t (*)(UnitVecsView points, double cx, double cy, double cz,
                                 double threshold, std::span<std::uint8_t> mask);

// Squared Euclidean distance from every point to every centroid.
// points is dimension-major: points[d * n + i]. centroids is row-major:
// centroids[c * dims + d]. out is row-major n x k: out[i * k + c].
using SqDistFn = void (*)(std::span<const double> points, std::size_t n, std::size_t dims,
                          std::span<const double> centroids, std::size_t k,
                          std::span<double> out);

struct KernelTable {
    Isa isa;
    ChordSqFn chord_sq;
    WithinFn within;
    SqDistFn sq_dist;
};

const KernelTable& scalar_table() noexcept;
#if defined(MCS_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif

// True when this build carries the AVX2 variant and the CPU supports it.
bool avx2_available() noexcept;

// The table used by the library. Selected once: AVX2 when available, unless
// the environment variable MCS_KERNELS=scalar forces the reference path.
const KernelTable& active() noexcept;

// Table for an explicit ISA; falls back to scalar when unavailable.
const KernelTable& table_for(Isa isa) noexcept;

} // namespace mcs::kernels
