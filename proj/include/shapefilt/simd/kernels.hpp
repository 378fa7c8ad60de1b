#pragma once

// Data-parallel inner loops shared by the solvers and filters. Every routine
// has a scalar reference implementation and, on x86-64, an AVX2/FMA variant.
// The variant is chosen once at runtime from CPUID and can be overridden with
// set_level() or the SHAPEFILT_SIMD environment variable ("scalar"|"avx2").

#include <cmath>
#include <numbers>
#include <span>

#include "shapefilt/types.hpp"

namespace shapefilt::simd {

enum class Level { scalar, avx2 };

Level detected_level() noexcept;
Level active_level() noexcept;
/// Requests a level; requests above the detected level fall back to scalar.
Level set_level(Level requested) noexcept;
const char* level_name(Level level) noexcept;

class ScopedLevel {
public:
    explicit ScopedLevel(Level level) : previous_(active_level()) { set_level(level); }
    ~ScopedLevel() { set_level(previous_); }
    ScopedLevel(const ScopedLevel&) = delete;
    ScopedLevel& operator=(const ScopedLevel&) = delete;

private:
    Level previous_;
};

double dot(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);
/// out = a .* b
void multiply_elementwise(std::span<const double> a, std::span<const double> b, std::span<double> out);
/// y = A x for a CSR matrix.
void csr_multiply(std::span<const Index> offsets, std::span<const Index> columns,
                  std::span<const double> values, std::span<const double> x, std::span<double> y);

enum class KernelShape { gaussian, linear_hat, green_regularized };

struct RadialKernel {
    KernelShape shape = KernelShape::linear_hat;
    double radius = 1.0;
    /// Weights are exactly zero for distances beyond the cutoff.
    double cutoff = 1.0;
};

inline double radial_kernel_value(const RadialKernel& k, double d) {
    if (d > k.cutoff) return 0.0;
    const double r = k.radius;
    switch (k.shape) {
        case KernelShape::gaussian: {
            const double t = d / r;
            return std::exp(-0.5 * t * t) / (r * std::sqrt(2.0 * std::numbers::pi));
        }
        case KernelShape::linear_hat:
            return d < r ? (r - d) / r : 0.0;
        case KernelShape::green_regularized:
            return std::exp(-d / r) / (1.0 + 4.0 * std::numbers::pi * d / (r * r));
    }
    return 0.0;
}

/// Structure-of-arrays view of node coordinates.
struct PointsView {
    const double* x = nullptr;
    const double* y = nullptr;
    const double* z = nullptr;
};

/// out[c] = sum_j F(|q - p[idx[j]]|) * channels[c][idx[j]], for up to 4 channels.
void kernel_weighted_sums(const RadialKernel& kernel, const Point3& q, PointsView points,
                          std::span<const Index> idx, std::span<const double* const> channels,
                          std::span<double> out);

/// w[j] = F(|q - p[idx[j]]|)
void kernel_weights(const RadialKernel& kernel, const Point3& q, PointsView points,
                    std::span<const Index> idx, std::span<double> w);

} // namespace shapefilt::simd
