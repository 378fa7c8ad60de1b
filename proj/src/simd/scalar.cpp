#include "backends.hpp"

namespace shapefilt::simd::detail::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(const double* x, double beta, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void multiply_elementwise(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void csr_multiply(const Index* offsets, const Index* columns, const double* values,
                  const double* x, double* y, std::size_t rows) {
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (Index k = offsets[r]; k < offsets[r + 1]; ++k) s += values[k] * x[columns[k]];
        y[r] = s;
    }
}

namespace {
inline double weight_at(const RadialKernel& kernel, const Point3& q, PointsView p, Index j) {
    const double dx = p.x[j] - q.x;
    const double dy = p.y[j] - q.y;
    const double dz = p.z[j] - q.z;
    return radial_kernel_value(kernel, std::sqrt(dx * dx + dy * dy + dz * dz));
}
} // namespace

void kernel_weighted_sums(const RadialKernel& kernel, const Point3& q, PointsView points,
                          const Index* idx, std::size_t count, const double* const* channels,
                          std::size_t n_channels, double* out) {
    for (std::size_t c = 0; c < n_channels; ++c) out[c] = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const Index j = idx[k];
        const double w = weight_at(kernel, q, points, j);
        for (std::size_t c = 0; c < n_channels; ++c) out[c] += w * channels[c][j];
    }
}

void kernel_weights(const RadialKernel& kernel, const Point3& q, PointsView points,
                    const Index* idx, std::size_t count, double* w) {
    for (std::size_t k = 0; k < count; ++k) w[k] = weight_at(kernel, q, points, idx[k]);
}

} // namespace shapefilt::simd::detail::scalar
