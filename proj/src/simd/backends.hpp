#pragma once

#include "shapefilt/simd/kernels.hpp"

namespace shapefilt::simd::detail {

#define SHAPEFILT_SIMD_BACKEND_DECLS                                                            \
    double dot(const double* a, const double* b, std::size_t n);                                \
    void axpy(double alpha, const double* x, double* y, std::size_t n);                         \
    void xpby(const double* x, double beta, double* y, std::size_t n);                          \
    void multiply_elementwise(const double* a, const double* b, double* out, std::size_t n);    \
    void csr_multiply(const Index* offsets, const Index* columns, const double* values,         \
                      const double* x, double* y, std::size_t rows);                            \
    void kernel_weighted_sums(const RadialKernel& kernel, const Point3& q, PointsView points,    \
                              const Index* idx, std::size_t count, const double* const* channels, \
                              std::size_t n_channels, double* out);                             \
    void kernel_weights(const RadialKernel& kernel, const Point3& q, PointsView points,          \
                        const Index* idx, std::size_t count, double* w);

namespace scalar {
SHAPEFILT_SIMD_BACKEND_DECLS
}

#if defined(SHAPEFILT_HAVE_AVX2)
namespace avx2 {
SHAPEFILT_SIMD_BACKEND_DECLS
}
#endif

#undef SHAPEFILT_SIMD_BACKEND_DECLS

} // namespace shapefilt::simd::detail
