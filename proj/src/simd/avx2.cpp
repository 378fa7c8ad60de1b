// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include "backends.hpp"

#include <immintrin.h>

namespace shapefilt::simd::detail::avx2 {

namespace {

inline double hsum(__m256d v) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

// exp(x) by Cephes-style range reduction and rational approximation; within
// a couple of ulp of std::exp on the finite range, 0 below -708.
inline __m256d exp_pd(__m256d x) {
    const __m256d lo = _mm256_set1_pd(-708.0);
    const __m256d hi = _mm256_set1_pd(709.0);
    const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
    __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, c1, x);
    r = _mm256_fnmadd_pd(n, c2, r);

    const __m256d r2 = _mm256_mul_pd(r, r);
    __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
    p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(3.02994407707441961300e-2));
    p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(9.99999999999999999910e-1));
    p = _mm256_mul_pd(p, r);
    __m256d qv = _mm256_set1_pd(3.00198505138664455042e-6);
    qv = _mm256_fmadd_pd(qv, r2, _mm256_set1_pd(2.52448340349684104192e-3));
    qv = _mm256_fmadd_pd(qv, r2, _mm256_set1_pd(2.27265548208155028766e-1));
    qv = _mm256_fmadd_pd(qv, r2, _mm256_set1_pd(2.00000000000000000009e0));
    __m256d e = _mm256_div_pd(p, _mm256_sub_pd(qv, p));
    e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

    // 2^n from the exponent bits; n + 1023 lies in [1, 2046] after clamping.
    const __m256d magic = _mm256_set1_pd(4503599627370496.0 + 1023.0);
    __m256i bits = _mm256_castpd_si256(_mm256_add_pd(n, magic));
    bits = _mm256_slli_epi64(bits, 52);
    e = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, e);
}

struct KernelLanes {
    __m256d inv_r;
    __m256d r;
    __m256d cutoff;
    __m256d gauss_scale;
    __m256d green_scale;
    KernelShape shape;

    explicit KernelLanes(const RadialKernel& k)
        : inv_r(_mm256_set1_pd(1.0 / k.radius)),
          r(_mm256_set1_pd(k.radius)),
          cutoff(_mm256_set1_pd(k.cutoff)),
          gauss_scale(_mm256_set1_pd(1.0 / (k.radius * std::sqrt(2.0 * std::numbers::pi)))),
          green_scale(_mm256_set1_pd(4.0 * std::numbers::pi / (k.radius * k.radius))),
          shape(k.shape) {}

    __m256d eval(__m256d d) const {
        __m256d w;
        switch (shape) {
            case KernelShape::gaussian: {
                const __m256d t = _mm256_mul_pd(d, inv_r);
                const __m256d arg = _mm256_mul_pd(_mm256_set1_pd(-0.5), _mm256_mul_pd(t, t));
                w = _mm256_mul_pd(exp_pd(arg), gauss_scale);
                break;
            }
            case KernelShape::linear_hat: {
                const __m256d t = _mm256_mul_pd(_mm256_sub_pd(r, d), inv_r);
                w = _mm256_max_pd(t, _mm256_setzero_pd());
                break;
            }
            case KernelShape::green_regularized:
            default: {
                const __m256d num = exp_pd(_mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), d), inv_r));
                const __m256d den = _mm256_fmadd_pd(green_scale, d, _mm256_set1_pd(1.0));
                w = _mm256_div_pd(num, den);
                break;
            }
        }
        const __m256d inside = _mm256_cmp_pd(d, cutoff, _CMP_LE_OQ);
        return _mm256_and_pd(w, inside);
    }
};

inline __m256d gather_distance(const Point3& q, PointsView p, __m128i vidx) {
    const __m256d dx = _mm256_sub_pd(_mm256_i32gather_pd(p.x, vidx, 8), _mm256_set1_pd(q.x));
    const __m256d dy = _mm256_sub_pd(_mm256_i32gather_pd(p.y, vidx, 8), _mm256_set1_pd(q.y));
    const __m256d dz = _mm256_sub_pd(_mm256_i32gather_pd(p.z, vidx, 8), _mm256_set1_pd(q.z));
    __m256d d2 = _mm256_mul_pd(dx, dx);
    d2 = _mm256_fmadd_pd(dy, dy, d2);
    d2 = _mm256_fmadd_pd(dz, dz, d2);
    return _mm256_sqrt_pd(d2);
}

inline double scalar_weight(const RadialKernel& k, const Point3& q, PointsView p, Index j) {
    const double dx = p.x[j] - q.x;
    const double dy = p.y[j] - q.y;
    const double dz = p.z[j] - q.z;
    return radial_kernel_value(k, std::sqrt(dx * dx + dy * dy + dz * dz));
}

} // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(const double* x, double beta, double* y, std::size_t n) {
    const __m256d vb = _mm256_set1_pd(beta);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void multiply_elementwise(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void csr_multiply(const Index* offsets, const Index* columns, const double* values,
                  const double* x, double* y, std::size_t rows) {
    for (std::size_t r = 0; r < rows; ++r) {
        Index k = offsets[r];
        const Index end = offsets[r + 1];
        __m256d acc = _mm256_setzero_pd();
        for (; k + 4 <= end; k += 4) {
            const __m128i vidx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(columns + k));
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(values + k), _mm256_i32gather_pd(x, vidx, 8), acc);
        }
        double s = hsum(acc);
        for (; k < end; ++k) s += values[k] * x[columns[k]];
        y[r] = s;
    }
}

void kernel_weighted_sums(const RadialKernel& kernel, const Point3& q, PointsView points,
                          const Index* idx, std::size_t count, const double* const* channels,
                          std::size_t n_channels, double* out) {
    const KernelLanes lanes(kernel);
    __m256d acc[4] = {_mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd()};
    std::size_t k = 0;
    for (; k + 4 <= count; k += 4) {
        const __m128i vidx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
        const __m256d w = lanes.eval(gather_distance(q, points, vidx));
        for (std::size_t c = 0; c < n_channels; ++c)
            acc[c] = _mm256_fmadd_pd(w, _mm256_i32gather_pd(channels[c], vidx, 8), acc[c]);
    }
    for (std::size_t c = 0; c < n_channels; ++c) out[c] = hsum(acc[c]);
    for (; k < count; ++k) {
        const Index j = idx[k];
        const double w = scalar_weight(kernel, q, points, j);
        for (std::size_t c = 0; c < n_channels; ++c) out[c] += w * channels[c][j];
    }
}

void kernel_weights(const RadialKernel& kernel, const Point3& q, PointsView points,
                    const Index* idx, std::size_t count, double* w) {
    const KernelLanes lanes(kernel);
    std::size_t k = 0;
    for (; k + 4 <= count; k += 4) {
        const __m128i vidx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
        _mm256_storeu_pd(w + k, lanes.eval(gather_distance(q, points, vidx)));
    }
    for (; k < count; ++k) w[k] = scalar_weight(kernel, q, points, idx[k]);
}

} // namespace shapefilt::simd::detail::avx2
