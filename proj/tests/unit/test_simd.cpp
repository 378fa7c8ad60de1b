#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "shapefilt/simd/kernels.hpp"
#include "shapefilt/sparse.hpp"
#include "support.hpp"

using namespace shapefilt;
using testing::random_vector;

namespace {

// Runs f once per available level and returns the results.
template <class F>
auto per_level(F&& f) {
    std::vector<decltype(f())> out;
    {
        simd::ScopedLevel s(simd::Level::scalar);
        out.push_back(f());
    }
    {
        simd::ScopedLevel s(simd::Level::avx2);
        out.push_back(f());
    }
    return out;
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0, s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
        s = std::max(s, std::abs(b[i]));
    }
    return s > 0 ? m / s : m;
}

} // namespace

TEST_CASE("level selection honours requests and the detected ceiling") {
    const auto before = simd::active_level();
    CHECK(simd::set_level(simd::Level::scalar) == simd::Level::scalar);
    const auto got = simd::set_level(simd::Level::avx2);
    if (simd::detected_level() == simd::Level::avx2) CHECK(got == simd::Level::avx2);
    else CHECK(got == simd::Level::scalar);
    simd::set_level(before);
    CHECK(std::string(simd::level_name(simd::Level::scalar)) == "scalar");
}

TEST_CASE("dot, axpy, xpby and elementwise products match across levels") {
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 1001u}) {
        const auto a = random_vector(n, 1 + n), b = random_vector(n, 2 + n);
        const auto dots = per_level([&] { return std::vector<double>{simd::dot(a, b)}; });
        CHECK(std::abs(dots[0][0] - dots[1][0]) <= 1e-13 * std::max(1.0, std::abs(dots[0][0])));
        const auto ax = per_level([&] {
            auto y = b;
            simd::axpy(0.37, a, y);
            return y;
        });
        CHECK(rel_diff(ax[1], ax[0]) <= 1e-15);
        const auto xp = per_level([&] {
            auto y = b;
            simd::xpby(a, -1.3, y);
            return y;
        });
        CHECK(rel_diff(xp[1], xp[0]) <= 1e-15);
        const auto me = per_level([&] {
            std::vector<double> o(n);
            simd::multiply_elementwise(a, b, o);
            return o;
        });
        CHECK(me[1] == me[0]);
    }
}

TEST_CASE("csr multiply matches across levels") {
    TripletBuffer t;
    std::mt19937_64 rng(5);
    for (int k = 0; k < 3000; ++k) t.add(static_cast<Index>(rng() % 200), static_cast<Index>(rng() % 200), 1.0 + (rng() % 7));
    const auto a = assemble(t, 200);
    const auto x = random_vector(200, 6);
    const auto r = per_level([&] { return a.multiply(x); });
    CHECK(rel_diff(r[1], r[0]) <= 1e-14);
}

TEST_CASE("kernel weights and weighted sums match across levels for every family") {
    std::vector<Point3> pts;
    const auto c = random_vector(3 * 500, 8, 0.0, 4.0);
    for (int i = 0; i < 500; ++i) pts.push_back({c[3 * i], c[3 * i + 1], c[3 * i + 2]});
    std::vector<double> xs, ys, zs;
    for (const auto& p : pts) {
        xs.push_back(p.x);
        ys.push_back(p.y);
        zs.push_back(p.z);
    }
    const simd::PointsView view{xs.data(), ys.data(), zs.data()};
    std::vector<Index> idx(500);
    for (Index i = 0; i < 500; ++i) idx[i] = i;
    const auto ch0 = random_vector(500, 9), ch1 = random_vector(500, 10), ch2 = random_vector(500, 11);
    const double* chans[3] = {ch0.data(), ch1.data(), ch2.data()};
    for (auto shape : {simd::KernelShape::gaussian, simd::KernelShape::linear_hat, simd::KernelShape::green_regularized}) {
        const simd::RadialKernel k{shape, 0.9, 2.5};
        const Point3 q{2.0, 2.0, 2.0};
        const auto w = per_level([&] {
            std::vector<double> o(idx.size());
            simd::kernel_weights(k, q, view, idx, o);
            return o;
        });
        CHECK(rel_diff(w[1], w[0]) <= 1e-13);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            CHECK(w[0][j] == doctest::Approx(simd::radial_kernel_value(k, distance(q, pts[j]))).epsilon(1e-14));
            CHECK(w[1][j] >= 0.0);
        }
        const auto s = per_level([&] {
            std::vector<double> o(3);
            simd::kernel_weighted_sums(k, q, view, idx, chans, o);
            return o;
        });
        CHECK(rel_diff(s[1], s[0]) <= 1e-12);
    }
}

TEST_CASE("kernel values are exactly zero beyond the cutoff") {
    const simd::RadialKernel k{simd::KernelShape::gaussian, 1.0, 3.0};
    CHECK(simd::radial_kernel_value(k, 3.0000001) == 0.0);
    CHECK(simd::radial_kernel_value(k, 3.0) > 0.0);
}
