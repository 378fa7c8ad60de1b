#include <atomic>
#include <cstdlib>
#include <cstring>

#include "backends.hpp"
#include "shapefilt/error.hpp"

namespace shapefilt::simd {

namespace {

Level probe() noexcept {
#if defined(SHAPEFILT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Level::avx2;
#endif
    return Level::scalar;
}

Level initial_level() noexcept {
    const Level detected = probe();
    if (const char* env = std::getenv("SHAPEFILT_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Level::scalar;
    }
    return detected;
}

std::atomic<Level>& current() {
    static std::atomic<Level> level{initial_level()};
    return level;
}

void check_same(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw DimensionError(std::string(what) + ": length mismatch");
}

} // namespace

Level detected_level() noexcept {
    static const Level level = probe();
    return level;
}

Level active_level() noexcept { return current().load(std::memory_order_relaxed); }

Level set_level(Level requested) noexcept {
    const Level granted = (requested == Level::avx2 && detected_level() != Level::avx2) ? Level::scalar : requested;
    current().store(granted, std::memory_order_relaxed);
    return granted;
}

const char* level_name(Level level) noexcept {
    switch (level) {
        case Level::scalar: return "scalar";
        case Level::avx2: return "avx2";
    }
    return "unknown";
}

#if defined(SHAPEFILT_HAVE_AVX2)
#define SHAPEFILT_DISPATCH(fn, ...)                                                     \
    (active_level() == Level::avx2 ? detail::avx2::fn(__VA_ARGS__) : detail::scalar::fn(__VA_ARGS__))
#else
#define SHAPEFILT_DISPATCH(fn, ...) detail::scalar::fn(__VA_ARGS__)
#endif

double dot(std::span<const double> a, std::span<const double> b) {
    check_same(a.size(), b.size(), "dot");
    return SHAPEFILT_DISPATCH(dot, a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    check_same(x.size(), y.size(), "axpy");
    SHAPEFILT_DISPATCH(axpy, alpha, x.data(), y.data(), x.size());
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
    check_same(x.size(), y.size(), "xpby");
    SHAPEFILT_DISPATCH(xpby, x.data(), beta, y.data(), x.size());
}

void multiply_elementwise(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    check_same(a.size(), b.size(), "multiply_elementwise");
    check_same(a.size(), out.size(), "multiply_elementwise");
    SHAPEFILT_DISPATCH(multiply_elementwise, a.data(), b.data(), out.data(), a.size());
}

void csr_multiply(std::span<const Index> offsets, std::span<const Index> columns,
                  std::span<const double> values, std::span<const double> x, std::span<double> y) {
    if (offsets.empty() || offsets.size() - 1 != y.size()) throw DimensionError("csr_multiply: row count mismatch");
    check_same(columns.size(), values.size(), "csr_multiply");
    SHAPEFILT_DISPATCH(csr_multiply, offsets.data(), columns.data(), values.data(), x.data(), y.data(), y.size());
}

void kernel_weighted_sums(const RadialKernel& kernel, const Point3& q, PointsView points,
                          std::span<const Index> idx, std::span<const double* const> channels,
                          std::span<double> out) {
    if (channels.size() > 4) throw DimensionError("kernel_weighted_sums: at most 4 channels");
    check_same(channels.size(), out.size(), "kernel_weighted_sums");
    SHAPEFILT_DISPATCH(kernel_weighted_sums, kernel, q, points, idx.data(), idx.size(), channels.data(),
                       channels.size(), out.data());
}

void kernel_weights(const RadialKernel& kernel, const Point3& q, PointsView points,
                    std::span<const Index> idx, std::span<double> w) {
    check_same(idx.size(), w.size(), "kernel_weights");
    SHAPEFILT_DISPATCH(kernel_weights, kernel, q, points, idx.data(), idx.size(), w.data());
}

#undef SHAPEFILT_DISPATCH

} // namespace shapefilt::simd
