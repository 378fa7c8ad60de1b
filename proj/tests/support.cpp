#include "support.hpp"

#include <algorithm>
#include <cmath>

namespace testing {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

double inner(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(inner(a, a)); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Eigen::MatrixXd dense(const shapefilt::CsrMatrix& a) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = a.offsets()[i]; k < a.offsets()[i + 1]; ++k) d(i, a.columns()[k]) += a.values()[k];
    return d;
}

shapefilt::CsrMatrix sparse_from_dense(const Eigen::MatrixXd& a) {
    shapefilt::TripletBuffer t;
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0) t.add(i, j, a(i, j));
    return shapefilt::assemble(t, static_cast<Index>(a.rows()), static_cast<Index>(a.cols()));
}

shapefilt::VolumeMesh unit_tet() {
    return shapefilt::VolumeMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1, 2, 3}});
}

shapefilt::VolumeMesh unit_cube() {
    std::vector<Point3> p{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    std::vector<shapefilt::Tetrahedron> t{{0, 1, 2, 6}, {0, 2, 3, 6}, {0, 3, 7, 6},
                                          {0, 7, 4, 6}, {0, 4, 5, 6}, {0, 5, 1, 6}};
    return shapefilt::VolumeMesh(std::move(p), std::move(t));
}

shapefilt::SurfaceMesh grid_surface(int nx, int ny) {
    std::vector<Point3> p;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) p.push_back({double(i), double(j), 0.0});
    std::vector<shapefilt::Triangle> t;
    auto id = [&](int i, int j) { return static_cast<Index>(j * (nx + 1) + i); };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return shapefilt::SurfaceMesh(std::move(p), std::move(t));
}

double rel(double a, double b, double floor) { return std::abs(a - b) / std::max(std::abs(b), floor); }

} // namespace testing
