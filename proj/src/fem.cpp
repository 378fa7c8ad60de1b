#include "shapefilt/fem.hpp"

#include <cmath>
#include <string>

#include "shapefilt/error.hpp"
#include "shapefilt/parallel.hpp"

namespace shapefilt {

ElasticityParams ElasticityParams::from_young_poisson(double young, double poisson) {
    if (!(young > 0.0) || !(poisson >= 0.0 && poisson < 0.5))
        throw ConfigError("elasticity: need E > 0 and 0 <= nu < 0.5");
    ElasticityParams ep;
    ep.lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    ep.mu = young / (2.0 * (1.0 + poisson));
    return ep;
}

void ElasticityParams::validate() const {
    if (!(mu > 0.0) || !(lambda >= 0.0)) throw ConfigError("elasticity: need mu > 0 and lambda >= 0");
}

void FilterRadii::validate() const {
    if (!(r_gamma >= 0.0)) throw ConfigError("filter radii: r_gamma must be >= 0");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("filter radii: beta must lie in (0, 1]");
    if (!(r_omega >= 0.0)) throw ConfigError("filter radii: r_omega must be >= 0");
}

TriangleMatrix triangle_mass(const Point3& a, const Point3& b, const Point3& c) {
    const double area = 0.5 * norm(cross(b - a, c - a));
    TriangleMatrix m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
    return m;
}

TriangleMatrix triangle_lb_stiffness(const Point3& a, const Point3& b, const Point3& c) {
    const Point3 e[3] = {c - b, a - c, b - a};
    const double area = 0.5 * norm(cross(e[2], -1.0 * e[1]));
    TriangleMatrix k{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) k[i][j] = dot(e[i], e[j]) / (4.0 * area);
    // Diagonal from the off-diagonals so rows sum to zero to rounding.
    for (int i = 0; i < 3; ++i) k[i][i] = -(k[i][(i + 1) % 3] + k[i][(i + 2) % 3]);
    return k;
}

TetMatrix tet_mass(std::span<const Point3, 4> x) {
    const double v = tet_signed_volume(x[0], x[1], x[2], x[3]);
    TetMatrix m{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] = std::abs(v) / 20.0 * (i == j ? 2.0 : 1.0);
    return m;
}

std::array<Point3, 4> tet_gradients(std::span<const Point3, 4> x) {
    const Point3 e1 = x[1] - x[0], e2 = x[2] - x[0], e3 = x[3] - x[0];
    const double det = dot(e1, cross(e2, e3));
    std::array<Point3, 4> g;
    g[1] = (1.0 / det) * cross(e2, e3);
    g[2] = (1.0 / det) * cross(e3, e1);
    g[3] = (1.0 / det) * cross(e1, e2);
    g[0] = -1.0 * (g[1] + g[2] + g[3]);
    return g;
}

TetElasticMatrix tet_elastic_stiffness(std::span<const Point3, 4> x, const ElasticityParams& ep) {
    const double v = std::abs(tet_signed_volume(x[0], x[1], x[2], x[3]));
    const auto g = tet_gradients(x);
    TetElasticMatrix k{};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const double gg = dot(g[a], g[b]);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    k[3 * a + i][3 * b + j] =
                        v * (ep.lambda * g[a][i] * g[b][j] + ep.mu * g[a][j] * g[b][i] + (i == j ? ep.mu * gg : 0.0));
        }
    // Exact symmetry.
    for (int r = 0; r < 12; ++r)
        for (int c = r + 1; c < 12; ++c) k[c][r] = k[r][c];
    return k;
}

namespace {

std::array<Point3, 4> tet_points(std::span<const Point3> nodes, const Tetrahedron& t) {
    return {nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]};
}

template <class ElementMatrix, std::size_t K, class Cells>
CsrMatrix assemble_scalar(const Cells& cells, Index n, const std::vector<ElementMatrix>& mats) {
    TripletBuffer tb;
    tb.reserve(cells.size() * K * K);
    for (std::size_t e = 0; e < cells.size(); ++e)
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j) tb.add(cells[e][i], cells[e][j], mats[e][i][j]);
    return assemble(tb, n);
}

void check_triangle(const SurfaceMesh& sm, Index t) {
    if (!(sm.triangle_area(t) > 0.0))
        throw DegenerateElementError(static_cast<std::size_t>(t), "triangle " + std::to_string(t) + " has zero area");
}

} // namespace

SparseSymMatrix surface_mass_matrix(const SurfaceMesh& sm) {
    const auto tris = sm.triangles();
    const auto x = sm.nodes();
    std::vector<TriangleMatrix> mats(tris.size());
    parallel_for(0, tris.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            check_triangle(sm, static_cast<Index>(t));
            mats[t] = triangle_mass(x[tris[t][0]], x[tris[t][1]], x[tris[t][2]]);
        }
    });
    return assemble_scalar<TriangleMatrix, 3>(tris, sm.node_count(), mats);
}

SparseSymMatrix surface_lb_stiffness(const SurfaceMesh& sm, double r_gamma) {
    if (!(r_gamma >= 0.0)) throw ConfigError("surface stiffness: r_gamma must be >= 0");
    const auto tris = sm.triangles();
    const auto x = sm.nodes();
    const double r2 = r_gamma * r_gamma;
    std::vector<TriangleMatrix> mats(tris.size());
    parallel_for(0, tris.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            check_triangle(sm, static_cast<Index>(t));
            auto k = triangle_lb_stiffness(x[tris[t][0]], x[tris[t][1]], x[tris[t][2]]);
            for (auto& row : k)
                for (auto& v : row) v *= r2;
            mats[t] = k;
        }
    });
    return assemble_scalar<TriangleMatrix, 3>(tris, sm.node_count(), mats);
}

SparseSymMatrix bulk_mass_matrix(const VolumeMesh& vm) {
    const auto tets = vm.tets();
    const auto x = vm.nodes();
    std::vector<TetMatrix> mats(tets.size());
    parallel_for(0, tets.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            const auto p = tet_points(x, tets[t]);
            mats[t] = tet_mass(std::span<const Point3, 4>(p));
        }
    });
    return assemble_scalar<TetMatrix, 4>(tets, vm.node_count(), mats);
}

std::vector<double> element_radius_squared(const VolumeMesh& vm, const FilterRadii& radii, Stiffening stiffening) {
    std::vector<double> w(static_cast<std::size_t>(vm.tet_count()));
    for (Index e = 0; e < vm.tet_count(); ++e) {
        if (stiffening == Stiffening::off) {
            w[e] = radii.r_omega * radii.r_omega;
            continue;
        }
        const double je = element_jacobian(vm, e);
        if (!(je > 0.0))
            throw InvertedElementError(static_cast<std::size_t>(e),
                                       "element " + std::to_string(e) + " has non-positive Jacobian");
        const double r = radii.j0 / je;
        w[e] = r * r;
    }
    return w;
}

SparseSymMatrix weighted_elastic_stiffness(const VolumeMesh& vm, const ElasticityParams& ep,
                                           std::span<const double> element_weight) {
    ep.validate();
    if (element_weight.size() != static_cast<std::size_t>(vm.tet_count()))
        throw DimensionError("element weight count differs from tet count");
    const auto tets = vm.tets();
    const auto x = vm.nodes();
    std::vector<TetElasticMatrix> mats(tets.size());
    parallel_for(0, tets.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            const auto p = tet_points(x, tets[t]);
            mats[t] = tet_elastic_stiffness(std::span<const Point3, 4>(p), ep);
        }
    });
    TripletBuffer tb;
    tb.reserve(tets.size() * 144);
    for (std::size_t e = 0; e < tets.size(); ++e) {
        const double w = element_weight[e];
        for (int a = 0; a < 4; ++a)
            for (int i = 0; i < 3; ++i)
                for (int b = 0; b < 4; ++b)
                    for (int j = 0; j < 3; ++j)
                        tb.add(3 * tets[e][a] + i, 3 * tets[e][b] + j, w * mats[e][3 * a + i][3 * b + j]);
    }
    return assemble(tb, 3 * vm.node_count());
}

SparseSymMatrix bulk_elastic_stiffness(const VolumeMesh& vm, const ElasticityParams& ep, const FilterRadii& radii,
                                       Stiffening stiffening) {
    const auto w = element_radius_squared(vm, radii, stiffening);
    return weighted_elastic_stiffness(vm, ep, w);
}

SparseSymMatrix structural_stiffness(const VolumeMesh& vm, const ElasticityParams& ep) {
    const std::vector<double> w(static_cast<std::size_t>(vm.tet_count()), 1.0);
    return weighted_elastic_stiffness(vm, ep, w);
}

namespace {

double quadratic_form(const CsrMatrix& a, std::span<const double> x) {
    const auto ax = a.multiply(x);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * ax[i];
    return s;
}

} // namespace

double compute_j0(const VolumeMesh& vm, const SurfaceMesh& surface, const ElasticityParams& ep, double r_gamma,
                  double beta) {
    std::vector<double> w(static_cast<std::size_t>(vm.tet_count()));
    for (Index e = 0; e < vm.tet_count(); ++e) {
        const double je = element_jacobian(vm, e);
        if (!(je > 0.0))
            throw InvertedElementError(static_cast<std::size_t>(e),
                                       "element " + std::to_string(e) + " has non-positive Jacobian");
        w[e] = 1.0 / je;
    }
    const double den = quadratic_form(weighted_elastic_stiffness(vm, ep, w), flatten(vm.nodes()));
    if (!(den > 0.0)) throw SolverError("J0: bulk energy of the geometry vanishes; use the fallback value");
    const CsrMatrix kg = surface_lb_stiffness(surface, 1.0).block_expand(3);
    const double num = quadratic_form(kg, flatten(surface.nodes()));
    return std::max(0.0, beta * r_gamma * r_gamma * num / den);
}

J0Value resolve_j0(const VolumeMesh& vm, const SurfaceMesh& surface, const ElasticityParams& ep, double r_gamma,
                   double beta, std::optional<double> previous) {
    try {
        const double v = compute_j0(vm, surface, ep, r_gamma, beta);
        if (v > 0.0 || r_gamma == 0.0) return {v, false};
    } catch (const SolverError&) {
    }
    if (previous) return {*previous, true};
    return {beta * r_gamma * r_gamma * surface.area() / vm.volume(), true};
}

std::array<std::vector<double>, 6> rigid_body_modes(std::span<const Point3> nodes) {
    const std::size_t n = nodes.size();
    Point3 c{};
    for (const auto& p : nodes) c += p;
    if (n > 0) c *= 1.0 / static_cast<double>(n);
    std::array<std::vector<double>, 6> modes;
    for (auto& m : modes) m.assign(3 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Point3 d = nodes[i] - c;
        for (int k = 0; k < 3; ++k) modes[k][3 * i + k] = 1.0;
        // omega x d for omega = e_x, e_y, e_z
        modes[3][3 * i + 1] = -d.z;
        modes[3][3 * i + 2] = d.y;
        modes[4][3 * i + 0] = d.z;
        modes[4][3 * i + 2] = -d.x;
        modes[5][3 * i + 0] = -d.y;
        modes[5][3 * i + 1] = d.x;
    }
    return modes;
}

} // namespace shapefilt
