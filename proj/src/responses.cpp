#include "shapefilt/responses.hpp"

#include <cmath>
#include <string>

#include "shapefilt/error.hpp"
#include "shapefilt/parallel.hpp"

namespace shapefilt {

ResponseValue volume_response(const VolumeMesh& vm) {
    ResponseValue r;
    r.dJdx.assign(3 * static_cast<std::size_t>(vm.node_count()), 0.0);
    const auto x = vm.nodes();
    for (Index e = 0; e < vm.tet_count(); ++e) {
        const auto& t = vm.tets()[e];
        const Point3 e1 = x[t[1]] - x[t[0]], e2 = x[t[2]] - x[t[0]], e3 = x[t[3]] - x[t[0]];
        const double v = dot(e1, cross(e2, e3)) / 6.0;
        if (!(v > 0.0))
            throw InvertedElementError(static_cast<std::size_t>(e),
                                       "element " + std::to_string(e) + " has non-positive volume");
        r.value += v;
        const Point3 g[4] = {Point3{}, (1.0 / 6.0) * cross(e2, e3), (1.0 / 6.0) * cross(e3, e1),
                             (1.0 / 6.0) * cross(e1, e2)};
        const Point3 g0 = -1.0 * (g[1] + g[2] + g[3]);
        for (int c = 0; c < 3; ++c) r.dJdx[3 * t[0] + c] += g0[c];
        for (int a = 1; a < 4; ++a)
            for (int c = 0; c < 3; ++c) r.dJdx[3 * t[a] + c] += g[a][c];
    }
    return r;
}

namespace {

void check_case(const VolumeMesh& vm, const StructuralCase& sc) {
    if (sc.clamped.size() != static_cast<std::size_t>(vm.node_count()))
        throw DimensionError("structural case: clamped mask length differs from node count");
    for (const auto& l : sc.loads)
        if (l.node < 0 || l.node >= vm.node_count()) throw DimensionError("structural case: load node out of range");
}

} // namespace

std::vector<double> structural_displacement(const VolumeMesh& vm, const StructuralCase& sc) {
    check_case(vm, sc);
    const std::size_t n3 = 3 * static_cast<std::size_t>(vm.node_count());
    std::vector<double> f(n3, 0.0);
    for (const auto& l : sc.loads)
        for (int c = 0; c < 3; ++c) f[3 * l.node + c] += l.force[c];
    std::vector<Index> free;
    for (Index i = 0; i < vm.node_count(); ++i)
        if (!sc.clamped[i])
            for (int c = 0; c < 3; ++c) free.push_back(3 * i + c);
    std::vector<double> u(n3, 0.0);
    if (free.empty()) return u;
    std::vector<double> rhs(free.size());
    bool any = false;
    for (std::size_t k = 0; k < free.size(); ++k) any |= (rhs[k] = f[free[k]]) != 0.0;
    if (!any) return u;
    const CsrMatrix k = structural_stiffness(vm, sc.elasticity).submatrix(free, free);
    const CgResult r = cg_solve(k, rhs, sc.cg);
    if (!r.converged) throw SolverError("structural solve did not converge (is the model restrained?)");
    for (std::size_t i = 0; i < free.size(); ++i) u[free[i]] = r.x[i];
    return u;
}

ResponseValue strain_energy_response(const VolumeMesh& vm, const StructuralCase& sc) {
    const auto u = structural_displacement(vm, sc);
    ResponseValue r;
    for (const auto& l : sc.loads)
        for (int c = 0; c < 3; ++c) r.value += 0.5 * l.force[c] * u[3 * l.node + c];
    r.dJdx.assign(u.size(), 0.0);
    const auto x = vm.nodes();
    const auto tets = vm.tets();
    std::vector<std::array<double, 12>> grad(tets.size());
    parallel_for(0, tets.size(), [&](std::size_t b, std::size_t e_end) {
        for (std::size_t e = b; e < e_end; ++e) {
            const auto& t = tets[e];
            std::array<Point3, 4> p{x[t[0]], x[t[1]], x[t[2]], x[t[3]]};
            double ue[12];
            bool moving = false;
            for (int a = 0; a < 4; ++a)
                for (int c = 0; c < 3; ++c) moving |= (ue[3 * a + c] = u[3 * t[a] + c]) != 0.0;
            grad[e].fill(0.0);
            if (!moving) continue;
            double edge = 0.0;
            for (int a = 0; a < 4; ++a)
                for (int b2 = a + 1; b2 < 4; ++b2) edge += distance(p[a], p[b2]);
            const double h = 1e-6 * edge / 6.0;
            auto energy = [&](const std::array<Point3, 4>& q) {
                const auto k = tet_elastic_stiffness(std::span<const Point3, 4>(q), sc.elasticity);
                double s = 0.0;
                for (int i = 0; i < 12; ++i) {
                    double row = 0.0;
                    for (int j = 0; j < 12; ++j) row += k[i][j] * ue[j];
                    s += ue[i] * row;
                }
                return s;
            };
            for (int a = 0; a < 4; ++a)
                for (int c = 0; c < 3; ++c) {
                    auto q = p;
                    q[a][c] = p[a][c] + h;
                    const double ep = energy(q);
                    q[a][c] = p[a][c] - h;
                    const double em = energy(q);
                    grad[e][3 * a + c] = -0.5 * (ep - em) / (2.0 * h);
                }
        }
    });
    for (std::size_t e = 0; e < tets.size(); ++e)
        for (int a = 0; a < 4; ++a)
            for (int c = 0; c < 3; ++c) r.dJdx[3 * tets[e][a] + c] += grad[e][3 * a + c];
    return r;
}

std::vector<double> synthetic_uniform_sensitivity(const SurfaceMesh& sm, const Point3& direction) {
    const auto m = surface_mass_matrix(sm).row_sums();
    std::vector<double> g(3 * m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (int c = 0; c < 3; ++c) g[3 * i + c] = m[i] * direction[c];
    return g;
}

} // namespace shapefilt
