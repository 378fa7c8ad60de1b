#include "shapefilt/implicit_filter.hpp"

#include <algorithm>
#include <cmath>

#include "shapefilt/error.hpp"
#include "shapefilt/explicit_filter.hpp"

namespace shapefilt {

namespace {

std::vector<Index> free_indices(const std::vector<bool>& fixed, Index n, int components) {
    if (!fixed.empty() && fixed.size() != static_cast<std::size_t>(n))
        throw DimensionError("fixed mask length differs from node count");
    std::vector<Index> free;
    free.reserve(static_cast<std::size_t>(n) * components);
    for (Index i = 0; i < n; ++i)
        if (fixed.empty() || !fixed[i])
            for (int c = 0; c < components; ++c) free.push_back(components * i + c);
    return free;
}

std::vector<double> gather(std::span<const double> v, std::span<const Index> idx) {
    std::vector<double> out(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
    return out;
}

std::vector<double> scatter(std::span<const double> v, std::span<const Index> idx, std::size_t n) {
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = v[k];
    return out;
}

} // namespace

SurfaceHelmholtzFilter::SurfaceHelmholtzFilter(const SurfaceMesh& sm, double r_gamma, std::vector<bool> fixed,
                                               CgOptions cg)
    : n_(sm.node_count()), r_gamma_(r_gamma), cg_(cg) {
    mass_ = surface_mass_matrix(sm);
    stiffness_ = surface_lb_stiffness(sm, r_gamma);
    op_ = add(stiffness_, mass_);
    free_ = free_indices(fixed, n_, 1);
    if (free_.size() == static_cast<std::size_t>(n_)) {
        op_ff_ = op_;
        mass_ff_ = mass_;
    } else {
        op_ff_ = op_.submatrix(free_, free_);
        mass_ff_ = mass_.submatrix(free_, free_);
    }
}

std::vector<double> SurfaceHelmholtzFilter::solve_free(std::span<const double> rhs) const {
    const CgResult r = cg_solve(op_ff_, rhs, cg_);
    max_iters_ = std::max(max_iters_, r.iterations);
    if (!r.converged) throw SolverError("surface filter: CG did not converge");
    return r.x;
}

std::vector<double> SurfaceHelmholtzFilter::forward(std::span<const double> s) const {
    if (s.size() != 3 * static_cast<std::size_t>(n_)) throw DimensionError("surface filter: field length must be 3n");
    auto comp = split_components(s);
    std::array<std::vector<double>, 3> out;
    for (int k = 0; k < 3; ++k) {
        const auto rhs = mass_ff_.multiply(gather(comp[k], free_));
        out[k] = scatter(solve_free(rhs), free_, static_cast<std::size_t>(n_));
    }
    return join_components(out);
}

SensitivityMap SurfaceHelmholtzFilter::map_sensitivities(std::span<const double> dJdx) const {
    if (dJdx.size() != 3 * static_cast<std::size_t>(n_))
        throw DimensionError("surface filter: field length must be 3n");
    auto comp = split_components(dJdx);
    std::array<std::vector<double>, 3> big, small;
    for (int k = 0; k < 3; ++k) {
        const auto y = solve_free(gather(comp[k], free_));
        small[k] = scatter(y, free_, static_cast<std::size_t>(n_));
        big[k] = scatter(mass_ff_.multiply(y), free_, static_cast<std::size_t>(n_));
    }
    return {join_components(big), join_components(small)};
}

std::vector<double> SurfaceHelmholtzFilter::numerical_kernel_row(Index node) const {
    if (node < 0 || node >= n_) throw DimensionError("numerical_kernel_row: node out of range");
    std::vector<double> e(static_cast<std::size_t>(n_), 0.0);
    e[node] = 1.0;
    CgOptions opt = cg_;
    opt.tolerance = std::min(opt.tolerance, 1e-12);
    const CgResult r = cg_solve(op_, e, opt);
    if (!r.converged) throw SolverError("numerical kernel: CG did not converge");
    std::vector<double> y = r.x;
    const double peak = y[node];
    for (auto& v : y) v /= peak;
    return y;
}

CsrMatrix design_surface_stiffness(const VolumeMesh& vm, double r_gamma) {
    const DesignSurface ds = extract_design_surface(vm);
    TripletBuffer tb;
    if (ds.surface.triangle_count() > 0) {
        const CsrMatrix k = surface_lb_stiffness(ds.surface, r_gamma);
        for (Index i = 0; i < k.rows(); ++i)
            for (Index p = k.offsets()[i]; p < k.offsets()[i + 1]; ++p)
                tb.add(ds.volume_node[i], ds.volume_node[k.columns()[p]], k.values()[p]);
    }
    return assemble(tb, vm.node_count());
}

BulkSurfaceFilter::BulkSurfaceFilter(const VolumeMesh& vm, Options o) : n_(vm.node_count()), cg_(o.cg) {
    o.radii.validate();
    o.elasticity.validate();
    if (o.stiffening == Stiffening::on) {
        const DesignSurface ds = extract_design_surface(vm);
        const J0Value j0 = resolve_j0(vm, ds.surface, o.elasticity, o.radii.r_gamma, o.radii.beta, o.previous_j0);
        j0_ = j0.value;
        j0_fallback_ = j0.fallback;
        o.radii.j0 = j0_;
    }
    bulk_ = bulk_elastic_stiffness(vm, o.elasticity, o.radii, o.stiffening);
    surface_ = design_surface_stiffness(vm, o.radii.r_gamma).block_expand(3);
    mass_ = bulk_mass_matrix(vm).block_expand(3);
    op_ = add(add(bulk_, surface_), mass_);
    free_ = free_indices(o.fixed, n_, 3);
    if (free_.size() == 3 * static_cast<std::size_t>(n_)) {
        op_ff_ = op_;
        mass_ff_ = mass_;
    } else {
        op_ff_ = op_.submatrix(free_, free_);
        mass_ff_ = mass_.submatrix(free_, free_);
    }
}

std::vector<double> BulkSurfaceFilter::solve_free(std::span<const double> rhs) const {
    const CgResult r = cg_solve(op_ff_, rhs, cg_);
    if (!r.converged) throw SolverError("bulk-surface filter: CG did not converge");
    return r.x;
}

std::vector<double> BulkSurfaceFilter::forward(std::span<const double> s) const {
    if (s.size() != 3 * static_cast<std::size_t>(n_))
        throw DimensionError("bulk-surface filter: field length must be 3n");
    const auto rhs = mass_ff_.multiply(gather(s, free_));
    return scatter(solve_free(rhs), free_, s.size());
}

SensitivityMap BulkSurfaceFilter::map_sensitivities(std::span<const double> dJdx) const {
    if (dJdx.size() != 3 * static_cast<std::size_t>(n_))
        throw DimensionError("bulk-surface filter: field length must be 3n");
    const auto y = solve_free(gather(dJdx, free_));
    return {scatter(mass_ff_.multiply(y), free_, dJdx.size()), scatter(y, free_, dJdx.size())};
}

double numerical_kernel_span(const SurfaceHelmholtzFilter& f, Index node, double level, std::span<const Point3> nodes) {
    const auto y = f.numerical_kernel_row(node);
    double d = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] >= level) d = std::max(d, distance(nodes[i], nodes[node]));
    return 2.0 * d;
}

double helmholtz_radius_for_span(const SurfaceMesh& sm, Index node, double span) {
    if (!(span > 0.0)) throw ConfigError("span must be > 0");
    auto span_of = [&](double r) {
        const SurfaceHelmholtzFilter f(sm, r);
        return numerical_kernel_span(f, node, 0.01, sm.nodes());
    };
    double lo = 0.0, hi = span / 4.0;
    while (span_of(hi) < span) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e3 * span) throw SolverError("helmholtz_radius_for_span: span not reachable on this mesh");
    }
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (span_of(mid) >= span) hi = mid;
        else lo = mid;
    }
    return hi;
}

std::vector<double> sequential_mesh_motion(const VolumeMesh& vm, std::span<const double> boundary_displacement,
                                           const ElasticityParams& ep, const CgOptions& cg) {
    const std::size_t n3 = 3 * static_cast<std::size_t>(vm.node_count());
    if (boundary_displacement.size() != n3) throw DimensionError("mesh motion: displacement length must be 3n");
    // Stiffening (J0/J^e)^2 with a common J0 that drops out of the solution.
    std::vector<double> w(static_cast<std::size_t>(vm.tet_count()));
    for (Index e = 0; e < vm.tet_count(); ++e) {
        const double je = element_jacobian(vm, e);
        if (!(je > 0.0))
            throw InvertedElementError(static_cast<std::size_t>(e),
                                       "element " + std::to_string(e) + " has non-positive Jacobian");
        w[e] = 1.0 / (je * je);
    }
    const CsrMatrix k = weighted_elastic_stiffness(vm, ep, w);
    std::vector<bool> on_boundary(static_cast<std::size_t>(vm.node_count()), false);
    for (Index v : vm.boundary().volume_node) on_boundary[v] = true;
    const auto free = free_indices(on_boundary, vm.node_count(), 3);
    std::vector<double> u(n3, 0.0);
    for (Index v : vm.boundary().volume_node)
        for (int c = 0; c < 3; ++c) u[3 * v + c] = boundary_displacement[3 * v + c];
    if (free.empty()) return u;
    const auto ku = k.multiply(u);
    std::vector<double> rhs(free.size());
    for (std::size_t i = 0; i < free.size(); ++i) rhs[i] = -ku[free[i]];
    const CgResult r = cg_solve(k.submatrix(free, free), rhs, cg);
    if (!r.converged) throw SolverError("mesh motion: CG did not converge");
    for (std::size_t i = 0; i < free.size(); ++i) u[free[i]] = r.x[i];
    return u;
}

} // namespace shapefilt
