#pragma once

#include <optional>
#include <span>
#include <vector>

#include "shapefilt/cg.hpp"
#include "shapefilt/fem.hpp"
#include "shapefilt/mesh.hpp"
#include "shapefilt/sparse.hpp"

namespace shapefilt {

struct SensitivityMap {
    std::vector<double> dJds; ///< discrete control sensitivities
    std::vector<double> djds; ///< scaled (mass-free) control sensitivities
};

/// Helmholtz filter on a surface: x = (K + M)^-1 M s per Cartesian
/// component. Nodes flagged in `fixed` are held at zero increment; the
/// filter then acts on the free block only.
class SurfaceHelmholtzFilter {
public:
    SurfaceHelmholtzFilter(const SurfaceMesh& sm, double r_gamma, std::vector<bool> fixed = {}, CgOptions cg = {});

    std::vector<double> forward(std::span<const double> s) const;
    SensitivityMap map_sensitivities(std::span<const double> dJdx) const;
    std::vector<double> transpose_apply(std::span<const double> dJdx) const { return map_sensitivities(dJdx).dJds; }

    /// Solves (K + M) y = e_node and scales y so that y(node) = 1.
    std::vector<double> numerical_kernel_row(Index node) const;

    const CsrMatrix& op() const { return op_; }
    const CsrMatrix& mass() const { return mass_; }
    const CsrMatrix& stiffness() const { return stiffness_; }
    double r_gamma() const { return r_gamma_; }
    Index node_count() const { return n_; }
    /// Largest CG iteration count seen by this filter.
    Index max_cg_iterations() const { return max_iters_; }

private:
    Index n_ = 0;
    double r_gamma_ = 0.0;
    CgOptions cg_;
    CsrMatrix mass_, stiffness_, op_;
    std::vector<Index> free_;
    CsrMatrix op_ff_, mass_ff_;
    mutable Index max_iters_ = 0;

    std::vector<double> solve_free(std::span<const double> rhs_free) const;
};

/// Bulk-surface filter on a tetrahedral mesh: elastic pseudo-solid (with
/// optional Jacobian stiffening) plus bulk mass plus surface Laplace-Beltrami
/// stiffness on the design-surface nodes. Fields are 3n over volume nodes.
class BulkSurfaceFilter {
public:
    struct Options {
        ElasticityParams elasticity = ElasticityParams::from_young_poisson();
        FilterRadii radii;
        Stiffening stiffening = Stiffening::on;
        std::optional<double> previous_j0;
        std::vector<bool> fixed; ///< per volume node; empty means none
        CgOptions cg;
    };

    BulkSurfaceFilter(const VolumeMesh& vm, Options options);

    std::vector<double> forward(std::span<const double> s) const;
    /// dj/ds = op^-1 dJ/dx, dJ/ds = M dj/ds (free block).
    SensitivityMap map_sensitivities(std::span<const double> dJdx) const;
    std::vector<double> transpose_apply(std::span<const double> dJdx) const { return map_sensitivities(dJdx).dJds; }

    const CsrMatrix& op() const { return op_; }
    const CsrMatrix& mass() const { return mass_; }
    const CsrMatrix& bulk_stiffness() const { return bulk_; }
    const CsrMatrix& surface_stiffness() const { return surface_; }
    double j0() const { return j0_; }
    bool j0_fallback() const { return j0_fallback_; }
    Index node_count() const { return n_; }

private:
    Index n_ = 0;
    CgOptions cg_;
    double j0_ = 0.0;
    bool j0_fallback_ = false;
    CsrMatrix mass_, bulk_, surface_, op_;
    std::vector<Index> free_;
    CsrMatrix op_ff_, mass_ff_;

    std::vector<double> solve_free(std::span<const double> rhs_free) const;
};

/// Laplace-Beltrami stiffness of the design surface scattered onto volume
/// node indices (scalar, n x n).
CsrMatrix design_surface_stiffness(const VolumeMesh& vm, double r_gamma);

/// Distance from `node` to the farthest node whose value in the
/// peak-normalized numerical kernel row is at least `level`, doubled.
double numerical_kernel_span(const SurfaceHelmholtzFilter& f, Index node, double level,
                             std::span<const Point3> nodes);

/// Helmholtz radius whose numerical kernel at `node` has the given 1%-decay
/// span, by bisection.
double helmholtz_radius_for_span(const SurfaceMesh& sm, Index node, double span);

/// Jacobian-stiffened pseudo-elastic motion: boundary displacement as
/// Dirichlet data on every boundary node, returns the full 3n displacement.
std::vector<double> sequential_mesh_motion(const VolumeMesh& vm, std::span<const double> boundary_displacement,
                                           const ElasticityParams& ep = ElasticityParams::from_young_poisson(),
                                           const CgOptions& cg = {});

} // namespace shapefilt
