#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "shapefilt/mesh.hpp"
#include "shapefilt/sparse.hpp"

namespace shapefilt {

struct ElasticityParams {
    double lambda = 0.0;
    double mu = 0.5;

    /// Defaults E = 1, nu = 0.3.
    static ElasticityParams from_young_poisson(double young = 1.0, double poisson = 0.3);
    void validate() const;
};

/// Radii of the bulk-surface filter. `j0` is filled in by compute_j0;
/// `r_omega` is the uniform bulk radius used when stiffening is off.
struct FilterRadii {
    double r_gamma = 1.0;
    double beta = 1.0;
    double j0 = 0.0;
    double r_omega = 1.0;

    void validate() const;
};

enum class Stiffening { off, on };

using TriangleMatrix = std::array<std::array<double, 3>, 3>;
using TetMatrix = std::array<std::array<double, 4>, 4>;
using TetElasticMatrix = std::array<std::array<double, 12>, 12>;

/// Consistent P1 triangle mass: area/12 * (1 + delta_ij).
TriangleMatrix triangle_mass(const Point3& a, const Point3& b, const Point3& c);
/// P1 Laplace-Beltrami element stiffness (cotangent weights), unit radius.
TriangleMatrix triangle_lb_stiffness(const Point3& a, const Point3& b, const Point3& c);
/// Consistent P1 tet mass: V/20 * (1 + delta_ij).
TetMatrix tet_mass(std::span<const Point3, 4> x);
/// Shape-function gradients of a P1 tet, one row per vertex.
std::array<Point3, 4> tet_gradients(std::span<const Point3, 4> x);
/// V * B^T C B with dof order 3 * vertex + component.
TetElasticMatrix tet_elastic_stiffness(std::span<const Point3, 4> x, const ElasticityParams& ep);

SparseSymMatrix surface_mass_matrix(const SurfaceMesh& sm);
SparseSymMatrix surface_lb_stiffness(const SurfaceMesh& sm, double r_gamma);
SparseSymMatrix bulk_mass_matrix(const VolumeMesh& vm);

/// Per-element squared bulk radius: (j0 / J^e)^2 with stiffening, r_omega^2 without.
/// Throws InvertedElementError for a non-positive Jacobian when stiffening is on.
std::vector<double> element_radius_squared(const VolumeMesh& vm, const FilterRadii& radii, Stiffening stiffening);

/// 3n x 3n sum of r_e^2 * V_e * B^T C B.
SparseSymMatrix bulk_elastic_stiffness(const VolumeMesh& vm, const ElasticityParams& ep, const FilterRadii& radii,
                                       Stiffening stiffening);
/// Same with caller-given per-element weights.
SparseSymMatrix weighted_elastic_stiffness(const VolumeMesh& vm, const ElasticityParams& ep,
                                           std::span<const double> element_weight);
/// Unscaled structural stiffness.
SparseSymMatrix structural_stiffness(const VolumeMesh& vm, const ElasticityParams& ep);

/// beta * r_gamma^2 * (x_G^T K_G x_G) / (x^T K_J x), with K_G the unit-radius
/// Laplace-Beltrami stiffness of `surface` and K_J the elastic stiffness with
/// element weights 1/J^e. Throws SolverError when the denominator vanishes.
double compute_j0(const VolumeMesh& vm, const SurfaceMesh& surface, const ElasticityParams& ep, double r_gamma,
                  double beta);

struct J0Value {
    double value = 0.0;
    bool fallback = false;
};
/// compute_j0 with the fallback: previous value when given, otherwise
/// beta * r_gamma^2 * area / volume.
J0Value resolve_j0(const VolumeMesh& vm, const SurfaceMesh& surface, const ElasticityParams& ep, double r_gamma,
                   double beta, std::optional<double> previous = std::nullopt);

/// The six rigid-body modes (3 translations, 3 linearized rotations about
/// the centroid) as 3n vectors.
std::array<std::vector<double>, 6> rigid_body_modes(std::span<const Point3> nodes);

} // namespace shapefilt
