#pragma once

#include <span>
#include <vector>

#include "shapefilt/cg.hpp"
#include "shapefilt/fem.hpp"
#include "shapefilt/mesh.hpp"

namespace shapefilt {

struct ResponseValue {
    double value = 0.0;
    std::vector<double> dJdx; ///< 3n, node-major
};

/// Total volume and its exact gradient. Throws InvertedElementError for a
/// non-positive element volume.
ResponseValue volume_response(const VolumeMesh& vm);

struct PointLoad {
    Index node = 0;
    Point3 force;
};

struct StructuralCase {
    ElasticityParams elasticity = ElasticityParams::from_young_poisson();
    std::vector<bool> clamped; ///< per node, all three components fixed
    std::vector<PointLoad> loads;
    CgOptions cg{1e-12, 0, true};
};

/// Compliance 1/2 u^T K u of the clamped linear-elastic model under point
/// loads. The shape gradient is -1/2 u_e^T dK_e/dx u_e per element, with
/// dK_e/dx by central differences of the element matrix (step 1e-6 times
/// the element's mean edge length). Loads are fixed nodal forces.
ResponseValue strain_energy_response(const VolumeMesh& vm, const StructuralCase& sc);

/// Displacements of the structural model (3n, zero on clamped nodes).
std::vector<double> structural_displacement(const VolumeMesh& vm, const StructuralCase& sc);

/// dJ/dx = M (direction repeated on every node).
std::vector<double> synthetic_uniform_sensitivity(const SurfaceMesh& sm, const Point3& direction);

} // namespace shapefilt
