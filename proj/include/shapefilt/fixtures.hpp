#pragma once

#include <cstdint>
#include <string>

#include "shapefilt/mesh.hpp"

namespace shapefilt {

/// Square plate of `resolution` x `resolution` cells with alternating
/// diagonals in the z = 0 plane. Interior nodes are jittered by up to
/// `perturbation` times the cell size per in-plane axis.
struct PlateOptions {
    int resolution = 40;
    double length = 0.0; ///< 0 selects `resolution`, i.e. unit cells
    double perturbation = 0.1;
    std::uint64_t seed = 1;
};
SurfaceMesh make_plate(const PlateOptions& o);

/// Square plate with a central circular hole, meshed by a graded O-grid so
/// the spacing is fine at the hole and coarse at the corners.
struct PerforatedPlateOptions {
    int resolution = 16; ///< radial layers; 4 x resolution angular divisions
    double length = 2.0;
    double hole_radius = 0.3;
    double grading = 1.8;
    double perturbation = 0.1;
    std::uint64_t seed = 1;
};
SurfaceMesh make_perforated_plate(const PerforatedPlateOptions& o);

/// Block [0, 2] x [0, 1] x [0, 0.75] split into 6 tets per hex cell with a
/// rectangular pocket cut from the top. Design nodes lie on the top face and
/// the pocket walls; every other boundary node is non-design.
struct NotchedBlockOptions {
    int resolution = 8; ///< hex cells along y
    double perturbation = 0.0;
    std::uint64_t seed = 1;
};
VolumeMesh make_notched_block(const NotchedBlockOptions& o);

/// Unit ball from a smoothly mapped cube grid of 6-tet hex cells. All nodes are design.
struct BallOptions {
    int resolution = 8; ///< hex cells per cube edge
};
VolumeMesh make_ball(const BallOptions& o);

/// Mean edge length of a triangle surface.
double mean_edge_length(const SurfaceMesh& sm);

} // namespace shapefilt
