#pragma once

#include <span>
#include <vector>

#include "shapefilt/types.hpp"

namespace shapefilt {

/// Flat node-major, xyz-minor vector of per-node 3-vectors.
class NodalVectorField {
public:
    NodalVectorField() = default;
    explicit NodalVectorField(Index nodes, double fill = 0.0);
    /// Throws DimensionError unless the length is divisible by 3 and all entries are finite.
    explicit NodalVectorField(std::vector<double> values);
    static NodalVectorField from_points(std::span<const Point3> points);

    Index nodes() const { return static_cast<Index>(values_.size() / 3); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    Point3 at(Index i) const { return {values_[3 * i], values_[3 * i + 1], values_[3 * i + 2]}; }
    void set(Index i, const Point3& p);

private:
    std::vector<double> values_;
};

std::vector<double> flatten(std::span<const Point3> points);
std::vector<Point3> unflatten(std::span<const double> values);

/// Triangulated surface with its boundary edges (edges incident to exactly
/// one triangle, sorted lexicographically) and per-node design flags.
class SurfaceMesh {
public:
    SurfaceMesh() = default;
    /// Validates indices, finiteness and triangle areas (relative threshold
    /// 1e-12 of the mean area). Empty design flags mean "all design".
    SurfaceMesh(std::vector<Point3> nodes, std::vector<Triangle> triangles, std::vector<bool> design = {});

    std::span<const Point3> nodes() const { return nodes_; }
    std::span<const Triangle> triangles() const { return triangles_; }
    std::span<const Edge> boundary_edges() const { return boundary_edges_; }
    const std::vector<bool>& design_flags() const { return design_; }

    Index node_count() const { return static_cast<Index>(nodes_.size()); }
    Index triangle_count() const { return static_cast<Index>(triangles_.size()); }
    bool is_closed() const { return boundary_edges_.empty(); }

    /// Same topology, new coordinates. No validation: used for geometry updates.
    SurfaceMesh with_nodes(std::vector<Point3> nodes) const;
    void set_design_flags(std::vector<bool> design);

    /// Half the cross product of the edge vectors (outward by vertex order).
    Point3 area_vector(Index t) const;
    double triangle_area(Index t) const;
    double area() const;
    /// Nodes touched by a boundary edge.
    std::vector<bool> boundary_node_mask() const;

private:
    std::vector<Point3> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<Edge> boundary_edges_;
    std::vector<bool> design_;
};

/// Boundary of a tetrahedral mesh: outward-oriented faces with local node
/// numbering and the maps to and from volume node indices.
struct BoundarySurface {
    SurfaceMesh surface;
    std::vector<Index> volume_node; ///< local boundary index -> volume index
    std::vector<Index> local_node;  ///< volume index -> local boundary index or -1
    std::vector<Index> face_tet;    ///< owning tetrahedron of each boundary face
};

/// Faces shared by exactly one tet, oriented away from the opposite vertex.
/// Throws TopologyError for faces shared by more than two tets.
BoundarySurface extract_boundary(std::span<const Point3> nodes, std::span<const Tetrahedron> tets);

double tet_signed_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d);

class VolumeMesh {
public:
    VolumeMesh() = default;
    /// Validates indices and volumes (relative threshold 1e-12 of the mean
    /// volume), reorients negatively oriented tets and extracts the boundary.
    VolumeMesh(std::vector<Point3> nodes, std::vector<Tetrahedron> tets, std::vector<bool> design = {});

    std::span<const Point3> nodes() const { return nodes_; }
    std::span<const Tetrahedron> tets() const { return tets_; }
    const BoundarySurface& boundary() const { return boundary_; }
    const std::vector<bool>& design_flags() const { return design_; }

    Index node_count() const { return static_cast<Index>(nodes_.size()); }
    Index tet_count() const { return static_cast<Index>(tets_.size()); }

    VolumeMesh with_nodes(std::vector<Point3> nodes) const;
    void set_design_flags(std::vector<bool> design);

    double tet_volume(Index e) const;
    double volume() const;

private:
    std::vector<Point3> nodes_;
    std::vector<Tetrahedron> tets_;
    BoundarySurface boundary_;
    std::vector<bool> design_;
};

/// Signed reference-to-physical Jacobian determinant of a P1 tet: 6 x signed volume.
double element_jacobian(const VolumeMesh& vm, Index e);
double element_jacobian(std::span<const Point3> nodes, const Tetrahedron& t);
double min_jacobian(std::span<const Point3> nodes, std::span<const Tetrahedron> tets);

double bounding_box_diagonal(std::span<const Point3> nodes);

/// Boundary faces whose three nodes are all flagged design, as a surface with
/// its own numbering. `volume_node` maps back to volume indices.
struct DesignSurface {
    SurfaceMesh surface;
    std::vector<Index> volume_node;
    std::vector<Index> boundary_face; ///< index into the volume boundary faces
};
DesignSurface extract_design_surface(const VolumeMesh& vm);

/// Nodes held fixed during shape updates: boundary nodes off the design
/// surface plus the nodes on the design surface's boundary curve.
std::vector<bool> fixed_node_mask(const VolumeMesh& vm);

} // namespace shapefilt
