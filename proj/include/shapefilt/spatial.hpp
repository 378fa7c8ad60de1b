#pragma once

#include <span>
#include <vector>

#include "shapefilt/mesh.hpp"

namespace shapefilt {

/// Uniform bucket grid over a fixed point set for fixed-radius queries.
class PointGrid {
public:
    PointGrid() = default;
    /// `cell_size` <= 0 picks one from the bounding box and point count.
    PointGrid(std::span<const Point3> points, double cell_size = 0.0);

    /// Indices with distance(points[i], q) <= radius, ascending. Identical to
    /// a brute-force scan with the same comparison.
    std::vector<Index> within(const Point3& q, double radius) const;
    void within(const Point3& q, double radius, std::vector<Index>& out) const;

    std::span<const Point3> points() const { return points_; }
    double cell_size() const { return cell_; }

private:
    std::vector<Point3> points_;
    Point3 lo_{};
    double cell_ = 1.0;
    int dims_[3] = {1, 1, 1};
    std::vector<Index> cell_start_;
    std::vector<Index> cell_points_;

    int cell_coord(double v, int axis) const;
};

std::vector<Index> radius_neighbors_brute_force(std::span<const Point3> points, const Point3& q, double radius);

/// Nodes within `radius` of node `node` (the node itself included), ascending.
std::vector<Index> radius_neighbors(const SurfaceMesh& mesh, Index node, double radius);
std::vector<Index> radius_neighbors(const PointGrid& grid, Index node, double radius);

struct SegmentProjection {
    Point3 point;
    double t = 0.0; ///< position along the segment in [0, 1]
};
SegmentProjection closest_point_on_segment(const Point3& p, const Point3& a, const Point3& b);

struct ClosestPoint {
    Point3 point;
    double distance = 0.0;
    Index edge = -1; ///< index into boundary_edges()
};

/// Nearest point on the boundary edge polyline. Ties keep the lowest edge
/// index. Throws EmptyBoundaryError on a closed surface.
ClosestPoint closest_point_projection(const SurfaceMesh& mesh, const Point3& p);

} // namespace shapefilt
