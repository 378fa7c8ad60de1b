#include "shapefilt/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shapefilt/error.hpp"

namespace shapefilt {

PointGrid::PointGrid(std::span<const Point3> points, double cell_size) : points_(points.begin(), points.end()) {
    if (points_.empty()) {
        cell_start_.assign(2, 0);
        return;
    }
    Point3 hi = points_[0];
    lo_ = points_[0];
    for (const auto& p : points_) {
        for (int c = 0; c < 3; ++c) {
            lo_[c] = std::min(lo_[c], p[c]);
            hi[c] = std::max(hi[c], p[c]);
        }
    }
    const Point3 ext = hi - lo_;
    if (cell_size <= 0.0) {
        // About two points per cell on a surface-like set.
        const double diag = norm(ext);
        cell_size = diag > 0.0 ? diag / std::sqrt(static_cast<double>(points_.size()) / 2.0 + 1.0) : 1.0;
    }
    // Cap the cell count to a small multiple of the point count.
    const double max_cells = 8.0 * static_cast<double>(points_.size()) + 64.0;
    for (;;) {
        double cells = 1.0;
        for (int c = 0; c < 3; ++c) cells *= std::floor(ext[c] / cell_size) + 1.0;
        if (cells <= max_cells) break;
        cell_size *= 1.5;
    }
    cell_ = cell_size;
    for (int c = 0; c < 3; ++c) dims_[c] = static_cast<int>(std::floor(ext[c] / cell_)) + 1;

    const std::size_t ncell = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    std::vector<std::size_t> owner(points_.size());
    cell_start_.assign(ncell + 1, 0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        owner[i] = (static_cast<std::size_t>(cell_coord(p.z, 2)) * dims_[1] + cell_coord(p.y, 1)) * dims_[0] +
                   cell_coord(p.x, 0);
        ++cell_start_[owner[i] + 1];
    }
    for (std::size_t c = 0; c < ncell; ++c) cell_start_[c + 1] += cell_start_[c];
    cell_points_.resize(points_.size());
    std::vector<Index> fill(cell_start_.begin(), cell_start_.end() - 1);
    for (std::size_t i = 0; i < points_.size(); ++i) cell_points_[fill[owner[i]]++] = static_cast<Index>(i);
}

int PointGrid::cell_coord(double v, int axis) const {
    const int c = static_cast<int>(std::floor((v - lo_[axis]) / cell_));
    return std::clamp(c, 0, dims_[axis] - 1);
}

void PointGrid::within(const Point3& q, double radius, std::vector<Index>& out) const {
    out.clear();
    if (points_.empty() || !(radius >= 0.0)) return;
    int lo[3], hi[3];
    for (int c = 0; c < 3; ++c) {
        // Widen by one cell so rounding in the bucket coordinate cannot drop a point.
        lo[c] = std::max(0, cell_coord(q[c] - radius, c) - 1);
        hi[c] = std::min(dims_[c] - 1, cell_coord(q[c] + radius, c) + 1);
    }
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                const std::size_t cell = (static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i;
                for (Index s = cell_start_[cell]; s < cell_start_[cell + 1]; ++s) {
                    const Index p = cell_points_[s];
                    if (distance(points_[p], q) <= radius) out.push_back(p);
                }
            }
    std::sort(out.begin(), out.end());
}

std::vector<Index> PointGrid::within(const Point3& q, double radius) const {
    std::vector<Index> out;
    within(q, radius, out);
    return out;
}

std::vector<Index> radius_neighbors_brute_force(std::span<const Point3> points, const Point3& q, double radius) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (distance(points[i], q) <= radius) out.push_back(static_cast<Index>(i));
    return out;
}

std::vector<Index> radius_neighbors(const PointGrid& grid, Index node, double radius) {
    if (node < 0 || static_cast<std::size_t>(node) >= grid.points().size())
        throw DimensionError("radius_neighbors: node index out of range");
    return grid.within(grid.points()[node], radius);
}

std::vector<Index> radius_neighbors(const SurfaceMesh& mesh, Index node, double radius) {
    const PointGrid grid(mesh.nodes(), radius);
    return radius_neighbors(grid, node, radius);
}

SegmentProjection closest_point_on_segment(const Point3& p, const Point3& a, const Point3& b) {
    const Point3 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (t == 0.0) return {a, 0.0};
    if (t == 1.0) return {b, 1.0};
    return {a + t * ab, t};
}

ClosestPoint closest_point_projection(const SurfaceMesh& mesh, const Point3& p) {
    const auto edges = mesh.boundary_edges();
    if (edges.empty()) throw EmptyBoundaryError("closest point projection on a surface without boundary edges");
    const auto nodes = mesh.nodes();
    ClosestPoint best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto proj = closest_point_on_segment(p, nodes[edges[e][0]], nodes[edges[e][1]]);
        const double d = distance(p, proj.point);
        if (d < best.distance) best = {proj.point, d, static_cast<Index>(e)};
    }
    return best;
}

} // namespace shapefilt
