#include "shapefilt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "shapefilt/error.hpp"

namespace shapefilt {

NodalVectorField::NodalVectorField(Index nodes, double fill) : values_(static_cast<std::size_t>(nodes) * 3, fill) {}

NodalVectorField::NodalVectorField(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() % 3 != 0) throw DimensionError("NodalVectorField: length not divisible by 3");
    for (double v : values_)
        if (!std::isfinite(v)) throw DimensionError("NodalVectorField: non-finite entry");
}

NodalVectorField NodalVectorField::from_points(std::span<const Point3> points) {
    return NodalVectorField(flatten(points));
}

void NodalVectorField::set(Index i, const Point3& p) {
    values_[3 * i] = p.x;
    values_[3 * i + 1] = p.y;
    values_[3 * i + 2] = p.z;
}

std::vector<double> flatten(std::span<const Point3> points) {
    std::vector<double> v;
    v.reserve(points.size() * 3);
    for (const auto& p : points) {
        v.push_back(p.x);
        v.push_back(p.y);
        v.push_back(p.z);
    }
    return v;
}

std::vector<Point3> unflatten(std::span<const double> values) {
    if (values.size() % 3 != 0) throw DimensionError("unflatten: length not divisible by 3");
    std::vector<Point3> p(values.size() / 3);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = {values[3 * i], values[3 * i + 1], values[3 * i + 2]};
    return p;
}

namespace {

void check_nodes(std::span<const Point3> nodes) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (!is_finite(nodes[i])) throw ParseError("node " + std::to_string(i) + " has non-finite coordinates");
}

template <std::size_t N>
void check_indices(std::span<const std::array<Index, N>> cells, std::size_t n_nodes, const char* kind) {
    for (std::size_t e = 0; e < cells.size(); ++e) {
        for (Index v : cells[e]) {
            if (v < 0 || static_cast<std::size_t>(v) >= n_nodes)
                throw TopologyError(std::string(kind) + " " + std::to_string(e) + " references node " +
                                    std::to_string(v) + " out of range");
        }
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = a + 1; b < N; ++b)
                if (cells[e][a] == cells[e][b])
                    throw DegenerateElementError(e, std::string(kind) + " " + std::to_string(e) + " repeats a node");
    }
}

std::vector<Edge> single_edges(std::span<const Triangle> tris) {
    std::map<Edge, int> count;
    for (const auto& t : tris) {
        for (int k = 0; k < 3; ++k) {
            Index a = t[k], b = t[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++count[{a, b}];
        }
    }
    std::vector<Edge> edges;
    for (const auto& [e, c] : count)
        if (c == 1) edges.push_back(e);
    return edges;
}

} // namespace

SurfaceMesh::SurfaceMesh(std::vector<Point3> nodes, std::vector<Triangle> triangles, std::vector<bool> design)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), design_(std::move(design)) {
    check_nodes(nodes_);
    check_indices<3>(triangles_, nodes_.size(), "triangle");
    if (design_.empty()) design_.assign(nodes_.size(), true);
    if (design_.size() != nodes_.size()) throw DimensionError("SurfaceMesh: design flag count differs from node count");
    if (!triangles_.empty()) {
        std::vector<double> areas(triangles_.size());
        double mean = 0.0;
        for (Index t = 0; t < triangle_count(); ++t) mean += (areas[t] = triangle_area(t));
        mean /= static_cast<double>(triangles_.size());
        for (Index t = 0; t < triangle_count(); ++t)
            if (!(areas[t] > 1e-12 * mean))
                throw DegenerateElementError(static_cast<std::size_t>(t),
                                             "triangle " + std::to_string(t) + " has zero area");
    }
    boundary_edges_ = single_edges(triangles_);
}

SurfaceMesh SurfaceMesh::with_nodes(std::vector<Point3> nodes) const {
    if (nodes.size() != nodes_.size()) throw DimensionError("with_nodes: node count differs");
    SurfaceMesh m;
    m.nodes_ = std::move(nodes);
    m.triangles_ = triangles_;
    m.boundary_edges_ = boundary_edges_;
    m.design_ = design_;
    return m;
}

void SurfaceMesh::set_design_flags(std::vector<bool> design) {
    if (design.size() != nodes_.size()) throw DimensionError("design flag count differs from node count");
    design_ = std::move(design);
}

Point3 SurfaceMesh::area_vector(Index t) const {
    const auto& tri = triangles_[t];
    return 0.5 * cross(nodes_[tri[1]] - nodes_[tri[0]], nodes_[tri[2]] - nodes_[tri[0]]);
}

double SurfaceMesh::triangle_area(Index t) const { return norm(area_vector(t)); }

double SurfaceMesh::area() const {
    double a = 0.0;
    for (Index t = 0; t < triangle_count(); ++t) a += triangle_area(t);
    return a;
}

std::vector<bool> SurfaceMesh::boundary_node_mask() const {
    std::vector<bool> mask(nodes_.size(), false);
    for (const auto& e : boundary_edges_) mask[e[0]] = mask[e[1]] = true;
    return mask;
}

double tet_signed_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
    return dot(b - a, cross(c - a, d - a)) / 6.0;
}

BoundarySurface extract_boundary(std::span<const Point3> nodes, std::span<const Tetrahedron> tets) {
    // Face k of a tet is opposite vertex k; the listed order is outward for a
    // positively oriented tet.
    static constexpr int kFace[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    struct FaceRef {
        Index tet;
        int local;
        int count;
    };
    std::map<std::array<Index, 3>, FaceRef> faces;
    for (Index e = 0; e < static_cast<Index>(tets.size()); ++e) {
        for (int k = 0; k < 4; ++k) {
            std::array<Index, 3> key{tets[e][kFace[k][0]], tets[e][kFace[k][1]], tets[e][kFace[k][2]]};
            std::sort(key.begin(), key.end());
            auto [it, inserted] = faces.try_emplace(key, FaceRef{e, k, 0});
            if (++it->second.count > 2)
                throw TopologyError("non-manifold face shared by more than two tetrahedra (tet " + std::to_string(e) + ")");
        }
    }
    struct Face {
        Index tet;
        Triangle verts;
    };
    std::vector<Face> boundary_faces;
    for (const auto& [key, ref] : faces) {
        if (ref.count != 1) continue;
        const auto& t = tets[ref.tet];
        Triangle tri{t[kFace[ref.local][0]], t[kFace[ref.local][1]], t[kFace[ref.local][2]]};
        // Orient away from the opposite vertex regardless of tet orientation.
        const Point3 n = cross(nodes[tri[1]] - nodes[tri[0]], nodes[tri[2]] - nodes[tri[0]]);
        if (dot(n, nodes[t[ref.local]] - nodes[tri[0]]) > 0.0) std::swap(tri[1], tri[2]);
        boundary_faces.push_back({ref.tet, tri});
    }
    std::sort(boundary_faces.begin(), boundary_faces.end(), [](const Face& a, const Face& b) {
        return a.tet != b.tet ? a.tet < b.tet : a.verts < b.verts;
    });

    BoundarySurface out;
    out.local_node.assign(nodes.size(), -1);
    for (const auto& f : boundary_faces)
        for (Index v : f.verts) out.local_node[v] = 0;
    for (Index v = 0; v < static_cast<Index>(nodes.size()); ++v) {
        if (out.local_node[v] < 0) continue;
        out.local_node[v] = static_cast<Index>(out.volume_node.size());
        out.volume_node.push_back(v);
    }
    std::vector<Point3> local_nodes;
    local_nodes.reserve(out.volume_node.size());
    for (Index v : out.volume_node) local_nodes.push_back(nodes[v]);
    std::vector<Triangle> tris;
    tris.reserve(boundary_faces.size());
    for (const auto& f : boundary_faces) {
        tris.push_back({out.local_node[f.verts[0]], out.local_node[f.verts[1]], out.local_node[f.verts[2]]});
        out.face_tet.push_back(f.tet);
    }
    out.surface = SurfaceMesh(std::move(local_nodes), std::move(tris));
    return out;
}

VolumeMesh::VolumeMesh(std::vector<Point3> nodes, std::vector<Tetrahedron> tets, std::vector<bool> design)
    : nodes_(std::move(nodes)), tets_(std::move(tets)), design_(std::move(design)) {
    check_nodes(nodes_);
    check_indices<4>(tets_, nodes_.size(), "tetrahedron");
    if (design_.empty()) design_.assign(nodes_.size(), true);
    if (design_.size() != nodes_.size()) throw DimensionError("VolumeMesh: design flag count differs from node count");
    if (!tets_.empty()) {
        std::vector<double> vol(tets_.size());
        double mean = 0.0;
        for (Index e = 0; e < tet_count(); ++e) mean += std::abs(vol[e] = tet_volume(e));
        mean /= static_cast<double>(tets_.size());
        for (Index e = 0; e < tet_count(); ++e) {
            if (!(std::abs(vol[e]) > 1e-12 * mean))
                throw DegenerateElementError(static_cast<std::size_t>(e),
                                             "tetrahedron " + std::to_string(e) + " has zero volume");
            if (vol[e] < 0.0) std::swap(tets_[e][2], tets_[e][3]);
        }
    }
    boundary_ = extract_boundary(nodes_, tets_);
    std::vector<bool> local(boundary_.volume_node.size());
    for (std::size_t i = 0; i < local.size(); ++i) local[i] = design_[boundary_.volume_node[i]];
    boundary_.surface.set_design_flags(std::move(local));
}

VolumeMesh VolumeMesh::with_nodes(std::vector<Point3> nodes) const {
    if (nodes.size() != nodes_.size()) throw DimensionError("with_nodes: node count differs");
    VolumeMesh m;
    std::vector<Point3> local;
    local.reserve(boundary_.volume_node.size());
    for (Index v : boundary_.volume_node) local.push_back(nodes[v]);
    m.nodes_ = std::move(nodes);
    m.tets_ = tets_;
    m.design_ = design_;
    m.boundary_.volume_node = boundary_.volume_node;
    m.boundary_.local_node = boundary_.local_node;
    m.boundary_.face_tet = boundary_.face_tet;
    m.boundary_.surface = boundary_.surface.with_nodes(std::move(local));
    return m;
}

void VolumeMesh::set_design_flags(std::vector<bool> design) {
    if (design.size() != nodes_.size()) throw DimensionError("design flag count differs from node count");
    design_ = std::move(design);
    std::vector<bool> local(boundary_.volume_node.size());
    for (std::size_t i = 0; i < local.size(); ++i) local[i] = design_[boundary_.volume_node[i]];
    boundary_.surface.set_design_flags(std::move(local));
}

double VolumeMesh::tet_volume(Index e) const {
    const auto& t = tets_[e];
    return tet_signed_volume(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]], nodes_[t[3]]);
}

double VolumeMesh::volume() const {
    double v = 0.0;
    for (Index e = 0; e < tet_count(); ++e) v += tet_volume(e);
    return v;
}

double element_jacobian(std::span<const Point3> nodes, const Tetrahedron& t) {
    return 6.0 * tet_signed_volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]);
}

double element_jacobian(const VolumeMesh& vm, Index e) { return element_jacobian(vm.nodes(), vm.tets()[e]); }

double min_jacobian(std::span<const Point3> nodes, std::span<const Tetrahedron> tets) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : tets) m = std::min(m, element_jacobian(nodes, t));
    return m;
}

double bounding_box_diagonal(std::span<const Point3> nodes) {
    if (nodes.empty()) return 0.0;
    Point3 lo = nodes[0], hi = nodes[0];
    for (const auto& p : nodes) {
        for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], p[c]);
            hi[c] = std::max(hi[c], p[c]);
        }
    }
    return norm(hi - lo);
}

DesignSurface extract_design_surface(const VolumeMesh& vm) {
    const auto& b = vm.boundary();
    const auto& flags = vm.design_flags();
    DesignSurface out;
    std::vector<Index> local(vm.node_count(), -1);
    std::vector<Triangle> tris;
    const auto faces = b.surface.triangles();
    for (Index f = 0; f < static_cast<Index>(faces.size()); ++f) {
        Triangle vt{b.volume_node[faces[f][0]], b.volume_node[faces[f][1]], b.volume_node[faces[f][2]]};
        if (!(flags[vt[0]] && flags[vt[1]] && flags[vt[2]])) continue;
        out.boundary_face.push_back(f);
        tris.push_back(vt);
        for (Index v : vt) local[v] = 0;
    }
    for (Index v = 0; v < vm.node_count(); ++v) {
        if (local[v] < 0) continue;
        local[v] = static_cast<Index>(out.volume_node.size());
        out.volume_node.push_back(v);
    }
    for (auto& t : tris)
        for (auto& v : t) v = local[v];
    std::vector<Point3> pts;
    pts.reserve(out.volume_node.size());
    for (Index v : out.volume_node) pts.push_back(vm.nodes()[v]);
    out.surface = SurfaceMesh(std::move(pts), std::move(tris));
    return out;
}

std::vector<bool> fixed_node_mask(const VolumeMesh& vm) {
    std::vector<bool> fixed(vm.node_count(), false);
    const DesignSurface ds = extract_design_surface(vm);
    for (Index v : vm.boundary().volume_node) fixed[v] = true;
    for (Index v : ds.volume_node) fixed[v] = false;
    for (const auto& e : ds.surface.boundary_edges()) fixed[ds.volume_node[e[0]]] = fixed[ds.volume_node[e[1]]] = true;
    return fixed;
}

} // namespace shapefilt
