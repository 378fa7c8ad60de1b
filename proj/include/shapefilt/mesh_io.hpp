#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "shapefilt/mesh.hpp"

namespace shapefilt {

enum class MeshKind { surface, volume };

/// Named per-node field for VTK output. Scalars have one value per node,
/// vectors three (node-major).
struct PointField {
    std::string name;
    std::vector<double> values;
    bool vector = false;

    static PointField scalar_field(std::string name, std::vector<double> values);
    static PointField vector_field(std::string name, std::vector<double> values);
};

/// Raw contents of a legacy VTK unstructured grid. Vertex and line cells are skipped.
struct VtkData {
    std::vector<Point3> nodes;
    std::vector<Triangle> triangles;
    std::vector<Tetrahedron> tets;
    std::vector<PointField> fields;
};

VtkData read_vtk(const std::filesystem::path& path);

/// Wavefront OBJ triangle surface: `v` and `f` records, polygons fan-triangulated.
SurfaceMesh read_obj(const std::filesystem::path& path);

/// Design flags from a sidecar JSON document:
///   {"version": 1, "default": true,
///    "ranges": [{"begin": 0, "end": 10, "design": false}],
///    "groups": {"name": {"nodes": [..], "design": true}}}
/// Ranges are half-open and applied in order, then groups in name order.
std::vector<bool> read_design_flags(const std::filesystem::path& path, Index node_count);
void write_design_flags(const std::filesystem::path& path, const std::vector<bool>& design);

/// Dispatches on extension (.vtk, .obj). A sidecar path may be given for the
/// design flags; otherwise `<path>.design.json` is used when it exists.
std::variant<SurfaceMesh, VolumeMesh> load_mesh(const std::filesystem::path& path, MeshKind kind,
                                                const std::filesystem::path& design_sidecar = {});
SurfaceMesh load_surface_mesh(const std::filesystem::path& path, const std::filesystem::path& design_sidecar = {});
VolumeMesh load_volume_mesh(const std::filesystem::path& path, const std::filesystem::path& design_sidecar = {});

/// Legacy ASCII VTK with 17 significant digits. Byte-identical for identical input.
void write_vtk(const std::filesystem::path& path, const SurfaceMesh& mesh, const std::vector<PointField>& fields = {});
void write_vtk(const std::filesystem::path& path, const VolumeMesh& mesh, const std::vector<PointField>& fields = {});
void write_vtk(const std::filesystem::path& path, std::span<const Point3> nodes, std::span<const Triangle> triangles,
               std::span<const Tetrahedron> tets, const std::vector<PointField>& fields = {});

} // namespace shapefilt
