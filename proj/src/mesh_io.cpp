#include "shapefilt/mesh_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shapefilt/error.hpp"

namespace shapefilt {

PointField PointField::scalar_field(std::string name, std::vector<double> values) {
    return {std::move(name), std::move(values), false};
}

PointField PointField::vector_field(std::string name, std::vector<double> values) {
    return {std::move(name), std::move(values), true};
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Tokens {
public:
    explicit Tokens(std::string text, std::string source) : in_(std::move(text)), source_(std::move(source)) {}

    bool next(std::string& tok) { return static_cast<bool>(in_ >> tok); }

    std::string word(const char* what) {
        std::string t;
        if (!next(t)) fail(std::string("unexpected end of file, expected ") + what);
        return t;
    }

    long long integer(const char* what) {
        const std::string t = word(what);
        try {
            std::size_t used = 0;
            long long v = std::stoll(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            fail(std::string("expected integer ") + what + ", got '" + t + "'");
        }
    }

    double real(const char* what) {
        const std::string t = word(what);
        try {
            std::size_t used = 0;
            double v = std::stod(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            fail(std::string("expected number ") + what + ", got '" + t + "'");
        }
    }

    void skip_line() {
        std::string rest;
        std::getline(in_, rest);
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source_ + ": " + msg); }

private:
    std::istringstream in_;
    std::string source_;
};

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

} // namespace

VtkData read_vtk(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::istringstream lines(text);
    std::string header, title, format, body;
    std::getline(lines, header);
    if (header.rfind("# vtk DataFile", 0) != 0) throw ParseError(path.string() + ": missing VTK header");
    std::getline(lines, title);
    std::getline(lines, format);
    if (upper(format).find("ASCII") == std::string::npos)
        throw ParseError(path.string() + ": only ASCII legacy VTK is supported");
    std::ostringstream rest;
    rest << lines.rdbuf();
    Tokens tok(rest.str(), path.string());

    VtkData out;
    std::vector<std::vector<Index>> cells;
    std::string t;
    Index point_data = -1;
    while (tok.next(t)) {
        const std::string key = upper(t);
        if (key == "DATASET") {
            if (upper(tok.word("dataset type")) != "UNSTRUCTURED_GRID") tok.fail("only UNSTRUCTURED_GRID is supported");
        } else if (key == "POINTS") {
            const long long n = tok.integer("point count");
            tok.word("point type");
            if (n < 0) tok.fail("negative point count");
            out.nodes.resize(static_cast<std::size_t>(n));
            for (auto& p : out.nodes) {
                p.x = tok.real("coordinate");
                p.y = tok.real("coordinate");
                p.z = tok.real("coordinate");
            }
        } else if (key == "CELLS") {
            const long long m = tok.integer("cell count");
            tok.integer("cell list size");
            cells.resize(static_cast<std::size_t>(m));
            for (auto& c : cells) {
                const long long k = tok.integer("cell size");
                if (k < 0 || k > 64) tok.fail("bad cell size");
                c.resize(static_cast<std::size_t>(k));
                for (auto& v : c) v = static_cast<Index>(tok.integer("cell index"));
            }
        } else if (key == "CELL_TYPES") {
            const long long m = tok.integer("cell type count");
            if (static_cast<std::size_t>(m) != cells.size()) tok.fail("CELL_TYPES count differs from CELLS count");
            for (std::size_t c = 0; c < cells.size(); ++c) {
                const long long type = tok.integer("cell type");
                const auto& v = cells[c];
                if (type == 5) {
                    if (v.size() != 3) tok.fail("triangle cell without 3 nodes");
                    out.triangles.push_back({v[0], v[1], v[2]});
                } else if (type == 10) {
                    if (v.size() != 4) tok.fail("tetra cell without 4 nodes");
                    out.tets.push_back({v[0], v[1], v[2], v[3]});
                } else if (type != 1 && type != 3) {
                    tok.fail("unsupported cell type " + std::to_string(type));
                }
            }
        } else if (key == "POINT_DATA") {
            point_data = static_cast<Index>(tok.integer("point data count"));
        } else if (key == "CELL_DATA") {
            break; // cell data is not used
        } else if (key == "SCALARS" || key == "VECTORS") {
            if (point_data < 0) tok.fail(key + " outside POINT_DATA");
            PointField f;
            f.name = tok.word("field name");
            tok.word("field type");
            f.vector = key == "VECTORS";
            int comps = 3;
            if (!f.vector) {
                tok.skip_line(); // optional component count
                const std::string lut = tok.word("LOOKUP_TABLE");
                if (upper(lut) != "LOOKUP_TABLE") tok.fail("expected LOOKUP_TABLE");
                tok.word("table name");
                comps = 1;
            }
            f.values.resize(static_cast<std::size_t>(point_data) * comps);
            for (auto& v : f.values) v = tok.real("field value");
            out.fields.push_back(std::move(f));
        } else {
            tok.fail("unexpected keyword '" + t + "'");
        }
    }
    return out;
}

SurfaceMesh read_obj(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<Point3> nodes;
    std::vector<Triangle> tris;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key[0] == '#') continue;
        if (key == "v") {
            Point3 p;
            if (!(ls >> p.x >> p.y >> p.z)) fail("bad vertex record");
            nodes.push_back(p);
        } else if (key == "f") {
            std::vector<Index> poly;
            std::string ref;
            while (ls >> ref) {
                long long v = 0;
                try {
                    v = std::stoll(ref.substr(0, ref.find('/')));
                } catch (const std::exception&) {
                    fail("bad face index '" + ref + "'");
                }
                if (v < 0) v += static_cast<long long>(nodes.size());
                else --v;
                if (v < 0 || v >= static_cast<long long>(nodes.size())) fail("face index out of range");
                poly.push_back(static_cast<Index>(v));
            }
            if (poly.size() < 3) fail("face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) tris.push_back({poly[0], poly[k], poly[k + 1]});
        }
    }
    return SurfaceMesh(std::move(nodes), std::move(tris));
}

std::vector<bool> read_design_flags(const std::filesystem::path& path, Index node_count) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    auto fail = [&](const std::string& msg) { throw ParseError(path.string() + ": " + msg); };
    if (!doc.is_object()) fail("design sidecar must be a JSON object");
    for (const auto& [key, value] : doc.items())
        if (key != "version" && key != "default" && key != "ranges" && key != "groups") fail("unknown key '" + key + "'");
    if (doc.value("version", 0) != 1) fail("unsupported design sidecar version");
    std::vector<bool> flags(static_cast<std::size_t>(node_count), doc.value("default", true));
    auto check = [&](long long v) {
        if (v < 0 || v > node_count) fail("node index " + std::to_string(v) + " out of range");
        return static_cast<std::size_t>(v);
    };
    try {
        for (const auto& r : doc.value("ranges", nlohmann::json::array())) {
            const std::size_t b = check(r.at("begin").get<long long>());
            const std::size_t e = check(r.at("end").get<long long>());
            const bool d = r.at("design").get<bool>();
            for (std::size_t i = b; i < e; ++i) flags[i] = d;
        }
        const nlohmann::json groups = doc.value("groups", nlohmann::json::object());
        for (const auto& [name, g] : groups.items()) {
            const bool d = g.at("design").get<bool>();
            for (long long v : g.at("nodes").get<std::vector<long long>>()) {
                const std::size_t i = check(v);
                if (i == static_cast<std::size_t>(node_count)) fail("group '" + name + "' node out of range");
                flags[i] = d;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(e.what());
    }
    return flags;
}

void write_design_flags(const std::filesystem::path& path, const std::vector<bool>& design) {
    nlohmann::json ranges = nlohmann::json::array();
    std::size_t i = 0;
    while (i < design.size()) {
        std::size_t j = i;
        while (j < design.size() && design[j] == design[i]) ++j;
        if (!design[i]) ranges.push_back({{"begin", i}, {"end", j}, {"design", false}});
        i = j;
    }
    nlohmann::json doc = {{"version", 1}, {"default", true}, {"ranges", ranges}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(1) << '\n';
}

namespace {

std::filesystem::path sidecar_for(const std::filesystem::path& path, const std::filesystem::path& explicit_path) {
    if (!explicit_path.empty()) return explicit_path;
    std::filesystem::path p = path;
    p += ".design.json";
    return std::filesystem::exists(p) ? p : std::filesystem::path{};
}

} // namespace

SurfaceMesh load_surface_mesh(const std::filesystem::path& path, const std::filesystem::path& design_sidecar) {
    const std::string ext = path.extension().string();
    SurfaceMesh mesh;
    if (ext == ".obj") {
        mesh = read_obj(path);
    } else if (ext == ".vtk") {
        VtkData d = read_vtk(path);
        if (d.triangles.empty()) throw ParseError(path.string() + ": no triangle cells for a surface mesh");
        mesh = SurfaceMesh(std::move(d.nodes), std::move(d.triangles));
    } else {
        throw ParseError(path.string() + ": unknown mesh extension '" + ext + "'");
    }
    const auto side = sidecar_for(path, design_sidecar);
    if (!side.empty()) mesh.set_design_flags(read_design_flags(side, mesh.node_count()));
    return mesh;
}

VolumeMesh load_volume_mesh(const std::filesystem::path& path, const std::filesystem::path& design_sidecar) {
    if (path.extension() != ".vtk") throw ParseError(path.string() + ": volume meshes must be VTK");
    VtkData d = read_vtk(path);
    if (d.tets.empty()) throw ParseError(path.string() + ": no tetra cells for a volume mesh");
    const Index n = static_cast<Index>(d.nodes.size());
    const auto side = sidecar_for(path, design_sidecar);
    std::vector<bool> design;
    if (!side.empty()) design = read_design_flags(side, n);
    return VolumeMesh(std::move(d.nodes), std::move(d.tets), std::move(design));
}

std::variant<SurfaceMesh, VolumeMesh> load_mesh(const std::filesystem::path& path, MeshKind kind,
                                                const std::filesystem::path& design_sidecar) {
    if (kind == MeshKind::surface) return load_surface_mesh(path, design_sidecar);
    return load_volume_mesh(path, design_sidecar);
}

void write_vtk(const std::filesystem::path& path, std::span<const Point3> nodes, std::span<const Triangle> triangles,
               std::span<const Tetrahedron> tets, const std::vector<PointField>& fields) {
    for (const auto& f : fields)
        if (f.values.size() != nodes.size() * (f.vector ? 3 : 1))
            throw DimensionError("field '" + f.name + "' length does not match the node count");
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw IoError("cannot write " + path.string());
    std::fprintf(fp, "# vtk DataFile Version 3.0\nshapefilt\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    std::fprintf(fp, "POINTS %zu double\n", nodes.size());
    for (const auto& p : nodes) std::fprintf(fp, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    const std::size_t cells = triangles.size() + tets.size();
    std::fprintf(fp, "CELLS %zu %zu\n", cells, 4 * triangles.size() + 5 * tets.size());
    for (const auto& t : triangles) std::fprintf(fp, "3 %d %d %d\n", t[0], t[1], t[2]);
    for (const auto& t : tets) std::fprintf(fp, "4 %d %d %d %d\n", t[0], t[1], t[2], t[3]);
    std::fprintf(fp, "CELL_TYPES %zu\n", cells);
    for (std::size_t i = 0; i < triangles.size(); ++i) std::fputs("5\n", fp);
    for (std::size_t i = 0; i < tets.size(); ++i) std::fputs("10\n", fp);
    if (!fields.empty()) {
        std::fprintf(fp, "POINT_DATA %zu\n", nodes.size());
        for (const auto& f : fields) {
            if (f.vector) {
                std::fprintf(fp, "VECTORS %s double\n", f.name.c_str());
                for (std::size_t i = 0; i < nodes.size(); ++i)
                    std::fprintf(fp, "%.17g %.17g %.17g\n", f.values[3 * i], f.values[3 * i + 1], f.values[3 * i + 2]);
            } else {
                std::fprintf(fp, "SCALARS %s double 1\nLOOKUP_TABLE default\n", f.name.c_str());
                for (double v : f.values) std::fprintf(fp, "%.17g\n", v);
            }
        }
    }
    const bool ok = std::ferror(fp) == 0;
    if (std::fclose(fp) != 0 || !ok) throw IoError("failed writing " + path.string());
}

void write_vtk(const std::filesystem::path& path, const SurfaceMesh& mesh, const std::vector<PointField>& fields) {
    write_vtk(path, mesh.nodes(), mesh.triangles(), {}, fields);
}

void write_vtk(const std::filesystem::path& path, const VolumeMesh& mesh, const std::vector<PointField>& fields) {
    write_vtk(path, mesh.nodes(), {}, mesh.tets(), fields);
}

} // namespace shapefilt
