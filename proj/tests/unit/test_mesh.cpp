#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <map>
#include <sstream>

#include <unistd.h>

#include "shapefilt/error.hpp"
#include "shapefilt/fixtures.hpp"
#include "shapefilt/mesh.hpp"
#include "shapefilt/mesh_io.hpp"
#include "shapefilt/spatial.hpp"
#include "support.hpp"

using namespace shapefilt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("shapefilt_mesh_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// All faces of all tets, counted by sorted vertex triple.
std::map<std::array<Index, 3>, int> face_counts(std::span<const Tetrahedron> tets) {
    std::map<std::array<Index, 3>, int> c;
    for (const auto& t : tets)
        for (int skip = 0; skip < 4; ++skip) {
            std::array<Index, 3> f{};
            int k = 0;
            for (int v = 0; v < 4; ++v)
                if (v != skip) f[k++] = t[v];
            std::sort(f.begin(), f.end());
            ++c[f];
        }
    return c;
}

} // namespace

TEST_CASE("VTK file with one unit tet") {
    TempDir d;
    write_text(d / "tet.vtk", "# vtk DataFile Version 3.0\none tet\nASCII\nDATASET UNSTRUCTURED_GRID\n"
                              "POINTS 4 double\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
                              "CELLS 1 5\n4 0 1 2 3\nCELL_TYPES 1\n10\n");
    const auto vm = load_volume_mesh(d / "tet.vtk");
    CHECK(vm.node_count() == 4);
    CHECK(vm.tet_count() == 1);
    CHECK(vm.boundary().surface.triangle_count() == 4);
    CHECK(vm.boundary().volume_node.size() == 4);
}

TEST_CASE("OBJ unit square of two triangles has four boundary edges") {
    TempDir d;
    write_text(d / "sq.obj", "# square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1/1 3/3 4/4\n");
    const auto sm = load_surface_mesh(d / "sq.obj");
    CHECK(sm.triangle_count() == 2);
    CHECK(sm.boundary_edges().size() == 4);
    write_text(d / "quad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4 -3 -2 -1\n");
    CHECK(read_obj(d / "quad.obj").triangle_count() == 2);
}

TEST_CASE("zero-area triangle is rejected with its index") {
    TempDir d;
    write_text(d / "bad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 2 0 0\nf 1 2 3\nf 1 2 4\n");
    try {
        load_surface_mesh(d / "bad.obj");
        FAIL("expected a degenerate element error");
    } catch (const DegenerateElementError& e) {
        CHECK(e.element() == 1);
    }
    CHECK_THROWS_AS(VolumeMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, {{0, 1, 2, 3}}), DegenerateElementError);
}

TEST_CASE("malformed input is a parse error") {
    TempDir d;
    write_text(d / "a.vtk", "# vtk DataFile Version 3.0\nx\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS 2 double\n0 0\n");
    CHECK_THROWS_AS(read_vtk(d / "a.vtk"), ParseError);
    write_text(d / "b.obj", "v 0 0 0\nf 1 2 3\n");
    CHECK_THROWS_AS(read_obj(d / "b.obj"), Error);
    CHECK_THROWS_AS(read_vtk(d / "missing.vtk"), IoError);
}

TEST_CASE("boundary of a single tet and of two tets sharing a face") {
    const auto one = testing::unit_tet();
    CHECK(one.boundary().surface.triangle_count() == 4);
    for (bool b : one.boundary().surface.boundary_node_mask()) CHECK_FALSE(b); // closed

    const VolumeMesh two({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}}, {{0, 1, 2, 3}, {1, 2, 3, 4}});
    const auto& bs = two.boundary();
    CHECK(bs.surface.triangle_count() == 6);
    // brute force: faces seen once
    int once = 0;
    for (const auto& [f, c] : face_counts(two.tets())) once += c == 1;
    CHECK(once == 6);
}

TEST_CASE("cube of six tets: 12 outward faces of total area 6") {
    const auto cube = testing::unit_cube();
    const auto& s = cube.boundary().surface;
    CHECK(s.triangle_count() == 12);
    CHECK(s.area() == doctest::Approx(6.0).epsilon(1e-14));
    Point3 sum{};
    for (Index t = 0; t < s.triangle_count(); ++t) sum += s.area_vector(t);
    CHECK(norm(sum) <= 1e-12 * 6.0);
    // outward: each face normal points away from the cube centre
    for (Index t = 0; t < s.triangle_count(); ++t) {
        const auto& tri = s.triangles()[t];
        const Point3 c = (1.0 / 3.0) * (s.nodes()[tri[0]] + s.nodes()[tri[1]] + s.nodes()[tri[2]]);
        CHECK(dot(s.area_vector(t), c - Point3{0.5, 0.5, 0.5}) > 0.0);
    }
    CHECK(cube.volume() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("boundary faces belong to exactly one tet and close up on fixtures") {
    for (const auto& vm : {make_notched_block({4, 0.2, 3}), make_ball({4})}) {
        const auto counts = face_counts(vm.tets());
        const auto& bs = vm.boundary();
        double area = 0.0;
        Point3 sum{};
        for (Index t = 0; t < bs.surface.triangle_count(); ++t) {
            auto tri = bs.surface.triangles()[t];
            std::array<Index, 3> f{bs.volume_node[tri[0]], bs.volume_node[tri[1]], bs.volume_node[tri[2]]};
            std::sort(f.begin(), f.end());
            CHECK(counts.at(f) == 1);
            sum += bs.surface.area_vector(t);
            area += bs.surface.triangle_area(t);
        }
        CHECK(norm(sum) <= 1e-12 * area);
        int once = 0;
        for (const auto& [f, c] : counts) once += c == 1;
        CHECK(once == bs.surface.triangle_count());
    }
}

TEST_CASE("faces shared by three tets are a topology error") {
    std::vector<Point3> p{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, -1}, {0.3, 0.3, 2}};
    CHECK_THROWS_AS(extract_boundary(p, std::vector<Tetrahedron>{{0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 2, 5}}),
                    TopologyError);
}

TEST_CASE("surface boundary edges are exactly the edges used by one triangle") {
    const auto sm = make_perforated_plate({});
    std::map<Edge, int> c;
    for (const auto& t : sm.triangles())
        for (int k = 0; k < 3; ++k) {
            Edge e{t[k], t[(k + 1) % 3]};
            if (e[0] > e[1]) std::swap(e[0], e[1]);
            ++c[e];
        }
    std::set<Edge> once;
    for (const auto& [e, n] : c)
        if (n == 1) once.insert(e);
    const std::set<Edge> got(sm.boundary_edges().begin(), sm.boundary_edges().end());
    CHECK(got == once);
}

TEST_CASE("radius neighbors: tiny radius, huge radius, 5x5 grid") {
    const auto g = testing::grid_surface(4, 4);
    CHECK(radius_neighbors(g, 12, 1e-9) == std::vector<Index>{12});
    CHECK(radius_neighbors(g, 0, 100.0).size() == 25);
    CHECK(radius_neighbors(g, 12, 1.5).size() == 9);
}

TEST_CASE("radius neighbors equal the brute-force scan on random clouds") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto c = testing::random_vector(3 * 400, seed, -2.0, 2.0);
        std::vector<Point3> pts;
        for (int i = 0; i < 400; ++i) pts.push_back({c[3 * i], c[3 * i + 1], c[3 * i + 2] * 0.1});
        for (double cell : {0.0, 0.05, 0.7, 5.0}) {
            const PointGrid grid(pts, cell);
            for (double r : {0.01, 0.3, 1.1, 10.0})
                for (Index i = 0; i < 400; i += 37) {
                    CHECK(radius_neighbors(grid, i, r) == radius_neighbors_brute_force(pts, pts[i], r));
                }
        }
    }
}

TEST_CASE("closest point on the boundary curve") {
    const auto sq = testing::grid_surface(1, 1);
    const auto v = closest_point_projection(sq, {1, 1, 0});
    CHECK(v.distance == 0.0);
    CHECK(v.point == Point3{1, 1, 0});

    // centre: four edges at distance 0.5, lowest edge index wins
    const auto c = closest_point_projection(sq, {0.5, 0.5, 0});
    CHECK(c.distance == doctest::Approx(0.5));
    CHECK(c.edge == 0);
    // brute force over densely sampled edges
    double best = 1e9;
    for (const auto& e : sq.boundary_edges())
        for (int k = 0; k <= 1000; ++k) {
            const double t = k / 1000.0;
            best = std::min(best, distance(sq.nodes()[e[0]] * (1 - t) + sq.nodes()[e[1]] * t, Point3{0.5, 0.5, 0}));
        }
    CHECK(c.distance == doctest::Approx(best).epsilon(1e-12));

    const auto f = closest_point_projection(sq, {0.3, -4.0, 2.0});
    CHECK(f.point.x == doctest::Approx(0.3));
    CHECK(f.point.y == doctest::Approx(0.0));
    CHECK(f.point.z == doctest::Approx(0.0));

    const auto seg = closest_point_on_segment({5, 1, 0}, {0, 0, 0}, {2, 0, 0});
    CHECK(seg.t == 1.0);
    CHECK(seg.point == Point3{2, 0, 0});

    CHECK_THROWS_AS(closest_point_projection(testing::unit_tet().boundary().surface, {0, 0, 0}), EmptyBoundaryError);
}

TEST_CASE("element Jacobian: unit tet, swapped vertices, doubled size") {
    const auto t = testing::unit_tet();
    CHECK(element_jacobian(t, 0) == doctest::Approx(1.0));
    const std::vector<Point3> p(t.nodes().begin(), t.nodes().end());
    CHECK(element_jacobian(p, Tetrahedron{1, 0, 2, 3}) == doctest::Approx(-1.0));
    std::vector<Point3> big;
    for (const auto& q : p) big.push_back(2.0 * q);
    CHECK(element_jacobian(big, Tetrahedron{0, 1, 2, 3}) == doctest::Approx(8.0));
}

TEST_CASE("Jacobian sign flips under every odd permutation") {
    const auto vm = make_notched_block({3, 0.2, 9});
    const std::array<std::array<int, 4>, 6> odd{{{1, 0, 2, 3}, {2, 1, 0, 3}, {3, 1, 2, 0},
                                                 {0, 2, 1, 3}, {0, 3, 2, 1}, {0, 1, 3, 2}}};
    for (Index e = 0; e < vm.tet_count(); e += 7) {
        const auto& t = vm.tets()[e];
        const double j = element_jacobian(vm.nodes(), t);
        CHECK(j > 0.0);
        for (const auto& perm : odd) {
            const Tetrahedron q{t[perm[0]], t[perm[1]], t[perm[2]], t[perm[3]]};
            const double jq = element_jacobian(vm.nodes(), q);
            CHECK(jq < 0.0);
            CHECK(jq == doctest::Approx(-j).epsilon(1e-13));
        }
    }
}

TEST_CASE("negatively ordered tets are reoriented on construction") {
    const VolumeMesh vm({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{1, 0, 2, 3}});
    CHECK(element_jacobian(vm, 0) == doctest::Approx(1.0));
}

TEST_CASE("VTK writing: geometry only, vector fields, round trip, byte stability") {
    TempDir d;
    const auto sm = make_perforated_plate({8, 2.0, 0.3, 1.8, 0.1, 4});
    write_vtk(d / "geom.vtk", sm);
    const std::string g = slurp(d / "geom.vtk");
    CHECK(g.find("POINT_DATA") == std::string::npos);
    CHECK(g.find("CELL_TYPES") != std::string::npos);

    std::vector<double> vec(3 * static_cast<std::size_t>(sm.node_count()));
    for (std::size_t i = 0; i < vec.size(); ++i) vec[i] = std::sin(0.1 * static_cast<double>(i)) / 3.0;
    std::vector<double> sc(static_cast<std::size_t>(sm.node_count()), 1.0 / 7.0);
    write_vtk(d / "f.vtk", sm, {PointField::vector_field("dJdx", vec), PointField::scalar_field("dev", sc)});
    const std::string f = slurp(d / "f.vtk");
    CHECK(f.find("VECTORS dJdx double") != std::string::npos);
    CHECK(f.find("SCALARS dev double 1") != std::string::npos);

    const auto back = read_vtk(d / "f.vtk");
    REQUIRE(back.nodes.size() == static_cast<std::size_t>(sm.node_count()));
    for (std::size_t i = 0; i < back.nodes.size(); ++i) CHECK(distance(back.nodes[i], sm.nodes()[i]) <= 1e-15);
    CHECK(std::equal(back.triangles.begin(), back.triangles.end(), sm.triangles().begin()));
    REQUIRE(back.fields.size() == 2);
    CHECK(back.fields[0].values == vec);
    CHECK(back.fields[1].values == sc);

    write_vtk(d / "f2.vtk", sm, {PointField::vector_field("dJdx", vec), PointField::scalar_field("dev", sc)});
    CHECK(slurp(d / "f2.vtk") == f);

    const auto vm = make_notched_block({3, 0.1, 2});
    write_vtk(d / "v.vtk", vm);
    const auto vb = load_volume_mesh(d / "v.vtk");
    CHECK(std::equal(vb.tets().begin(), vb.tets().end(), vm.tets().begin()));
    CHECK_THROWS_AS(write_vtk(d / "bad.vtk", sm, {PointField::scalar_field("x", {1.0})}), DimensionError);
}

TEST_CASE("design sidecar: ranges, groups, defaults and strictness") {
    TempDir d;
    write_text(d / "s.json", R"({"version": 1, "default": true,
        "ranges": [{"begin": 2, "end": 5, "design": false}],
        "groups": {"tip": {"nodes": [3], "design": true}}})");
    const auto f = read_design_flags(d / "s.json", 6);
    CHECK(f == std::vector<bool>{true, true, false, true, false, true});
    write_text(d / "bad.json", R"({"version": 1, "colour": "red"})");
    CHECK_THROWS_AS(read_design_flags(d / "bad.json", 6), ParseError);
    write_text(d / "range.json", R"({"version": 1, "ranges": [{"begin": 0, "end": 9, "design": false}]})");
    CHECK_THROWS_AS(read_design_flags(d / "range.json", 6), ParseError);

    const auto vm = make_notched_block({3, 0.0, 1});
    write_vtk(d / "nb.vtk", vm);
    write_design_flags(d / "nb.vtk.design.json", vm.design_flags());
    const auto back = load_volume_mesh(d / "nb.vtk");
    CHECK(back.design_flags() == vm.design_flags());
}

TEST_CASE("fixture generators are deterministic and non-uniform where promised") {
    const auto a = make_plate({10, 0, 0.1, 5}), b = make_plate({10, 0, 0.1, 5});
    CHECK(a.node_count() == 121);
    CHECK(a.triangle_count() == 200);
    CHECK(std::equal(a.nodes().begin(), a.nodes().end(), b.nodes().begin()));
    const auto c = make_plate({10, 0, 0.1, 6});
    CHECK_FALSE(std::equal(a.nodes().begin(), a.nodes().end(), c.nodes().begin()));

    const auto pp = make_perforated_plate({});
    double hmin = 1e9, hmax = 0.0;
    for (const auto& t : pp.triangles())
        for (int k = 0; k < 3; ++k) {
            const double h = distance(pp.nodes()[t[k]], pp.nodes()[t[(k + 1) % 3]]);
            hmin = std::min(hmin, h);
            hmax = std::max(hmax, h);
        }
    CHECK(hmax / hmin > 3.0);
    CHECK_FALSE(pp.is_closed());

    const auto ball = make_ball({});
    CHECK(ball.boundary().surface.is_closed());
    CHECK(ball.volume() == doctest::Approx(4.0 / 3.0 * 3.14159265358979).epsilon(0.03));
}

TEST_CASE("design surface and fixed nodes of the notched block") {
    const auto vm = make_notched_block({});
    const auto ds = extract_design_surface(vm);
    CHECK(ds.surface.triangle_count() > 0);
    for (Index v : ds.volume_node) CHECK(vm.design_flags()[v]);
    const auto fixed = fixed_node_mask(vm);
    const auto& bs = vm.boundary();
    // every boundary node is fixed or lies on the design surface interior
    std::vector<bool> on_design(static_cast<std::size_t>(vm.node_count()), false);
    for (Index v : ds.volume_node) on_design[v] = true;
    for (Index v : bs.volume_node) CHECK((fixed[v] || on_design[v]));
    // design-surface boundary curve nodes are fixed
    const auto curve = ds.surface.boundary_node_mask();
    for (std::size_t i = 0; i < curve.size(); ++i)
        if (curve[i]) CHECK(fixed[ds.volume_node[i]]);
    // interior nodes are free
    for (Index v = 0; v < vm.node_count(); ++v)
        if (bs.local_node[v] < 0) CHECK_FALSE(fixed[v]);
}

TEST_CASE("nodal vector fields validate their length") {
    CHECK_THROWS_AS(NodalVectorField(std::vector<double>{1, 2}), DimensionError);
    const NodalVectorField f(std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK(f.nodes() == 2);
    CHECK(f.at(1) == Point3{4, 5, 6});
    const std::vector<Point3> p{{1, 2, 3}};
    CHECK(unflatten(flatten(p)) == p);
}
