#include "shapefilt/fixtures.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "shapefilt/error.hpp"

namespace shapefilt {

namespace {

// Fixed conversion so fixtures are identical across standard libraries.
class Jitter {
public:
    explicit Jitter(std::uint64_t seed) : rng_(seed) {}
    double uniform(double a, double b) { return a + (b - a) * (static_cast<double>(rng_() >> 11) * 0x1.0p-53); }

private:
    std::mt19937_64 rng_;
};

void check_resolution(int r) {
    if (r < 2) throw ConfigError("fixture resolution must be >= 2");
}

// Six tets per hex sharing the 0-7 diagonal. Corner c has bits (x, y, z).
constexpr int kKuhn[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7}, {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

struct HexGrid {
    int nx, ny, nz;
    std::vector<Point3> nodes;
    std::vector<Tetrahedron> tets;

    Index id(int i, int j, int k) const { return static_cast<Index>((k * (ny + 1) + j) * (nx + 1) + i); }

    void add_hex(int i, int j, int k) {
        Index c[8];
        for (int b = 0; b < 8; ++b) c[b] = id(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
        for (const auto& t : kKuhn) tets.push_back({c[t[0]], c[t[1]], c[t[2]], c[t[3]]});
    }
};

// Drops unreferenced nodes and renumbers.
void compact(std::vector<Point3>& nodes, std::vector<Tetrahedron>& tets, std::vector<Index>* old_id) {
    std::vector<Index> map(nodes.size(), -1);
    for (const auto& t : tets)
        for (Index v : t) map[v] = 0;
    std::vector<Point3> kept;
    if (old_id) old_id->clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (map[i] < 0) continue;
        map[i] = static_cast<Index>(kept.size());
        kept.push_back(nodes[i]);
        if (old_id) old_id->push_back(static_cast<Index>(i));
    }
    for (auto& t : tets)
        for (auto& v : t) v = map[v];
    nodes = std::move(kept);
}

} // namespace

SurfaceMesh make_plate(const PlateOptions& o) {
    check_resolution(o.resolution);
    const int n = o.resolution;
    const double len = o.length > 0.0 ? o.length : static_cast<double>(n);
    const double h = len / n;
    Jitter jit(o.seed);
    std::vector<Point3> nodes;
    auto id = [n](int i, int j) { return static_cast<Index>(i * (n + 1) + j); };
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) nodes.push_back({i * h, j * h, 0.0});
    if (o.perturbation > 0.0) {
        for (int i = 1; i < n; ++i)
            for (int j = 1; j < n; ++j) {
                nodes[id(i, j)].x += jit.uniform(-o.perturbation, o.perturbation) * h;
                nodes[id(i, j)].y += jit.uniform(-o.perturbation, o.perturbation) * h;
            }
    }
    std::vector<Triangle> tris;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Index a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            if ((i + j) % 2 == 0) {
                tris.push_back({a, b, c});
                tris.push_back({a, c, d});
            } else {
                tris.push_back({a, b, d});
                tris.push_back({b, c, d});
            }
        }
    return SurfaceMesh(std::move(nodes), std::move(tris));
}

SurfaceMesh make_perforated_plate(const PerforatedPlateOptions& o) {
    check_resolution(o.resolution);
    if (!(o.hole_radius > 0.0 && o.hole_radius < 0.5 * o.length)) throw ConfigError("hole radius must fit the plate");
    const int nr = o.resolution;
    const int nt = 4 * o.resolution;
    const double half = 0.5 * o.length;
    Jitter jit(o.seed);
    std::vector<Point3> nodes;
    auto id = [nt](int k, int a) { return static_cast<Index>(k * nt + (a % nt)); };
    for (int k = 0; k <= nr; ++k) {
        const double t = std::pow(static_cast<double>(k) / nr, o.grading);
        for (int a = 0; a < nt; ++a) {
            const double th = 2.0 * std::numbers::pi * a / nt;
            const double c = std::cos(th), s = std::sin(th);
            const Point3 inner{o.hole_radius * c, o.hole_radius * s, 0.0};
            const double scale = half / std::max(std::abs(c), std::abs(s));
            const Point3 outer{scale * c, scale * s, 0.0};
            nodes.push_back(inner + t * (outer - inner));
        }
    }
    if (o.perturbation > 0.0) {
        for (int k = 1; k < nr; ++k) {
            const double tm = std::pow(static_cast<double>(k - 1) / nr, o.grading);
            const double tp = std::pow(static_cast<double>(k + 1) / nr, o.grading);
            for (int a = 0; a < nt; ++a) {
                Point3& p = nodes[id(k, a)];
                // Local spacing: the smaller of the radial and angular gaps.
                const double radial = 0.5 * (tp - tm) * (half - o.hole_radius);
                const double angular = norm(p) * 2.0 * std::numbers::pi / nt;
                const double h = std::min(radial, angular);
                p.x += jit.uniform(-o.perturbation, o.perturbation) * h;
                p.y += jit.uniform(-o.perturbation, o.perturbation) * h;
            }
        }
    }
    std::vector<Triangle> tris;
    for (int k = 0; k < nr; ++k)
        for (int a = 0; a < nt; ++a) {
            const Index p = id(k, a), q = id(k, a + 1), r = id(k + 1, a + 1), s = id(k + 1, a);
            if ((k + a) % 2 == 0) {
                tris.push_back({p, q, r});
                tris.push_back({p, r, s});
            } else {
                tris.push_back({p, q, s});
                tris.push_back({q, r, s});
            }
        }
    return SurfaceMesh(std::move(nodes), std::move(tris));
}

VolumeMesh make_notched_block(const NotchedBlockOptions& o) {
    check_resolution(o.resolution);
    const int ny = o.resolution;
    const double h = 1.0 / ny;
    HexGrid g{2 * ny, ny, static_cast<int>(std::lround(0.75 * ny)), {}, {}};
    if (g.nz < 2) g.nz = 2;
    for (int k = 0; k <= g.nz; ++k)
        for (int j = 0; j <= g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i) g.nodes.push_back({i * h, j * h, k * h});
    // Pocket: x in [0.75, 1.25], y in [0.25, 0.75], top third of the height.
    const int pi0 = static_cast<int>(std::lround(0.75 / h)), pi1 = static_cast<int>(std::lround(1.25 / h));
    const int pj0 = static_cast<int>(std::lround(0.25 / h)), pj1 = static_cast<int>(std::lround(0.75 / h));
    const int pk0 = g.nz - std::max(1, g.nz / 3);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const bool pocket = i >= pi0 && i < pi1 && j >= pj0 && j < pj1 && k >= pk0;
                if (!pocket) g.add_hex(i, j, k);
            }
    std::vector<Index> old_id;
    compact(g.nodes, g.tets, &old_id);

    // Design: top face and pocket surfaces, identified on the grid.
    std::vector<bool> design(g.nodes.size(), false);
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
        const Index o_id = old_id[v];
        const int i = o_id % (g.nx + 1);
        const int j = (o_id / (g.nx + 1)) % (g.ny + 1);
        const int k = o_id / ((g.nx + 1) * (g.ny + 1));
        const bool top = k == g.nz;
        const bool in_pocket = i >= pi0 && i <= pi1 && j >= pj0 && j <= pj1 && k >= pk0;
        design[v] = top || in_pocket;
    }
    if (o.perturbation > 0.0) {
        Jitter jit(o.seed);
        const VolumeMesh probe(g.nodes, g.tets);
        std::vector<bool> boundary(g.nodes.size(), false);
        for (Index v : probe.boundary().volume_node) boundary[v] = true;
        for (std::size_t v = 0; v < g.nodes.size(); ++v) {
            if (boundary[v]) continue;
            for (int c = 0; c < 3; ++c) g.nodes[v][c] += jit.uniform(-o.perturbation, o.perturbation) * h;
        }
    }
    return VolumeMesh(std::move(g.nodes), std::move(g.tets), std::move(design));
}

VolumeMesh make_ball(const BallOptions& o) {
    check_resolution(o.resolution);
    const int n = o.resolution;
    HexGrid g{n, n, n, {}, {}};
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                const double x = -1.0 + 2.0 * i / n, y = -1.0 + 2.0 * j / n, z = -1.0 + 2.0 * k / n;
                const double x2 = x * x, y2 = y * y, z2 = z * z;
                g.nodes.push_back({x * std::sqrt(1.0 - y2 / 2.0 - z2 / 2.0 + y2 * z2 / 3.0),
                                   y * std::sqrt(1.0 - z2 / 2.0 - x2 / 2.0 + z2 * x2 / 3.0),
                                   z * std::sqrt(1.0 - x2 / 2.0 - y2 / 2.0 + x2 * y2 / 3.0)});
            }
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) g.add_hex(i, j, k);
    return VolumeMesh(std::move(g.nodes), std::move(g.tets));
}

double mean_edge_length(const SurfaceMesh& sm) {
    std::set<std::pair<Index, Index>> edges;
    for (const auto& t : sm.triangles())
        for (int k = 0; k < 3; ++k) edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
    if (edges.empty()) return 0.0;
    double s = 0.0;
    for (const auto& [a, b] : edges) s += distance(sm.nodes()[a], sm.nodes()[b]);
    return s / static_cast<double>(edges.size());
}

} // namespace shapefilt
