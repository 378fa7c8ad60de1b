#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "shapefilt/error.hpp"
#include "shapefilt/fem.hpp"
#include "shapefilt/fixtures.hpp"
#include "support.hpp"

using namespace shapefilt;
using testing::dense;

namespace {

// Degree-2 exact four-point rule on a tet (barycentric a, b, b, b).
constexpr double kQa = 0.5854101966249685, kQb = 0.1381966011250105;

Eigen::MatrixXd quadrature_tet_mass(const std::array<Point3, 4>& x) {
    const double v = std::abs(dot(x[1] - x[0], cross(x[2] - x[0], x[3] - x[0]))) / 6.0;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    for (int q = 0; q < 4; ++q) {
        double n[4];
        for (int k = 0; k < 4; ++k) n[k] = k == q ? kQa : kQb;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) += 0.25 * v * n[i] * n[j];
    }
    return m;
}

// Voigt-notation B^T C B V, built independently of the production formula.
Eigen::MatrixXd voigt_tet_stiffness(const std::array<Point3, 4>& x, double lambda, double mu) {
    Eigen::Matrix4d a;
    for (int i = 0; i < 4; ++i) a.row(i) << 1.0, x[i].x, x[i].y, x[i].z;
    const Eigen::Matrix4d inv = a.inverse(); // columns: coefficients of N_i
    const double v = std::abs(a.determinant()) / 6.0;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(6, 12);
    for (int i = 0; i < 4; ++i) {
        const double gx = inv(1, i), gy = inv(2, i), gz = inv(3, i);
        b(0, 3 * i) = gx;
        b(1, 3 * i + 1) = gy;
        b(2, 3 * i + 2) = gz;
        b(3, 3 * i) = gy;
        b(3, 3 * i + 1) = gx;
        b(4, 3 * i + 1) = gz;
        b(4, 3 * i + 2) = gy;
        b(5, 3 * i) = gz;
        b(5, 3 * i + 2) = gx;
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) c(i, j) = lambda;
        c(i, i) += 2 * mu;
        c(3 + i, 3 + i) = mu;
    }
    return v * b.transpose() * c * b;
}

double cot(const Point3& a, const Point3& b, const Point3& c) { // angle at a
    const Point3 u = b - a, w = c - a;
    return dot(u, w) / norm(cross(u, w));
}

double relative_null_residual(const CsrMatrix& k, const std::vector<double>& v) {
    const auto kv = k.multiply(v);
    return testing::norm2(kv) / (k.frobenius_norm() * testing::norm2(v));
}

} // namespace

TEST_CASE("right triangle mass matrix is (1/24)[[2,1,1],[1,2,1],[1,1,2]]") {
    const auto m = triangle_mass({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(m[i][j] == doctest::Approx((i == j ? 2.0 : 1.0) / 24.0).epsilon(1e-15));
}

TEST_CASE("surface mass row sums are tributary areas and total the surface area") {
    const auto sm = make_perforated_plate({});
    const auto m = surface_mass_matrix(sm);
    double total = 0.0;
    for (double r : m.row_sums()) total += r;
    CHECK(total == doctest::Approx(sm.area()).epsilon(1e-13));
    CHECK(m.is_symmetric());
    std::vector<double> trib(static_cast<std::size_t>(sm.node_count()), 0.0);
    for (Index t = 0; t < sm.triangle_count(); ++t)
        for (Index v : sm.triangles()[t]) trib[v] += sm.triangle_area(t) / 3.0;
    CHECK(testing::max_abs_diff(m.row_sums(), trib) <= 1e-14);
}

TEST_CASE("uniform refinement keeps the total mass") {
    const auto coarse = make_plate({8, 8.0, 0.0, 1}), fine = make_plate({16, 8.0, 0.0, 1});
    double a = 0.0, b = 0.0;
    for (double r : surface_mass_matrix(coarse).row_sums()) a += r;
    for (double r : surface_mass_matrix(fine).row_sums()) b += r;
    CHECK(std::abs(a - b) <= 1e-12 * a);
}

TEST_CASE("Laplace-Beltrami stiffness matches cotangent weights on a flat triangle") {
    const Point3 a{0.1, 0.2, 0}, b{1.3, -0.1, 0}, c{0.4, 0.9, 0};
    const auto k = triangle_lb_stiffness(a, b, c);
    const Point3 p[3] = {a, b, c};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, o = (i + 2) % 3;
        CHECK(k[i][j] == doctest::Approx(-0.5 * cot(p[o], p[i], p[j])).epsilon(1e-13));
    }
    // and on a tilted copy (surface intrinsic)
    const Point3 ta{0.1, 0.2, 0.3}, tb{1.3, -0.1, -0.5}, tc{0.4, 0.9, 1.1};
    const auto kt = triangle_lb_stiffness(ta, tb, tc);
    const Point3 q[3] = {ta, tb, tc};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, o = (i + 2) % 3;
        CHECK(kt[i][j] == doctest::Approx(-0.5 * cot(q[o], q[i], q[j])).epsilon(1e-13));
    }
    const auto sm = testing::grid_surface(3, 2);
    const auto k1 = dense(surface_lb_stiffness(sm, 1.0)), k2 = dense(surface_lb_stiffness(sm, 0.7));
    CHECK((k2 - 0.49 * k1).norm() <= 1e-14 * k1.norm());
}

TEST_CASE("Laplace-Beltrami: zero radius and constant null space") {
    const auto sm = make_perforated_plate({});
    CHECK(surface_lb_stiffness(sm, 0.0).max_abs() == 0.0);
    const auto k = surface_lb_stiffness(sm, 1.3);
    const auto k1 = k.multiply(std::vector<double>(static_cast<std::size_t>(sm.node_count()), 1.0));
    for (double v : k1) CHECK(std::abs(v) <= 1e-13 * k.frobenius_norm());
    CHECK(k.is_symmetric());
    const auto ball = make_ball({4}).boundary().surface;
    const auto kb = surface_lb_stiffness(ball, 1.0);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense(kb)).eigenvalues();
    CHECK(ev(0) >= -1e-12 * ev(ev.size() - 1));
}

TEST_CASE("tet mass: closed form, totals and a quadrature oracle") {
    const std::array<Point3, 4> x{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 6}}}; // volume 1
    const auto m = tet_mass(x);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(m[i][j] == doctest::Approx(i == j ? 0.1 : 0.05).epsilon(1e-14));

    const VolumeMesh stacked({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.4, 0.5, -1.2}},
                             {{0, 1, 2, 3}, {0, 2, 1, 4}});
    const auto bm = dense(bulk_mass_matrix(stacked));
    Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(5, 5);
    for (const auto& t : stacked.tets()) {
        std::array<Point3, 4> p;
        for (int k = 0; k < 4; ++k) p[k] = stacked.nodes()[t[k]];
        const auto q = quadrature_tet_mass(p);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) ref(t[i], t[j]) += q(i, j);
    }
    CHECK((bm - ref).cwiseAbs().maxCoeff() <= 1e-13);

    const auto nb = make_notched_block({4, 0.2, 1});
    double total = 0.0;
    for (double r : bulk_mass_matrix(nb).row_sums()) total += r;
    CHECK(total == doctest::Approx(nb.volume()).epsilon(1e-13));
}

TEST_CASE("mass matrices are SPD on fixtures") {
    const auto nb = make_notched_block({3, 0.2, 1});
    const Eigen::VectorXd e1 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense(bulk_mass_matrix(nb))).eigenvalues();
    CHECK(e1(0) > 0.0);
    const auto pp = make_perforated_plate({6, 2.0, 0.3, 1.8, 0.1, 1});
    const Eigen::VectorXd e2 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense(surface_mass_matrix(pp))).eigenvalues();
    CHECK(e2(0) > 0.0);
}

TEST_CASE("elastic element stiffness against a Voigt-notation oracle") {
    const std::array<Point3, 4> unit{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    const std::array<Point3, 4> skew{{{0.1, 0, 0.2}, {1.3, 0.1, 0}, {0.2, 0.9, -0.1}, {0.3, 0.2, 1.4}}};
    for (const auto& x : {unit, skew})
        for (const auto& ep : {ElasticityParams{0.0, 0.5}, ElasticityParams::from_young_poisson(2.0, 0.3)}) {
            const auto k = tet_elastic_stiffness(x, ep);
            const auto ref = voigt_tet_stiffness(x, ep.lambda, ep.mu);
            for (int i = 0; i < 12; ++i)
                for (int j = 0; j < 12; ++j) CHECK(std::abs(k[i][j] - ref(i, j)) <= 1e-13 * ref.norm());
        }
}

TEST_CASE("bulk elastic stiffness annihilates the six rigid modes") {
    for (const auto& vm : {make_notched_block({4, 0.2, 1}), make_ball({4}), testing::unit_cube()}) {
        const ElasticityParams ep = ElasticityParams::from_young_poisson();
        FilterRadii radii;
        radii.j0 = compute_j0(vm, vm.boundary().surface, ep, 1.0, 1.0);
        for (auto st : {Stiffening::off, Stiffening::on}) {
            const auto k = bulk_elastic_stiffness(vm, ep, radii, st);
            CHECK(k.is_symmetric());
            for (const auto& mode : rigid_body_modes(vm.nodes())) CHECK(relative_null_residual(k, mode) <= 1e-12);
        }
        // rotation about z through the origin
        std::vector<double> rz;
        for (const auto& p : vm.nodes()) rz.insert(rz.end(), {-p.y, p.x, 0.0});
        CHECK(relative_null_residual(structural_stiffness(vm, ElasticityParams::from_young_poisson()), rz) <= 1e-12);
    }
}

TEST_CASE("stiffening scales each element by (J0/J^e)^2") {
    const auto vm = make_notched_block({3, 0.25, 4});
    FilterRadii radii;
    radii.j0 = 0.37;
    const auto r2 = element_radius_squared(vm, radii, Stiffening::on);
    for (Index e = 0; e < vm.tet_count(); ++e) {
        const double j = element_jacobian(vm, e);
        CHECK(r2[e] == doctest::Approx((0.37 / j) * (0.37 / j)).epsilon(1e-14));
    }
    radii.r_omega = 0.8;
    for (double v : element_radius_squared(vm, radii, Stiffening::off)) CHECK(v == doctest::Approx(0.64));

    // smaller elements are stiffened more
    Index small = 0, large = 0;
    for (Index e = 0; e < vm.tet_count(); ++e) {
        if (element_jacobian(vm, e) < element_jacobian(vm, small)) small = e;
        if (element_jacobian(vm, e) > element_jacobian(vm, large)) large = e;
    }
    auto frob = [&](Index e, double w) {
        std::array<Point3, 4> x;
        for (int k = 0; k < 4; ++k) x[k] = vm.nodes()[vm.tets()[e][k]];
        const auto k = tet_elastic_stiffness(x, ElasticityParams::from_young_poisson());
        double s = 0.0;
        for (const auto& row : k)
            for (double v : row) s += v * v;
        return w * std::sqrt(s);
    };
    const double unscaled = frob(small, 1.0) / frob(large, 1.0);
    const double scaled = frob(small, r2[small]) / frob(large, r2[large]);
    CHECK(scaled > unscaled);

    // uniform mesh: stiffening is a uniform scale
    const auto cube = testing::unit_cube();
    const auto rc = element_radius_squared(cube, radii, Stiffening::on);
    for (double v : rc) CHECK(v == doctest::Approx(rc[0]).epsilon(1e-14));

    auto bad = vm.nodes();
    std::vector<Point3> moved(bad.begin(), bad.end());
    const auto& t0 = vm.tets()[0];
    moved[t0[3]] = moved[t0[0]] + 2.0 * (moved[t0[0]] - moved[t0[3]]);
    const auto inverted = vm.with_nodes(moved);
    CHECK_THROWS_AS(element_radius_squared(inverted, radii, Stiffening::on), InvertedElementError);
}

TEST_CASE("J0 is linear in beta, quadratic in r_gamma, and matches dense quadratic forms") {
    const auto vm = make_notched_block({4, 0.2, 7});
    const auto ep = ElasticityParams::from_young_poisson();
    const auto& s = vm.boundary().surface;
    const double j = compute_j0(vm, s, ep, 0.3, 0.5);
    CHECK(compute_j0(vm, s, ep, 0.3, 1.0) == doctest::Approx(2.0 * j).epsilon(1e-13));
    CHECK(compute_j0(vm, s, ep, 0.6, 0.5) == doctest::Approx(4.0 * j).epsilon(1e-13));

    // dense oracle
    const Eigen::MatrixXd kg = dense(surface_lb_stiffness(s, 1.0).block_expand());
    std::vector<double> w;
    for (Index e = 0; e < vm.tet_count(); ++e) w.push_back(1.0 / element_jacobian(vm, e));
    const Eigen::MatrixXd kj = dense(weighted_elastic_stiffness(vm, ep, w));
    const auto xs = flatten(s.nodes());
    const auto xv = flatten(vm.nodes());
    const Eigen::Map<const Eigen::VectorXd> eg(xs.data(), static_cast<Eigen::Index>(xs.size()));
    const Eigen::Map<const Eigen::VectorXd> evx(xv.data(), static_cast<Eigen::Index>(xv.size()));
    const double ref = 0.5 * 0.09 * eg.dot(kg * eg) / evx.dot(kj * evx);
    CHECK(j == doctest::Approx(ref).epsilon(1e-10));
    CHECK(j >= 0.0);
}

TEST_CASE("J0 fallback when the surface energy vanishes") {
    const auto vm = make_notched_block({3, 0.0, 1});
    const auto ep = ElasticityParams::from_young_poisson();
    const SurfaceMesh none;
    const auto v = resolve_j0(vm, none, ep, 0.5, 1.0);
    CHECK(v.fallback);
    CHECK(v.value == 0.0); // beta r^2 area / volume with zero area
    const auto prev = resolve_j0(vm, none, ep, 0.5, 1.0, 0.42);
    CHECK(prev.fallback);
    CHECK(prev.value == 0.42);
    const auto ok = resolve_j0(vm, vm.boundary().surface, ep, 0.5, 1.0, 0.42);
    CHECK_FALSE(ok.fallback);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((ElasticityParams{0.0, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((ElasticityParams{-1.0, 1.0}.validate()), ConfigError);
    FilterRadii r;
    r.beta = 0.0;
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r.beta = 1.5;
    CHECK_THROWS_AS(r.validate(), ConfigError);
}
