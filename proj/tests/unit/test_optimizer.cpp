#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "shapefilt/error.hpp"
#include "shapefilt/fem.hpp"
#include "shapefilt/fixtures.hpp"
#include "shapefilt/implicit_filter.hpp"
#include "shapefilt/optimizer.hpp"
#include "shapefilt/responses.hpp"
#include "support.hpp"

using namespace shapefilt;
using testing::random_vector;

namespace {

double m_inner(const CsrMatrix& m, const std::vector<double>& a, const std::vector<double>& b) {
    return testing::inner(a, m.multiply(b));
}

StructuralCase block_case(const VolumeMesh& vm) {
    StructuralCase sc;
    sc.clamped.assign(static_cast<std::size_t>(vm.node_count()), false);
    std::vector<Index> top;
    for (Index i = 0; i < vm.node_count(); ++i) {
        if (vm.nodes()[i].z < 1e-9) sc.clamped[i] = true;
        if (vm.nodes()[i].z > 0.75 - 1e-9) top.push_back(i);
    }
    for (Index i : top) sc.loads.push_back({i, {0.0, 0.0, -1.0 / static_cast<double>(top.size())}});
    return sc;
}

} // namespace

TEST_CASE("constraint projection: parallel, orthogonal, random") {
    const auto vm = make_notched_block({3, 0.1, 1});
    const auto m = bulk_mass_matrix(vm).block_expand();
    const auto c = random_vector(static_cast<std::size_t>(m.rows()), 1);
    std::vector<double> g = c;
    for (auto& v : g) v *= -2.5;
    for (double v : project_constraint(g, c, 0.0, m)) CHECK(std::abs(v) <= 1e-12);

    auto h = random_vector(c.size(), 2);
    const double a = m_inner(m, h, c) / m_inner(m, c, c);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] -= a * c[i];
    const auto d = project_constraint(h, c, 0.0, m);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(d[i] == doctest::Approx(-h[i]).epsilon(1e-10).scale(1.0));

    const auto r = random_vector(c.size(), 3);
    const auto p = project_constraint(r, c, 0.0, m);
    CHECK(std::abs(m_inner(m, p, c)) <= 1e-12 * std::sqrt(m_inner(m, p, p) * m_inner(m, c, c)));
    // violation adds a restoring component along -c
    const auto q = project_constraint(r, c, 0.3, m, 2.0);
    CHECK(m_inner(m, q, c) == doctest::Approx(-0.6).epsilon(1e-10));
    CHECK_THROWS_AS(project_constraint(r, std::vector<double>(c.size(), 0.0), 0.0, m), DimensionError);
}

TEST_CASE("steepest descent step: zero step, linearity") {
    const auto vm = make_notched_block({3, 0.1, 1});
    BulkSurfaceFilter::Options o;
    o.radii.r_gamma = 0.2;
    const BulkSurfaceFilter f(vm, o);
    const auto fwd = [&](std::span<const double> s) { return f.forward(s); };
    const auto djds = random_vector(3 * static_cast<std::size_t>(vm.node_count()), 5);
    std::vector<double> s0(djds.size(), 0.0), x0 = flatten(vm.nodes());
    auto s = s0, x = x0;
    steepest_descent_step(s, x, djds, 0.0, fwd);
    CHECK(s == s0);
    CHECK(x == x0);

    auto s1 = s0, x1 = x0, s2 = s0, x2 = x0;
    steepest_descent_step(s1, x1, djds, 0.01, fwd);
    steepest_descent_step(s1, x1, djds, 0.01, fwd);
    steepest_descent_step(s2, x2, djds, 0.02, fwd);
    CHECK(testing::max_abs_diff(s1, s2) <= 1e-15);
    CHECK(testing::max_abs_diff(x1, x2) <= 1e-10);
}

TEST_CASE("implicit filters turn a uniform continuous sensitivity into a pure translation") {
    for (const auto& vm : {make_notched_block({4, 0.0, 1}), make_notched_block({4, 0.3, 2})}) {
        BulkSurfaceFilter::Options o;
        o.radii.r_gamma = 0.2;
        const BulkSurfaceFilter f(vm, o);
        std::vector<double> ones;
        for (Index i = 0; i < vm.node_count(); ++i) ones.insert(ones.end(), {0.0, 0.0, 1.0});
        const auto dJdx = f.mass().multiply(ones);
        const auto djds = f.map_sensitivities(dJdx).djds;
        const double alpha = 0.05;
        std::vector<double> s(djds.size(), 0.0), x(djds.size(), 0.0);
        steepest_descent_step(s, x, djds, alpha, [&](std::span<const double> v) { return f.forward(v); });
        double mean = 0.0;
        for (Index i = 0; i < vm.node_count(); ++i) mean += x[3 * i + 2];
        mean /= vm.node_count();
        CHECK(mean == doctest::Approx(-alpha).epsilon(1e-8));
        for (Index i = 0; i < vm.node_count(); ++i) {
            CHECK(std::abs(x[3 * i + 2] - mean) < 1e-8 * alpha);
            CHECK(std::abs(x[3 * i]) < 1e-8 * alpha);
        }
    }
}

TEST_CASE("zero sensitivities stop by stagnation with the geometry unchanged") {
    const auto vm = make_notched_block({3, 0.0, 1});
    OptimizationConfig cfg;
    cfg.objective = ResponseKind::strain_energy;
    cfg.structure = block_case(vm);
    cfg.structure.loads.clear();
    cfg.max_iterations = 20;
    const auto st = run_optimization(cfg, vm);
    CHECK(st.termination == Termination::stagnation);
    CHECK(st.iteration == cfg.stagnation_window);
    CHECK(st.geometry == flatten(vm.nodes()));
}

TEST_CASE("max_iterations = 0 keeps only the initial state") {
    const auto vm = make_notched_block({3, 0.0, 1});
    OptimizationConfig cfg;
    cfg.max_iterations = 0;
    const auto st = run_optimization(cfg, vm);
    CHECK(st.termination == Termination::max_iterations);
    REQUIRE(st.history.size() == 1);
    CHECK(st.history[0].objective == doctest::Approx(vm.volume()));
    CHECK(st.geometry == flatten(vm.nodes()));
}

TEST_CASE("bulk-surface volume minimization of a ball decreases the volume every iteration") {
    const auto ball = make_ball({5});
    OptimizationConfig cfg;
    cfg.max_iterations = 12;
    cfg.r_gamma = 0.3;
    int calls = 0;
    const auto st = run_optimization(cfg, ball, [&](const OptimizationState&, const VolumeMesh&) { ++calls; });
    CHECK(calls == static_cast<int>(st.history.size()));
    REQUIRE(st.history.size() >= 2);
    for (std::size_t k = 1; k < st.history.size(); ++k) CHECK(st.history[k].objective < st.history[k - 1].objective);
    CHECK(st.alpha > 0.0);
    // first step moves the farthest node by 1% of the bounding-box diagonal
    CHECK(st.history[1].step_norm > 0.0);
}

TEST_CASE("sequential and bulk-surface runs on the ball under one step size") {
    const auto ball = make_ball({5});
    OptimizationConfig bulk;
    bulk.max_iterations = 60;
    bulk.r_gamma = 0.3;
    bulk.min_jacobian_stop = 1e-3 * min_jacobian(ball.nodes(), ball.tets());
    const auto b = run_optimization(bulk, ball);
    OptimizationConfig seq = bulk;
    seq.filter = FilterKind::explicit_surface;
    seq.explicit_filter = {KernelSpec::with_default_span(KernelFamily::linear_hat, 0.3), true, true, MatrixMode::stored};
    seq.alpha = b.alpha;
    const auto s = run_optimization(seq, ball);
    MESSAGE("bulk: " << std::string(termination_name(b.termination)) << " at " << b.iteration << ", volume "
                     << b.history.back().objective << "; sequential: " << std::string(termination_name(s.termination)) << " at "
                     << s.iteration << ", volume " << s.history.back().objective);
    CHECK(s.termination != Termination::solver_failure);
    CHECK(b.termination != Termination::solver_failure);
}

TEST_CASE("constrained volume minimization keeps the compliance near its bound") {
    const auto vm = make_notched_block({4, 0.0, 1});
    OptimizationConfig cfg;
    cfg.structure = block_case(vm);
    const double c0 = strain_energy_response(vm, cfg.structure).value;
    cfg.constraint = ConstraintConfig{ResponseKind::strain_energy, 1.02 * c0, 1e-3, 1.0};
    cfg.max_iterations = 25;
    const auto st = run_optimization(cfg, vm);
    REQUIRE(st.history.size() > 5);
    CHECK(st.history.back().objective < st.history.front().objective);
    double worst = 0.0;
    for (const auto& h : st.history) worst = std::max(worst, h.constraint / (1.02 * c0) - 1.0);
    MESSAGE("largest relative constraint excess: " << worst);
    CHECK(worst < 0.05);
}

TEST_CASE("history CSV layout") {
    OptimizationState st;
    st.history.push_back({0, 1.5, 0.0, 0.0, 0.25, 0.0});
    st.history.push_back({1, 1.25, 0.5, 0.125, 0.2, 0.01});
    const auto path = std::filesystem::temp_directory_path() / "shapefilt_history_test.csv";
    write_history_csv(path, st);
    std::ifstream in(path, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(all.rfind("iteration,objective,constraint,step_norm,min_jacobian,wall_time\r\n", 0) == 0);
    CHECK(all.find("1,1.25,0.5,0.125,0.20000000000000001,") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("configuration validation") {
    OptimizationConfig cfg;
    cfg.alpha = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.alpha = 0.0;
    cfg.constraint = ConstraintConfig{ResponseKind::volume, 1.0, 0.0, 1.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(parse_filter_kind("sequential") == FilterKind::explicit_surface);
    CHECK_THROWS_AS(parse_filter_kind("magic"), ConfigError);
    CHECK(parse_response_kind("strain_energy") == ResponseKind::strain_energy);
}
