#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "output.hpp"
#include "shapefilt/error.hpp"
#include "shapefilt/fixtures.hpp"
#include "shapefilt/mesh_io.hpp"
#include "shapefilt/simd/kernels.hpp"
#include "shapefilt/studies.hpp"

namespace shapefilt::cli {

namespace {

Config effective_config(const GlobalOptions& g) {
    Config c = g.config.empty() ? Config{} : load_config(g.config);
    return c;
}

Manifest start_manifest(const char* command, const GlobalOptions& g, const Config& c) {
    Manifest m(command, g.out);
    m.set_config(to_json(c));
    m.set("seed", g.seed);
    m.set("threads", g.threads);
    m.set("simd", simd::level_name(simd::active_level()));
    if (!g.config.empty()) m.add_input(g.config);
    return m;
}

std::uint64_t fixture_seed(const GlobalOptions& g, const FixtureSource& f) { return f.seed.value_or(g.seed); }

SurfaceMesh surface_fixture(const std::string& name, int resolution, std::optional<double> perturbation,
                            std::uint64_t seed) {
    if (name == "plate") {
        PlateOptions o;
        if (resolution) o.resolution = resolution;
        if (perturbation) o.perturbation = *perturbation;
        o.seed = seed;
        return make_plate(o);
    }
    if (name == "perforated_plate") {
        PerforatedPlateOptions o;
        if (resolution) o.resolution = resolution;
        if (perturbation) o.perturbation = *perturbation;
        o.seed = seed;
        return make_perforated_plate(o);
    }
    if (name == "ball") {
        BallOptions o;
        if (resolution) o.resolution = resolution;
        return make_ball(o).boundary().surface;
    }
    throw ConfigError("no surface fixture named '" + name + "'");
}

VolumeMesh volume_fixture(const std::string& name, int resolution, std::optional<double> perturbation,
                          std::uint64_t seed) {
    if (name == "notched_block") {
        NotchedBlockOptions o;
        if (resolution) o.resolution = resolution;
        if (perturbation) o.perturbation = *perturbation;
        o.seed = seed;
        return make_notched_block(o);
    }
    if (name == "ball") {
        BallOptions o;
        if (resolution) o.resolution = resolution;
        return make_ball(o);
    }
    throw ConfigError("no volume fixture named '" + name + "'");
}

SurfaceMesh load_surface(const GlobalOptions& g, const Config& c, Manifest& m, const std::string& default_fixture) {
    if (!c.mesh.path.empty()) {
        if (c.mesh.kind != "surface") throw ConfigError("mesh.kind must be surface for this command");
        m.add_input(c.mesh.path);
        if (!c.mesh.design.empty()) m.add_input(c.mesh.design);
        return load_surface_mesh(c.mesh.path, c.mesh.design);
    }
    const std::string name = c.raw.contains("fixture") ? c.fixture.name : default_fixture;
    return surface_fixture(name, c.fixture.resolution, c.fixture.perturbation, fixture_seed(g, c.fixture));
}

VolumeMesh load_volume(const GlobalOptions& g, const Config& c, Manifest& m, const std::string& default_fixture) {
    if (!c.mesh.path.empty()) {
        if (c.mesh.kind != "volume") throw ConfigError("mesh.kind must be volume for this command");
        m.add_input(c.mesh.path);
        if (!c.mesh.design.empty()) m.add_input(c.mesh.design);
        return load_volume_mesh(c.mesh.path, c.mesh.design);
    }
    const std::string name = c.raw.contains("fixture") ? c.fixture.name : default_fixture;
    return volume_fixture(name, c.fixture.resolution, c.fixture.perturbation, fixture_seed(g, c.fixture));
}

ExplicitFilterConfig explicit_config(const FilterSection& f, double element_size) {
    ExplicitFilterConfig cfg;
    cfg.kernel = f.radius ? KernelSpec::with_default_span(f.kernel, *f.radius)
                          : KernelSpec::for_span(f.kernel, f.span_ratio * element_size);
    cfg.damping = f.damping;
    cfg.normalization = f.normalization;
    cfg.mode = f.mode;
    return cfg;
}

double implicit_radius(const FilterSection& f, double element_size) {
    return f.r_gamma ? *f.r_gamma : calibrated_helmholtz_radius(f.span_ratio, element_size);
}

} // namespace

double calibrated_helmholtz_radius(double span_ratio, double element_size) {
    static std::map<double, double> cache;
    auto it = cache.find(span_ratio);
    if (it == cache.end()) {
        const SurfaceMesh plate = make_plate(PlateOptions{});
        const double a = average_element_size(plate);
        const double r = helmholtz_radius_for_span(plate, central_node(plate.nodes()), span_ratio * a) / a;
        it = cache.emplace(span_ratio, r).first;
    }
    return it->second * element_size;
}

int cmd_generate_fixture(const GlobalOptions& g, const FixtureRequest& req) {
    Config c = effective_config(g);
    c.fixture.name = req.name;
    c.fixture.resolution = req.resolution;
    if (req.perturbation) c.fixture.perturbation = req.perturbation;
    Manifest m = start_manifest("generate-fixture", g, c);
    Stopwatch sw;
    const auto seed = fixture_seed(g, c.fixture);
    const bool volume = req.name == "notched_block" || req.name == "ball";
    if (volume) {
        const VolumeMesh vm = volume_fixture(req.name, req.resolution, c.fixture.perturbation, seed);
        write_vtk(m.output(req.name + ".vtk"), vm);
        write_design_flags(m.output(req.name + ".vtk.design.json"), vm.design_flags());
        m.results() = {{"nodes", vm.node_count()}, {"tets", vm.tet_count()},
                       {"boundary_triangles", vm.boundary().surface.triangle_count()}};
    } else {
        const SurfaceMesh sm = surface_fixture(req.name, req.resolution, c.fixture.perturbation, seed);
        write_vtk(m.output(req.name + ".vtk"), sm);
        double hmin = INFINITY, hmax = 0.0;
        for (const auto& t : sm.triangles())
            for (int k = 0; k < 3; ++k) {
                const double h = distance(sm.nodes()[t[k]], sm.nodes()[t[(k + 1) % 3]]);
                hmin = std::min(hmin, h);
                hmax = std::max(hmax, h);
            }
        m.results() = {{"nodes", sm.node_count()}, {"triangles", sm.triangle_count()},
                       {"boundary_edges", sm.boundary_edges().size()}, {"edge_length_ratio", hmax / hmin}};
    }
    m.timing("total", sw.seconds());
    m.write();
    std::printf("wrote %s fixture to %s\n", req.name.c_str(), g.out.string().c_str());
    return 0;
}

int cmd_consistency(const GlobalOptions& g) {
    const Config c = effective_config(g);
    Manifest m = start_manifest("consistency", g, c);
    Stopwatch sw;
    const Point3 dir = c.study.direction;
    ConsistencyResult r;
    const bool bulk = c.filter.kind == "bulk_surface";
    if (bulk) {
        const VolumeMesh vm = load_volume(g, c, m, "notched_block");
        const double a = average_element_size(vm);
        BulkSurfaceFilter::Options o;
        o.radii.r_gamma = implicit_radius(c.filter, a);
        o.radii.beta = c.filter.beta;
        o.stiffening = c.filter.stiffening ? Stiffening::on : Stiffening::off;
        r = consistency_bulk(vm, o, dir);
        write_vtk(m.output("consistency.vtk"), vm,
                  {PointField::vector_field("dJdx", r.dJdx), PointField::vector_field("djds", r.djds),
                   PointField::scalar_field("deviation", r.deviation)});
        m.results()["r_gamma"] = o.radii.r_gamma;
    } else {
        const SurfaceMesh sm = load_surface(g, c, m, "perforated_plate");
        const double a = average_element_size(sm);
        if (c.filter.kind == "explicit") {
            const auto cfg = explicit_config(c.filter, a);
            r = consistency_explicit(sm, cfg, dir);
            m.results()["kernel_radius"] = cfg.kernel.radius;
            m.results()["kernel_span"] = cfg.kernel.span;
        } else {
            const double rg = implicit_radius(c.filter, a);
            r = consistency_implicit(sm, rg, dir);
            m.results()["r_gamma"] = rg;
        }
        write_vtk(m.output("consistency.vtk"), sm,
                  {PointField::vector_field("dJdx", r.dJdx), PointField::vector_field("djds", r.djds),
                   PointField::scalar_field("deviation", r.deviation)});
    }
    CsvWriter csv(m.output("consistency.csv"));
    csv.row({"node", "dJdx_x", "dJdx_y", "dJdx_z", "djds_x", "djds_y", "djds_z", "deviation"});
    for (std::size_t i = 0; i < r.deviation.size(); ++i)
        csv.row({fmt(static_cast<long long>(i)), fmt(r.dJdx[3 * i]), fmt(r.dJdx[3 * i + 1]), fmt(r.dJdx[3 * i + 2]),
                 fmt(r.djds[3 * i]), fmt(r.djds[3 * i + 1]), fmt(r.djds[3 * i + 2]), fmt(r.deviation[i])});
    csv.close();
    m.results()["max_deviation"] = r.max_deviation;
    m.results()["max_boundary_deviation"] = r.max_boundary_deviation;
    m.timing("total", sw.seconds());
    m.write();
    std::printf("filter %s: max deviation from uniform %.3e (boundary %.3e)\n", c.filter.kind.c_str(), r.max_deviation,
                r.max_boundary_deviation);
    return 0;
}

int cmd_kernel_profile(const GlobalOptions& g) {
    const Config c = effective_config(g);
    Manifest m = start_manifest("kernel-profile", g, c);
    Stopwatch sw;
    const SurfaceMesh plate = load_surface(g, c, m, "plate");
    const Index node = c.study.query_node.value_or(central_node(plate.nodes()));
    const double span = c.study.span_ratio * average_element_size(plate);
    const KernelProfile kp = kernel_profile(plate, node, span, c.study.kernels);

    std::vector<Index> order(kp.distance.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return kp.distance[a] < kp.distance[b]; });
    CsvWriter csv(m.output("kernel_profile.csv"));
    std::vector<std::string> head{"node", "distance"};
    for (auto f : kp.families) head.push_back(kernel_family_name(f));
    head.push_back("implicit_helmholtz");
    head.push_back("green_at_helmholtz_radius");
    csv.row(head);
    std::vector<PointField> fields;
    for (Index i : order) {
        std::vector<std::string> row{fmt(static_cast<long long>(i)), fmt(kp.distance[i])};
        for (const auto& v : kp.explicit_values) row.push_back(fmt(v[i]));
        row.push_back(fmt(kp.implicit_values[i]));
        row.push_back(fmt(kp.green_at_helmholtz_radius[i]));
        csv.row(row);
    }
    csv.close();
    for (std::size_t k = 0; k < kp.families.size(); ++k)
        fields.push_back(PointField::scalar_field(kernel_family_name(kp.families[k]), kp.explicit_values[k]));
    fields.push_back(PointField::scalar_field("implicit_helmholtz", kp.implicit_values));
    fields.push_back(PointField::scalar_field("green_at_helmholtz_radius", kp.green_at_helmholtz_radius));
    write_vtk(m.output("kernel_profile.vtk"), plate, fields);
    m.results() = {{"query_node", node}, {"span", span}, {"helmholtz_radius", kp.helmholtz_radius},
                   {"green_vs_helmholtz_rms", kp.green_rms}};
    m.timing("total", sw.seconds());
    m.write();
    std::printf("span %.4g, Helmholtz radius %.4g, RMS(green - helmholtz) = %.4f\n", span, kp.helmholtz_radius,
                kp.green_rms);
    return 0;
}

int cmd_condition_study(const GlobalOptions& g) {
    const Config c = effective_config(g);
    Manifest m = start_manifest("cond-study", g, c);
    Stopwatch sw;
    const SurfaceMesh plate = load_surface(g, c, m, "plate");
    const Index node = c.study.query_node.value_or(central_node(plate.nodes()));
    const auto rows = condition_study(plate, node, c.study.kernels, c.study.ratios);
    CsvWriter csv(m.output("cond_study.csv"));
    csv.row({"filter", "ratio", "radius", "condition", "lower", "upper", "singular"});
    for (const auto& r : rows)
        csv.row({r.filter, fmt(r.ratio), fmt(r.radius), fmt(r.estimate.value), fmt(r.estimate.lower),
                 fmt(r.estimate.upper), r.estimate.singular ? "1" : "0"});
    csv.close();

    std::map<std::string, std::vector<double>> by;
    for (const auto& r : rows) by[r.filter].push_back(r.estimate.value);
    nlohmann::json checks = nlohmann::json::object();
    for (const auto& [name, v] : by) {
        if (name == "implicit") continue;
        bool below = true, increasing = true;
        for (std::size_t i = 0; i < v.size(); ++i) {
            below = below && by["implicit"][i] < v[i];
            if (i) increasing = increasing && v[i] > v[i - 1];
        }
        checks[name] = {{"implicit_smaller", below}, {"increasing_with_ratio", increasing}};
    }
    m.results()["checks"] = checks;
    m.timing("total", sw.seconds());
    m.write();
    for (const auto& r : rows)
        std::printf("%-18s p/a %5.1f  cond %.4e%s\n", r.filter.c_str(), r.ratio, r.estimate.value,
                    r.estimate.singular ? " (singular)" : "");
    return 0;
}

int cmd_bench(const GlobalOptions& g) {
    const Config c = effective_config(g);
    Manifest m = start_manifest("bench", g, c);
    Stopwatch sw;
    const SurfaceMesh plate = load_surface(g, c, m, "plate");
    const VolumeMesh block = volume_fixture("notched_block", 0, std::nullopt, g.seed);
    TimingOptions o;
    o.ratios = c.raw.contains("study") && c.raw["study"].contains("ratios") ? c.study.ratios
                                                                          : std::vector<double>{5, 10, 20, 40};
    o.repetitions = c.study.repetitions;
    o.kernel = c.filter.kernel;
    const auto rows = timing_study(plate, central_node(plate.nodes()), o, &block);
    CsvWriter csv(m.output("bench.csv"));
    csv.row({"filter", "ratio", "median_seconds", "repetitions"});
    for (const auto& r : rows)
        csv.row({r.filter, fmt(r.ratio), fmt(r.median_seconds), fmt(static_cast<long long>(r.seconds.size()))});
    csv.close();
    CsvWriter trend(m.output("bench_trend.csv"));
    trend.row({"filter", "slope_seconds_per_ratio"});
    for (const char* f : {"explicit_stored", "explicit_matrix_free", "implicit_surface", "bulk_surface"}) {
        const double s = timing_slope(rows, f);
        trend.row({f, fmt(s)});
        m.results()["slopes"][f] = s;
    }
    trend.close();
    m.timing("total", sw.seconds());
    m.write();
    for (const auto& r : rows) std::printf("%-22s p/a %5.1f  %.5f s\n", r.filter.c_str(), r.ratio, r.median_seconds);
    return 0;
}

int cmd_optimize(const GlobalOptions& g) {
    const Config c = effective_config(g);
    Manifest m = start_manifest("optimize", g, c);
    Stopwatch sw;
    const VolumeMesh vm = load_volume(g, c, m, "notched_block");
    const double a = average_element_size(vm);
    const auto& os = c.optimization;

    OptimizationConfig oc;
    oc.objective = parse_response_kind(os.objective);
    oc.alpha = os.alpha;
    oc.max_iterations = os.max_iterations;
    oc.min_jacobian_stop = os.min_jacobian_stop;
    if (os.min_jacobian_stop_relative)
        oc.min_jacobian_stop = *os.min_jacobian_stop_relative * min_jacobian(vm.nodes(), vm.tets());
    oc.filter = c.filter.kind == "explicit" ? FilterKind::explicit_surface : parse_filter_kind(c.filter.kind);
    oc.explicit_filter = explicit_config(c.filter, a);
    oc.r_gamma = implicit_radius(c.filter, a);
    oc.beta = c.filter.beta;
    oc.stiffening = c.filter.stiffening ? Stiffening::on : Stiffening::off;

    // Clamp the bottom face, load the top face.
    auto& sc = oc.structure;
    sc.elasticity = ElasticityParams::from_young_poisson(os.structure.young, os.structure.poisson);
    double zmin = INFINITY, zmax = -INFINITY;
    for (const auto& p : vm.nodes()) {
        zmin = std::min(zmin, p.z);
        zmax = std::max(zmax, p.z);
    }
    const double eps = 1e-9 * bounding_box_diagonal(vm.nodes());
    sc.clamped.assign(static_cast<std::size_t>(vm.node_count()), false);
    std::vector<Index> top;
    for (Index i = 0; i < vm.node_count(); ++i) {
        if (vm.nodes()[i].z <= zmin + eps) sc.clamped[i] = true;
        if (vm.nodes()[i].z >= zmax - eps) top.push_back(i);
    }
    for (Index i : top) sc.loads.push_back({i, (1.0 / static_cast<double>(top.size())) * os.structure.load});
    if (os.constraint) {
        ConstraintConfig cc;
        cc.response = parse_response_kind(os.constraint->response);
        cc.tolerance = os.constraint->tolerance;
        cc.rho = os.constraint->rho;
        if (os.constraint->target) {
            cc.target = *os.constraint->target;
        } else {
            const double v0 = cc.response == ResponseKind::volume ? volume_response(vm).value
                                                                  : strain_energy_response(vm, sc).value;
            cc.target = os.constraint->target_relative * v0;
        }
        oc.constraint = cc;
    }

    const auto x0 = flatten(vm.nodes());
    const int every = std::max(1, os.snapshot_every);
    auto snapshot = [&](const OptimizationState& st, const VolumeMesh& cur) {
        if (st.iteration % every != 0) return;
        std::vector<double> disp(st.geometry.size());
        for (std::size_t i = 0; i < disp.size(); ++i) disp[i] = st.geometry[i] - x0[i];
        char name[64];
        std::snprintf(name, sizeof name, "geometry_%04d.vtk", st.iteration);
        write_vtk(m.output(name), cur, {PointField::vector_field("displacement", disp)});
    };
    const OptimizationState st = run_optimization(oc, vm, snapshot);
    write_history_csv(m.output("history.csv"), st);
    const auto& h = st.history;
    m.results() = {{"termination", termination_name(st.termination)},
                   {"iterations", st.iteration},
                   {"distortion_iteration", st.distortion_iteration},
                   {"alpha", st.alpha},
                   {"r_gamma", oc.r_gamma},
                   {"initial_objective", h.empty() ? 0.0 : h.front().objective},
                   {"final_objective", h.empty() ? 0.0 : h.back().objective},
                   {"relative_reduction", h.empty() ? 0.0 : 1.0 - h.back().objective / h.front().objective},
                   {"min_jacobian", st.min_jacobian},
                   {"message", st.message}};
    m.timing("total", sw.seconds());
    m.write();
    std::printf("%s after %d iterations, objective %.6g -> %.6g\n", termination_name(st.termination), st.iteration,
                h.empty() ? 0.0 : h.front().objective, h.empty() ? 0.0 : h.back().objective);
    return st.termination == Termination::solver_failure ? 2 : 0;
}

} // namespace shapefilt::cli
