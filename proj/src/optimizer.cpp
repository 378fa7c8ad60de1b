#include "shapefilt/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "shapefilt/error.hpp"

namespace shapefilt {

const char* filter_kind_name(FilterKind k) {
    switch (k) {
        case FilterKind::explicit_surface: return "explicit_surface";
        case FilterKind::implicit_surface: return "implicit_surface";
        case FilterKind::bulk_surface: return "bulk_surface";
    }
    return "?";
}

FilterKind parse_filter_kind(const std::string& name) {
    if (name == "explicit_surface" || name == "explicit" || name == "sequential") return FilterKind::explicit_surface;
    if (name == "implicit_surface") return FilterKind::implicit_surface;
    if (name == "bulk_surface") return FilterKind::bulk_surface;
    throw ConfigError("unknown filter kind '" + name + "'");
}

const char* response_kind_name(ResponseKind k) { return k == ResponseKind::volume ? "volume" : "strain_energy"; }

ResponseKind parse_response_kind(const std::string& name) {
    if (name == "volume") return ResponseKind::volume;
    if (name == "strain_energy") return ResponseKind::strain_energy;
    throw ConfigError("unknown response '" + name + "'");
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::running: return "running";
        case Termination::max_iterations: return "max_iterations";
        case Termination::mesh_distortion: return "mesh_distortion";
        case Termination::stagnation: return "stagnation";
        case Termination::solver_failure: return "solver_failure";
    }
    return "?";
}

void OptimizationConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0 (or 0 for automatic)");
    if (max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
    if (stagnation_window < 1) throw ConfigError("stagnation_window must be >= 1");
    if (constraint && !(constraint->tolerance > 0.0)) throw ConfigError("constraint tolerance must be > 0");
    if (!(r_gamma >= 0.0)) throw ConfigError("r_gamma must be >= 0");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
    elasticity.validate();
    explicit_filter.kernel.validate();
}

std::vector<double> project_constraint(std::span<const double> g, std::span<const double> c, double violation,
                                       const CsrMatrix& mass, double rho) {
    if (g.size() != c.size() || static_cast<Index>(g.size()) != mass.rows())
        throw DimensionError("project_constraint: size mismatch");
    const auto mc = mass.multiply(c);
    double gc = 0.0, cc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        gc += g[i] * mc[i];
        cc += c[i] * mc[i];
    }
    if (!(cc > 0.0)) throw DimensionError("project_constraint: zero constraint gradient");
    std::vector<double> d(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) d[i] = -(g[i] - gc / cc * c[i]) - rho * violation * c[i] / cc;
    return d;
}

void steepest_descent_step(std::vector<double>& control, std::vector<double>& geometry, std::span<const double> djds,
                           double alpha, const std::function<std::vector<double>(std::span<const double>)>& forward) {
    if (djds.size() != control.size()) throw DimensionError("steepest_descent_step: control size mismatch");
    std::vector<double> ds(djds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) ds[i] = -alpha * djds[i];
    const auto dx = forward(ds);
    if (dx.size() != geometry.size()) throw DimensionError("steepest_descent_step: geometry size mismatch");
    for (std::size_t i = 0; i < ds.size(); ++i) control[i] += ds[i];
    for (std::size_t i = 0; i < dx.size(); ++i) geometry[i] += dx[i];
}

namespace {

ResponseValue evaluate(ResponseKind kind, const VolumeMesh& vm, const StructuralCase& sc) {
    return kind == ResponseKind::volume ? volume_response(vm) : strain_energy_response(vm, sc);
}

// Filter built on the current geometry, reduced to the pieces the loop needs.
struct StepOperator {
    std::function<std::vector<double>(std::span<const double>)> djds;    // dJ/dx (3n volume) -> dj/ds
    std::function<std::vector<double>(std::span<const double>)> forward; // ds -> volume displacement
    CsrMatrix mass;                                                      // metric of the control space
    std::size_t control_size = 0;
    std::optional<double> j0;
};

StepOperator build_operator(const OptimizationConfig& cfg, const VolumeMesh& vm, const DesignSurface& ds,
                            const std::vector<bool>& fixed, std::optional<double> previous_j0) {
    StepOperator op;
    const std::size_t n3 = 3 * static_cast<std::size_t>(vm.node_count());
    if (cfg.filter == FilterKind::bulk_surface) {
        BulkSurfaceFilter::Options o;
        o.elasticity = cfg.elasticity;
        o.radii.r_gamma = cfg.r_gamma;
        o.radii.beta = cfg.beta;
        o.stiffening = cfg.stiffening;
        o.previous_j0 = previous_j0;
        o.fixed = fixed;
        o.cg = cfg.cg;
        auto f = std::make_shared<BulkSurfaceFilter>(vm, o);
        op.djds = [f](std::span<const double> g) { return f->map_sensitivities(g).djds; };
        op.forward = [f](std::span<const double> s) { return f->forward(s); };
        op.mass = f->mass();
        op.control_size = n3;
        op.j0 = f->j0();
        return op;
    }
    std::vector<Point3> pts;
    pts.reserve(ds.volume_node.size());
    for (Index v : ds.volume_node) pts.push_back(vm.nodes()[v]);
    const SurfaceMesh surface = ds.surface.with_nodes(std::move(pts));
    const auto volume_node = ds.volume_node;
    auto to_surface = [volume_node](std::span<const double> g) {
        std::vector<double> out(3 * volume_node.size());
        for (std::size_t i = 0; i < volume_node.size(); ++i)
            for (int c = 0; c < 3; ++c) out[3 * i + c] = g[3 * volume_node[i] + c];
        return out;
    };
    const CgOptions cg = cfg.cg;
    auto move_mesh = [volume_node, vm, n3, cg](const std::vector<double>& dx_surface) {
        std::vector<double> bd(n3, 0.0);
        for (std::size_t i = 0; i < volume_node.size(); ++i)
            for (int c = 0; c < 3; ++c) bd[3 * volume_node[i] + c] = dx_surface[3 * i + c];
        return sequential_mesh_motion(vm, bd, ElasticityParams::from_young_poisson(), cg);
    };
    if (cfg.filter == FilterKind::explicit_surface) {
        auto f = std::make_shared<ExplicitFilter>(cfg.explicit_filter, surface);
        op.djds = [f, to_surface](std::span<const double> g) { return f->scaled_sensitivities(to_surface(g)); };
        op.forward = [f, move_mesh](std::span<const double> s) { return move_mesh(f->forward(s)); };
        op.mass = f->mass().block_expand(3);
    } else {
        auto f = std::make_shared<SurfaceHelmholtzFilter>(surface, cfg.r_gamma, surface.boundary_node_mask(), cfg.cg);
        op.djds = [f, to_surface](std::span<const double> g) { return f->map_sensitivities(to_surface(g)).djds; };
        op.forward = [f, move_mesh](std::span<const double> s) { return move_mesh(f->forward(s)); };
        op.mass = f->mass().block_expand(3);
    }
    op.control_size = 3 * volume_node.size();
    return op;
}

// Keeps sensitivities on design-surface nodes only.
void restrict_to_design(std::vector<double>& g, const std::vector<bool>& on_design) {
    for (std::size_t i = 0; i < on_design.size(); ++i)
        if (!on_design[i]) g[3 * i] = g[3 * i + 1] = g[3 * i + 2] = 0.0;
}

double max_nodal_norm(std::span<const double> v) {
    double m = 0.0;
    for (std::size_t i = 0; i + 2 < v.size(); i += 3)
        m = std::max(m, std::sqrt(v[i] * v[i] + v[i + 1] * v[i + 1] + v[i + 2] * v[i + 2]));
    return m;
}

} // namespace

OptimizationState run_optimization(const OptimizationConfig& cfg, const VolumeMesh& mesh,
                                   const IterationCallback& on_iteration) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    OptimizationState st;
    VolumeMesh vm = mesh;
    st.geometry = flatten(vm.nodes());
    st.min_jacobian = min_jacobian(vm.nodes(), vm.tets());
    st.alpha = cfg.alpha;
    const DesignSurface ds = extract_design_surface(vm);
    const std::vector<bool> fixed = fixed_node_mask(vm);
    std::vector<bool> on_design(static_cast<std::size_t>(vm.node_count()), false);
    for (Index v : ds.volume_node) on_design[v] = true;
    st.control.assign(cfg.filter == FilterKind::bulk_surface ? st.geometry.size() : 3 * ds.volume_node.size(), 0.0);

    std::optional<ResponseValue> obj, con;
    std::optional<double> j0;
    try {
        obj = evaluate(cfg.objective, vm, cfg.structure);
        if (cfg.constraint) con = evaluate(cfg.constraint->response, vm, cfg.structure);
    } catch (const Error& e) {
        st.termination = Termination::solver_failure;
        st.message = e.what();
        return st;
    }
    st.history.push_back({0, obj->value, con ? con->value : 0.0, 0.0, st.min_jacobian, elapsed()});
    if (on_iteration) on_iteration(st, vm);

    while (st.termination == Termination::running) {
        if (st.iteration >= cfg.max_iterations) {
            st.termination = Termination::max_iterations;
            break;
        }
        try {
            StepOperator op = build_operator(cfg, vm, ds, fixed, j0);
            if (op.j0) j0 = op.j0;
            std::vector<double> g = obj->dJdx;
            restrict_to_design(g, on_design);
            const auto gj = op.djds(g);
            std::vector<double> direction(gj.size());
            for (std::size_t i = 0; i < gj.size(); ++i) direction[i] = -gj[i];
            if (cfg.constraint) {
                const double target = cfg.constraint->target;
                const double violation = con->value - target;
                const double band = cfg.constraint->tolerance * std::max(std::abs(target), 1e-300);
                if (violation > -band) {
                    std::vector<double> gc = con->dJdx;
                    restrict_to_design(gc, on_design);
                    const auto cj = op.djds(gc);
                    direction = project_constraint(gj, cj, std::max(violation, 0.0), op.mass, cfg.constraint->rho);
                }
            }
            // The update is linear in the direction: one filter application serves
            // both the automatic step size and the step itself.
            const auto unit = op.forward(direction);
            if (st.alpha <= 0.0) {
                const double m = max_nodal_norm(unit);
                st.alpha = m > 0.0 ? 0.01 * bounding_box_diagonal(vm.nodes()) / m : 1.0;
            }
            std::vector<double> trial = st.geometry;
            double step2 = 0.0;
            for (std::size_t i = 0; i < trial.size(); ++i) {
                trial[i] += st.alpha * unit[i];
                step2 += st.alpha * unit[i] * st.alpha * unit[i];
            }
            const auto trial_nodes = unflatten(trial);
            const double mj = min_jacobian(trial_nodes, vm.tets());
            ++st.iteration;
            if (mj <= cfg.min_jacobian_stop) {
                st.termination = Termination::mesh_distortion;
                st.distortion_iteration = st.iteration;
                st.message = "step would take the minimum element Jacobian to " + std::to_string(mj);
                break;
            }
            for (std::size_t i = 0; i < direction.size(); ++i) st.control[i] += st.alpha * direction[i];
            st.geometry = std::move(trial);
            vm = vm.with_nodes(trial_nodes);
            st.min_jacobian = mj;
            obj = evaluate(cfg.objective, vm, cfg.structure);
            if (cfg.constraint) con = evaluate(cfg.constraint->response, vm, cfg.structure);
            st.history.push_back(
                {st.iteration, obj->value, con ? con->value : 0.0, std::sqrt(step2), st.min_jacobian, elapsed()});
            if (on_iteration) on_iteration(st, vm);

            const int w = cfg.stagnation_window;
            if (static_cast<int>(st.history.size()) > w) {
                const double now = st.history.back().objective;
                const double then = st.history[st.history.size() - 1 - w].objective;
                const double scale = std::max(std::abs(then), std::numeric_limits<double>::min());
                bool flat = std::abs(now - then) <= cfg.stagnation_tolerance * scale;
                if (now == then) flat = true;
                if (flat) st.termination = Termination::stagnation;
            }
        } catch (const Error& e) {
            st.termination = Termination::solver_failure;
            st.message = e.what();
        }
    }
    return st;
}

void write_history_csv(const std::filesystem::path& path, const OptimizationState& state) {
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw IoError("cannot write " + path.string());
    std::fputs("iteration,objective,constraint,step_norm,min_jacobian,wall_time\r\n", fp);
    for (const auto& r : state.history)
        std::fprintf(fp, "%d,%.17g,%.17g,%.17g,%.17g,%.6f\r\n", r.iteration, r.objective, r.constraint, r.step_norm,
                     r.min_jacobian, r.wall_time);
    if (std::fclose(fp) != 0) throw IoError("failed writing " + path.string());
}

} // namespace shapefilt
