#include "shapefilt/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "shapefilt/error.hpp"
#include "shapefilt/fem.hpp"
#include "shapefilt/responses.hpp"

namespace shapefilt {

double average_element_size(const SurfaceMesh& sm) {
    if (sm.triangle_count() == 0) return 0.0;
    return std::sqrt(2.0 * sm.area() / sm.triangle_count());
}

double average_element_size(const VolumeMesh& vm) {
    if (vm.tet_count() == 0) return 0.0;
    return std::cbrt(6.0 * vm.volume() / vm.tet_count());
}

Index central_node(std::span<const Point3> nodes) {
    if (nodes.empty()) throw DimensionError("central_node: empty node set");
    Point3 c{};
    for (const auto& p : nodes) c += p;
    c *= 1.0 / static_cast<double>(nodes.size());
    Index best = 0;
    for (Index i = 1; i < static_cast<Index>(nodes.size()); ++i)
        if (distance(nodes[i], c) < distance(nodes[best], c)) best = i;
    return best;
}

namespace {

ConsistencyResult summarize(std::vector<double> dJdx, std::vector<double> djds, const Point3& dir,
                            const std::vector<bool>& near_boundary) {
    ConsistencyResult r;
    r.dJdx = std::move(dJdx);
    r.djds = std::move(djds);
    const std::size_t n = r.djds.size() / 3;
    r.deviation.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = r.djds[3 * i] * dir.x + r.djds[3 * i + 1] * dir.y + r.djds[3 * i + 2] * dir.z;
        r.deviation[i] = std::abs(v - 1.0);
        r.max_deviation = std::max(r.max_deviation, r.deviation[i]);
        if (!near_boundary.empty() && near_boundary[i])
            r.max_boundary_deviation = std::max(r.max_boundary_deviation, r.deviation[i]);
    }
    return r;
}

std::vector<bool> near_boundary_mask(const SurfaceMesh& sm) {
    const auto on = sm.boundary_node_mask();
    std::vector<bool> near = on;
    for (const auto& t : sm.triangles()) {
        const bool touch = on[t[0]] || on[t[1]] || on[t[2]];
        if (touch)
            for (Index v : t) near[v] = true;
    }
    return near;
}

} // namespace

ConsistencyResult consistency_explicit(const SurfaceMesh& sm, const ExplicitFilterConfig& cfg, const Point3& direction) {
    const ExplicitFilter f(cfg, sm);
    auto g = synthetic_uniform_sensitivity(sm, direction);
    auto dj = f.scaled_sensitivities(g);
    return summarize(std::move(g), std::move(dj), direction, near_boundary_mask(sm));
}

ConsistencyResult consistency_implicit(const SurfaceMesh& sm, double r_gamma, const Point3& direction,
                                       const CgOptions& cg) {
    const SurfaceHelmholtzFilter f(sm, r_gamma, {}, cg);
    auto g = synthetic_uniform_sensitivity(sm, direction);
    auto dj = f.map_sensitivities(g).djds;
    return summarize(std::move(g), std::move(dj), direction, near_boundary_mask(sm));
}

ConsistencyResult consistency_bulk(const VolumeMesh& vm, const BulkSurfaceFilter::Options& options,
                                   const Point3& direction) {
    const BulkSurfaceFilter f(vm, options);
    std::vector<double> dir(3 * static_cast<std::size_t>(vm.node_count()));
    for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = direction[static_cast<int>(i % 3)];
    auto g = f.mass().multiply(dir);
    auto dj = f.map_sensitivities(g).djds;
    std::vector<bool> near(static_cast<std::size_t>(vm.node_count()), false);
    for (Index v : vm.boundary().volume_node) near[v] = true;
    return summarize(std::move(g), std::move(dj), direction, near);
}

KernelProfile kernel_profile(const SurfaceMesh& plate, Index node, double span,
                             const std::vector<KernelFamily>& families) {
    KernelProfile kp;
    kp.node = node;
    kp.span = span;
    kp.families = families;
    const auto x = plate.nodes();
    kp.distance.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) kp.distance[i] = distance(x[i], x[node]);
    for (auto fam : families) {
        const KernelSpec k = KernelSpec::for_span(fam, span);
        std::vector<double> v(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) v[i] = kernel_eval_normalized(k, kp.distance[i]);
        kp.explicit_values.push_back(std::move(v));
    }
    kp.helmholtz_radius = helmholtz_radius_for_span(plate, node, span);
    const SurfaceHelmholtzFilter f(plate, kp.helmholtz_radius);
    kp.implicit_values = f.numerical_kernel_row(node);
    const KernelSpec green{KernelFamily::green_regularized, kp.helmholtz_radius, span};
    kp.green_at_helmholtz_radius.resize(x.size());
    double s = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        kp.green_at_helmholtz_radius[i] = kernel_eval_normalized(green, kp.distance[i]);
        if (kp.distance[i] <= 0.5 * span) {
            const double e = kp.implicit_values[i] - kp.green_at_helmholtz_radius[i];
            s += e * e;
            ++cnt;
        }
    }
    kp.green_rms = cnt ? std::sqrt(s / static_cast<double>(cnt)) : 0.0;
    return kp;
}

std::vector<ConditionRow> condition_study(const SurfaceMesh& plate, Index node,
                                          const std::vector<KernelFamily>& families,
                                          const std::vector<double>& ratios) {
    if (plate.node_count() > kDenseSpectrumLimit)
        throw ConfigError("condition study: mesh too large for dense spectra");
    const double a = average_element_size(plate);
    std::vector<ConditionRow> rows;
    for (double ratio : ratios) {
        const double span = ratio * a;
        const double r = helmholtz_radius_for_span(plate, node, span);
        const SurfaceHelmholtzFilter f(plate, r);
        rows.push_back({"implicit", ratio, r, generalized_condition_number(f.op(), f.mass())});
        for (auto fam : families) {
            const ExplicitFilterConfig cfg{KernelSpec::for_span(fam, span), false, true, MatrixMode::stored};
            const ExplicitFilter ef(cfg, plate);
            rows.push_back({kernel_family_name(fam), ratio, cfg.kernel.radius,
                            singular_condition_number(to_dense(ef.matrix()))});
        }
    }
    return rows;
}

namespace {

template <class F>
std::vector<double> time_calls(int reps, F&& f) {
    std::vector<double> t;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return t;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<double> probe_field(std::size_t n) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(0.37 * static_cast<double>(i)) + 0.25;
    return s;
}

} // namespace

std::vector<TimingRow> timing_study(const SurfaceMesh& plate, Index node, const TimingOptions& o,
                                    const VolumeMesh* volume) {
    if (o.repetitions < 3) throw ConfigError("timing study: repetitions must be >= 3");
    const double a = average_element_size(plate);
    const auto s = probe_field(3 * static_cast<std::size_t>(plate.node_count()));
    std::vector<TimingRow> rows;
    auto add = [&](const char* name, double ratio, std::vector<double> t) {
        rows.push_back({name, ratio, median(t), std::move(t)});
    };
    for (double ratio : o.ratios) {
        const double span = ratio * a;
        ExplicitFilterConfig cfg{KernelSpec::for_span(o.kernel, span), false, true, MatrixMode::stored};
        const ExplicitFilter stored(cfg, plate);
        add("explicit_stored", ratio, time_calls(o.repetitions, [&] { (void)stored.forward(s); }));
        cfg.mode = MatrixMode::matrix_free;
        const ExplicitFilter free(cfg, plate);
        add("explicit_matrix_free", ratio, time_calls(o.repetitions, [&] { (void)free.forward(s); }));
        const double r = helmholtz_radius_for_span(plate, node, span);
        const SurfaceHelmholtzFilter imp(plate, r);
        add("implicit_surface", ratio, time_calls(o.repetitions, [&] { (void)imp.forward(s); }));
        if (volume && o.include_bulk) {
            BulkSurfaceFilter::Options bo;
            bo.radii.r_gamma = r / a * average_element_size(*volume);
            const BulkSurfaceFilter bulk(*volume, bo);
            const auto sv = probe_field(3 * static_cast<std::size_t>(volume->node_count()));
            add("bulk_surface", ratio, time_calls(o.repetitions, [&] { (void)bulk.forward(sv); }));
        }
    }
    return rows;
}

double timing_slope(const std::vector<TimingRow>& rows, const std::string& filter) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.filter != filter) continue;
        sx += r.ratio;
        sy += r.median_seconds;
        sxx += r.ratio * r.ratio;
        sxy += r.ratio * r.median_seconds;
        ++n;
    }
    const double den = n * sxx - sx * sx;
    return n >= 2 && den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

} // namespace shapefilt
