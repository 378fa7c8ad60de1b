#include "shapefilt/explicit_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "shapefilt/error.hpp"
#include "shapefilt/fem.hpp"
#include "shapefilt/parallel.hpp"

namespace shapefilt {

const char* kernel_family_name(KernelFamily f) {
    switch (f) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::linear_hat: return "linear_hat";
        case KernelFamily::green_regularized: return "green_regularized";
    }
    return "?";
}

KernelFamily parse_kernel_family(const std::string& name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "linear_hat" || name == "linear") return KernelFamily::linear_hat;
    if (name == "green_regularized" || name == "green") return KernelFamily::green_regularized;
    throw ConfigError("unknown kernel family '" + name + "'");
}

KernelSpec KernelSpec::with_default_span(KernelFamily family, double radius) {
    return {family, radius, family == KernelFamily::linear_hat ? 2.0 * radius : 6.0 * radius};
}

KernelSpec KernelSpec::for_span(KernelFamily family, double span) {
    return {family, family == KernelFamily::linear_hat ? span / 2.0 : span / 6.0, span};
}

double KernelSpec::cutoff() const {
    // exp(-d^2 / 2r^2) falls below double epsilon here, so the stored
    // weights equal the untruncated Gaussian to roundoff.
    static const double gaussian_reach = std::sqrt(-2.0 * std::log(std::numeric_limits<double>::epsilon()));
    return family == KernelFamily::gaussian ? gaussian_reach * radius : 0.5 * span;
}

void KernelSpec::validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("kernel radius must be > 0");
    if (!(span > 0.0) || !std::isfinite(span)) throw ConfigError("kernel span must be > 0");
}

double kernel_eval(const KernelSpec& spec, double d) {
    if (!(d >= 0.0)) throw DimensionError("kernel_eval: negative distance");
    return simd::radial_kernel_value(spec.radial(), d);
}

double kernel_eval_normalized(const KernelSpec& spec, double d) { return kernel_eval(spec, d) / kernel_eval(spec, 0.0); }

double damping_factor(const ExplicitFilterConfig& cfg, const SurfaceMesh& sm, Index node) {
    if (!cfg.damping || sm.is_closed()) return 1.0;
    const Point3 x = sm.nodes()[node];
    const auto cpp = closest_point_projection(sm, x);
    return std::clamp(1.0 - kernel_eval_normalized(cfg.kernel, cpp.distance), 0.0, 1.0);
}

std::vector<double> damping_factors(const ExplicitFilterConfig& cfg, const SurfaceMesh& sm) {
    std::vector<double> d(static_cast<std::size_t>(sm.node_count()), 1.0);
    if (!cfg.damping || sm.is_closed()) return d;
    parallel_for(0, d.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) d[i] = damping_factor(cfg, sm, static_cast<Index>(i));
    });
    return d;
}

std::array<std::vector<double>, 3> split_components(std::span<const double> v) {
    if (v.size() % 3 != 0) throw DimensionError("field length not divisible by 3");
    const std::size_t n = v.size() / 3;
    std::array<std::vector<double>, 3> c;
    for (auto& x : c) x.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < 3; ++k) c[k][i] = v[3 * i + k];
    return c;
}

std::vector<double> join_components(const std::array<std::vector<double>, 3>& c) {
    const std::size_t n = c[0].size();
    std::vector<double> v(3 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < 3; ++k) v[3 * i + k] = c[k][i];
    return v;
}

namespace {

struct Soa {
    std::vector<double> x, y, z;
    explicit Soa(std::span<const Point3> p) : x(p.size()), y(p.size()), z(p.size()) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            x[i] = p[i].x;
            y[i] = p[i].y;
            z[i] = p[i].z;
        }
    }
    simd::PointsView view() const { return {x.data(), y.data(), z.data()}; }
};

} // namespace

namespace {

CsrMatrix kernel_matrix_on(const KernelSpec& kernel, std::span<const Point3> nodes, const PointGrid& grid,
                           simd::PointsView pv) {
    const std::size_t n = nodes.size();
    const double cut = kernel.cutoff();
    std::vector<std::vector<Index>> cols(n);
    std::vector<std::vector<double>> vals(n);
    parallel_for(0, n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            grid.within(nodes[i], cut, cols[i]);
            vals[i].resize(cols[i].size());
            simd::kernel_weights(kernel.radial(), nodes[i], pv, cols[i], vals[i]);
        }
    });
    std::vector<Index> offsets(n + 1, 0), columns;
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) {
        offsets[i + 1] = offsets[i] + static_cast<Index>(cols[i].size());
        columns.insert(columns.end(), cols[i].begin(), cols[i].end());
        values.insert(values.end(), vals[i].begin(), vals[i].end());
    }
    return CsrMatrix(static_cast<Index>(n), static_cast<Index>(n), std::move(offsets), std::move(columns),
                     std::move(values));
}

} // namespace

CsrMatrix kernel_matrix(const KernelSpec& kernel, const SurfaceMesh& sm) {
    kernel.validate();
    const Soa soa(sm.nodes());
    return kernel_matrix_on(kernel, sm.nodes(), PointGrid(sm.nodes(), kernel.cutoff()), soa.view());
}

CsrMatrix build_filter_matrix(const ExplicitFilterConfig& cfg, const SurfaceMesh& sm) {
    const CsrMatrix w = kernel_matrix(cfg.kernel, sm);
    const CsrMatrix m = surface_mass_matrix(sm);
    const CsrMatrix wm = multiply(w, m);
    const auto d = damping_factors(cfg, sm);
    std::vector<double> scale(d);
    if (cfg.normalization) {
        const auto v = wm.row_sums();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] > 0.0))
                throw DimensionError("explicit filter: node " + std::to_string(i) + " has an empty kernel support");
            scale[i] /= v[i];
        }
    }
    return wm.row_scaled(scale);
}

ExplicitFilter::ExplicitFilter(ExplicitFilterConfig cfg, const SurfaceMesh& sm)
    : cfg_(cfg), nodes_(sm.nodes().begin(), sm.nodes().end()) {
    cfg_.kernel.validate();
    const Soa soa(nodes_);
    xs_ = soa.x;
    ys_ = soa.y;
    zs_ = soa.z;
    grid_ = PointGrid(nodes_, cfg_.kernel.cutoff());
    mass_ = surface_mass_matrix(sm);
    lumped_ = mass_.row_sums();
    damping_ = damping_factors(cfg_, sm);
    normalizer_.assign(nodes_.size(), 1.0);
    if (cfg_.normalization) {
        const double* in[1] = {lumped_.data()};
        double* out[1] = {normalizer_.data()};
        convolve(in, out);
        for (std::size_t i = 0; i < normalizer_.size(); ++i)
            if (!(normalizer_[i] > 0.0))
                throw DimensionError("explicit filter: node " + std::to_string(i) + " has an empty kernel support");
    }
    if (cfg_.mode == MatrixMode::stored) ensure_matrix();
}

void ExplicitFilter::ensure_matrix() const {
    if (built_) return;
    const CsrMatrix w = kernel_matrix_on(cfg_.kernel, nodes_, grid_, {xs_.data(), ys_.data(), zs_.data()});
    std::vector<double> scale(damping_);
    for (std::size_t i = 0; i < scale.size(); ++i) scale[i] /= normalizer_[i];
    matrix_ = multiply(w, mass_).row_scaled(scale);
    matrix_t_ = matrix_.transpose();
    built_ = true;
}

const CsrMatrix& ExplicitFilter::matrix() const {
    ensure_matrix();
    return matrix_;
}

void ExplicitFilter::convolve(std::span<const double* const> in, std::span<double* const> out) const {
    const std::size_t n = nodes_.size();
    const std::size_t ch = in.size();
    const simd::PointsView pv{xs_.data(), ys_.data(), zs_.data()};
    const auto kernel = cfg_.kernel.radial();
    parallel_for(0, n, [&](std::size_t b, std::size_t e) {
        std::vector<Index> idx;
        double acc[4];
        for (std::size_t i = b; i < e; ++i) {
            grid_.within(nodes_[i], kernel.cutoff, idx);
            simd::kernel_weighted_sums(kernel, nodes_[i], pv, idx, in, std::span<double>(acc, ch));
            for (std::size_t c = 0; c < ch; ++c) out[c][i] = acc[c];
        }
    });
}

std::vector<double> ExplicitFilter::forward(std::span<const double> s) const {
    const std::size_t n = nodes_.size();
    if (s.size() != 3 * n) throw DimensionError("explicit forward: field length must be 3n");
    auto comp = split_components(s);
    std::array<std::vector<double>, 3> res;
    if (cfg_.mode == MatrixMode::stored) {
        for (int k = 0; k < 3; ++k) res[k] = matrix_.multiply(comp[k]);
        return join_components(res);
    }
    std::array<std::vector<double>, 3> ms;
    for (int k = 0; k < 3; ++k) {
        ms[k] = mass_.multiply(comp[k]);
        res[k].resize(n);
    }
    const double* in[3] = {ms[0].data(), ms[1].data(), ms[2].data()};
    double* out[3] = {res[0].data(), res[1].data(), res[2].data()};
    convolve(in, out);
    for (int k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < n; ++i) res[k][i] *= damping_[i] / normalizer_[i];
    return join_components(res);
}

std::vector<double> ExplicitFilter::scaled_sensitivities(std::span<const double> dJdx) const {
    const std::size_t n = nodes_.size();
    if (dJdx.size() != 3 * n) throw DimensionError("explicit sensitivities: field length must be 3n");
    auto comp = split_components(dJdx);
    for (int k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < n; ++i) comp[k][i] *= damping_[i] / normalizer_[i];
    std::array<std::vector<double>, 3> res;
    for (auto& r : res) r.resize(n);
    const double* in[3] = {comp[0].data(), comp[1].data(), comp[2].data()};
    double* out[3] = {res[0].data(), res[1].data(), res[2].data()};
    convolve(in, out);
    return join_components(res);
}

std::vector<double> ExplicitFilter::transpose_apply(std::span<const double> dJdx) const {
    const std::size_t n = nodes_.size();
    if (dJdx.size() != 3 * n) throw DimensionError("explicit transpose: field length must be 3n");
    std::array<std::vector<double>, 3> res;
    if (cfg_.mode == MatrixMode::stored) {
        auto comp = split_components(dJdx);
        for (int k = 0; k < 3; ++k) res[k] = matrix_t_.multiply(comp[k]);
        return join_components(res);
    }
    auto scaled = split_components(scaled_sensitivities(dJdx));
    for (int k = 0; k < 3; ++k) res[k] = mass_.multiply(scaled[k]);
    return join_components(res);
}

} // namespace shapefilt
