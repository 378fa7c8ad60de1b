#pragma once

#include <span>
#include <vector>

#include "shapefilt/mesh.hpp"
#include "shapefilt/simd/kernels.hpp"
#include "shapefilt/spatial.hpp"
#include "shapefilt/sparse.hpp"

namespace shapefilt {

using KernelFamily = simd::KernelShape;

const char* kernel_family_name(KernelFamily f);
KernelFamily parse_kernel_family(const std::string& name);

/// Radial kernel with its support span (diameter of the effective support).
struct KernelSpec {
    KernelFamily family = KernelFamily::linear_hat;
    double radius = 1.0;
    double span = 2.0;

    /// Span 2r for the hat, 6r for the Gaussian and the regularized Green kernel.
    static KernelSpec with_default_span(KernelFamily family, double radius);
    /// Inverse of with_default_span.
    static KernelSpec for_span(KernelFamily family, double span);

    /// Distance beyond which weights are zero: span/2, except the Gaussian,
    /// which is cut where it drops below double epsilon (about 8.5 r).
    double cutoff() const;
    simd::RadialKernel radial() const { return {family, radius, cutoff()}; }
    void validate() const;
};

double kernel_eval(const KernelSpec& spec, double d);
/// kernel_eval scaled so the value at d = 0 is 1.
double kernel_eval_normalized(const KernelSpec& spec, double d);

enum class MatrixMode { stored, matrix_free };

struct ExplicitFilterConfig {
    KernelSpec kernel;
    bool damping = false;
    bool normalization = true;
    MatrixMode mode = MatrixMode::stored;
};

/// 1 - F(x, cpp(x)) with the peak-normalized kernel, clamped to [0, 1].
/// Returns 1 when damping is off or the surface has no boundary edges.
double damping_factor(const ExplicitFilterConfig& cfg, const SurfaceMesh& sm, Index node);
std::vector<double> damping_factors(const ExplicitFilterConfig& cfg, const SurfaceMesh& sm);

/// Scalar n x n filter matrix D V^-1 W M (D W M without normalization). The
/// vector form acts on each Cartesian component separately.
CsrMatrix build_filter_matrix(const ExplicitFilterConfig& cfg, const SurfaceMesh& sm);
/// Scalar kernel matrix W(i, j) = F(|x_i - x_j|).
CsrMatrix kernel_matrix(const KernelSpec& kernel, const SurfaceMesh& sm);

/// Convolution filter on a surface. All fields are 3n node-major.
class ExplicitFilter {
public:
    ExplicitFilter(ExplicitFilterConfig cfg, const SurfaceMesh& sm);

    /// x = A s
    std::vector<double> forward(std::span<const double> s) const;
    /// dJ/ds = A^T dJ/dx = M W V^-1 D dJ/dx
    std::vector<double> transpose_apply(std::span<const double> dJdx) const;
    /// dj/ds = W V^-1 D dJ/dx
    std::vector<double> scaled_sensitivities(std::span<const double> dJdx) const;

    /// Scalar filter matrix (built on first use in matrix-free mode).
    const CsrMatrix& matrix() const;
    const CsrMatrix& mass() const { return mass_; }
    std::span<const double> damping() const { return damping_; }
    /// Diagonal of V (ones without normalization).
    std::span<const double> normalizer() const { return normalizer_; }
    const ExplicitFilterConfig& config() const { return cfg_; }
    Index node_count() const { return static_cast<Index>(nodes_.size()); }

private:
    ExplicitFilterConfig cfg_;
    std::vector<Point3> nodes_;
    std::vector<double> xs_, ys_, zs_;
    PointGrid grid_;
    CsrMatrix mass_;
    std::vector<double> lumped_;
    std::vector<double> damping_;
    std::vector<double> normalizer_;
    mutable CsrMatrix matrix_;
    mutable CsrMatrix matrix_t_;
    mutable bool built_ = false;

    void ensure_matrix() const;
    /// out_c[i] = sum_j F_ij in_c[j] for up to 4 scalar channels, matrix-free.
    void convolve(std::span<const double* const> in, std::span<double* const> out) const;
};

/// Splits a 3n field into three n-vectors and back.
std::array<std::vector<double>, 3> split_components(std::span<const double> v);
std::vector<double> join_components(const std::array<std::vector<double>, 3>& c);

} // namespace shapefilt
