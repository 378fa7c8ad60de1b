#include "shapefilt/spectrum.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "shapefilt/cg.hpp"
#include "shapefilt/error.hpp"
#include "shapefilt/simd/kernels.hpp"

namespace shapefilt {

namespace {

constexpr double kSingularRatio = 1e-14;

ConditionEstimate make_estimate(double lo, double hi) {
    ConditionEstimate est;
    est.lower = lo;
    est.upper = hi;
    if (!(hi > 0.0) || !(lo > kSingularRatio * hi)) {
        est.singular = true;
        est.value = std::numeric_limits<double>::infinity();
    } else {
        est.value = hi / lo;
    }
    return est;
}

using Apply = std::function<std::vector<double>(const std::vector<double>&)>;

// Largest eigenvalue of an operator self-adjoint in the inner product
// <u, v> = u^T G v (G = identity when gram is null), by Lanczos with full
// reorthogonalization.
double lanczos_largest(const Apply& op, const CsrMatrix* gram, Index n) {
    const Index max_steps = std::min<Index>(n, 300);
    auto gmul = [&](const std::vector<double>& v) { return gram ? gram->multiply(v) : v; };

    std::vector<double> v(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(0.7 * i + 1.0);
    auto gv = gmul(v);
    double nv = std::sqrt(simd::dot(v, gv));
    for (Index i = 0; i < n; ++i) { v[i] /= nv; gv[i] /= nv; }

    std::vector<std::vector<double>> basis{v};
    std::vector<std::vector<double>> gbasis{gv};
    std::vector<double> alpha, beta;
    double previous = 0.0;
    int stable = 0;
    double current = 0.0;
    for (Index k = 0; k < max_steps; ++k) {
        std::vector<double> w = op(basis.back());
        const double a = simd::dot(w, gbasis.back());
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < basis.size(); ++j) {
                const double h = simd::dot(w, gbasis[j]);
                simd::axpy(-h, basis[j], w);
            }
        }
        auto gw = gmul(w);
        const double b = std::sqrt(std::max(0.0, simd::dot(w, gw)));

        const auto m = static_cast<Index>(alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (Index i = 0; i < m; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
        current = es.eigenvalues()(m - 1);
        if (k > 0 && std::abs(current - previous) <= 1e-10 * std::abs(current)) {
            if (++stable >= 5) break;
        } else {
            stable = 0;
        }
        previous = current;
        if (b <= 1e-14 * std::abs(current)) break; // invariant subspace
        beta.push_back(b);
        for (Index i = 0; i < n; ++i) { w[i] /= b; gw[i] /= b; }
        basis.push_back(std::move(w));
        gbasis.push_back(std::move(gw));
    }
    return current;
}

Apply inverse_apply(const CsrMatrix& a, const CsrMatrix* rhs_matrix) {
    return [&a, rhs_matrix](const std::vector<double>& v) {
        const std::vector<double> rhs = rhs_matrix ? rhs_matrix->multiply(v) : v;
        CgOptions opt;
        opt.tolerance = 1e-12;
        return cg_solve_checked(a, rhs, opt);
    };
}

} // namespace

Eigen::MatrixXd to_dense(const CsrMatrix& a) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    const auto o = a.offsets();
    const auto c = a.columns();
    const auto v = a.values();
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = o[i]; k < o[i + 1]; ++k) d(i, c[k]) += v[k];
    return d;
}

ConditionEstimate condition_number(const CsrMatrix& a, SpectrumMethod method) {
    if (a.rows() != a.cols()) throw DimensionError("condition_number: matrix must be square");
    if (a.rows() == 0) return {};
    if (method == SpectrumMethod::dense) {
        if (a.rows() > kDenseSpectrumLimit) throw DimensionError("condition_number: too large for the dense method");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_dense(a), Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        return make_estimate(ev(0), ev(ev.size() - 1));
    }
    const double hi = lanczos_largest([&a](const std::vector<double>& v) { return a.multiply(v); }, nullptr, a.rows());
    double lo = 0.0;
    try {
        lo = 1.0 / lanczos_largest(inverse_apply(a, nullptr), nullptr, a.rows());
    } catch (const SolverError&) {
        lo = 0.0;
    }
    return make_estimate(lo, hi);
}

ConditionEstimate generalized_condition_number(const CsrMatrix& a, const CsrMatrix& b, SpectrumMethod method) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw DimensionError("generalized_condition_number: shape mismatch");
    if (a.rows() == 0) return {};
    if (method == SpectrumMethod::dense) {
        if (a.rows() > kDenseSpectrumLimit)
            throw DimensionError("generalized_condition_number: too large for the dense method");
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(to_dense(a), to_dense(b), Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        return make_estimate(ev(0), ev(ev.size() - 1));
    }
    // B^-1 A and A^-1 B are both self-adjoint in the B inner product.
    const double hi = lanczos_largest(inverse_apply(b, &a), &b, a.rows());
    double lo = 0.0;
    try {
        lo = 1.0 / lanczos_largest(inverse_apply(a, &b), &b, a.rows());
    } catch (const SolverError&) {
        lo = 0.0;
    }
    return make_estimate(lo, hi);
}

ConditionEstimate singular_condition_number(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw DimensionError("singular_condition_number: matrix must be square");
    if (a.rows() == 0) return {};
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
    const auto& s = svd.singularValues();
    return make_estimate(s(s.size() - 1), s(0));
}

} // namespace shapefilt
