#pragma once

#include <Eigen/Dense>

#include "shapefilt/sparse.hpp"

namespace shapefilt {

enum class SpectrumMethod { dense, lanczos };

struct ConditionEstimate {
    double value = 1.0;   ///< +inf when flagged singular
    double lower = 0.0;   ///< smallest eigen/singular value
    double upper = 0.0;   ///< largest eigen/singular value
    bool singular = false;
};

/// Largest dimension handled by the dense path.
inline constexpr Index kDenseSpectrumLimit = 3000;

/// lambda_max / lambda_min of a symmetric positive definite matrix. The
/// Lanczos path estimates lambda_min through CG solves.
ConditionEstimate condition_number(const CsrMatrix& a, SpectrumMethod method = SpectrumMethod::dense);

/// Condition number of the pencil A v = lambda B v with B SPD, i.e. of
/// B^-1 A (equivalently of A^-1 B).
ConditionEstimate generalized_condition_number(const CsrMatrix& a, const CsrMatrix& b,
                                               SpectrumMethod method = SpectrumMethod::dense);

/// sigma_max / sigma_min of a general square matrix by dense SVD.
ConditionEstimate singular_condition_number(const Eigen::MatrixXd& a);

Eigen::MatrixXd to_dense(const CsrMatrix& a);

} // namespace shapefilt
