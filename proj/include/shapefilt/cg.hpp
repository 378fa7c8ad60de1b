#pragma once

#include <span>
#include <vector>

#include "shapefilt/sparse.hpp"

namespace shapefilt {

struct CgOptions {
    double tolerance = 1e-10; ///< relative residual ||Ax - b|| / ||b||
    Index max_iterations = 0; ///< 0 selects 10 n
    bool jacobi = true;
};

struct CgResult {
    std::vector<double> x;
    Index iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Preconditioned conjugate gradients for SPD systems. Non-convergence is
/// reported through the flag with the best iterate; a NaN or a breakdown in
/// the recurrences throws SolverError.
CgResult cg_solve(const CsrMatrix& a, std::span<const double> b, const CgOptions& options = {},
                  std::span<const double> x0 = {});

/// Like cg_solve but throws SolverError when the tolerance is not reached.
std::vector<double> cg_solve_checked(const CsrMatrix& a, std::span<const double> b,
                                     const CgOptions& options = {}, std::span<const double> x0 = {});

} // namespace shapefilt
