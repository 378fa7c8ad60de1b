#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "shapefilt/mesh.hpp"
#include "shapefilt/sparse.hpp"

namespace testing {

using shapefilt::Index;
using shapefilt::Point3;

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

double inner(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

Eigen::MatrixXd dense(const shapefilt::CsrMatrix& a);
shapefilt::CsrMatrix sparse_from_dense(const Eigen::MatrixXd& a);

/// Vertices at the origin and the unit axes.
shapefilt::VolumeMesh unit_tet();
/// Unit cube split into 6 tets around the 0-6 diagonal.
shapefilt::VolumeMesh unit_cube();
/// Structured grid of nx x ny unit squares, two triangles each, z = 0.
shapefilt::SurfaceMesh grid_surface(int nx, int ny);

/// Relative error |a - b| / max(|b|, floor).
double rel(double a, double b, double floor = 1e-300);

} // namespace testing
