#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shapefilt/explicit_filter.hpp"
#include "shapefilt/implicit_filter.hpp"
#include "shapefilt/spectrum.hpp"

namespace shapefilt {

/// sqrt(2 * mean triangle area): the cell size of a structured right-triangle grid.
double average_element_size(const SurfaceMesh& sm);
/// cbrt(6 * mean tet volume): the hex size of a 6-tets-per-hex grid.
double average_element_size(const VolumeMesh& vm);

/// Node closest to the centroid of the node cloud.
Index central_node(std::span<const Point3> nodes);

// ---------------------------------------------------------------- consistency

struct ConsistencyResult {
    std::vector<double> dJdx;   ///< uniform continuous field in discrete form
    std::vector<double> djds;   ///< scaled control sensitivities
    std::vector<double> deviation; ///< per node |djds . dir - 1|
    double max_deviation = 0.0;
    double max_boundary_deviation = 0.0; ///< over nodes on or next to a boundary edge
};

/// Uniform continuous sensitivity (unit `direction`) mapped through a surface filter.
ConsistencyResult consistency_explicit(const SurfaceMesh& sm, const ExplicitFilterConfig& cfg, const Point3& direction);
ConsistencyResult consistency_implicit(const SurfaceMesh& sm, double r_gamma, const Point3& direction,
                                       const CgOptions& cg = {});
ConsistencyResult consistency_bulk(const VolumeMesh& vm, const BulkSurfaceFilter::Options& options,
                                   const Point3& direction);

// ------------------------------------------------------------- kernel profile

struct KernelProfile {
    Index node = 0;
    double span = 0.0;
    double helmholtz_radius = 0.0;
    std::vector<double> distance;               ///< per mesh node
    std::vector<KernelFamily> families;
    std::vector<std::vector<double>> explicit_values; ///< per family, peak-normalized
    std::vector<double> implicit_values;        ///< numerical Helmholtz kernel row
    std::vector<double> green_at_helmholtz_radius;
    /// RMS of (numerical kernel - regularized Green kernel with the Helmholtz
    /// radius), both with peak 1, over nodes within span/2 of the query node.
    double green_rms = 0.0;
};

KernelProfile kernel_profile(const SurfaceMesh& plate, Index node, double span, const std::vector<KernelFamily>& families);

// ----------------------------------------------------------- condition study

struct ConditionRow {
    std::string filter; ///< kernel family name or "implicit"
    double ratio = 0.0; ///< span / element size
    double radius = 0.0;
    ConditionEstimate estimate;
};

/// Dense condition numbers of the explicit filter matrices (singular values)
/// and of the implicit surface operator (pencil (K + M, M)) at each span ratio.
std::vector<ConditionRow> condition_study(const SurfaceMesh& plate, Index node,
                                          const std::vector<KernelFamily>& families,
                                          const std::vector<double>& ratios);

// ------------------------------------------------------------------- timing

struct TimingRow {
    std::string filter; ///< explicit_stored, explicit_matrix_free, implicit_surface, bulk_surface
    double ratio = 0.0;
    double median_seconds = 0.0;
    std::vector<double> seconds;
};

struct TimingOptions {
    std::vector<double> ratios{5, 10, 20, 40};
    int repetitions = 3;
    KernelFamily kernel = KernelFamily::linear_hat;
    bool include_bulk = true;
};

/// Median wall time of one filter application per ratio. The bulk-surface
/// rows use `volume` (when given) with the Helmholtz radius scaled from the
/// plate calibration by the ratio of element sizes.
std::vector<TimingRow> timing_study(const SurfaceMesh& plate, Index node, const TimingOptions& options,
                                    const VolumeMesh* volume = nullptr);

/// Least-squares slope of median time against ratio for one filter.
double timing_slope(const std::vector<TimingRow>& rows, const std::string& filter);

} // namespace shapefilt
