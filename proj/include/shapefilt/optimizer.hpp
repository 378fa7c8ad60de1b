#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shapefilt/explicit_filter.hpp"
#include "shapefilt/implicit_filter.hpp"
#include "shapefilt/responses.hpp"

namespace shapefilt {

enum class ResponseKind { volume, strain_energy };

/// How control updates reach the volume mesh.
///  - explicit_surface: convolution filter on the design surface, then
///    Jacobian-stiffened pseudo-elastic mesh motion
///  - implicit_surface: Helmholtz filter on the design surface, then mesh motion
///  - bulk_surface: one bulk-surface solve moves surface and interior together
enum class FilterKind { explicit_surface, implicit_surface, bulk_surface };

const char* filter_kind_name(FilterKind k);
FilterKind parse_filter_kind(const std::string& name);
const char* response_kind_name(ResponseKind k);
ResponseKind parse_response_kind(const std::string& name);

/// Upper bound `value <= target` on a second response.
struct ConstraintConfig {
    ResponseKind response = ResponseKind::strain_energy;
    double target = 0.0;
    double tolerance = 1e-3; ///< relative band around the target counted as active
    double rho = 1.0;        ///< weight of the violation correction
};

struct OptimizationConfig {
    ResponseKind objective = ResponseKind::volume;
    std::optional<ConstraintConfig> constraint;
    StructuralCase structure;
    /// 0 picks alpha so that the first step's largest nodal move is 1% of the
    /// bounding-box diagonal.
    double alpha = 0.0;
    int max_iterations = 50;
    double min_jacobian_stop = 0.0;
    double stagnation_tolerance = 1e-8;
    int stagnation_window = 5;

    FilterKind filter = FilterKind::bulk_surface;
    ExplicitFilterConfig explicit_filter{KernelSpec::with_default_span(KernelFamily::linear_hat, 0.2), true, true,
                                         MatrixMode::stored};
    double r_gamma = 0.2;
    double beta = 1.0;
    Stiffening stiffening = Stiffening::on;
    ElasticityParams elasticity = ElasticityParams::from_young_poisson();
    CgOptions cg;

    void validate() const;
};

enum class Termination { running, max_iterations, mesh_distortion, stagnation, solver_failure };
const char* termination_name(Termination t);

struct IterationRecord {
    int iteration = 0;
    double objective = 0.0;
    double constraint = 0.0;
    double step_norm = 0.0;
    double min_jacobian = 0.0;
    double wall_time = 0.0;
};

struct OptimizationState {
    int iteration = 0;
    std::vector<double> control;  ///< accumulated control field (3n of the filter's space)
    std::vector<double> geometry; ///< current volume node coordinates, 3n
    std::vector<IterationRecord> history;
    double min_jacobian = 0.0;
    double alpha = 0.0;
    Termination termination = Termination::running;
    int distortion_iteration = -1; ///< iteration whose step inverted an element
    std::string message;
};

/// M-metric projection of the objective direction against a constraint
/// gradient: -(g - <g,c>/<c,c> c) - rho * violation * c / <c,c>.
/// Throws DimensionError for a zero constraint gradient.
std::vector<double> project_constraint(std::span<const double> g, std::span<const double> c, double violation,
                                       const CsrMatrix& mass, double rho = 1.0);

/// One control update with a fixed linear filter: s += -alpha * dj/ds and
/// x += A (-alpha * dj/ds). `forward` is the filter's map and `djds` the
/// scaled sensitivities already computed for the current geometry.
void steepest_descent_step(std::vector<double>& control, std::vector<double>& geometry, std::span<const double> djds,
                           double alpha, const std::function<std::vector<double>(std::span<const double>)>& forward);

using IterationCallback = std::function<void(const OptimizationState&, const VolumeMesh&)>;

/// Projected steepest descent on a volume mesh. Stops on max_iterations, on
/// a step that takes the minimum element Jacobian to or below
/// min_jacobian_stop (the step is rejected), or on a relative objective
/// change below stagnation_tolerance across stagnation_window iterations.
/// Solver failures end the run with the history kept.
OptimizationState run_optimization(const OptimizationConfig& cfg, const VolumeMesh& mesh,
                                   const IterationCallback& on_iteration = {});

void write_history_csv(const std::filesystem::path& path, const OptimizationState& state);

} // namespace shapefilt
