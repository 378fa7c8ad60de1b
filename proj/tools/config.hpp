#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapefilt/explicit_filter.hpp"
#include "shapefilt/optimizer.hpp"

namespace shapefilt::cli {

inline constexpr int kConfigVersion = 1;

struct MeshSource {
    std::string path; ///< empty: use the fixture
    std::string kind = "surface";
    std::string design;
};

struct FixtureSource {
    std::string name = "plate";
    int resolution = 0; ///< 0: fixture default
    std::optional<double> perturbation;
    std::optional<std::uint64_t> seed;
};

struct FilterSection {
    std::string kind = "explicit"; ///< explicit | implicit_surface | bulk_surface
    KernelFamily kernel = KernelFamily::linear_hat;
    double span_ratio = 5.0;       ///< span in units of the average element size
    std::optional<double> radius;  ///< overrides span_ratio for the explicit kernel
    bool damping = false;
    bool normalization = true;
    MatrixMode mode = MatrixMode::stored;
    std::optional<double> r_gamma; ///< implicit radius; default calibrated from span_ratio
    double beta = 1.0;
    bool stiffening = true;
};

struct StudySection {
    std::vector<KernelFamily> kernels{KernelFamily::gaussian, KernelFamily::linear_hat, KernelFamily::green_regularized};
    std::vector<double> ratios{5, 10, 20};
    double span_ratio = 10.0;
    int repetitions = 3;
    std::optional<Index> query_node;
    Point3 direction{0, 0, 1};
};

struct StructureSection {
    Point3 load{0, 0, -1}; ///< total force, split evenly over the top nodes
    double young = 1.0;
    double poisson = 0.3;
};

struct ConstraintSection {
    std::string response = "strain_energy";
    std::optional<double> target;
    double target_relative = 1.0; ///< used when target is absent: times the initial value
    double tolerance = 1e-3;
    double rho = 1.0;
};

struct OptimizationSection {
    std::string objective = "volume";
    double alpha = 0.0;
    int max_iterations = 50;
    double min_jacobian_stop = 0.0;
    std::optional<double> min_jacobian_stop_relative;
    int snapshot_every = 5;
    std::optional<ConstraintSection> constraint;
    StructureSection structure;
};

struct Config {
    int version = kConfigVersion;
    MeshSource mesh;
    FixtureSource fixture;
    FilterSection filter;
    StudySection study;
    OptimizationSection optimization;
    nlohmann::json raw = nlohmann::json::object();
};

/// Strict parse: unknown keys, wrong types and unsupported versions throw ConfigError.
Config parse_config(const nlohmann::json& doc);
Config load_config(const std::filesystem::path& path);
nlohmann::json to_json(const Config& c);

} // namespace shapefilt::cli
