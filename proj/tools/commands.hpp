#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "config.hpp"

namespace shapefilt::cli {

struct GlobalOptions {
    std::filesystem::path config;
    std::filesystem::path out = "out";
    unsigned threads = 1;
    std::uint64_t seed = 1;
};

struct FixtureRequest {
    std::string name = "plate";
    int resolution = 0;
    std::optional<double> perturbation;
};

int cmd_generate_fixture(const GlobalOptions& g, const FixtureRequest& req);
int cmd_consistency(const GlobalOptions& g);
int cmd_kernel_profile(const GlobalOptions& g);
int cmd_condition_study(const GlobalOptions& g);
int cmd_bench(const GlobalOptions& g);
int cmd_optimize(const GlobalOptions& g);

/// Helmholtz radius whose 1% kernel span is `span_ratio` element sizes,
/// calibrated once on the default plate and scaled by `element_size`.
double calibrated_helmholtz_radius(double span_ratio, double element_size);

} // namespace shapefilt::cli
