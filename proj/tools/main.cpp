#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "commands.hpp"
#include "shapefilt/error.hpp"
#include "shapefilt/parallel.hpp"

int main(int argc, char** argv) {
    using namespace shapefilt::cli;
    CLI::App app{"Explicit and implicit shape filters: fixtures, studies and optimization runs"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    std::string config, out = "out";
    app.add_option("--config", config, "JSON configuration (version 1)");
    app.add_option("--out", out, "Output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
    app.add_option("--seed", g.seed, "Seed for fixture jitter")->capture_default_str();

    FixtureRequest fix;
    auto* gen = app.add_subcommand("generate-fixture", "Write a built-in mesh fixture");
    gen->add_option("name", fix.name, "plate | perforated_plate | notched_block | ball")
        ->required()
        ->check(CLI::IsMember({"plate", "perforated_plate", "notched_block", "ball"}));
    gen->add_option("--resolution", fix.resolution, "Fixture resolution (>= 2)")->check(CLI::Range(2, 100000));
    double perturbation = -1.0;
    gen->add_option("--perturbation", perturbation, "Node jitter as a fraction of the local spacing");

    auto* cons = app.add_subcommand("consistency", "Map a uniform continuous sensitivity through a filter");
    auto* prof = app.add_subcommand("kernel-profile", "Explicit kernels versus the numerical Helmholtz kernel");
    auto* cond = app.add_subcommand("cond-study", "Condition numbers of the filter operators");
    auto* bench = app.add_subcommand("bench", "Filter application timings");
    auto* opt = app.add_subcommand("optimize", "Steepest-descent shape optimization");

    CLI11_PARSE(app, argc, argv);
    g.config = config;
    g.out = out;
    if (perturbation >= 0.0) fix.perturbation = perturbation;
    shapefilt::set_thread_count(g.threads);

    try {
        if (*gen) return cmd_generate_fixture(g, fix);
        if (*cons) return cmd_consistency(g);
        if (*prof) return cmd_kernel_profile(g);
        if (*cond) return cmd_condition_study(g);
        if (*bench) return cmd_bench(g);
        if (*opt) return cmd_optimize(g);
    } catch (const shapefilt::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
