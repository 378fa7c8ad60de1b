#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"
#include "shapefilt/error.hpp"

using namespace shapefilt;
using namespace shapefilt::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("shapefilt_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(SHAPEFILT_CLI_BINARY) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_CASE("config: defaults, strictness, versions and types") {
    const auto c = parse_config(nlohmann::json::object());
    CHECK(c.version == kConfigVersion);
    CHECK(c.filter.kind == "explicit");
    CHECK_THROWS_AS(parse_config({{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"filter", {{"spn_ratio", 3}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"version", 99}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"filter", {{"span_ratio", "wide"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"filter", {{"kernel", "triangle"}}}}), ConfigError);

    const auto d = parse_config({{"filter", {{"kind", "bulk_surface"}, {"r_gamma", 0.25}, {"beta", 0.5}}},
                                 {"optimization", {{"max_iterations", 7}, {"constraint", {{"target_relative", 1.1}}}}}});
    CHECK(d.filter.kind == "bulk_surface");
    REQUIRE(d.filter.r_gamma.has_value());
    CHECK(*d.filter.r_gamma == 0.25);
    CHECK(d.optimization.max_iterations == 7);
    REQUIRE(d.optimization.constraint.has_value());
    CHECK(d.optimization.constraint->target_relative == 1.1);
    // round trip
    const auto e = parse_config(to_json(d));
    CHECK(to_json(e) == to_json(d));
}

TEST_CASE("config file errors") {
    const auto dir = scratch("config");
    CHECK_THROWS_AS(load_config(dir / "missing.json"), IoError);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
}

TEST_CASE("CSV writer quotes and uses CRLF") {
    const auto dir = scratch("csv");
    {
        CsvWriter w(dir / "t.csv");
        w.row({"a", "b,c", "say \"hi\""});
        w.row({"1", "line\nbreak", ""});
    }
    CHECK(slurp(dir / "t.csv") == "a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,\"line\nbreak\",\r\n");
    CHECK(fmt(0.1) == "0.10000000000000001");
    CHECK(fmt(3LL) == "3");
}

TEST_CASE("generate-fixture is deterministic and writes a manifest") {
    const auto a = scratch("fixture_a"), b = scratch("fixture_b");
    GlobalOptions g;
    g.out = a;
    FixtureRequest r{"plate", 10, std::nullopt};
    CHECK(cmd_generate_fixture(g, r) == 0);
    g.out = b;
    CHECK(cmd_generate_fixture(g, r) == 0);
    CHECK(slurp(a / "plate.vtk") == slurp(b / "plate.vtk"));
    CHECK(file_hash(a / "plate.vtk") == file_hash(b / "plate.vtk"));
    const auto man = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(man["command"] == "generate-fixture");
    CHECK(man["results"]["nodes"] == 121);
    CHECK(man.contains("seed"));

    g.seed = 2;
    g.out = b;
    r.perturbation = 0.2;
    CHECK(cmd_generate_fixture(g, r) == 0);
    CHECK(slurp(a / "plate.vtk") != slurp(b / "plate.vtk"));

    g.out = a;
    CHECK(cmd_generate_fixture(g, {"notched_block", 3, std::nullopt}) == 0);
    CHECK(fs::exists(a / "notched_block.vtk.design.json"));
}

TEST_CASE("optimize with zero iterations records only the start") {
    const auto dir = scratch("optimize");
    std::ofstream(dir / "cfg.json") << R"({"fixture":{"name":"notched_block","resolution":3},
        "filter":{"kind":"bulk_surface","r_gamma":0.2},"optimization":{"max_iterations":0}})";
    GlobalOptions g;
    g.config = dir / "cfg.json";
    g.out = dir / "out";
    CHECK(cmd_optimize(g) == 0);
    const auto hist = slurp(dir / "out" / "history.csv");
    CHECK(hist.rfind("iteration,objective", 0) == 0);
    std::size_t lines = 0;
    for (char ch : hist) lines += ch == '\n';
    CHECK(lines == 2);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("binary: argument handling and exit codes") {
    const auto dir = scratch("binary");
    CHECK(run_binary("") != 0);
    CHECK(run_binary("--help") == 0);
    CHECK(run_binary("generate-fixture nonesuch --out " + dir.string()) != 0);
    CHECK(run_binary("generate-fixture plate --resolution 6 --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "plate.vtk"));
    std::ofstream(dir / "bad.json") << R"({"unknown_key":1})";
    CHECK(run_binary("--config " + (dir / "bad.json").string() + " consistency --out " + dir.string()) != 0);
}
