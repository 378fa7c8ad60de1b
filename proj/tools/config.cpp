#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "shapefilt/error.hpp"

namespace shapefilt::cli {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

template <class T>
void read_opt(const json& obj, const char* key, std::optional<T>& out, const std::string& where) {
    if (!obj.contains(key)) return;
    T v{};
    read(obj, key, v, where);
    out = v;
}

Point3 read_point(const json& obj, const char* key, Point3 fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    std::vector<double> v;
    read(obj, key, v, where);
    if (v.size() != 3) throw ConfigError(where + "." + key + ": expected 3 numbers");
    return {v[0], v[1], v[2]};
}

KernelFamily read_kernel(const std::string& s, const std::string& where) {
    try {
        return parse_kernel_family(s);
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

} // namespace

Config parse_config(const json& doc) {
    Config c;
    c.raw = doc;
    require_keys(doc, "config", {"version", "mesh", "fixture", "filter", "study", "optimization"});
    read(doc, "version", c.version, "config");
    if (c.version != kConfigVersion) throw ConfigError("config: unsupported version " + std::to_string(c.version));

    if (doc.contains("mesh")) {
        const auto& m = doc["mesh"];
        require_keys(m, "mesh", {"path", "kind", "design"});
        read(m, "path", c.mesh.path, "mesh");
        read(m, "kind", c.mesh.kind, "mesh");
        read(m, "design", c.mesh.design, "mesh");
        if (c.mesh.kind != "surface" && c.mesh.kind != "volume") throw ConfigError("mesh.kind: surface or volume");
    }
    if (doc.contains("fixture")) {
        const auto& f = doc["fixture"];
        require_keys(f, "fixture", {"name", "resolution", "perturbation", "seed"});
        read(f, "name", c.fixture.name, "fixture");
        read(f, "resolution", c.fixture.resolution, "fixture");
        read_opt(f, "perturbation", c.fixture.perturbation, "fixture");
        read_opt(f, "seed", c.fixture.seed, "fixture");
    }
    if (doc.contains("filter")) {
        const auto& f = doc["filter"];
        require_keys(f, "filter", {"kind", "kernel", "span_ratio", "radius", "damping", "normalization", "mode",
                                   "r_gamma", "beta", "stiffening"});
        read(f, "kind", c.filter.kind, "filter");
        if (c.filter.kind != "explicit" && c.filter.kind != "implicit_surface" && c.filter.kind != "bulk_surface")
            throw ConfigError("filter.kind: explicit, implicit_surface or bulk_surface");
        std::string s;
        if (f.contains("kernel")) {
            read(f, "kernel", s, "filter");
            c.filter.kernel = read_kernel(s, "filter.kernel");
        }
        read(f, "span_ratio", c.filter.span_ratio, "filter");
        read_opt(f, "radius", c.filter.radius, "filter");
        read(f, "damping", c.filter.damping, "filter");
        read(f, "normalization", c.filter.normalization, "filter");
        if (f.contains("mode")) {
            read(f, "mode", s, "filter");
            if (s == "stored") c.filter.mode = MatrixMode::stored;
            else if (s == "matrix_free") c.filter.mode = MatrixMode::matrix_free;
            else throw ConfigError("filter.mode: stored or matrix_free");
        }
        read_opt(f, "r_gamma", c.filter.r_gamma, "filter");
        read(f, "beta", c.filter.beta, "filter");
        read(f, "stiffening", c.filter.stiffening, "filter");
    }
    if (doc.contains("study")) {
        const auto& s = doc["study"];
        require_keys(s, "study", {"kernels", "ratios", "span_ratio", "repetitions", "query_node", "direction"});
        if (s.contains("kernels")) {
            std::vector<std::string> names;
            read(s, "kernels", names, "study");
            c.study.kernels.clear();
            for (const auto& n : names) c.study.kernels.push_back(read_kernel(n, "study.kernels"));
        }
        read(s, "ratios", c.study.ratios, "study");
        read(s, "span_ratio", c.study.span_ratio, "study");
        read(s, "repetitions", c.study.repetitions, "study");
        read_opt(s, "query_node", c.study.query_node, "study");
        c.study.direction = read_point(s, "direction", c.study.direction, "study");
    }
    if (doc.contains("optimization")) {
        const auto& o = doc["optimization"];
        require_keys(o, "optimization", {"objective", "alpha", "max_iterations", "min_jacobian_stop",
                                         "min_jacobian_stop_relative", "snapshot_every", "constraint", "structure"});
        auto& os = c.optimization;
        read(o, "objective", os.objective, "optimization");
        read(o, "alpha", os.alpha, "optimization");
        read(o, "max_iterations", os.max_iterations, "optimization");
        read(o, "min_jacobian_stop", os.min_jacobian_stop, "optimization");
        read_opt(o, "min_jacobian_stop_relative", os.min_jacobian_stop_relative, "optimization");
        read(o, "snapshot_every", os.snapshot_every, "optimization");
        if (o.contains("constraint")) {
            const auto& k = o["constraint"];
            require_keys(k, "optimization.constraint", {"response", "target", "target_relative", "tolerance", "rho"});
            ConstraintSection cs;
            read(k, "response", cs.response, "optimization.constraint");
            read_opt(k, "target", cs.target, "optimization.constraint");
            read(k, "target_relative", cs.target_relative, "optimization.constraint");
            read(k, "tolerance", cs.tolerance, "optimization.constraint");
            read(k, "rho", cs.rho, "optimization.constraint");
            os.constraint = cs;
        }
        if (o.contains("structure")) {
            const auto& k = o["structure"];
            require_keys(k, "optimization.structure", {"load", "young", "poisson"});
            os.structure.load = read_point(k, "load", os.structure.load, "optimization.structure");
            read(k, "young", os.structure.young, "optimization.structure");
            read(k, "poisson", os.structure.poisson, "optimization.structure");
        }
    }
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(json::parse(ss.str()));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

nlohmann::json to_json(const Config& c) {
    json k = json::array();
    for (auto f : c.study.kernels) k.push_back(kernel_family_name(f));
    json j = {
        {"version", c.version},
        {"mesh", {{"path", c.mesh.path}, {"kind", c.mesh.kind}, {"design", c.mesh.design}}},
        {"fixture", {{"name", c.fixture.name}, {"resolution", c.fixture.resolution}}},
        {"filter",
         {{"kind", c.filter.kind},
          {"kernel", kernel_family_name(c.filter.kernel)},
          {"span_ratio", c.filter.span_ratio},
          {"damping", c.filter.damping},
          {"normalization", c.filter.normalization},
          {"mode", c.filter.mode == MatrixMode::stored ? "stored" : "matrix_free"},
          {"beta", c.filter.beta},
          {"stiffening", c.filter.stiffening}}},
        {"study",
         {{"kernels", k},
          {"ratios", c.study.ratios},
          {"span_ratio", c.study.span_ratio},
          {"repetitions", c.study.repetitions},
          {"direction", {c.study.direction.x, c.study.direction.y, c.study.direction.z}}}},
        {"optimization",
         {{"objective", c.optimization.objective},
          {"alpha", c.optimization.alpha},
          {"max_iterations", c.optimization.max_iterations},
          {"min_jacobian_stop", c.optimization.min_jacobian_stop},
          {"snapshot_every", c.optimization.snapshot_every},
          {"structure",
           {{"load", {c.optimization.structure.load.x, c.optimization.structure.load.y, c.optimization.structure.load.z}},
            {"young", c.optimization.structure.young},
            {"poisson", c.optimization.structure.poisson}}}}},
    };
    if (c.fixture.perturbation) j["fixture"]["perturbation"] = *c.fixture.perturbation;
    if (c.fixture.seed) j["fixture"]["seed"] = *c.fixture.seed;
    if (c.filter.radius) j["filter"]["radius"] = *c.filter.radius;
    if (c.filter.r_gamma) j["filter"]["r_gamma"] = *c.filter.r_gamma;
    if (c.study.query_node) j["study"]["query_node"] = *c.study.query_node;
    if (c.optimization.min_jacobian_stop_relative)
        j["optimization"]["min_jacobian_stop_relative"] = *c.optimization.min_jacobian_stop_relative;
    if (const auto& cs = c.optimization.constraint) {
        json cj = {{"response", cs->response}, {"target_relative", cs->target_relative}, {"tolerance", cs->tolerance},
                   {"rho", cs->rho}};
        if (cs->target) cj["target"] = *cs->target;
        j["optimization"]["constraint"] = cj;
    }
    return j;
}

} // namespace shapefilt::cli
