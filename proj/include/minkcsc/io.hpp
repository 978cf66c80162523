#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "minkcsc/barriers.hpp"
#include "minkcsc/entire_flow.hpp"
#include "minkcsc/errors.hpp"
#include "minkcsc/graph_grid.hpp"
#include "minkcsc/property_suites.hpp"
#include "minkcsc/radial_lab.hpp"
#include "minkcsc/regular_domain.hpp"
#include "minkcsc/version.hpp"

namespace minkcsc {

using Json = nlohmann::json;

/// Invalid job configuration; `path` names the offending field (JSON pointer).
class SchemaError : public DomainError {
public:
    SchemaError(std::string path, const std::string& what)
        : DomainError(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// FNV-1a of the canonical (sorted-key, compact) dump, as 16 hex digits.
inline std::string config_hash(const Json& config) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config.dump());
    return os.str();
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// ---------------------------------------------------------------- supports

inline Json support_to_json(const SphericalSupport& s) {
    Json j;
    j["n"] = s.dim();
    j["points"] = Json::array();
    for (const auto& p : s.points()) {
        j["points"].push_back({{"y", std::vector<double>(p.y.data(), p.y.data() + p.y.size())}, {"phi", p.phi}});
    }
    if (s.dense()) {
        if (s.dense()->kind != "constant") throw DomainError("only constant dense supports serialize to JSON");
        j["dense"] = {{"kind", "constant"}, {"value", s.dense()->value}, {"resolution_deg", s.dense()->resolution_deg}};
    }
    return j;
}

namespace detail {

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    if (!j.contains(key)) throw SchemaError(path + "/" + key, "missing required field");
    return j.at(key);
}

inline double as_number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
    return v;
}

inline int as_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
    return j.get<int>();
}

inline std::string as_string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path, "expected a string");
    return j.get<std::string>();
}

inline std::vector<double> as_numbers(const Json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_number(j[i], path + "/" + std::to_string(i)));
    return v;
}

template <class T, class F>
T optional_field(const Json& j, const std::string& key, const std::string& path, T fallback, F&& conv) {
    if (!j.contains(key)) return fallback;
    return conv(j.at(key), path + "/" + key);
}

inline void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw SchemaError(path + "/" + k, "unknown field");
    }
}

}  // namespace detail

inline SphericalSupport support_from_json(const Json& j, const std::string& path = "") {
    using namespace detail;
    if (!j.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
    check_keys(j, path, {"n", "points", "dense"});
    const int n = as_int(require(j, "n", path), path + "/n");
    if (n < 1 || n > 3) throw SchemaError(path + "/n", "dimension must be 1, 2 or 3");
    std::vector<SupportPoint> pts;
    if (j.contains("points")) {
        const Json& arr = j.at("points");
        if (!arr.is_array()) throw SchemaError(path + "/points", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string pp = path + "/points/" + std::to_string(i);
            check_keys(arr[i], pp, {"y", "phi"});
            const auto y = as_numbers(require(arr[i], "y", pp), pp + "/y");
            if (static_cast<int>(y.size()) != n) throw SchemaError(pp + "/y", "expected " + std::to_string(n) + " entries");
            Vec v = Eigen::Map<const Vec>(y.data(), n);
            if (std::abs(v.norm() - 1.0) > 1e-9) throw SchemaError(pp + "/y", "direction must be a unit vector");
            pts.push_back({v.normalized(), as_number(require(arr[i], "phi", pp), pp + "/phi")});
        }
    }
    std::optional<DenseSampler> dense;
    if (j.contains("dense")) {
        const std::string dp = path + "/dense";
        const Json& d = j.at("dense");
        check_keys(d, dp, {"kind", "value", "resolution_deg"});
        if (as_string(require(d, "kind", dp), dp + "/kind") != "constant")
            throw SchemaError(dp + "/kind", "only \"constant\" dense supports are supported");
        const double res = optional_field(d, "resolution_deg", dp, 1.0, as_number);
        if (!(res > 0.0)) throw SchemaError(dp + "/resolution_deg", "must be positive");
        dense = DenseSampler::constant(as_number(require(d, "value", dp), dp + "/value"), res);
    }
    if (pts.empty() && !dense) throw SchemaError(path + "/points", "support is empty");
    return SphericalSupport(n, std::move(pts), std::move(dense));
}

inline SphericalSupport read_support(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError("/", "cannot open " + file.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw SchemaError("/", std::string("invalid JSON: ") + e.what());
    }
    return support_from_json(j);
}

// ---------------------------------------------------------------- CSV

/// max(|central or one-sided difference gradient|) at a masked node.
inline double discrete_gradient_norm(const GraphGrid& g, std::size_t idx) {
    const auto l = g.lattice(idx);
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        auto at = [&](int off) -> std::optional<double> {
            auto m = l;
            m[a] += off;
            const auto k = g.index(m);
            if (!k || g.role(*k) == NodeRole::Outside || !std::isfinite(g[*k])) return std::nullopt;
            return g[*k];
        };
        const auto up = at(1), dn = at(-1);
        double d = 0.0;
        if (up && dn) d = (*up - *dn) / (2.0 * g.spacing());
        else if (up) d = (*up - g[idx]) / g.spacing();
        else if (dn) d = (g[idx] - *dn) / g.spacing();
        s += d * d;
    }
    return std::sqrt(s);
}

inline const char* role_name(NodeRole r) {
    switch (r) {
        case NodeRole::Interior: return "interior";
        case NodeRole::Band: return "band";
        default: return "outside";
    }
}

inline std::vector<std::size_t> masked_nodes(const GraphGrid& g) {
    std::vector<std::size_t> nodes = g.interior_nodes();
    nodes.insert(nodes.end(), g.band_nodes().begin(), g.band_nodes().end());
    std::sort(nodes.begin(), nodes.end());
    return nodes;
}

inline void write_coords(std::ostream& os, const Vec& x) {
    for (Eigen::Index a = 0; a < x.size(); ++a) os << format_double(x(a)) << ',';
}

inline std::string coord_header(int n) {
    std::string h;
    for (int a = 1; a <= n; ++a) h += "x" + std::to_string(a) + ",";
    return h;
}

/// x1..xn,u,H1,H2,admissible,role; curvature fields are empty on band
/// nodes. Every row re-validates the discrete |Du| < 1.
inline void write_graph_csv(std::ostream& os, const GraphGrid& g) {
    std::unordered_map<std::size_t, NodeCurvature> curv;
    for (const auto& c : grid_curvatures(g)) curv.emplace(c.node, c);
    os << coord_header(g.dim()) << "u,H1,H2,admissible,role\n";
    for (auto i : masked_nodes(g)) {
        const double grad = discrete_gradient_norm(g, i);
        if (!(grad < 1.0)) {
            throw DomainError("graph is not spacelike at node " + std::to_string(i) + " (|Du| = " + format_double(grad) + ")");
        }
        write_coords(os, g.coords(i));
        os << format_double(g[i]) << ',';
        if (const auto it = curv.find(i); it != curv.end()) {
            os << format_double(it->second.H1) << ',' << format_double(it->second.H2) << ','
               << (it->second.admissible ? 1 : 0) << ',';
        } else {
            os << ",,,";
        }
        os << role_name(g.role(i)) << '\n';
    }
}

/// x1..xn,V,lower,upper,role.
inline void write_barrier_csv(std::ostream& os, const BarrierPair& p, const RegularDomain& d) {
    os << coord_header(p.upper.dim()) << "V,lower,upper,role\n";
    for (auto i : masked_nodes(p.upper)) {
        for (const GraphGrid* g : {&p.lower, &p.upper}) {
            if (!(discrete_gradient_norm(*g, i) < 1.0)) throw DomainError("barrier is not spacelike at node " + std::to_string(i));
        }
        const Vec x = p.upper.coords(i);
        write_coords(os, x);
        os << format_double(eval_Vphi(d, x)) << ',' << format_double(p.lower[i]) << ',' << format_double(p.upper[i])
           << ',' << role_name(p.upper.role(i)) << '\n';
    }
}

/// r,h,H,vprime,u,sigma2.
inline void write_profile_csv(std::ostream& os, const RadialProfile& p) {
    os << "r,h,H,vprime,u,sigma2\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(std::abs(p.vprime[i]) < 1.0)) throw DomainError("profile is not spacelike at r = " + format_double(p.r[i]));
        os << format_double(p.r[i]) << ',' << format_double(p.h[i]) << ',' << format_double(p.H[i]) << ','
           << format_double(p.vprime[i]) << ',' << format_double(p.u[i]) << ',' << format_double(p.sigma2[i]) << '\n';
    }
}

/// x1..xn,u on a sample of points.
inline void write_samples_csv(std::ostream& os, const std::vector<Vec>& xs, const std::function<double(const Vec&)>& f) {
    if (xs.empty()) return;
    os << coord_header(static_cast<int>(xs.front().size())) << "u\n";
    for (const auto& x : xs) {
        write_coords(os, x);
        os << format_double(f(x)) << '\n';
    }
}

template <class Writer>
void write_file(const std::filesystem::path& file, Writer&& w) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw DomainError("cannot write " + file.string());
    w(out);
}

// ---------------------------------------------------------------- manifests

inline Json grid_metadata(const GraphGrid& g) {
    return {{"n", g.dim()}, {"radius", g.radius()}, {"spacing", g.spacing()},
            {"interior_nodes", g.interior_nodes().size()}, {"band_nodes", g.band_nodes().size()}};
}

/// The hash ignores out_dir and jobs, which do not change any artifact.
inline Json make_manifest(const Json& config, const std::string& command) {
    Json canonical = config;
    if (canonical.is_object()) {
        canonical.erase("out_dir");
        canonical.erase("jobs");
    }
    return {{"tool", "minkcsc"}, {"version", kVersion}, {"command", command}, {"config_hash", config_hash(canonical)}};
}

inline Json solve_report_json(const SolveReport& r) {
    return {{"order", r.order},
            {"converged", r.converged},
            {"final_residual", r.final_residual},
            {"tolerance", r.tolerance},
            {"newton_iterations", r.newton_iterations},
            {"admissibility_margin", r.admissibility_margin},
            {"gradient_bound", r.gradient_bound},
            {"maclaurin_ok", r.maclaurin_ok},
            {"exp_weight", r.exp_weight},
            {"unknowns", r.unknowns},
            {"linear_solver", r.linear_solver},
            {"residual_history", r.residual_history},
            {"message", r.message}};
}

inline Json entire_report_json(const EntireReport& r) {
    Json stages = Json::array();
    for (const auto& s : r.stages) {
        stages.push_back({{"radius", s.radius},
                          {"unknowns", s.unknowns},
                          {"newton_iterations", s.newton_iterations},
                          {"final_residual", s.final_residual},
                          {"inner_difference", std::isnan(s.inner_difference) ? Json(nullptr) : Json(s.inner_difference)}});
    }
    return {{"stages", stages},         {"alpha", r.alpha},     {"converged", r.converged},
            {"monotone_decay", r.monotone_decay}, {"trapped", r.trapped}, {"slice_dim", r.slice_dim},
            {"message", r.message}};
}

/// One CSV per leaf plus manifest.json with levels, grid metadata and gaps.
inline Json export_foliation(const Foliation& f, const std::filesystem::path& dir, const Json& config) {
    Json m = make_manifest(config, "foliate");
    m["grid"] = grid_metadata(f.grid);
    m["levels"] = f.levels();
    m["gaps"] = f.adjacent_gaps();
    m["strictly_ordered"] = f.strictly_ordered();
    m["leaves"] = Json::array();
    std::size_t k = 0;
    for (const auto& [c, leaf] : f.leaves) {
        const std::string name = "leaf_" + std::to_string(k++) + ".csv";
        write_file(dir / name, [&](std::ostream& os) { write_graph_csv(os, leaf); });
        m["leaves"].push_back({{"c", c}, {"file", name}, {"report", entire_report_json(f.reports.at(c))}});
    }
    write_file(dir / "manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
    return m;
}

// ---------------------------------------------------------------- job configs

struct GridSpec {
    int n = 2;
    double radius = 1.0;
    int nodes = 65;
};

struct ScheduleSpec {
    double R0 = 1.0;
    int stages = 6;
    double spacing = 1.0 / 16.0;
    double tol = 1e-5;
    bool require_convergence = true;
};

struct RadialSpec {
    std::string mode = "profile";  // profile | bounded | admissible | wedge | obstruction
    int n = 3;
    std::string h = "cap:2.5";     // constant:c | cap:p (min(1, s^-p))
    double delta = 0.25;
    double c0 = 1.0;
    double r_max = 1e4;
    int nodes = 2000;
    int samples = 10000;
};

struct VerifySpec {
    std::string suite = "maclaurin";  // see suite_names()
    int n = 4;
    int samples = 10000;
};

struct JobConfig {
    std::string command;
    std::optional<SphericalSupport> domain;
    GridSpec grid;
    double c = 1.0;
    int order = 2;
    std::string boundary = "hyperboloid";  // hyperboloid | cosmological
    double boundary_param = 1.0;
    ScheduleSpec schedule;
    std::vector<double> levels;
    RadialSpec radial;
    VerifySpec verify;
    std::vector<double> p, q, x;
    double t = 0.0;
    std::string out_dir = ".";
    unsigned seed = 7;
    int jobs = 1;
    Json raw;
};

inline const std::vector<std::string>& job_commands() {
    static const std::vector<std::string> c{"curvature", "domain", "dirichlet", "entire", "foliate", "radial", "verify"};
    return c;
}

/// Schema-validated job; SchemaError names the first offending field.
inline JobConfig parse_job_config(const Json& j) {
    using namespace detail;
    if (!j.is_object()) throw SchemaError("/", "expected an object");
    check_keys(j, "", {"command", "domain", "grid", "c", "order", "boundary", "schedule", "levels", "radial", "verify",
                       "p", "q", "x", "t", "out_dir", "seed", "jobs"});
    JobConfig c;
    c.raw = j;
    c.command = as_string(require(j, "command", ""), "/command");
    if (std::find(job_commands().begin(), job_commands().end(), c.command) == job_commands().end())
        throw SchemaError("/command", "unknown command \"" + c.command + "\"");
    if (j.contains("domain")) c.domain = support_from_json(j.at("domain"), "/domain");
    if (j.contains("grid")) {
        const Json& g = j.at("grid");
        check_keys(g, "/grid", {"n", "radius", "nodes"});
        c.grid.n = optional_field(g, "n", "/grid", c.grid.n, as_int);
        c.grid.radius = optional_field(g, "radius", "/grid", c.grid.radius, as_number);
        c.grid.nodes = optional_field(g, "nodes", "/grid", c.grid.nodes, as_int);
        if (c.grid.n < 1 || c.grid.n > 3) throw SchemaError("/grid/n", "must be 1, 2 or 3");
        if (!(c.grid.radius > 0.0)) throw SchemaError("/grid/radius", "must be positive");
        if (c.grid.nodes < 5) throw SchemaError("/grid/nodes", "must be at least 5");
    }
    c.c = optional_field(j, "c", "", c.c, as_number);
    if (!(c.c > 0.0)) throw SchemaError("/c", "must be positive");
    c.order = optional_field(j, "order", "", c.order, as_int);
    if (c.order != 1 && c.order != 2) throw SchemaError("/order", "must be 1 (CMC) or 2 (sigma_2)");
    if (j.contains("boundary")) {
        const Json& b = j.at("boundary");
        check_keys(b, "/boundary", {"kind", "param"});
        c.boundary = as_string(require(b, "kind", "/boundary"), "/boundary/kind");
        if (c.boundary != "hyperboloid" && c.boundary != "cosmological")
            throw SchemaError("/boundary/kind", "must be \"hyperboloid\" or \"cosmological\"");
        c.boundary_param = optional_field(b, "param", "/boundary", c.boundary_param, as_number);
        if (!(c.boundary_param > 0.0)) throw SchemaError("/boundary/param", "must be positive");
    }
    if (j.contains("schedule")) {
        const Json& s = j.at("schedule");
        check_keys(s, "/schedule", {"R0", "stages", "spacing", "tol", "require_convergence"});
        c.schedule.R0 = optional_field(s, "R0", "/schedule", c.schedule.R0, as_number);
        c.schedule.stages = optional_field(s, "stages", "/schedule", c.schedule.stages, as_int);
        c.schedule.spacing = optional_field(s, "spacing", "/schedule", c.schedule.spacing, as_number);
        c.schedule.tol = optional_field(s, "tol", "/schedule", c.schedule.tol, as_number);
        if (s.contains("require_convergence")) {
            if (!s.at("require_convergence").is_boolean())
                throw SchemaError("/schedule/require_convergence", "expected a boolean");
            c.schedule.require_convergence = s.at("require_convergence").get<bool>();
        }
        if (!(c.schedule.R0 > 0.0)) throw SchemaError("/schedule/R0", "must be positive");
        if (c.schedule.stages < 1 || c.schedule.stages > 12) throw SchemaError("/schedule/stages", "must lie in [1, 12]");
        if (!(c.schedule.spacing > 0.0)) throw SchemaError("/schedule/spacing", "must be positive");
        if (!(c.schedule.tol > 0.0)) throw SchemaError("/schedule/tol", "must be positive");
    }
    if (j.contains("levels")) {
        c.levels = as_numbers(j.at("levels"), "/levels");
        for (std::size_t i = 0; i < c.levels.size(); ++i) {
            if (!(c.levels[i] > 0.0)) throw SchemaError("/levels/" + std::to_string(i), "must be positive");
            if (i && !(c.levels[i] > c.levels[i - 1])) throw SchemaError("/levels/" + std::to_string(i), "levels must increase");
        }
    }
    if (j.contains("radial")) {
        const Json& r = j.at("radial");
        check_keys(r, "/radial", {"mode", "n", "h", "delta", "c0", "r_max", "nodes", "samples"});
        c.radial.mode = optional_field(r, "mode", "/radial", c.radial.mode, as_string);
        c.radial.n = optional_field(r, "n", "/radial", c.radial.n, as_int);
        c.radial.h = optional_field(r, "h", "/radial", c.radial.h, as_string);
        c.radial.delta = optional_field(r, "delta", "/radial", c.radial.delta, as_number);
        c.radial.c0 = optional_field(r, "c0", "/radial", c.radial.c0, as_number);
        c.radial.r_max = optional_field(r, "r_max", "/radial", c.radial.r_max, as_number);
        c.radial.nodes = optional_field(r, "nodes", "/radial", c.radial.nodes, as_int);
        c.radial.samples = optional_field(r, "samples", "/radial", c.radial.samples, as_int);
        static const std::vector<std::string> modes{"profile", "bounded", "admissible", "wedge", "obstruction"};
        if (std::find(modes.begin(), modes.end(), c.radial.mode) == modes.end())
            throw SchemaError("/radial/mode", "unknown mode \"" + c.radial.mode + "\"");
        if (c.radial.n < 1 || c.radial.n > kMaxJetDim) throw SchemaError("/radial/n", "must lie in [1, 8]");
        if (!(c.radial.r_max > 0.0)) throw SchemaError("/radial/r_max", "must be positive");
        if (c.radial.nodes < 8) throw SchemaError("/radial/nodes", "must be at least 8");
        if (c.radial.samples < 1) throw SchemaError("/radial/samples", "must be positive");
    }
    if (j.contains("verify")) {
        const Json& v = j.at("verify");
        check_keys(v, "/verify", {"suite", "n", "samples"});
        c.verify.suite = optional_field(v, "suite", "/verify", c.verify.suite, as_string);
        c.verify.n = optional_field(v, "n", "/verify", c.verify.n, as_int);
        c.verify.samples = optional_field(v, "samples", "/verify", c.verify.samples, as_int);
        if (c.verify.suite != "all" &&
            std::find(suite_names().begin(), suite_names().end(), c.verify.suite) == suite_names().end())
            throw SchemaError("/verify/suite", "unknown suite \"" + c.verify.suite + "\"");
        if (c.verify.n < 1 || c.verify.n > kMaxJetDim) throw SchemaError("/verify/n", "must lie in [1, 8]");
        if (c.verify.samples < 1) throw SchemaError("/verify/samples", "must be positive");
    }
    if (j.contains("p")) c.p = as_numbers(j.at("p"), "/p");
    if (j.contains("q")) c.q = as_numbers(j.at("q"), "/q");
    if (j.contains("x")) c.x = as_numbers(j.at("x"), "/x");
    c.t = optional_field(j, "t", "", c.t, as_number);
    c.out_dir = optional_field(j, "out_dir", "", c.out_dir, as_string);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw SchemaError("/seed", "expected a non-negative integer");
        c.seed = j.at("seed").get<unsigned>();
    }
    c.jobs = optional_field(j, "jobs", "", c.jobs, as_int);
    if (c.jobs < 1) throw SchemaError("/jobs", "must be at least 1");

    const bool needs_domain = c.command == "domain" || c.command == "entire" || c.command == "foliate" ||
                              (c.command == "dirichlet" && c.boundary == "cosmological");
    if (needs_domain && !c.domain) throw SchemaError("/domain", "missing required field");
    if (c.command == "foliate" && c.levels.empty()) throw SchemaError("/levels", "missing required field");
    if (c.command == "curvature") {
        const std::size_t n = c.p.size();
        if (n == 0) throw SchemaError("/p", "missing required field");
        if (c.q.size() != n * n) throw SchemaError("/q", "expected " + std::to_string(n * n) + " entries (row-major)");
    }
    if (c.command == "domain" && c.domain && static_cast<int>(c.x.size()) != c.domain->dim())
        throw SchemaError("/x", "expected " + std::to_string(c.domain->dim()) + " entries");
    return c;
}

/// Radial mean-curvature profile from text such as "cap:2.5".
inline RadialFn parse_radial_h(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw SchemaError("/radial/h", "expected kind:value");
    const std::string kind = text.substr(0, colon);
    double v = 0.0;
    try {
        v = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw SchemaError("/radial/h", "value is not a number");
    }
    if (kind == "constant") {
        if (!(v > 0.0)) throw SchemaError("/radial/h", "constant must be positive");
        return [v](double) { return v; };
    }
    if (kind == "cap") {
        if (!(v > 0.0)) throw SchemaError("/radial/h", "cap exponent must be positive");
        return [v](double s) { return std::min(1.0, std::pow(s, -v)); };
    }
    throw SchemaError("/radial/h", "unknown kind \"" + kind + "\"");
}

}  // namespace minkcsc
