#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "minkcsc/minkcsc.hpp"

namespace fs = std::filesystem;
using namespace minkcsc;

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitNonConvergence = 3;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("minkcsc");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("MINKCSC_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

std::vector<double> parse_list(const std::string& s, const std::string& path) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw SchemaError(path, "\"" + item + "\" is not a number");
        }
    }
    return out;
}

Json read_json_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError("/", "cannot open " + file);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw SchemaError("/", std::string("invalid JSON in ") + file + ": " + e.what());
    }
}

struct Flags {
    std::string config, out_dir, domain_file, p, q, x, levels, boundary, h, mode, suite;
    std::optional<int> jobs, n, nodes, order, stages, samples, radial_nodes;
    std::optional<unsigned> seed;
    std::optional<double> t, c, radius, param, R0, spacing, tol, delta, c0, r_max;
    bool allow_unconverged = false;
};

/// Flags override the fields of the --config file.
Json build_config(const std::string& command, const Flags& f) {
    Json j = f.config.empty() ? Json::object() : read_json_file(f.config);
    if (!j.is_object()) throw SchemaError("/", "config must be a JSON object");
    if (j.contains("command") && j["command"] != command)
        throw SchemaError("/command", "config is for \"" + j["command"].dump() + "\", invoked as " + command);
    j["command"] = command;
    if (!f.out_dir.empty()) j["out_dir"] = f.out_dir;
    if (f.jobs) j["jobs"] = *f.jobs;
    if (f.seed) j["seed"] = *f.seed;
    if (!f.domain_file.empty()) j["domain"] = read_json_file(f.domain_file);
    if (!f.p.empty()) j["p"] = parse_list(f.p, "/p");
    if (!f.q.empty()) j["q"] = parse_list(f.q, "/q");
    if (!f.x.empty()) j["x"] = parse_list(f.x, "/x");
    if (f.t) j["t"] = *f.t;
    if (command == "foliate") {
        if (!f.levels.empty()) j["levels"] = parse_list(f.levels, "/levels");
    } else if (f.c) {
        j["c"] = *f.c;
    }
    if (f.order) j["order"] = *f.order;
    if (command == "dirichlet") {
        if (f.n) j["grid"]["n"] = *f.n;
        if (f.radius) j["grid"]["radius"] = *f.radius;
        if (f.nodes) j["grid"]["nodes"] = *f.nodes;
        if (!f.boundary.empty()) j["boundary"]["kind"] = f.boundary;
        if (f.param) j["boundary"]["param"] = *f.param;
    }
    if (f.R0) j["schedule"]["R0"] = *f.R0;
    if (f.stages) j["schedule"]["stages"] = *f.stages;
    if (f.spacing) j["schedule"]["spacing"] = *f.spacing;
    if (f.tol) j["schedule"]["tol"] = *f.tol;
    if (f.allow_unconverged) j["schedule"]["require_convergence"] = false;
    if (command == "radial") {
        if (!f.mode.empty()) j["radial"]["mode"] = f.mode;
        if (f.n) j["radial"]["n"] = *f.n;
        if (!f.h.empty()) j["radial"]["h"] = f.h;
        if (f.delta) j["radial"]["delta"] = *f.delta;
        if (f.c0) j["radial"]["c0"] = *f.c0;
        if (f.r_max) j["radial"]["r_max"] = *f.r_max;
        if (f.radial_nodes) j["radial"]["nodes"] = *f.radial_nodes;
        if (f.samples) j["radial"]["samples"] = *f.samples;
    }
    if (command == "verify") {
        if (!f.suite.empty()) j["verify"]["suite"] = f.suite;
        if (f.n) j["verify"]["n"] = *f.n;
        if (f.samples) j["verify"]["samples"] = *f.samples;
    }
    return j;
}

void write_json(const fs::path& file, const Json& j) {
    write_file(file, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

EntireOptions entire_options(const JobConfig& c) {
    EntireOptions o;
    o.R0 = c.schedule.R0;
    o.stages = c.schedule.stages;
    o.spacing = c.schedule.spacing;
    o.tol = c.schedule.tol;
    o.require_convergence = c.schedule.require_convergence;
    return o;
}

int run_curvature(const JobConfig& c, const fs::path& out) {
    const int n = static_cast<int>(c.p.size());
    JetPoint j{to_vec(c.p), Mat(n, n)};
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) j.q(a, b) = c.q[static_cast<std::size_t>(a * n + b)];
    if (!j.q.isApprox(j.q.transpose(), 1e-12)) throw SchemaError("/q", "Hessian must be symmetric");
    Json r = make_manifest(c.raw, "curvature");
    std::vector<double> H;
    for (int k = 1; k <= n; ++k) H.push_back(curvature_Hk(j, k));
    const Vec lam = principal_curvatures(j);
    r["H"] = H;
    r["principal_curvatures"] = std::vector<double>(lam.data(), lam.data() + lam.size());
    r["admissible"] = n >= 2 ? is_admissible(j, 2) : is_admissible(j, 1);
    write_json(out / "curvature.json", r);
    std::cout << r.dump(2) << '\n';
    return 0;
}

int run_domain(const JobConfig& c, const fs::path& out) {
    const RegularDomain d(*c.domain);
    const Vec x = to_vec(c.x);
    const auto cls = d.classification();
    Json r = make_manifest(c.raw, "domain");
    r["V"] = eval_Vphi(d, x);
    r["kind"] = to_string(cls.kind);
    r["affine_dim"] = cls.affine_dim;
    if (c.raw.contains("t")) r["cosmological_time"] = cosmological_time(d, x, c.t);
    write_json(out / "domain.json", r);
    std::cout << r.dump(2) << '\n';
    return 0;
}

int run_dirichlet(const JobConfig& c, const fs::path& out) {
    const GraphGrid grid = GraphGrid::with_nodes(c.grid.n, c.grid.radius, c.grid.nodes);
    BoundaryFn bd;
    std::optional<RegularDomain> d;
    if (c.boundary == "cosmological") {
        d.emplace(*c.domain);
        bd = cosmological_boundary(*d, c.boundary_param);
    } else {
        const double a = c.boundary_param;
        bd = [a](const Vec& x) { return std::sqrt(a * a + x.squaredNorm()); };
    }
    Json m = make_manifest(c.raw, "dirichlet");
    m["grid"] = grid_metadata(grid);
    try {
        const auto res = c.order == 2 ? solve_sigma2(grid, RhsSpec::constant_value(c.c), bd) : solve_cmc(grid, c.c, bd);
        write_file(out / "solution.csv", [&](std::ostream& os) { write_graph_csv(os, res.solution); });
        m["report"] = solve_report_json(res.report);
        m["files"] = {"solution.csv"};
        write_json(out / "manifest.json", m);
        spdlog::info("dirichlet: residual {:.3e} after {} Newton steps", res.report.final_residual,
                     res.report.newton_iterations);
        return 0;
    } catch (const NonConvergence& e) {
        m["report"] = solve_report_json(e.report());
        write_json(out / "report.json", m);
        std::cerr << "solver did not converge: " << e.what() << "\nreport: " << (out / "report.json").string() << '\n';
        return kExitNonConvergence;
    }
}

int run_entire(const JobConfig& c, const fs::path& out) {
    const RegularDomain d(*c.domain);
    Json m = make_manifest(c.raw, "entire");
    try {
        const auto res = solve_entire(d, c.c, entire_options(c));
        write_file(out / "entire.csv", [&](std::ostream& os) { write_graph_csv(os, res.solution); });
        m["grid"] = grid_metadata(res.solution);
        m["report"] = entire_report_json(res.report);
        m["files"] = {"entire.csv"};
        write_json(out / "manifest.json", m);
        return 0;
    } catch (const EntireNonConvergence& e) {
        m["report"] = entire_report_json(e.report());
        write_json(out / "report.json", m);
        std::cerr << e.what() << "\nreport: " << (out / "report.json").string() << '\n';
        return kExitNonConvergence;
    } catch (const NonConvergence& e) {
        m["report"] = solve_report_json(e.report());
        write_json(out / "report.json", m);
        std::cerr << "stage solve did not converge: " << e.what() << "\nreport: " << (out / "report.json").string() << '\n';
        return kExitNonConvergence;
    }
}

int run_foliate(const JobConfig& c, const fs::path& out) {
    const RegularDomain d(*c.domain);
    try {
        const auto f = foliate(d, c.levels, entire_options(c), c.jobs);
        const Json m = export_foliation(f, out, c.raw);
        std::cout << "leaves " << f.leaves.size() << ", strictly ordered: " << (f.strictly_ordered() ? "yes" : "no") << '\n';
        return 0;
    } catch (const EntireNonConvergence& e) {
        Json m = make_manifest(c.raw, "foliate");
        m["report"] = entire_report_json(e.report());
        write_json(out / "report.json", m);
        std::cerr << e.what() << "\nreport: " << (out / "report.json").string() << '\n';
        return kExitNonConvergence;
    } catch (const NonConvergence& e) {
        Json m = make_manifest(c.raw, "foliate");
        m["report"] = solve_report_json(e.report());
        write_json(out / "report.json", m);
        std::cerr << "leaf solve did not converge: " << e.what() << "\nreport: " << (out / "report.json").string() << '\n';
        return kExitNonConvergence;
    }
}

Json boundedness_json(const BoundednessReport& b) {
    return {{"r_max", b.r_max},
            {"half_increment", b.half_increment},
            {"doubling_increment", b.doubling_increment},
            {"tolerance", b.tolerance},
            {"plateau", b.plateau},
            {"vprime_exponent", b.vprime_exponent},
            {"bounded_by_exponent", b.bounded_by_exponent},
            {"tail_bound", std::isfinite(b.tail_bound) ? Json(b.tail_bound) : Json(nullptr)}};
}

int run_radial(const JobConfig& c, const fs::path& out) {
    const auto& r = c.radial;
    Json m = make_manifest(c.raw, "radial");
    m["mode"] = r.mode;
    auto profile_out = [&](const RadialProfile& p) {
        write_file(out / "profile.csv", [&](std::ostream& os) { write_profile_csv(os, p); });
        m["files"] = {"profile.csv"};
    };
    if (r.mode == "profile") {
        const auto p = build_profile(r.n, parse_radial_h(r.h), r.r_max, r.nodes);
        profile_out(p);
        m["u_range"] = p.u.back() - p.u.front();
    } else if (r.mode == "bounded") {
        const auto p = build_profile(r.n, parse_radial_h(r.h), 2.0 * r.r_max, r.nodes);
        profile_out(p);
        m["certificate"] = boundedness_json(boundedness_certificate(p));
    } else if (r.mode == "admissible") {
        const auto p = admissible_bounded_profile(r.n, r.delta, r.c0, 2.0 * r.r_max, r.nodes);
        profile_out(p);
        m["min_sigma2"] = *std::min_element(p.sigma2.begin(), p.sigma2.end());
        m["certificate"] = boundedness_json(boundedness_certificate(p));
    } else if (r.mode == "wedge") {
        WedgeOptions o;
        o.samples = o.probes = r.samples;
        o.seed = c.seed;
        const auto w = wedge_admissible(r.n, r.delta, r.c0, r.r_max, 1.0, o, r.nodes);
        m["sandwich_samples"] = w.samples;
        m["sandwich_violations"] = w.sandwich_violations;
        m["probes"] = w.probes;
        m["min_H1"] = w.min_H1;
        m["min_H2"] = w.min_H2;
        m["c"] = w.u.c();
        std::vector<Vec> xs;
        for (int i = 0; i <= 40; ++i)
            for (int k = 0; k <= 40; ++k) {
                Vec x = Vec::Zero(r.n);
                x(0) = -10.0 + 0.5 * i;
                x(1) = -10.0 + 0.5 * k;
                xs.push_back(x);
            }
        write_file(out / "wedge_samples.csv", [&](std::ostream& os) { write_samples_csv(os, xs, w.u); });
        m["files"] = {"wedge_samples.csv"};
        std::cout << "sandwich violations " << w.sandwich_violations << " of " << w.samples << ", min H1 " << w.min_H1
                  << ", min H2 " << w.min_H2 << '\n';
    } else {
        const auto o = two_d_obstruction_probe(parse_radial_h(r.h));
        m["radii"] = o.radii;
        m["growth"] = o.growth;
        m["growth_exponent"] = o.growth_exponent;
        m["log_slope"] = o.log_slope;
        m["unbounded"] = o.unbounded;
    }
    write_json(out / "radial.json", m);
    return 0;
}

int run_verify(const JobConfig& c, const fs::path& out) {
    Json m = make_manifest(c.raw, "verify");
    m["results"] = Json::array();
    bool ok = true;
    const std::vector<std::string> suites =
        c.verify.suite == "all" ? suite_names() : std::vector<std::string>{c.verify.suite};
    for (const auto& s : suites) {
        const auto r = run_suite(s, c.verify.n, c.verify.samples, c.seed);
        ok = ok && r.passed();
        m["results"].push_back({{"suite", r.suite}, {"n", r.n}, {"samples", r.samples}, {"failures", r.failures},
                                {"worst", r.worst}, {"tolerance", r.tolerance}, {"passed", r.passed()}});
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.suite << " n=" << r.n << " samples=" << r.samples
                  << " failures=" << r.failures << " worst=" << r.worst << " tol=" << r.tolerance << '\n';
    }
    write_json(out / "verify.json", m);
    return ok ? 0 : 1;
}

int dispatch(const std::string& command, const Flags& f) {
    JobConfig c;
    try {
        c = parse_job_config(build_config(command, f));
    } catch (const SchemaError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitSchema;
    }
    const fs::path out = c.out_dir;
    fs::create_directories(out);
    spdlog::info("{}: config hash {}", command, config_hash(c.raw));
    try {
        if (command == "curvature") return run_curvature(c, out);
        if (command == "domain") return run_domain(c, out);
        if (command == "dirichlet") return run_dirichlet(c, out);
        if (command == "entire") return run_entire(c, out);
        if (command == "foliate") return run_foliate(c, out);
        if (command == "radial") return run_radial(c, out);
        return run_verify(c, out);
    } catch (const SchemaError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << command << " failed: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Constant scalar curvature hypersurfaces in Minkowski space"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config, "JSON job config; flags override its fields");
    app.add_option("--jobs", f.jobs, "worker threads for independent leaves");
    app.add_option("--seed", f.seed, "seed for randomized suites");
    app.add_option("--out-dir", f.out_dir, "directory for CSV/JSON artifacts");

    auto* curv = app.add_subcommand("curvature", "H_k of a jet (p, q)");
    curv->add_option("--p", f.p, "gradient, comma separated");
    curv->add_option("--q", f.q, "Hessian, row-major, comma separated");

    auto* dom = app.add_subcommand("domain", "V_phi, classification and cosmological time");
    dom->add_option("--domain", f.domain_file, "support JSON");
    dom->add_option("--x", f.x, "point, comma separated");
    dom->add_option("--t", f.t, "time coordinate");

    auto* dir = app.add_subcommand("dirichlet", "Dirichlet problem on a ball");
    dir->add_option("--n", f.n);
    dir->add_option("--radius", f.radius);
    dir->add_option("--nodes", f.nodes, "nodes per axis");
    dir->add_option("--c", f.c, "right-hand side constant");
    dir->add_option("--order", f.order, "2 for sigma_2, 1 for CMC");
    dir->add_option("--boundary", f.boundary, "hyperboloid | cosmological");
    dir->add_option("--param", f.param, "hyperboloid a or cosmological level tau");
    dir->add_option("--domain", f.domain_file, "support JSON (cosmological boundary)");

    auto add_schedule = [&](CLI::App* s) {
        s->add_option("--domain", f.domain_file, "support JSON");
        s->add_option("--R0", f.R0, "inner ball radius");
        s->add_option("--stages", f.stages);
        s->add_option("--spacing", f.spacing);
        s->add_option("--tol", f.tol);
        s->add_flag("--allow-unconverged", f.allow_unconverged, "keep the last stage when the schedule plateaus");
    };
    auto* ent = app.add_subcommand("entire", "entire solution by exhaustion");
    add_schedule(ent);
    ent->add_option("--c", f.c, "H_2 level");
    auto* fol = app.add_subcommand("foliate", "constant H_2 foliation");
    add_schedule(fol);
    fol->add_option("--c", f.levels, "levels, comma separated");

    auto* rad = app.add_subcommand("radial", "radial profiles and wedge graphs");
    rad->set_help_flag("--help", "Print this help message and exit");
    rad->add_option("--mode", f.mode, "profile | bounded | admissible | wedge | obstruction");
    rad->add_option("--n", f.n);
    rad->add_option("--h", f.h, "constant:c or cap:p");
    rad->add_option("--delta", f.delta);
    rad->add_option("--c0", f.c0);
    rad->add_option("--r-max", f.r_max);
    rad->add_option("--nodes", f.radial_nodes);
    rad->add_option("--samples", f.samples);

    auto* ver = app.add_subcommand("verify", "randomized property suites");
    ver->add_option("--suite", f.suite, "minors | maclaurin | gradient | section | all");
    ver->add_option("--n", f.n);
    ver->add_option("--samples", f.samples);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitSchema;
    }
    return dispatch(app.get_subcommands().front()->get_name(), f);
}
