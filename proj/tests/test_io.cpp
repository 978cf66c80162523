#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "minkcsc/io.hpp"

using namespace minkcsc;
namespace fs = std::filesystem;

namespace {

Vec vec(std::initializer_list<double> v) {
    Vec x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double a : v) x(i++) = a;
    return x;
}

std::string schema_path(const Json& j) {
    try {
        parse_job_config(j);
    } catch (const SchemaError& e) {
        return e.path();
    }
    return "<accepted>";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("minkcsc_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

Json three_point_json() {
    Json pts = Json::array();
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0 + 0.3;
        pts.push_back({{"y", {std::cos(a), std::sin(a)}}, {"phi", 0.1 * k}});
    }
    return {{"n", 2}, {"points", pts}};
}

}  // namespace

TEST(SupportJson, RoundTrip) {
    const SphericalSupport s = support_from_json(three_point_json());
    const SphericalSupport back = support_from_json(support_to_json(s));
    ASSERT_EQ(back.points().size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back.points()[i].y, s.points()[i].y);
        EXPECT_EQ(back.points()[i].phi, s.points()[i].phi);
    }
    const Json cone{{"n", 2}, {"dense", {{"kind", "constant"}, {"value", 0.0}}}};
    const SphericalSupport c = support_from_json(cone);
    ASSERT_TRUE(c.dense().has_value());
    EXPECT_EQ(support_to_json(c)["dense"]["resolution_deg"], 1.0);
}

TEST(SupportJson, SchemaPaths) {
    auto path_of = [](const Json& j) {
        try {
            support_from_json(j, "/domain");
        } catch (const SchemaError& e) {
            return e.path();
        }
        return std::string("<accepted>");
    };
    EXPECT_EQ(path_of({{"points", Json::array()}}), "/domain/n");
    EXPECT_EQ(path_of({{"n", 2}, {"points", {{{"y", {1.0, 0.0, 0.0}}, {"phi", 0.0}}}}}), "/domain/points/0/y");
    EXPECT_EQ(path_of({{"n", 2}, {"points", {{{"y", {0.6, 0.6}}, {"phi", 0.0}}}}}), "/domain/points/0/y");
    EXPECT_EQ(path_of({{"n", 2}, {"points", {{{"y", {1.0, 0.0}}}}}}), "/domain/points/0/phi");
    EXPECT_EQ(path_of({{"n", 2}, {"points", {{{"y", {1.0, 0.0}}, {"phi", "x"}}}}}), "/domain/points/0/phi");
    EXPECT_EQ(path_of({{"n", 2}, {"dense", {{"kind", "table"}, {"value", 0.0}}}}), "/domain/dense/kind");
    EXPECT_EQ(path_of({{"n", 2}, {"colour", 1}}), "/domain/colour");
    EXPECT_EQ(path_of({{"n", 2}}), "/domain/points");
}

TEST(JobConfigSchema, FieldPaths) {
    EXPECT_EQ(schema_path({{"c", 1.0}}), "/command");
    EXPECT_EQ(schema_path({{"command", "solve"}}), "/command");
    EXPECT_EQ(schema_path({{"command", "dirichlet"}, {"grid", {{"nodes", "many"}}}}), "/grid/nodes");
    EXPECT_EQ(schema_path({{"command", "dirichlet"}, {"grid", {{"n", 4}}}}), "/grid/n");
    EXPECT_EQ(schema_path({{"command", "dirichlet"}, {"c", -1.0}}), "/c");
    EXPECT_EQ(schema_path({{"command", "dirichlet"}, {"boundary", {{"kind", "cosmological"}}}}), "/domain");
    EXPECT_EQ(schema_path({{"command", "entire"}}), "/domain");
    EXPECT_EQ(schema_path({{"command", "foliate"}, {"domain", three_point_json()}}), "/levels");
    EXPECT_EQ(schema_path({{"command", "foliate"}, {"domain", three_point_json()}, {"levels", {1.0, 0.5}}}), "/levels/1");
    EXPECT_EQ(schema_path({{"command", "entire"}, {"domain", three_point_json()}, {"schedule", {{"stages", 40}}}}),
              "/schedule/stages");
    EXPECT_EQ(schema_path({{"command", "radial"}, {"radial", {{"mode", "spiral"}}}}), "/radial/mode");
    EXPECT_EQ(schema_path({{"command", "verify"}, {"verify", {{"suite", "bogus"}}}}), "/verify/suite");
    EXPECT_EQ(schema_path({{"command", "verify"}, {"seed", -3}}), "/seed");
    EXPECT_EQ(schema_path({{"command", "curvature"}, {"p", {0.1, 0.0}}, {"q", {1.0, 0.0, 0.0}}}), "/q");
    EXPECT_EQ(schema_path({{"command", "domain"}, {"domain", three_point_json()}, {"x", {0.0}}}), "/x");
    EXPECT_EQ(schema_path({{"command", "verify"}, {"extra", true}}), "/extra");
    EXPECT_EQ(schema_path({{"command", "verify"}, {"verify", {{"suite", "all"}}}}), "<accepted>");
}

TEST(JobConfigSchema, Defaults) {
    const auto c = parse_job_config({{"command", "entire"}, {"domain", three_point_json()}});
    EXPECT_EQ(c.schedule.stages, 6);
    EXPECT_DOUBLE_EQ(c.schedule.tol, 1e-5);
    EXPECT_TRUE(c.schedule.require_convergence);
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.jobs, 1);
    EXPECT_EQ(c.domain->points().size(), 3u);
}

TEST(RadialSpecString, Parsing) {
    EXPECT_DOUBLE_EQ(parse_radial_h("constant:2")(5.0), 2.0);
    EXPECT_DOUBLE_EQ(parse_radial_h("cap:2")(0.5), 1.0);
    EXPECT_DOUBLE_EQ(parse_radial_h("cap:2")(4.0), 1.0 / 16.0);
    EXPECT_THROW(parse_radial_h("cap"), SchemaError);
    EXPECT_THROW(parse_radial_h("cap:x"), SchemaError);
    EXPECT_THROW(parse_radial_h("wave:1"), SchemaError);
    EXPECT_THROW(parse_radial_h("constant:-1"), SchemaError);
}

TEST(ConfigHash, StableAndKeyOrderInsensitive) {
    const Json a = Json::parse(R"({"command":"verify","seed":7,"verify":{"n":4,"suite":"maclaurin"}})");
    const Json b = Json::parse(R"({"verify":{"suite":"maclaurin","n":4},"seed":7,"command":"verify"})");
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    EXPECT_EQ(config_hash(a), "b5d0665375fa955e") << "hash of a fixed config must not drift";
    Json c = a;
    c["seed"] = 8;
    EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(GraphCsv, HeaderDigitsAndRoles) {
    const GraphGrid g = hyperboloid_graph(GraphGrid::with_nodes(2, 1.0, 9), 1.0);
    std::ostringstream os;
    write_graph_csv(os, g);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x1,x2,u,H1,H2,admissible,role");
    std::size_t rows = 0, band = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        ASSERT_EQ(f.size(), 7u) << line;
        const double x = std::stod(f[0]), y = std::stod(f[1]), u = std::stod(f[2]);
        EXPECT_EQ(u, std::sqrt(1.0 + x * x + y * y)) << "17 significant digits round-trip";
        if (f[6] == "band") {
            ++band;
            EXPECT_TRUE(f[3].empty());
        } else {
            EXPECT_EQ(f[6], "interior");
            EXPECT_NEAR(std::stod(f[4]), 1.0, 0.05);
            EXPECT_EQ(f[5], "1");
        }
    }
    EXPECT_EQ(rows, g.interior_nodes().size() + g.band_nodes().size());
    EXPECT_EQ(band, g.band_nodes().size());
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(GraphCsv, RejectsNonSpacelikeRows) {
    GraphGrid g = GraphGrid::with_nodes(2, 1.0, 9);
    g.fill([](const Vec& x) { return 1.5 * x(0); });
    std::ostringstream os;
    EXPECT_THROW(write_graph_csv(os, g), DomainError);
}

TEST(ProfileCsv, Columns) {
    const auto p = build_profile(3, [](double) { return 1.0; }, 2.0, 20);
    std::ostringstream os;
    write_profile_csv(os, p);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "r,h,H,vprime,u,sigma2");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, p.size());
}

TEST(Outputs, ByteIdenticalAcrossRuns) {
    const RegularDomain cone(SphericalSupport(2, {}, DenseSampler::constant(0.0, 1.0)));
    EntireOptions o;
    o.spacing = 0.25;
    o.R0 = 1.0;
    const Json config{{"command", "foliate"}, {"levels", {1.0, 2.0}}};
    std::vector<fs::path> dirs;
    for (int run = 0; run < 2; ++run) {
        dirs.push_back(fresh_dir("repro" + std::to_string(run)));
        export_foliation(foliate(cone, {1.0, 2.0}, o, run + 1), dirs.back(), config);
    }
    for (const char* f : {"manifest.json", "leaf_0.csv", "leaf_1.csv"}) {
        EXPECT_EQ(slurp(dirs[0] / f), slurp(dirs[1] / f)) << f;
        EXPECT_FALSE(slurp(dirs[0] / f).empty());
    }
    const Json m = Json::parse(slurp(dirs[0] / "manifest.json"));
    EXPECT_EQ(m["version"], kVersion);
    EXPECT_EQ(m["config_hash"], config_hash(config));
    EXPECT_TRUE(m["strictly_ordered"].get<bool>());
    EXPECT_EQ(m["levels"].size(), 2u);
    EXPECT_GT(m["gaps"][0].get<double>(), 0.0);
}

TEST(BarrierCsv, RoleColumn) {
    std::vector<SupportPoint> pts;
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0 + 0.3;
        pts.push_back({vec({std::cos(a), std::sin(a)}), 0.1 * k});
    }
    const RegularDomain d(SphericalSupport(2, pts));
    const auto pair = build_barrier_pair(d, 1.0, 1.0, GraphGrid(2, 1.0, 0.125));
    std::ostringstream os;
    write_barrier_csv(os, pair, d);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "x1,x2,V,lower,upper,role");
    EXPECT_NE(os.str().find(",band\n"), std::string::npos);
    EXPECT_NE(os.str().find(",interior\n"), std::string::npos);
}

TEST(PropertySuites, AllPassOnSmallSamples) {
    for (const auto& s : suite_names()) {
        for (int n : {2, 3, 5}) {
            const auto r = run_suite(s, n, 200, 7);
            EXPECT_TRUE(r.passed()) << s << " n=" << n << " worst=" << r.worst;
        }
    }
}

TEST(PropertySuites, DeterministicForASeed) {
    const auto a = run_suite("gradient", 3, 100, 42), b = run_suite("gradient", 3, 100, 42);
    EXPECT_EQ(a.worst, b.worst);
    EXPECT_THROW(run_suite("bogus", 3, 10, 1), DomainError);
    EXPECT_THROW(run_suite("section", 1, 10, 1), DomainError);
    EXPECT_THROW(run_suite("minors", 9, 10, 1), DomainError);
}
