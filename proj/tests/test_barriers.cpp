#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "minkcsc/barriers.hpp"
#include "minkcsc/radial_lab.hpp"

using namespace minkcsc;

namespace {

Vec vec(std::initializer_list<double> v) {
    Vec x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double a : v) x(i++) = a;
    return x;
}

RegularDomain three_point2() {
    std::vector<SupportPoint> pts;
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0 + 0.3;
        pts.push_back({vec({std::cos(a), std::sin(a)}), 0.1 * k});
    }
    return RegularDomain(SphericalSupport(2, pts));
}

RegularDomain four_point2() {
    std::vector<SupportPoint> pts;
    for (int k = 0; k < 4; ++k) {
        const double a = std::numbers::pi * k / 2.0 + 0.2;
        pts.push_back({vec({std::cos(a), std::sin(a)}), 0.05 * k});
    }
    return RegularDomain(SphericalSupport(2, pts));
}

// Three directions on the circle z = height of S^2.
RegularDomain tilted_triangle3(double height) {
    const double rho = std::sqrt(1.0 - height * height);
    std::vector<SupportPoint> pts;
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0;
        pts.push_back({vec({rho * std::cos(a), rho * std::sin(a), height}), 0.1 * k});
    }
    return RegularDomain(SphericalSupport(3, pts));
}

RegularDomain cone2() { return RegularDomain(SphericalSupport(2, {}, DenseSampler::constant(0.0, 1.0))); }

// Lorentzian distance to the past boundary by exhaustive search on nested
// square grids around the running maximizer; a lower bound for the exact value.
double brute_force_time(const RegularDomain& d, const Vec& x, double t, int m) {
    auto dist = [&](const Vec& xi) {
        const double lap = t - eval_Vphi(d, xi), d2 = (x - xi).squaredNorm();
        return lap > 0.0 && lap * lap > d2 ? std::sqrt(lap * lap - d2) : 0.0;
    };
    double best = t - eval_Vphi(d, x);
    Vec centre = x;
    double half = 4.0 * (best + 1.0);
    for (int zoom = 0; zoom < 6; ++zoom) {
        const Vec c = centre;
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j <= m; ++j) {
                const Vec xi = c + half * vec({2.0 * i / m - 1.0, 2.0 * j / m - 1.0});
                const double v = dist(xi);
                if (v > best) {
                    best = v;
                    centre = xi;
                }
            }
        half *= 8.0 / m;
    }
    return best;
}

}  // namespace

TEST(CosmologicalTimeFinite, MatchesBruteForceSearch) {
    const auto d = three_point2();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int s = 0; s < 12; ++s) {
        const Vec x = vec({U(rng), U(rng)});
        const double t = eval_Vphi(d, x) + 0.2 + std::abs(U(rng));
        const double exact = cosmological_time(d, x, t);
        const double brute = brute_force_time(d, x, t, 200);
        EXPECT_GE(exact, brute - 1e-12);
        EXPECT_LT(exact - brute, 1e-6);
    }
}

TEST(CosmologicalTimeFinite, LevelInvertsTime) {
    const auto d = three_point2();
    for (double tau : {0.3, 1.0, 2.5}) {
        const Vec x = vec({0.4, -0.7});
        EXPECT_NEAR(cosmological_time(d, x, cosmological_level(d, x, tau)), tau, 1e-10);
    }
}

TEST(BoostedSliceTest, LiftReproducesVphi) {
    const auto d = tilted_triangle3(0.3);
    const auto s = product_slice(d);
    EXPECT_EQ(s.k, 2);
    EXPECT_NEAR(s.beta, 0.3, 1e-12);
    const RegularDomain slice(s.slice);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        const Vec x = vec({U(rng), U(rng), U(rng)});
        EXPECT_NEAR(s.lift(x, eval_Vphi(slice, s.project(x))), eval_Vphi(d, x), 1e-12);
    }
}

TEST(BoostedSliceTest, RightHandSideScaling) {
    const auto s = product_slice(tilted_triangle3(0.0));
    EXPECT_DOUBLE_EQ(s.slice_sigma2_rhs(1.0), 3.0);
    EXPECT_DOUBLE_EQ(s.slice_cmc_rhs(1.0), 1.5);
    EXPECT_DOUBLE_EQ(s.beta, 0.0);
}

TEST(BoostedSliceTest, LiftedHyperboloidHasFullDimensionalLevel) {
    const auto s = product_slice(tilted_triangle3(0.4));
    const double c = 0.7;
    const double a = 1.0 / std::sqrt(s.slice_sigma2_rhs(c));
    auto U = [&](const Vec& x) { return s.lift(x, std::sqrt(a * a + s.project(x).squaredNorm())); };
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> P(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const JetPoint j = fd_jet(U, vec({P(rng), P(rng), P(rng)}), 1e-4);
        EXPECT_NEAR(curvature_Hk(j, 2), c, 1e-5);
        EXPECT_NEAR(curvature_Hk(j, 3), 0.0, 1e-5);
    }
}

TEST(TripleSurfaceTest, SliceGaussCurvatureAndBoostedProduct) {
    const auto d = tilted_triangle3(0.2);
    const auto& p = d.support().points();
    const GraphGrid geometry(3, 0.75, 0.125);
    const auto ts = build_triple_surface({p[0], p[1], p[2]}, 1.0, geometry);
    EXPECT_TRUE(ts.report.converged);
    EXPECT_DOUBLE_EQ(ts.slice_rhs, 3.0);
    for (const auto& nc : grid_curvatures(ts.surface)) EXPECT_NEAR(nc.H2, 3.0, 1e-7);

    const Vec x = vec({0.1, -0.2, 0.15});
    for (double step : {-0.3, 0.2, 0.4})
        EXPECT_NEAR(*ts.value(x + step * ts.slice.e), *ts.value(x) + ts.slice.beta * step, 1e-14);
}

TEST(TripleSurfaceTest, ArgmaxTripleIsExact) {
    const auto d = four_point2();
    const auto& p = d.support().points();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const Vec x = vec({U(rng), U(rng)});
        const auto arg = support_argmax(d.support(), x);
        std::size_t j = 0;
        for (; j < p.size(); ++j)
            if ((p[j].y - arg.y).norm() < 1e-14) break;
        ASSERT_LT(j, p.size());
        const std::array<SupportPoint, 3> T{p[j], p[(j + 1) % 4], p[(j + 2) % 4]};
        EXPECT_NEAR(triple_support_function(T, x), eval_Vphi(d, x), 1e-14);
    }
}

TEST(TripleSurfaceTest, RejectsDegenerateTriples) {
    const SupportPoint a{vec({1, 0, 0}), 0.0}, b{vec({-1, 0, 0}), 0.0}, c{vec({1, 0, 0}), 0.1};
    EXPECT_THROW(build_triple_surface({a, b, c}, 1.0, GraphGrid(3, 0.5, 0.125)), DomainError);
    EXPECT_THROW(build_triple_surface({a, b, c}, 1.0, GraphGrid(2, 0.5, 0.125)), DomainError);
}

TEST(UpperBarrier, AlphaRule) {
    EXPECT_DOUBLE_EQ(upper_barrier_alpha(1.0, 1.0), 0.95);
    EXPECT_DOUBLE_EQ(upper_barrier_alpha(0.25, 4.0), 0.5);
    EXPECT_THROW(upper_barrier_alpha(2.0, 1.0), DomainError);
    EXPECT_THROW(upper_barrier_alpha(0.0, 1.0), DomainError);
}

TEST(UpperBarrier, ConeGivesHyperboloid) {
    const GraphGrid g = GraphGrid::with_nodes(2, 1.0, 33);
    const auto res = upper_barrier_solve(cone2(), 1.0, g);
    double err = 0.0;
    for (auto i : res.solution.interior_nodes())
        err = std::max(err, std::abs(res.solution[i] - std::sqrt(1.0 + res.solution.coords(i).squaredNorm())));
    EXPECT_LT(err, 1e-3);
}

TEST(UpperBarrier, SplittingDomainRejected) {
    const RegularDomain wedge(SphericalSupport(2, {{vec({1, 0}), 0.0}, {vec({-1, 0}), 0.0}}));
    EXPECT_THROW(upper_barrier(wedge, 1.0, 1.0, GraphGrid(2, 1.0, 0.125)), DomainError);
}

TEST(LowerBarrier, NeedsThreePoints) {
    const SphericalSupport two(2, {{vec({1, 0}), 0.0}, {vec({0, 1}), 0.0}});
    EXPECT_THROW(select_triples(two.points(), GraphGrid(2, 1.0, 0.25), 12), DomainError);
}

TEST(LowerBarrier, MonotoneInTheTripleSelection) {
    const auto d = four_point2();
    const auto& p = d.support().points();
    const GraphGrid g(2, 1.0, 0.125);
    const auto s1 = build_triple_surface({p[0], p[1], p[2]}, 1.0, g, {}, 0.8);
    const auto s2 = build_triple_surface({p[1], p[2], p[3]}, 1.0, g, {}, 0.8);
    const auto one = lower_barrier(std::vector<TripleSurface>{s1}, g);
    const auto two = lower_barrier(std::vector<TripleSurface>{s1, s2}, g);
    for (auto i : g.interior_nodes()) {
        EXPECT_LE(one[i], two[i]);
        EXPECT_DOUBLE_EQ(one[i], *s1.value(g.coords(i)));
    }
}

class ThreePointPair : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        domain_ = new RegularDomain(three_point2());
        pair_ = new BarrierPair(build_barrier_pair(*domain_, 1.0, 1.0, GraphGrid::with_nodes(2, 1.0, 33)));
    }
    static void TearDownTestSuite() {
        delete pair_;
        delete domain_;
    }
    static RegularDomain* domain_;
    static BarrierPair* pair_;
};
RegularDomain* ThreePointPair::domain_ = nullptr;
BarrierPair* ThreePointPair::pair_ = nullptr;

TEST_F(ThreePointPair, SandwichAndProbe) {
    EXPECT_EQ(pair_->triples, 1u);
    EXPECT_LE(pair_->C0, 1.0 / 0.95 + 0.05);
    const auto probe = probe_solution(*pair_, RhsSpec::constant_value(1.0));
    const auto r = validate_pair(*pair_, *domain_, {probe.solution});
    EXPECT_TRUE(r.ok());
    EXPECT_GT(r.min_lower_gap, 0.0);
    EXPECT_GT(r.min_pair_gap, 0.0);
    EXPECT_EQ(r.probe_violations, 0u);
}

TEST_F(ThreePointPair, ShiftedUpperIsReported) {
    BarrierPair bad = *pair_;
    for (auto i : bad.upper.interior_nodes()) bad.upper[i] -= bad.C0;
    for (auto i : bad.upper.band_nodes()) bad.upper[i] -= bad.C0;
    const auto r = validate_pair(bad, *domain_);
    EXPECT_FALSE(r.ok());
    EXPECT_GT(r.sandwich_violations, 0u);
}

TEST_F(ThreePointPair, UpperStaysBelowItsCosmologicalLevel) {
    const double tau = 1.0 / pair_->alpha;
    for (auto i : pair_->upper.interior_nodes()) {
        const Vec x = pair_->upper.coords(i);
        EXPECT_LE(cosmological_time(*domain_, x, pair_->upper[i]), tau + 1e-3);
    }
}
