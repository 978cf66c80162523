#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "minkcsc/curvature.hpp"
#include "minkcsc/jet_sampling.hpp"

using namespace minkcsc;

namespace {

JetPoint hyperboloid_jet(const Vec& x, double a) {
    const double r = std::sqrt(a * a + x.squaredNorm());
    const auto n = x.size();
    Mat q = Mat::Identity(n, n) / r - x * x.transpose() / (r * r * r);
    return JetPoint{x / r, q};
}

// Oracle: eigenvalues of the non-symmetric matrix g^{-1} q / W through a
// general eigensolver, then sigma_k from the characteristic coefficients.
double oracle_Hk(const JetPoint& j, int k) {
    const auto n = j.p.size();
    const double w2 = 1.0 - j.p.squaredNorm();
    const Mat g_inv = Mat::Identity(n, n) + j.p * j.p.transpose() / w2;
    const Mat h = g_inv * j.q / std::sqrt(w2);
    Eigen::EigenSolver<Mat> es(h, false);
    const Eigen::VectorXcd lam = es.eigenvalues();
    std::vector<std::complex<double>> e(n + 1, 0.0);
    e[0] = 1.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index m = n; m >= 1; --m) e[m] += lam(i) * e[m - 1];
    double binom = 1.0;
    for (int i = 1; i <= k; ++i) binom = binom * (n - k + i) / i;
    return e[k].real() / binom;
}

double fd_dq(const JetPoint& j, int k, int a, int b, double eps) {
    JetPoint jp = j, jm = j;
    if (a == b) {
        jp.q(a, a) += eps;
        jm.q(a, a) -= eps;
        return (oracle_Hk(jp, k) - oracle_Hk(jm, k)) / (2 * eps);
    }
    jp.q(a, b) += eps;
    jp.q(b, a) += eps;
    jm.q(a, b) -= eps;
    jm.q(b, a) -= eps;
    // symmetric perturbation moves two entries; each carries half
    return 0.5 * (oracle_Hk(jp, k) - oracle_Hk(jm, k)) / (2 * eps);
}

double fd_dp(const JetPoint& j, int k, int a, double eps) {
    JetPoint jp = j, jm = j;
    jp.p(a) += eps;
    jm.p(a) -= eps;
    return (oracle_Hk(jp, k) - oracle_Hk(jm, k)) / (2 * eps);
}

}  // namespace

TEST(ShapeOperator, IdentityJet) {
    JetPoint j{Vec::Zero(3), Mat::Identity(3, 3)};
    EXPECT_TRUE(shape_operator(j).isApprox(Mat::Identity(3, 3), 1e-14));
}

TEST(ShapeOperator, UnitHyperboloidIsUmbilic) {
    for (const Vec& x : {Vec(Vec::Constant(2, 0.3)), Vec(Vec::LinSpaced(3, -2.0, 5.0)),
                         Vec(Vec::Constant(4, 10.0))}) {
        const Mat h = shape_operator(hyperboloid_jet(x, 1.0));
        EXPECT_LT((h - Mat::Identity(x.size(), x.size())).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(ShapeOperator, ScaledHyperboloid) {
    Vec x(2);
    x << 1.5, -0.7;
    for (double a : {0.5, 2.0, 3.0}) {
        const Mat h = shape_operator(hyperboloid_jet(x, a));
        EXPECT_LT((h - Mat::Identity(2, 2) / a).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ShapeOperator, RejectsNonSpacelike) {
    Vec p(2);
    p << 0.8, 0.6;
    EXPECT_THROW(shape_operator(JetPoint{p, Mat::Identity(2, 2)}), DomainError);
    p << 1.2, 0.0;
    EXPECT_THROW(curvature_Hk(JetPoint{p, Mat::Identity(2, 2)}, 1), DomainError);
}

TEST(CurvatureHk, IdentityAllOrders) {
    for (int n = 1; n <= 6; ++n) {
        JetPoint j{Vec::Zero(n), Mat::Identity(n, n)};
        for (int k = 1; k <= n; ++k) {
            EXPECT_NEAR(curvature_Hk(j, k), 1.0, 1e-14);
            EXPECT_NEAR(curvature_Hk_eigen(j, k), 1.0, 1e-14);
        }
    }
}

TEST(CurvatureHk, DiagonalTwoByTwo) {
    Mat q = Mat::Zero(2, 2);
    q.diagonal() << 2.0, 3.0;
    JetPoint j{Vec::Zero(2), q};
    EXPECT_NEAR(curvature_Hk(j, 1), 2.5, 1e-14);
    EXPECT_NEAR(curvature_Hk(j, 2), 6.0, 1e-14);
}

TEST(CurvatureHk, HyperboloidAllOrders) {
    Vec x = Vec::LinSpaced(4, -1.0, 2.5);
    const JetPoint j = hyperboloid_jet(x, 1.0);
    for (int k = 1; k <= 4; ++k) {
        EXPECT_NEAR(curvature_Hk_minors(j, k), 1.0, 1e-10);
        EXPECT_NEAR(curvature_Hk_eigen(j, k), 1.0, 1e-10);
    }
}

TEST(CurvatureHk, IndexOutOfRange) {
    JetPoint j{Vec::Zero(3), Mat::Identity(3, 3)};
    EXPECT_THROW(curvature_Hk(j, 0), DomainError);
    EXPECT_THROW(curvature_Hk(j, 4), DomainError);
    EXPECT_THROW(curvature_Hk_eigen(j, 4), DomainError);
}

TEST(CurvatureHk, MinorsMatchOracleOnRandomJets) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int n = 2; n <= 6; ++n) {
        for (int s = 0; s < 400; ++s) {
            Vec p(n);
            for (int i = 0; i < n; ++i) p(i) = g(rng);
            p *= 0.95 * std::uniform_real_distribution<double>(0, 1)(rng) / p.norm();
            Mat q(n, n);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) q(a, b) = g(rng);
            q = (0.5 * (q + q.transpose())).eval();
            const JetPoint j{p, q};
            for (int k = 1; k <= n; ++k) {
                const double ref = oracle_Hk(j, k);
                EXPECT_NEAR(curvature_Hk_minors(j, k), ref, 1e-9 * (1.0 + std::abs(ref)));
                EXPECT_NEAR(curvature_Hk_eigen(j, k), ref, 1e-9 * (1.0 + std::abs(ref)));
            }
        }
    }
}

TEST(Admissible, IdentityIsAdmissible) {
    EXPECT_TRUE(is_admissible(JetPoint{Vec::Zero(2), Mat::Identity(2, 2)}, 2, 1e-12));
}

TEST(Admissible, NegativeSigma2Rejected) {
    Mat q = Mat::Zero(3, 3);
    q.diagonal() << 1.0, -0.1, -0.1;
    JetPoint j{Vec::Zero(3), q};
    EXPECT_NEAR(curvature_Hk(j, 1), 0.8 / 3.0, 1e-14);
    EXPECT_NEAR(curvature_Hk(j, 2), (-0.1 - 0.1 + 0.01) / 3.0, 1e-14);
    EXPECT_FALSE(is_admissible(j, 2, 1e-12));
    EXPECT_TRUE(is_admissible(j, 1, 1e-12));
}

TEST(Admissible, HyperbolaProductHasZeroSigma2) {
    // u = sqrt(x1^2 + a^2) in R^3 at x = (0.7, 0.2, -1)
    const double a = 0.8, x1 = 0.7;
    const double r = std::sqrt(x1 * x1 + a * a);
    Vec p = Vec::Zero(3);
    p(0) = x1 / r;
    Mat q = Mat::Zero(3, 3);
    q(0, 0) = a * a / (r * r * r);
    JetPoint j{p, q};
    EXPECT_NEAR(curvature_Hk(j, 1), 1.0 / (3.0 * a), 1e-12);
    EXPECT_NEAR(curvature_Hk(j, 2), 0.0, 1e-14);
    EXPECT_FALSE(is_admissible(j, 2, 1e-12));
}

TEST(Derivatives, MeanCurvatureAtIdentity) {
    JetPoint j{Vec::Zero(2), Mat::Identity(2, 2)};
    EXPECT_TRUE(dHk_dq(j, 1).isApprox(Mat::Identity(2, 2) / 2.0, 1e-14));
    EXPECT_LT(dHk_dp(j, 1).norm(), 1e-14);
}

TEST(Derivatives, TopOrderAtIdentity) {
    // H_n = det(q) at p = 0, whose gradient at I is the cofactor matrix I;
    // the n-th root H_n^{1/n} has gradient I/n.
    for (int n = 2; n <= 5; ++n) {
        JetPoint j{Vec::Zero(n), Mat::Identity(n, n)};
        const auto g = curvature_Hk_gradient(j, n);
        EXPECT_TRUE(g.dq.isApprox(Mat::Identity(n, n), 1e-13));
        const Mat root = g.dq / (n * std::pow(g.value, 1.0 - 1.0 / n));
        EXPECT_TRUE(root.isApprox(Mat::Identity(n, n) / n, 1e-13));
    }
}

TEST(Derivatives, MatchFiniteDifferences) {
    std::mt19937_64 rng(5);
    for (int n = 2; n <= 5; ++n) {
        for (int s = 0; s < 40; ++s) {
            const JetPoint j = sample_admissible_jet(n, 2, rng, 0.9);
            for (int k = 1; k <= n; ++k) {
                const auto g = curvature_Hk_gradient(j, k);
                const double scale = 1.0 + g.dq.cwiseAbs().maxCoeff() + g.dp.cwiseAbs().maxCoeff();
                for (int a = 0; a < n; ++a) {
                    EXPECT_NEAR(g.dp(a), fd_dp(j, k, a, 1e-6), 1e-6 * scale);
                    for (int b = a; b < n; ++b) {
                        EXPECT_NEAR(g.dq(a, b), fd_dq(j, k, a, b, 1e-6), 1e-6 * scale);
                    }
                }
            }
        }
    }
}

TEST(Derivatives, PositiveDefiniteOnCone) {
    std::mt19937_64 rng(9);
    for (int n = 2; n <= 6; ++n) {
        for (int m = 1; m <= std::min(n, 3); ++m) {
            for (int s = 0; s < 100; ++s) {
                const JetPoint j = sample_admissible_jet(n, m, rng);
                Eigen::SelfAdjointEigenSolver<Mat> es(dHk_dq(j, m), Eigen::EigenvaluesOnly);
                EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
            }
        }
    }
}

TEST(VerticalSection, IdentityThreeByThree) {
    JetPoint j{Vec::Zero(3), Mat::Identity(3, 3)};
    const auto s = vertical_section_partial(j, 2);
    // dH_2/dq_11 at the identity: sigma_2 derivative is lambda_2 + lambda_3 = 2, over binom(3,2).
    EXPECT_NEAR(s.lhs, 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(s.rhs, 2.0 / 3.0, 1e-14);
}

TEST(VerticalSection, RandomFourDimensional) {
    std::mt19937_64 rng(21);
    for (int s = 0; s < 200; ++s) {
        const JetPoint j = sample_admissible_jet(4, 2, rng);
        for (int k = 2; k <= 4; ++k) {
            const auto v = vertical_section_partial(j, k);
            EXPECT_NEAR(v.lhs, v.rhs, 1e-10 * (1.0 + std::abs(v.lhs)));
        }
    }
}

TEST(VerticalSection, GradientOrthogonalToFirstAxis) {
    std::mt19937_64 rng(22);
    for (int s = 0; s < 50; ++s) {
        JetPoint j = sample_admissible_jet(3, 2, rng);
        j.p(0) = 0.0;
        const auto v = vertical_section_partial(j, 2);
        EXPECT_NEAR(v.lhs, v.rhs, 1e-10 * (1.0 + std::abs(v.lhs)));
    }
}

TEST(VerticalSection, RejectsFirstOrder) {
    EXPECT_THROW(vertical_section_partial(JetPoint{Vec::Zero(3), Mat::Identity(3, 3)}, 1),
                 DomainError);
}

TEST(Ellipticity, IdentityValue) {
    EllipticityWindow w{0.5, 0.5, 2.0, 0.0, 0.0};
    const auto out = ellipticity_bounds(JetPoint{Vec::Zero(3), Mat::Identity(3, 3)}, 2, w);
    EXPECT_NEAR(out.lambda, 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(out.Lambda, 2.0 / 3.0, 1e-14);
}

TEST(Ellipticity, RayleighQuotientsInWindow) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int n = 2; n <= 5; ++n) {
        for (int s = 0; s < 50; ++s) {
            const int m = 1 + s % std::min(n, 3);
            const JetPoint j = sample_admissible_jet(n, m, rng);
            EllipticityWindow w{0.0, 0.999 * (1.0 - j.p.norm()), 1e9, 0.0, 0.0};
            const auto out = ellipticity_bounds(j, m, w);
            ASSERT_GT(out.lambda, 0.0);
            ASSERT_LE(out.lambda, out.Lambda);
            const Mat D = dHk_dq(j, m);
            for (int t = 0; t < 50; ++t) {
                Vec xi(n);
                for (int i = 0; i < n; ++i) xi(i) = g(rng);
                const double rq = xi.dot(D * xi) / xi.squaredNorm();
                EXPECT_GE(rq, out.lambda * (1 - 1e-12));
                EXPECT_LE(rq, out.Lambda * (1 + 1e-12));
            }
        }
    }
}

TEST(Ellipticity, ScalingHessian) {
    JetPoint j{Vec::Zero(3), Mat::Identity(3, 3)};
    EllipticityWindow w{0.1, 0.5, 10.0, 0.0, 0.0};
    const auto a = ellipticity_bounds(j, 2, w);
    j.q *= 2.0;
    const auto b = ellipticity_bounds(j, 2, w);
    // H_2 scales by 4, |q|_1 by 2
    EXPECT_NEAR(b.lambda / a.lambda, 2.0, 1e-14);
    EXPECT_NEAR(b.Lambda / a.Lambda, 2.0, 1e-14);
}

TEST(Ellipticity, ViolatedBoundsAreNamed) {
    JetPoint j{Vec::Zero(3), Mat::Identity(3, 3)};
    auto message = [&](EllipticityWindow w, const JetPoint& jj) {
        try {
            ellipticity_bounds(jj, 2, w);
        } catch (const DomainError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message({2.0, 0.5, 10.0, 0, 0}, j).find("delta"), std::string::npos);
    EXPECT_NE(message({0.1, 0.5, 0.5, 0, 0}, j).find("C"), std::string::npos);
    JetPoint moving = j;
    moving.p(0) = 0.8;
    EXPECT_NE(message({0.1, 0.5, 10.0, 0, 0}, moving).find("theta"), std::string::npos);
    Mat q = Mat::Zero(3, 3);
    q.diagonal() << 1.0, -0.1, -0.1;
    EXPECT_NE(message({0.0, 0.5, 10.0, 0, 0}, JetPoint{Vec::Zero(3), q}).find("admissible"),
              std::string::npos);
}

TEST(Concavity, EqualHessians) {
    JetPoint j{Vec::Zero(3), Mat::Identity(3, 3)};
    EXPECT_TRUE(concavity_probe(j, j, 2));
}

TEST(Concavity, IdentityAndDouble) {
    JetPoint a{Vec::Zero(4), Mat::Identity(4, 4)};
    JetPoint b{Vec::Zero(4), 2.0 * Mat::Identity(4, 4)};
    for (int m = 1; m <= 4; ++m) EXPECT_TRUE(concavity_probe(a, b, m));
}

TEST(Concavity, RandomPairsSameGradient) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 2000; ++s) {
        const int n = 2 + s % 5;
        const int m = 1 + s % std::min(n, 3);
        const JetPoint a = sample_admissible_jet(n, m, rng);
        JetPoint b = sample_admissible_jet(n, m, rng);
        // rebuild b over the gradient of a with the spectrum of b
        const Vec lam = principal_curvatures(b);
        b = jet_with_curvatures(a.p, lam, rng);
        if (!is_admissible(b, m)) continue;
        EXPECT_TRUE(concavity_probe(a, b, m));
    }
}

TEST(Concavity, DifferentGradientsRejected) {
    JetPoint a{Vec::Zero(2), Mat::Identity(2, 2)};
    JetPoint b = a;
    b.p(1) = 0.1;
    EXPECT_THROW(concavity_probe(a, b, 2), DomainError);
}

TEST(Maclaurin, Identity) {
    for (double v : maclaurin_chain(JetPoint{Vec::Zero(4), Mat::Identity(4, 4)}, 4))
        EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Maclaurin, DiagonalOneFour) {
    Mat q = Mat::Zero(2, 2);
    q.diagonal() << 1.0, 4.0;
    const auto c = maclaurin_chain(JetPoint{Vec::Zero(2), q}, 2);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NEAR(c[0], 2.5, 1e-14);
    EXPECT_NEAR(c[1], 2.0, 1e-14);
}

TEST(Maclaurin, NonIncreasingOnCone) {
    std::mt19937_64 rng(23);
    for (int s = 0; s < 2000; ++s) {
        const int n = 2 + s % 5;
        const int m = 1 + s % n;
        const auto c = maclaurin_chain(sample_admissible_jet(n, m, rng), m);
        for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LE(c[i], c[i - 1] * (1 + 1e-12));
    }
}

TEST(Properties, SquareOfSumDominatesPairSum) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int s = 0; s < 1000; ++s) {
        const int n = 2 + s % 5;
        Vec p(n);
        for (int i = 0; i < n; ++i) p(i) = g(rng);
        p *= 0.9 / p.norm();
        Mat q(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) q(a, b) = g(rng);
        const JetPoint j{p, 0.5 * (q + q.transpose())};
        const Vec lam = principal_curvatures(j);
        const double s1 = lam.sum();
        const double s2 = 0.5 * (s1 * s1 - lam.squaredNorm());
        EXPECT_GE(s1 * s1 - 2.0 * s2, -1e-12 * (1.0 + s1 * s1));
    }
}

TEST(Properties, ConeMonotonicity) {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int s = 0; s < 1000; ++s) {
        const int n = 2 + s % 5;
        const int m = 1 + s % std::min(n, 4);
        const JetPoint j = sample_admissible_jet(n, m, rng);
        Mat e(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) e(a, b) = g(rng);
        const Mat eta = 0.1 * (e * e.transpose() + 1e-3 * Mat::Identity(n, n));
        JetPoint up{j.p, j.q + eta};
        for (int k = 1; k <= m; ++k) EXPECT_GT(curvature_Hk(up, k), curvature_Hk(j, k));
    }
}

TEST(FiniteDifferenceJet, RecoversHyperboloid) {
    Vec x(3);
    x << 0.4, -0.2, 1.1;
    auto u = [](const Vec& y) { return std::sqrt(1.0 + y.squaredNorm()); };
    const JetPoint fd = finite_difference_jet(u, x, 1e-4);
    const JetPoint ex = hyperboloid_jet(x, 1.0);
    EXPECT_LT((fd.p - ex.p).norm(), 1e-8);
    EXPECT_LT((fd.q - ex.q).norm(), 1e-5);
}
