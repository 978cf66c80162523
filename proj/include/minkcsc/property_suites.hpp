#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "minkcsc/curvature.hpp"
#include "minkcsc/jet_sampling.hpp"

namespace minkcsc {

struct SuiteResult {
    std::string suite;
    int n = 0;
    int samples = 0;
    std::size_t failures = 0;
    double worst = 0.0;      // largest observed error (suite-specific units)
    double tolerance = 0.0;

    bool passed() const { return failures == 0; }
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> s{"minors", "maclaurin", "gradient", "section"};
    return s;
}

/// Randomized checks on admissible jets; deterministic for a given seed.
inline SuiteResult run_suite(const std::string& suite, int n, int samples, unsigned seed) {
    if (n < 1 || n > kMaxJetDim) throw DomainError("suite dimension must lie in [1, 8]");
    if (samples < 1) throw DomainError("suite needs at least one sample");
    SuiteResult r{suite, n, samples, 0, 0.0, 0.0};
    std::mt19937_64 rng(seed);
    auto note = [&](double err, double tol) {
        r.worst = std::max(r.worst, err);
        if (!(err <= tol)) ++r.failures;
    };
    if (suite == "minors") {
        r.tolerance = 1e-10;
        for (int s = 0; s < samples; ++s) {
            const JetPoint j = sample_admissible_jet(n, std::min(n, 2), rng);
            for (int k = 1; k <= n; ++k) {
                const double a = curvature_Hk_minors(j, k), b = curvature_Hk_eigen(j, k);
                note(std::abs(a - b) / (1.0 + std::abs(b)), r.tolerance);
            }
        }
    } else if (suite == "maclaurin") {
        r.tolerance = 1e-12;
        for (int s = 0; s < samples; ++s) {
            const auto c = maclaurin_chain(sample_admissible_jet(n, n, rng), n);
            for (std::size_t i = 1; i < c.size(); ++i) note(std::max(0.0, c[i] - c[i - 1]) / c[i - 1], r.tolerance);
        }
    } else if (suite == "gradient") {
        r.tolerance = 1e-6;
        const double eps = 1e-6;
        const int m = std::min(n, 2);
        for (int s = 0; s < samples; ++s) {
            const JetPoint j = sample_admissible_jet(n, m, rng);
            for (int k = 1; k <= m; ++k) {
                const auto g = curvature_Hk_gradient(j, k);
                Eigen::SelfAdjointEigenSolver<Mat> es(g.dq, Eigen::EigenvaluesOnly);
                if (!(es.eigenvalues().minCoeff() > 0.0)) ++r.failures;
                const double scale = 1.0 + g.dq.cwiseAbs().maxCoeff() + g.dp.cwiseAbs().maxCoeff();
                for (int a = 0; a < n; ++a) {
                    JetPoint jp = j, jm = j;
                    jp.p(a) += eps;
                    jm.p(a) -= eps;
                    if (jp.p.squaredNorm() < 1.0) {
                        const double fd = (curvature_Hk(jp, k) - curvature_Hk(jm, k)) / (2.0 * eps);
                        note(std::abs(fd - g.dp(a)) / scale, r.tolerance);
                    }
                    for (int b = a; b < n; ++b) {
                        JetPoint qp = j, qm = j;
                        qp.q(a, b) += eps;
                        qm.q(a, b) -= eps;
                        if (a != b) {
                            qp.q(b, a) += eps;
                            qm.q(b, a) -= eps;
                        }
                        const double fd = (curvature_Hk(qp, k) - curvature_Hk(qm, k)) / (2.0 * eps) * (a == b ? 1.0 : 0.5);
                        note(std::abs(fd - g.dq(a, b)) / scale, r.tolerance);
                    }
                }
            }
        }
    } else if (suite == "section") {
        r.tolerance = 1e-10;
        if (n < 2) throw DomainError("section suite needs n >= 2");
        for (int s = 0; s < samples; ++s) {
            const JetPoint j = sample_admissible_jet(n, std::min(n, 2), rng);
            for (int k = 2; k <= n; ++k) {
                const auto v = vertical_section_partial(j, k);
                note(std::abs(v.lhs - v.rhs) / (1.0 + std::abs(v.lhs)), r.tolerance);
            }
        }
    } else {
        throw DomainError("unknown suite \"" + suite + "\"");
    }
    return r;
}

}  // namespace minkcsc
