#pragma once

// Pointwise curvature algebra for spacelike graphs x_{n+1} = u(x) in R^{n,1}.
//
// Everything here is a pure function of a jet (p, q) = (Du(x), D^2u(x)).
// The normalized k-th curvature is
//
//   H_k(p, q) = sigma_k(lambda_1, ..., lambda_n) / binom(n, k)
//
// where lambda_i are the eigenvalues of the shape operator
//
//   h = (1 - |p|^2)^{-1/2} (I + p p^T / (1 - |p|^2)) q.
//
// Two evaluation routes are provided: eigenvalues of a symmetric conjugate
// of h, and the sum over k x k minors
//
//   H_k = binom(n,k)^{-1} (1-|p|^2)^{-k/2} sum_{I,J} G_{I,J} q_{I,J},
//   G = I + p p^T / (1 - |p|^2),
//
// which is polynomial in q and is the route used for all derivatives.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "minkcsc/errors.hpp"

namespace minkcsc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr int kMaxJetDim = 8;
inline constexpr double kDefaultAdmissibilityMargin = 1e-12;

/// Gradient p and Hessian q of a graph function at one point.
struct JetPoint {
    Vec p;
    Mat q;

    int dim() const { return static_cast<int>(p.size()); }
};

namespace detail {

inline void check_jet(const JetPoint& j) {
    const auto n = j.p.size();
    if (n < 1 || n > kMaxJetDim) {
        throw DomainError("jet dimension must lie in [1, " + std::to_string(kMaxJetDim) + "]");
    }
    if (j.q.rows() != n || j.q.cols() != n) {
        throw DomainError("jet Hessian must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (j.p.squaredNorm() >= 1.0) {
        throw DomainError("gradient is not spacelike: |p| >= 1");
    }
}

using IndexSet = std::array<std::int8_t, kMaxJetDim>;

/// All increasing k-subsets of {0..n-1}, for 0 <= k <= n <= kMaxJetDim.
inline const std::vector<IndexSet>& subsets(int n, int k) {
    using Table = std::array<std::array<std::vector<IndexSet>, kMaxJetDim + 1>, kMaxJetDim + 1>;
    static const Table table = [] {
        Table t;
        for (int nn = 0; nn <= kMaxJetDim; ++nn) {
            for (unsigned mask = 0; mask < (1u << nn); ++mask) {
                IndexSet s{};
                int kk = 0;
                for (int i = 0; i < nn; ++i) {
                    if (mask & (1u << i)) s[kk++] = static_cast<std::int8_t>(i);
                }
                t[nn][kk].push_back(s);
            }
            for (auto& v : t[nn]) std::sort(v.begin(), v.end());
        }
        return t;
    }();
    return table[n][k];
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Determinant of a row-major k x k block, Gaussian elimination with partial pivoting.
inline double det_small(const double* src, int k) {
    if (k == 0) return 1.0;
    if (k == 1) return src[0];
    if (k == 2) return src[0] * src[3] - src[1] * src[2];
    if (k == 3) {
        return src[0] * (src[4] * src[8] - src[5] * src[7]) -
               src[1] * (src[3] * src[8] - src[5] * src[6]) +
               src[2] * (src[3] * src[7] - src[4] * src[6]);
    }
    std::array<double, kMaxJetDim * kMaxJetDim> a{};
    std::copy(src, src + k * k, a.begin());
    double det = 1.0;
    for (int c = 0; c < k; ++c) {
        int piv = c;
        for (int r = c + 1; r < k; ++r) {
            if (std::abs(a[r * k + c]) > std::abs(a[piv * k + c])) piv = r;
        }
        if (a[piv * k + c] == 0.0) return 0.0;
        if (piv != c) {
            for (int j = 0; j < k; ++j) std::swap(a[c * k + j], a[piv * k + j]);
            det = -det;
        }
        const double d = a[c * k + c];
        det *= d;
        for (int r = c + 1; r < k; ++r) {
            const double f = a[r * k + c] / d;
            for (int j = c + 1; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
        }
    }
    return det;
}

/// Signed cofactors cof[r*k+c] = (-1)^{r+c} det(a without row r, column c).
inline void cofactors(const double* a, int k, double* cof) {
    if (k == 1) {
        cof[0] = 1.0;
        return;
    }
    if (k == 2) {
        cof[0] = a[3];
        cof[1] = -a[2];
        cof[2] = -a[1];
        cof[3] = a[0];
        return;
    }
    std::array<double, kMaxJetDim * kMaxJetDim> minor{};
    const int m = k - 1;
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            int idx = 0;
            for (int i = 0; i < k; ++i) {
                if (i == r) continue;
                for (int j = 0; j < k; ++j) {
                    if (j == c) continue;
                    minor[idx++] = a[i * k + j];
                }
            }
            const double s = ((r + c) % 2 == 0) ? 1.0 : -1.0;
            cof[r * k + c] = s * det_small(minor.data(), m);
        }
    }
}

/// Allocation-free kernel behind every minors-route evaluation.
///
/// p has n entries, q is row-major n x n. On return `value` = H_k. If `dq`
/// is non-null it receives the symmetrized q-gradient (row-major n x n); if
/// `dp` is non-null it receives the p-gradient.
inline double curvature_kernel(int n, const double* p, const double* q, int k, double* dq,
                               double* dp) {
    double p2 = 0.0;
    for (int i = 0; i < n; ++i) p2 += p[i] * p[i];
    const double w2 = 1.0 - p2;
    std::array<double, kMaxJetDim * kMaxJetDim> G{};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) G[i * n + j] = (i == j ? 1.0 : 0.0) + p[i] * p[j] / w2;
    }

    std::array<double, kMaxJetDim * kMaxJetDim> dSq{};
    std::array<double, kMaxJetDim * kMaxJetDim> dSG{};
    std::array<double, kMaxJetDim * kMaxJetDim> gb{}, qb{}, cg{}, cq{};
    double S = 0.0;
    const auto& sets = subsets(n, k);
    for (const auto& I : sets) {
        for (const auto& J : sets) {
            for (int r = 0; r < k; ++r) {
                for (int c = 0; c < k; ++c) {
                    gb[r * k + c] = G[I[r] * n + J[c]];
                    qb[r * k + c] = q[I[r] * n + J[c]];
                }
            }
            const double dg = det_small(gb.data(), k);
            const double dqv = det_small(qb.data(), k);
            S += dg * dqv;
            if (dq != nullptr && dg != 0.0) {
                cofactors(qb.data(), k, cq.data());
                for (int r = 0; r < k; ++r)
                    for (int c = 0; c < k; ++c) dSq[I[r] * n + J[c]] += dg * cq[r * k + c];
            }
            if (dp != nullptr && dqv != 0.0) {
                cofactors(gb.data(), k, cg.data());
                for (int r = 0; r < k; ++r)
                    for (int c = 0; c < k; ++c) dSG[I[r] * n + J[c]] += dqv * cg[r * k + c];
            }
        }
    }

    const double scale = 1.0 / binomial(n, k);
    const double wk = std::pow(w2, -0.5 * k);
    const double value = scale * wk * S;

    if (dq != nullptr) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                dq[i * n + j] = scale * wk * 0.5 * (dSq[i * n + j] + dSq[j * n + i]);
            }
        }
    }
    if (dp != nullptr) {
        // D = dS/dG; dG_ab/dp_l = (d_al p_b + p_a d_bl)/w2 + 2 p_a p_b p_l / w2^2
        std::array<double, kMaxJetDim> Dp{}, DTp{};
        double pDp = 0.0;
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                Dp[a] += dSG[a * n + b] * p[b];
                DTp[b] += dSG[a * n + b] * p[a];
                pDp += p[a] * dSG[a * n + b] * p[b];
            }
        }
        for (int l = 0; l < n; ++l) {
            const double from_w = k * S * p[l] / w2;
            const double from_g = (Dp[l] + DTp[l]) / w2 + 2.0 * pDp * p[l] / (w2 * w2);
            dp[l] = scale * wk * (from_w + from_g);
        }
    }
    return value;
}

inline void to_row_major(const Mat& q, double* out) {
    const int n = static_cast<int>(q.rows());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i * n + j] = q(i, j);
}

}  // namespace detail

/// Inverse induced metric g^{ij} = delta_ij + p_i p_j / (1 - |p|^2).
inline Mat inverse_metric(const Vec& p) {
    const double w2 = 1.0 - p.squaredNorm();
    return Mat::Identity(p.size(), p.size()) + p * p.transpose() / w2;
}

/// Shape operator h^i_j of the graph with jet j.
inline Mat shape_operator(const JetPoint& j) {
    detail::check_jet(j);
    const double w = std::sqrt(1.0 - j.p.squaredNorm());
    return inverse_metric(j.p) * j.q / w;
}

/// Principal curvatures (ascending) from the symmetric conjugate B q B / W,
/// where B = g^{-1/2} = I + p p^T / (W (1 + W)) and W = sqrt(1 - |p|^2).
inline Vec principal_curvatures(const JetPoint& j) {
    detail::check_jet(j);
    const auto n = j.p.size();
    const double w = std::sqrt(1.0 - j.p.squaredNorm());
    const Mat B = Mat::Identity(n, n) + j.p * j.p.transpose() / (w * (1.0 + w));
    const Mat qs = 0.5 * (j.q + j.q.transpose());
    const Mat S = B * qs * B / w;
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// sigma_k(lambda) / binom(n, k).
inline double normalized_sigma(std::span<const double> lambda, int k) {
    const int n = static_cast<int>(lambda.size());
    if (k < 0 || k > n) throw DomainError("curvature index k out of range");
    std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    for (double l : lambda) {
        for (int i = k; i >= 1; --i) e[i] += l * e[i - 1];
    }
    return e[k] / detail::binomial(n, k);
}

inline void check_curvature_index(const JetPoint& j, int k) {
    if (k < 1 || k > j.dim()) {
        throw DomainError("curvature index k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(j.dim()) + "]");
    }
}

/// H_k through the eigenvalues of the shape operator.
inline double curvature_Hk_eigen(const JetPoint& j, int k) {
    detail::check_jet(j);
    check_curvature_index(j, k);
    const Vec lam = principal_curvatures(j);
    return normalized_sigma(std::span<const double>(lam.data(), lam.size()), k);
}

/// H_k through the minors expansion.
inline double curvature_Hk_minors(const JetPoint& j, int k) {
    detail::check_jet(j);
    check_curvature_index(j, k);
    const int n = j.dim();
    std::array<double, kMaxJetDim * kMaxJetDim> q{};
    detail::to_row_major(j.q, q.data());
    return detail::curvature_kernel(n, j.p.data(), q.data(), k, nullptr, nullptr);
}

inline double curvature_Hk(const JetPoint& j, int k) { return curvature_Hk_minors(j, k); }

struct CurvatureGradient {
    double value = 0.0;
    Mat dq;  // symmetrized: dH = sum_ij dq_ij * eta_ij for symmetric eta
    Vec dp;
};

inline CurvatureGradient curvature_Hk_gradient(const JetPoint& j, int k) {
    detail::check_jet(j);
    check_curvature_index(j, k);
    const int n = j.dim();
    std::array<double, kMaxJetDim * kMaxJetDim> q{}, dq{};
    std::array<double, kMaxJetDim> dp{};
    detail::to_row_major(j.q, q.data());
    CurvatureGradient g;
    g.value = detail::curvature_kernel(n, j.p.data(), q.data(), k, dq.data(), dp.data());
    g.dq.resize(n, n);
    g.dp.resize(n);
    for (int a = 0; a < n; ++a) {
        g.dp(a) = dp[a];
        for (int b = 0; b < n; ++b) g.dq(a, b) = dq[a * n + b];
    }
    return g;
}

inline Mat dHk_dq(const JetPoint& j, int k) { return curvature_Hk_gradient(j, k).dq; }
inline Vec dHk_dp(const JetPoint& j, int k) { return curvature_Hk_gradient(j, k).dp; }

/// True iff H_k(j) > margin for k = 1..m.
inline bool is_admissible(const JetPoint& j, int m, double margin = kDefaultAdmissibilityMargin) {
    if (j.p.squaredNorm() >= 1.0) return false;
    const int n = j.dim();
    m = std::min(m, n);
    std::array<double, kMaxJetDim * kMaxJetDim> q{};
    detail::to_row_major(j.q, q.data());
    for (int k = 1; k <= m; ++k) {
        if (!(detail::curvature_kernel(n, j.p.data(), q.data(), k, nullptr, nullptr) > margin))
            return false;
    }
    return true;
}

struct SectionPartial {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// dH_k/dq_11 from the gradient, against the closed form
/// (k/n) (1-|p'|^2)^{(k+1)/2} (1-|p|^2)^{-(k/2+1)} H_{k-1}(p', q')
/// with p', q' the trailing (n-1)-blocks.
inline SectionPartial vertical_section_partial(const JetPoint& j, int k) {
    detail::check_jet(j);
    if (k < 2) throw DomainError("vertical section identity needs k >= 2");
    check_curvature_index(j, k);
    const int n = j.dim();
    SectionPartial out;
    out.lhs = dHk_dq(j, k)(0, 0);
    JetPoint tail{j.p.tail(n - 1), j.q.bottomRightCorner(n - 1, n - 1)};
    const double hk1 = (k - 1 == 0) ? 1.0 : curvature_Hk(tail, k - 1);
    const double pp2 = tail.p.squaredNorm();
    const double p2 = j.p.squaredNorm();
    out.rhs = (static_cast<double>(k) / n) * std::pow(1.0 - pp2, 0.5 * (k + 1)) /
              std::pow(1.0 - p2, 0.5 * k + 1.0) * hk1;
    return out;
}

/// Inputs delta, theta, C; outputs lambda, Lambda.
struct EllipticityWindow {
    double delta = 0.0;
    double theta = 1.0;
    double C = 0.0;
    double lambda = 0.0;
    double Lambda = 0.0;
};

inline double entrywise_l1(const Mat& q) { return q.cwiseAbs().sum(); }

/// Ellipticity constants of dH_m/dq at j.
///
/// lambda = (1-|p|^2) H_m / ((n-m+1) |q|_1) with |q|_1 the entrywise
/// absolute sum; Lambda = largest eigenvalue of dH_m/dq. |q| <= C is
/// tested in the spectral norm.
inline EllipticityWindow ellipticity_bounds(const JetPoint& j, int m, EllipticityWindow window) {
    detail::check_jet(j);
    check_curvature_index(j, m);
    const int n = j.dim();
    if (!is_admissible(j, m)) throw DomainError("ellipticity_bounds: jet is not admissible for m");
    if (j.p.norm() > 1.0 - window.theta) {
        throw DomainError("ellipticity_bounds: gradient bound |p| <= 1 - theta violated");
    }
    Eigen::SelfAdjointEigenSolver<Mat> qs(0.5 * (j.q + j.q.transpose()), Eigen::EigenvaluesOnly);
    const double qnorm = qs.eigenvalues().cwiseAbs().maxCoeff();
    if (qnorm > window.C) throw DomainError("ellipticity_bounds: Hessian bound |q| <= C violated");
    const auto g = curvature_Hk_gradient(j, m);
    if (g.value < window.delta) throw DomainError("ellipticity_bounds: lower bound H_m >= delta violated");

    Eigen::SelfAdjointEigenSolver<Mat> ds(g.dq, Eigen::EigenvaluesOnly);
    window.lambda = (1.0 - j.p.squaredNorm()) * g.value / ((n - m + 1) * entrywise_l1(j.q));
    window.Lambda = ds.eigenvalues().maxCoeff();
    return window;
}

/// Midpoint concavity of H_m^{1/m} in q at fixed p.
inline bool concavity_probe(const JetPoint& j1, const JetPoint& j2, int m) {
    detail::check_jet(j1);
    detail::check_jet(j2);
    if (j1.dim() != j2.dim() || (j1.p - j2.p).cwiseAbs().maxCoeff() != 0.0) {
        throw DomainError("concavity_probe: jets must share the same gradient p");
    }
    if (!is_admissible(j1, m) || !is_admissible(j2, m)) {
        throw DomainError("concavity_probe: both jets must be admissible for m");
    }
    const double inv = 1.0 / m;
    JetPoint mid{j1.p, 0.5 * (j1.q + j2.q)};
    const double fm = std::pow(curvature_Hk(mid, m), inv);
    const double f1 = std::pow(curvature_Hk(j1, m), inv);
    const double f2 = std::pow(curvature_Hk(j2, m), inv);
    return fm >= 0.5 * (f1 + f2) - 1e-12;
}

/// (H_1, H_2^{1/2}, ..., H_m^{1/m}); non-increasing on the admissible cone.
inline std::vector<double> maclaurin_chain(const JetPoint& j, int m) {
    detail::check_jet(j);
    check_curvature_index(j, m);
    std::vector<double> chain;
    chain.reserve(static_cast<std::size_t>(m));
    for (int k = 1; k <= m; ++k) {
        const double h = curvature_Hk(j, k);
        chain.push_back(std::copysign(std::pow(std::abs(h), 1.0 / k), h));
    }
    return chain;
}

/// Central finite-difference jet of a scalar function of n variables.
template <class F>
JetPoint finite_difference_jet(F&& f, const Vec& x, double step) {
    const auto n = x.size();
    JetPoint j{Vec::Zero(n), Mat::Zero(n, n)};
    const double f0 = f(x);
    Vec y = x;
    for (Eigen::Index a = 0; a < n; ++a) {
        y(a) = x(a) + step;
        const double fp = f(y);
        y(a) = x(a) - step;
        const double fm = f(y);
        y(a) = x(a);
        j.p(a) = (fp - fm) / (2.0 * step);
        j.q(a, a) = (fp - 2.0 * f0 + fm) / (step * step);
    }
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            auto at = [&](double sa, double sb) {
                y(a) = x(a) + sa * step;
                y(b) = x(b) + sb * step;
                const double v = f(y);
                y(a) = x(a);
                y(b) = x(b);
                return v;
            };
            const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * step * step);
            j.q(a, b) = v;
            j.q(b, a) = v;
        }
    }
    return j;
}

}  // namespace minkcsc
