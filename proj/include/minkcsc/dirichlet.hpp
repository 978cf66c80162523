#pragma once

// Dirichlet problems H_m[u] = H(x, u) (m = 2) and H_1[u] = c on balls,
// discretized by central differences on a masked GraphGrid and solved by
// damped Newton inside a homotopy in t from the data of the initial guess
// (t = 0) to the target problem (t = 1).

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "minkcsc/curvature.hpp"
#include "minkcsc/errors.hpp"
#include "minkcsc/graph_grid.hpp"

namespace minkcsc {

/// Right-hand side H(x, z) with 0 < h0 <= H <= h1.
struct RhsSpec {
    std::function<double(const Vec&, double)> value;
    std::function<double(const Vec&, double)> dz;  // empty: central difference in z
    double h0 = 1.0;
    double h1 = 1.0;
    bool monotone = true;  // caller asserts dH/dz >= 0
    std::optional<double> constant;

    static RhsSpec constant_value(double c) {
        if (!(c > 0.0)) throw DomainError("constant right-hand side must be positive");
        RhsSpec r;
        r.value = [c](const Vec&, double) { return c; };
        r.dz = [](const Vec&, double) { return 0.0; };
        r.h0 = r.h1 = c;
        r.monotone = true;
        r.constant = c;
        return r;
    }

    static RhsSpec function(std::function<double(const Vec&, double)> value,
                            std::function<double(const Vec&, double)> dz, double h0, double h1,
                            bool monotone) {
        RhsSpec r;
        r.value = std::move(value);
        r.dz = std::move(dz);
        r.h0 = h0;
        r.h1 = h1;
        r.monotone = monotone;
        r.validate();
        return r;
    }

    void validate() const {
        if (!value) throw DomainError("right-hand side has no evaluator");
        if (!(h0 > 0.0) || !(h0 <= h1)) throw DomainError("right-hand side bounds need 0 < h0 <= h1");
    }

    double operator()(const Vec& x, double z) const { return value(x, z); }

    double derivative(const Vec& x, double z) const {
        if (dz) return dz(x, z);
        const double e = 1e-6 * (1.0 + std::abs(z));
        return (value(x, z + e) - value(x, z - e)) / (2.0 * e);
    }
};

enum class LinearSolverKind { Auto, Direct, Iterative };

struct SolverOptions {
    double tol = 0.0;  // 0: 1e-8 for n = 2, 1e-6 for n = 3
    int homotopy_steps = 10;
    int max_newton = 40;
    double theta_min = 1e-3;
    double admissibility_margin = kDefaultAdmissibilityMargin;
    double step_floor = 1e-12;
    double intermediate_tol = 1e-4;
    int max_step_refinements = 12;  // consecutive halvings of the homotopy step
    int max_homotopy_steps = 400;   // attempted homotopy steps in total
    LinearSolverKind linear = LinearSolverKind::Auto;
    std::size_t direct_limit = 4000;  // unknowns above which Auto goes iterative

    double tolerance_for(int n) const {
        if (tol > 0.0) return tol;
        return n <= 2 ? 1e-8 : 1e-6;
    }
};

struct SolveReport {
    int order = 2;                          // m of the operator H_m
    std::vector<double> residual_history;   // sup |H_m - H| after each accepted Newton step
    std::vector<double> damping_history;    // accepted step lengths
    std::vector<double> homotopy_history;   // t at each accepted Newton step
    double admissibility_margin = 0.0;      // min over interior of min_{k <= m} H_k
    double gradient_bound = 0.0;            // max discrete |Du|, i.e. 1 - theta
    double final_residual = std::numeric_limits<double>::infinity();
    double tolerance = 0.0;
    double exp_weight = 0.0;                // k of the e^{-k u} reformulation
    int newton_iterations = 0;
    std::size_t unknowns = 0;
    bool converged = false;
    bool maclaurin_ok = true;
    std::string linear_solver;
    std::string message;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, SolveReport report)
        : std::runtime_error(what), report_(std::move(report)) {}
    const SolveReport& report() const { return report_; }

private:
    SolveReport report_;
};

struct SolveResult {
    GraphGrid solution;
    SolveReport report;
};

using BoundaryFn = std::function<double(const Vec&)>;

/// H_1, H_2 and admissibility at every interior node.
struct NodeCurvature {
    std::size_t node = 0;
    double H1 = 0.0;
    double H2 = 0.0;
    double gradient = 0.0;
    bool admissible = false;
};

inline std::vector<NodeCurvature> grid_curvatures(const GraphGrid& u, double margin = kDefaultAdmissibilityMargin) {
    std::vector<NodeCurvature> out;
    out.reserve(u.interior_nodes().size());
    const int n = u.dim();
    std::array<double, kMaxJetDim * kMaxJetDim> q{};
    for (auto i : u.interior_nodes()) {
        const JetPoint j = u.jet(i);
        NodeCurvature c;
        c.node = i;
        c.gradient = j.p.norm();
        if (c.gradient < 1.0 && j.p.allFinite() && j.q.allFinite()) {
            detail::to_row_major(j.q, q.data());
            c.H1 = detail::curvature_kernel(n, j.p.data(), q.data(), 1, nullptr, nullptr);
            c.H2 = n >= 2 ? detail::curvature_kernel(n, j.p.data(), q.data(), 2, nullptr, nullptr) : 0.0;
            c.admissible = c.H1 > margin && c.H2 > margin;
        } else {
            c.H1 = c.H2 = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(c);
    }
    return out;
}

namespace detail {

class DirichletProblem {
public:
    DirichletProblem(const GraphGrid& grid, int order) : grid_(grid), n_(grid.dim()), m_(order) {
        if (n_ < 2 || n_ > 3) throw DomainError("Dirichlet solves need n = 2 or 3");
        unknown_.assign(grid.size(), -1);
        const auto& in = grid.interior_nodes();
        for (std::size_t k = 0; k < in.size(); ++k) unknown_[in[k]] = static_cast<int>(k);
        width_ = 1 + 2 * n_ + 2 * n_ * (n_ - 1);
        stencil_.resize(in.size() * width_);
        for (std::size_t k = 0; k < in.size(); ++k) {
            const std::size_t i = in[k];
            std::size_t* s = &stencil_[k * width_];
            int c = 0;
            s[c++] = i;
            for (int a = 0; a < n_; ++a) {
                s[c++] = i + grid.stride(a);
                s[c++] = i - grid.stride(a);
            }
            for (int a = 0; a < n_; ++a) {
                for (int b = a + 1; b < n_; ++b) {
                    const std::size_t sa = grid.stride(a), sb = grid.stride(b);
                    s[c++] = i + sa + sb;
                    s[c++] = i + sa - sb;
                    s[c++] = i - sa + sb;
                    s[c++] = i - sa - sb;
                }
            }
        }
    }

    std::size_t unknowns() const { return grid_.interior_nodes().size(); }
    int order() const { return m_; }

    /// Central-difference jet at interior unknown k into (p, q row-major).
    void jet(const std::vector<double>& u, std::size_t k, double* p, double* q) const {
        const std::size_t* s = &stencil_[k * width_];
        const double h = grid_.spacing();
        const double inv2h = 0.5 / h, invh2 = 1.0 / (h * h);
        const double u0 = u[s[0]];
        int c = 1;
        for (int a = 0; a < n_; ++a) {
            const double up = u[s[c]], um = u[s[c + 1]];
            c += 2;
            p[a] = (up - um) * inv2h;
            q[a * n_ + a] = (up - 2.0 * u0 + um) * invh2;
        }
        for (int a = 0; a < n_; ++a) {
            for (int b = a + 1; b < n_; ++b) {
                const double v = (u[s[c]] - u[s[c + 1]] - u[s[c + 2]] + u[s[c + 3]]) * 0.25 * invh2;
                c += 4;
                q[a * n_ + b] = v;
                q[b * n_ + a] = v;
            }
        }
    }

    double max_gradient(const std::vector<double>& u) const {
        double g = 0.0;
        std::array<double, kMaxJetDim> p{};
        std::array<double, kMaxJetDim * kMaxJetDim> q{};
        for (std::size_t k = 0; k < unknowns(); ++k) {
            jet(u, k, p.data(), q.data());
            double s = 0.0;
            for (int a = 0; a < n_; ++a) s += p[a] * p[a];
            g = std::max(g, s);
        }
        return std::sqrt(g);
    }

    /// Curvature H_m at every unknown; false if some jet leaves the cone
    /// used for gating (spacelike for m = 1, Gamma_2 for m = 2).
    bool curvature(const std::vector<double>& u, double margin, std::vector<double>& Hm,
                   double* min_margin = nullptr, bool* maclaurin = nullptr) const {
        Hm.resize(unknowns());
        std::array<double, kMaxJetDim> p{};
        std::array<double, kMaxJetDim * kMaxJetDim> q{};
        double mm = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (std::size_t k = 0; k < unknowns(); ++k) {
            jet(u, k, p.data(), q.data());
            double p2 = 0.0;
            for (int a = 0; a < n_; ++a) p2 += p[a] * p[a];
            if (!(p2 < 1.0)) return false;
            const double h1 = curvature_kernel(n_, p.data(), q.data(), 1, nullptr, nullptr);
            if (m_ == 1) {
                Hm[k] = h1;
                mm = std::min(mm, h1);
                continue;
            }
            const double h2 = curvature_kernel(n_, p.data(), q.data(), 2, nullptr, nullptr);
            Hm[k] = h2;
            if (!(h1 > margin) || !(h2 > margin)) return false;
            if (maclaurin != nullptr && std::sqrt(h2) > h1 * (1.0 + 1e-12)) *maclaurin = false;
            mm = std::min({mm, h1, h2});
        }
        if (min_margin != nullptr) *min_margin = mm;
        return ok;
    }

    /// H_m at every unknown without cone gating; false only if some jet is
    /// not spacelike.
    bool raw_values(const std::vector<double>& u, std::vector<double>& Hm) const {
        Hm.resize(unknowns());
        std::array<double, kMaxJetDim> p{};
        std::array<double, kMaxJetDim * kMaxJetDim> q{};
        for (std::size_t k = 0; k < unknowns(); ++k) {
            jet(u, k, p.data(), q.data());
            double p2 = 0.0;
            for (int a = 0; a < n_; ++a) p2 += p[a] * p[a];
            if (!(p2 < 1.0)) return false;
            Hm[k] = curvature_kernel(n_, p.data(), q.data(), m_, nullptr, nullptr);
        }
        return true;
    }

    /// Jacobian of H_m with respect to the unknowns, plus H_m values.
    void jacobian(const std::vector<double>& u, std::vector<double>& Hm,
                  std::vector<Eigen::Triplet<double>>& trip, const std::vector<double>& row_scale) const {
        trip.clear();
        trip.reserve(unknowns() * width_);
        Hm.resize(unknowns());
        std::array<double, kMaxJetDim> p{}, dp{};
        std::array<double, kMaxJetDim * kMaxJetDim> q{}, dq{};
        const double h = grid_.spacing();
        const double inv2h = 0.5 / h, invh2 = 1.0 / (h * h);
        std::array<double, 32> coef{};
        for (std::size_t k = 0; k < unknowns(); ++k) {
            jet(u, k, p.data(), q.data());
            Hm[k] = curvature_kernel(n_, p.data(), q.data(), m_, dq.data(), dp.data());
            coef.fill(0.0);
            int c = 1;
            double center = 0.0;
            for (int a = 0; a < n_; ++a) {
                const double daa = dq[a * n_ + a] * invh2;
                coef[c] = dp[a] * inv2h + daa;
                coef[c + 1] = -dp[a] * inv2h + daa;
                center -= 2.0 * daa;
                c += 2;
            }
            for (int a = 0; a < n_; ++a) {
                for (int b = a + 1; b < n_; ++b) {
                    const double dab = 2.0 * dq[a * n_ + b] * 0.25 * invh2;
                    coef[c] = dab;
                    coef[c + 1] = -dab;
                    coef[c + 2] = -dab;
                    coef[c + 3] = dab;
                    c += 4;
                }
            }
            coef[0] = center;
            const std::size_t* s = &stencil_[k * width_];
            const double w = row_scale[k];
            for (int e = 0; e < width_; ++e) {
                const int col = unknown_[s[e]];
                if (col < 0) continue;
                trip.emplace_back(static_cast<int>(k), col, w * coef[e]);
            }
        }
    }

    const GraphGrid& grid() const { return grid_; }

private:
    const GraphGrid& grid_;
    int n_;
    int m_;
    int width_;
    std::vector<int> unknown_;
    std::vector<std::size_t> stencil_;
};

class LinearSolver {
public:
    LinearSolver(LinearSolverKind kind, std::size_t unknowns, std::size_t limit) {
        iterative_ = kind == LinearSolverKind::Iterative ||
                     (kind == LinearSolverKind::Auto && unknowns > limit);
    }

    std::string name() const { return iterative_ ? "bicgstab+ilut" : "sparse-lu"; }

    bool solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
        if (iterative_) {
            Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
            it.preconditioner().setDroptol(1e-2);
            it.preconditioner().setFillfactor(3);
            it.setTolerance(1e-11);
            it.setMaxIterations(4000);
            it.compute(A);
            if (it.info() == Eigen::Success) {
                x = it.solve(b);
                if (it.info() == Eigen::Success) return true;
            }
        }
        if (!analyzed_) {
            lu_.analyzePattern(A);
            analyzed_ = true;
        }
        lu_.factorize(A);
        if (lu_.info() != Eigen::Success) return false;
        x = lu_.solve(b);
        return lu_.info() == Eigen::Success && x.allFinite();
    }

private:
    bool iterative_ = false;
    bool analyzed_ = false;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

/// Discrete harmonic function on the interior of `grid` with the given
/// values on the band (indexed like grid.band_nodes()); returned over all
/// nodes, zero outside the mask.
inline std::vector<double> harmonic_extension(const GraphGrid& grid, const std::vector<double>& band_values) {
    const auto& interior = grid.interior_nodes();
    const auto& band = grid.band_nodes();
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t b = 0; b < band.size(); ++b) out[band[b]] = band_values[b];
    bool trivial = true;
    for (double v : band_values) trivial = trivial && v == 0.0;
    if (trivial || interior.empty()) return out;
    std::vector<int> id(grid.size(), -1);
    for (std::size_t k = 0; k < interior.size(); ++k) id[interior[k]] = static_cast<int>(k);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(interior.size()));
    for (std::size_t k = 0; k < interior.size(); ++k) {
        const std::size_t i = interior[k];
        trip.emplace_back(static_cast<int>(k), static_cast<int>(k), 2.0 * grid.dim());
        for (int a = 0; a < grid.dim(); ++a) {
            for (std::size_t j : {i + grid.stride(a), i - grid.stride(a)}) {
                if (id[j] >= 0) {
                    trip.emplace_back(static_cast<int>(k), id[j], -1.0);
                } else {
                    rhs(static_cast<Eigen::Index>(k)) += out[j];
                }
            }
        }
    }
    Eigen::SparseMatrix<double> A(rhs.size(), rhs.size());
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(1e-13);
    cg.compute(A);
    const Eigen::VectorXd x = cg.solve(rhs);
    for (std::size_t k = 0; k < interior.size(); ++k) out[interior[k]] = x(static_cast<Eigen::Index>(k));
    return out;
}

inline double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

/// Solve H_m[u] = H(x, u) on the interior of `grid` with u = boundary on the
/// band, starting from `init` (same geometry, spacelike, and in the cone
/// for m = 2 at its own band data).
inline SolveResult solve_dirichlet(const GraphGrid& grid, int order, const RhsSpec& rhs,
                                   const BoundaryFn& boundary, const GraphGrid& init,
                                   const SolverOptions& opts = {}) {
    if (order != 1 && order != 2) throw DomainError("operator order must be 1 or 2");
    rhs.validate();
    if (!init.same_geometry(grid)) throw DomainError("init grid geometry differs from the solve grid");
    const int n = grid.dim();
    detail::DirichletProblem prob(grid, order);
    const auto& interior = grid.interior_nodes();
    const auto& band = grid.band_nodes();
    const std::size_t N = prob.unknowns();

    SolveReport rep;
    rep.order = order;
    rep.unknowns = N;
    rep.tolerance = opts.tolerance_for(n);

    std::vector<double> u(grid.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> g_band(band.size()), init_band(band.size());
    for (std::size_t b = 0; b < band.size(); ++b) {
        g_band[b] = boundary(grid.coords(band[b]));
        if (!std::isfinite(g_band[b])) throw DomainError("boundary data is not finite at a band node");
        init_band[b] = std::isfinite(init[band[b]]) ? init[band[b]] : g_band[b];
    }
    for (auto i : interior) {
        if (!std::isfinite(init[i])) throw DomainError("init has no value at an interior node");
        u[i] = init[i];
    }
    for (std::size_t b = 0; b < band.size(); ++b) u[band[b]] = init_band[b];

    if (!(prob.max_gradient(u) < 1.0)) throw DomainError("init is not spacelike (discrete |Du| >= 1)");
    std::vector<double> H0;
    if (!prob.curvature(u, opts.admissibility_margin, H0)) {
        throw DomainError(order == 2 ? "init is not admissible (H_1, H_2 > 0 fails at some node)"
                                     : "init is not spacelike");
    }
    if (order == 1) {
        for (double v : H0) {
            if (!(v > 0.0)) throw DomainError("init mean curvature must be positive for the homotopy");
        }
    }

    std::vector<double> u0(N), xval;
    std::vector<Vec> xs(N);
    for (std::size_t k = 0; k < N; ++k) {
        u0[k] = u[interior[k]];
        xs[k] = grid.coords(interior[k]);
    }

    // e^{-k u} weight making z -> H(x, z) e^{-k z} non-increasing
    double kw = 0.0;
    if (!rhs.constant) {
        for (std::size_t i = 0; i < N; ++i) {
            for (double dzs : {0.0, -0.5, -1.0}) {
                const double z = u0[i] + dzs;
                const double hv = rhs(xs[i], z);
                if (!(hv > 0.0)) throw DomainError("right-hand side must be positive");
                kw = std::max(kw, rhs.derivative(xs[i], z) / hv);
            }
        }
    }
    rep.exp_weight = kw;
    std::vector<double> base(N);
    for (std::size_t i = 0; i < N; ++i) base[i] = std::exp(-kw * u0[i]) * H0[i];

    auto set_band = [&](std::vector<double>& v, double t) {
        for (std::size_t b = 0; b < band.size(); ++b) v[band[b]] = (1.0 - t) * init_band[b] + t * g_band[b];
    };

    // weighted residual F_i = e^{-k u_i}(H_m - t H(x_i, u_i)) - (1-t) e^{-k u0_i} H_m[init]_i
    auto residual = [&](const std::vector<double>& Hm, const std::vector<double>& v, double t,
                        Eigen::VectorXd& F, double* target_sup) {
        F.resize(static_cast<Eigen::Index>(N));
        double sup = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ui = v[interior[i]];
            const double w = std::exp(-kw * ui);
            const double hv = rhs(xs[i], ui);
            F(static_cast<Eigen::Index>(i)) = w * (Hm[i] - t * hv) - (1.0 - t) * base[i];
            sup = std::max(sup, std::abs(F(static_cast<Eigen::Index>(i))) / w);
        }
        if (target_sup != nullptr) *target_sup = sup;
    };

    detail::LinearSolver linear(opts.linear, N, opts.direct_limit);
    rep.linear_solver = linear.name();
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    std::vector<double> Hm, Htrial, row_scale(N);
    Eigen::VectorXd F, Ftrial, delta;

    auto fail = [&](const std::string& msg) {
        rep.converged = false;
        rep.message = msg;
        throw NonConvergence(msg, rep);
    };

    // Jacobian of F at (v, t), including the weight and z-dependence of H
    // on the diagonal; also leaves H_m[v] in Hm and F(v, t) in F.
    auto assemble = [&](const std::vector<double>& v, double t) {
        for (std::size_t i = 0; i < N; ++i) row_scale[i] = std::exp(-kw * v[interior[i]]);
        prob.jacobian(v, Hm, trip, row_scale);
        double sup = 0.0;
        residual(Hm, v, t, F, &sup);
        for (auto& tr : trip) {
            if (tr.row() == tr.col()) {
                const std::size_t i = static_cast<std::size_t>(tr.row());
                const double ui = v[interior[i]];
                const double w = row_scale[i];
                const double hv = rhs(xs[i], ui);
                const double extra = -kw * w * Hm[i] - t * w * (rhs.derivative(xs[i], ui) - kw * hv);
                tr = Eigen::Triplet<double>(tr.row(), tr.col(), tr.value() + extra);
            }
        }
        J.setFromTriplets(trip.begin(), trip.end());
        return sup;
    };

    // Newton at fixed t from an admissible v; false if the line search hits
    // the floor or the iteration budget runs out.
    auto newton = [&](double t, double tol, std::vector<double>& v, std::string& why) {
        for (int it = 0; it < opts.max_newton; ++it) {
            const double sup = assemble(v, t);
            if (sup <= tol) return true;
            if (!linear.solve(J, -F, delta)) {
                why = "linear solve failed";
                return false;
            }
            const double fnorm = F.norm();
            const double gcap = std::max(1.0 - opts.theta_min, prob.max_gradient(v));
            double lambda = 1.0;
            std::vector<double> trial = v;
            for (;;) {
                for (std::size_t i = 0; i < N; ++i) trial[interior[i]] = v[interior[i]] + lambda * delta(static_cast<Eigen::Index>(i));
                bool ok = prob.max_gradient(trial) <= gcap;
                if (ok) ok = prob.curvature(trial, opts.admissibility_margin, Htrial);
                if (ok) {
                    residual(Htrial, trial, t, Ftrial, nullptr);
                    ok = Ftrial.norm() < (1.0 - 1e-4 * lambda) * fnorm;
                }
                if (ok) break;
                lambda *= 0.5;
                if (lambda < opts.step_floor) {
                    why = "line search reached the step floor at t = " + std::to_string(t);
                    return false;
                }
            }
            v.swap(trial);
            ++rep.newton_iterations;
            double sup_after = 0.0;
            residual(Htrial, v, t, Ftrial, &sup_after);
            rep.residual_history.push_back(sup_after);
            rep.damping_history.push_back(lambda);
            rep.homotopy_history.push_back(t);
            if (sup_after <= tol) return true;
        }
        why = "Newton iteration limit reached at t = " + std::to_string(t);
        return false;
    };

    std::vector<double> band_gap(band.size());
    for (std::size_t b = 0; b < band.size(); ++b) band_gap[b] = g_band[b] - init_band[b];
    const std::vector<double> ext = detail::harmonic_extension(grid, band_gap);

    // Moves v from t_from to t_to: band update carried into the interior by
    // the harmonic extension, then one linearized step with the Jacobian at
    // t_from.
    // False if neither the predicted nor the plain update is admissible.
    std::vector<double> Hraw;
    auto advance = [&](std::vector<double>& v, double t_from, double t_to) {
        assemble(v, t_from);
        std::vector<double> plain = v;
        for (std::size_t i = 0; i < N; ++i) plain[interior[i]] += (t_to - t_from) * ext[interior[i]];
        set_band(plain, t_to);
        std::vector<double> predicted = plain;
        if (prob.raw_values(plain, Hraw)) {
            residual(Hraw, plain, t_to, Ftrial, nullptr);
            if (linear.solve(J, -Ftrial, delta)) {
                for (std::size_t i = 0; i < N; ++i) predicted[interior[i]] += delta(static_cast<Eigen::Index>(i));
                if (prob.max_gradient(predicted) < 1.0 &&
                    prob.curvature(predicted, opts.admissibility_margin, Htrial)) {
                    v.swap(predicted);
                    return true;
                }
            }
        }
        if (prob.max_gradient(plain) < 1.0 && prob.curvature(plain, opts.admissibility_margin, Htrial)) {
            v.swap(plain);
            return true;
        }
        return false;
    };

    // the predicted state counts as an accepted iterate
    auto record = [&](const std::vector<double>& v, double t) {
        double sup = 0.0;
        residual(Htrial, v, t, Ftrial, &sup);
        rep.residual_history.push_back(sup);
        rep.damping_history.push_back(1.0);
        rep.homotopy_history.push_back(t);
        return true;
    };

    const double final_tol = rep.tolerance;
    const double mid_tol = std::max(final_tol, opts.intermediate_tol);
    const int steps = std::max(1, opts.homotopy_steps);
    double t_done = 0.0;
    double dt = 1.0 / steps;
    int refinements = 0;
    int attempts = 0;
    while (t_done < 1.0) {
        if (++attempts > opts.max_homotopy_steps) {
            fail("homotopy step budget exhausted at t = " + std::to_string(t_done));
        }
        const double t = std::min(1.0, t_done + dt);
        const bool last = t >= 1.0 - 1e-15;
        const double t_to = last ? 1.0 : t;
        std::vector<double> v = u;
        std::string why = "boundary update left the admissible set at t = " + std::to_string(t_to);
        const int before = rep.newton_iterations;
        if (advance(v, t_done, t_to) && record(v, t_to) && newton(t_to, last ? final_tol : mid_tol, v, why)) {
            u.swap(v);
            t_done = t_to;
            if (rep.newton_iterations - before <= 3) dt = std::min(2.0 * dt, 1.0 / steps);
            refinements = 0;
            continue;
        }
        if (++refinements > opts.max_step_refinements) fail(why);
        dt *= 0.5;
    }

    GraphGrid out = grid;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i];
    for (std::size_t b = 0; b < band.size(); ++b) out[band[b]] = g_band[b];

    double margin = 0.0;
    bool maclaurin = true;
    std::vector<double> Hfinal;
    prob.curvature(u, opts.admissibility_margin, Hfinal, &margin, &maclaurin);
    Eigen::VectorXd Ff;
    double sup = 0.0;
    residual(Hfinal, u, 1.0, Ff, &sup);
    rep.final_residual = sup;
    rep.admissibility_margin = margin;
    rep.maclaurin_ok = maclaurin;
    rep.gradient_bound = prob.max_gradient(u);
    rep.converged = sup <= final_tol;
    rep.message = rep.converged ? "converged" : "residual above tolerance";
    if (!rep.converged) throw NonConvergence("final residual above tolerance", rep);
    return SolveResult{std::move(out), std::move(rep)};
}

/// sqrt(a^2 + |x|^2) + shift on every masked node.
inline GraphGrid hyperboloid_graph(const GraphGrid& geometry, double a, double shift = 0.0) {
    GraphGrid g = geometry;
    g.fill_masked([&](const Vec& x) { return std::sqrt(a * a + x.squaredNorm()) + shift; });
    return g;
}

/// Hyperboloid with parameter a shifted to match the mean of the boundary
/// data over the band; a convenient admissible seed.
inline GraphGrid seed_hyperboloid(const GraphGrid& geometry, double a, const BoundaryFn& boundary) {
    double s = 0.0;
    for (auto b : geometry.band_nodes()) {
        const Vec x = geometry.coords(b);
        s += boundary(x) - std::sqrt(a * a + x.squaredNorm());
    }
    s /= std::max<std::size_t>(1, geometry.band_nodes().size());
    return hyperboloid_graph(geometry, a, s);
}

inline SolveResult solve_sigma2(const GraphGrid& grid, const RhsSpec& rhs, const BoundaryFn& boundary,
                                const GraphGrid& init, const SolverOptions& opts = {}) {
    return solve_dirichlet(grid, 2, rhs, boundary, init, opts);
}

inline SolveResult solve_sigma2(const GraphGrid& grid, const RhsSpec& rhs, const BoundaryFn& boundary,
                                const SolverOptions& opts = {}) {
    rhs.validate();
    const double a = 1.0 / std::sqrt(rhs.h1);
    return solve_dirichlet(grid, 2, rhs, boundary, seed_hyperboloid(grid, a, boundary), opts);
}

inline SolveResult solve_cmc(const GraphGrid& grid, double c, const BoundaryFn& boundary,
                             const GraphGrid& init, const SolverOptions& opts = {}) {
    return solve_dirichlet(grid, 1, RhsSpec::constant_value(c), boundary, init, opts);
}

inline SolveResult solve_cmc(const GraphGrid& grid, double c, const BoundaryFn& boundary,
                             const SolverOptions& opts = {}) {
    if (!(c > 0.0)) throw DomainError("mean curvature must be positive");
    return solve_cmc(grid, c, boundary, seed_hyperboloid(grid, 1.0 / c, boundary), opts);
}

/// Node-wise lower - tol <= u <= upper + tol over the interior and band of
/// u. Barrier grids must share the spacing of u and cover its nodes.
inline bool check_between_barriers(const GraphGrid& u, const GraphGrid& lower, const GraphGrid& upper,
                                   double tol = 1e-9) {
    auto check = [&](std::size_t i) {
        const Lattice l = u.lattice(i);
        const auto lo = lower.value_at_lattice(l);
        const auto up = upper.value_at_lattice(l);
        if (!lo || !up) throw DomainError("barrier grids do not cover the solution grid");
        return *lo - tol <= u[i] && u[i] <= *up + tol;
    };
    if (std::abs(lower.spacing() - u.spacing()) > 1e-14 * u.spacing() ||
        std::abs(upper.spacing() - u.spacing()) > 1e-14 * u.spacing()) {
        throw DomainError("barrier grids must share the solution spacing");
    }
    for (auto i : u.interior_nodes()) {
        if (!check(i)) return false;
    }
    for (auto i : u.band_nodes()) {
        if (!check(i)) return false;
    }
    return true;
}

}  // namespace minkcsc
