#pragma once

// Future regular domains {x_{n+1} > V_phi(x)} with
// V_phi(x) = sup_{y in F} <x, y> - phi(y).

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "minkcsc/curvature.hpp"
#include "minkcsc/errors.hpp"
#include "minkcsc/graph_grid.hpp"

namespace minkcsc {

struct SupportPoint {
    Vec y;
    double phi = 0.0;
};

/// Continuous phi on the whole sphere, sampled on a direction grid.
struct DenseSampler {
    std::function<double(const Vec&)> phi;
    double resolution_deg = 1.0;
    std::string kind = "custom";  // "constant" when built by constant()
    double value = 0.0;           // the constant when kind == "constant"

    static DenseSampler constant(double c, double resolution_deg = 1.0) {
        return DenseSampler{[c](const Vec&) { return c; }, resolution_deg, "constant", c};
    }
};

/// Sample directions on S^{n-1}: uniform angles for n = 2, a Fibonacci
/// lattice with matching density for n = 3.
inline std::vector<Vec> sphere_directions(int n, double resolution_deg) {
    if (!(resolution_deg > 0.0)) throw DomainError("sampler resolution must be positive");
    std::vector<Vec> dirs;
    const double step = resolution_deg * std::numbers::pi / 180.0;
    if (n == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        dirs.push_back(Vec::Constant(1, -1.0));
    } else if (n == 2) {
        const int m = std::max(3, static_cast<int>(std::lround(2.0 * std::numbers::pi / step)));
        for (int i = 0; i < m; ++i) {
            const double a = 2.0 * std::numbers::pi * i / m;
            Vec y(2);
            y << std::cos(a), std::sin(a);
            dirs.push_back(y);
        }
    } else if (n == 3) {
        const int m = std::max(12, static_cast<int>(std::lround(4.0 * std::numbers::pi / (step * step))));
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < m; ++i) {
            const double z = 1.0 - (2.0 * i + 1.0) / m;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = golden * i;
            Vec y(3);
            y << r * std::cos(a), r * std::sin(a), z;
            dirs.push_back(y);
        }
    } else {
        throw DomainError("dense samplers are available for n = 1, 2, 3 only");
    }
    return dirs;
}

class SphericalSupport {
public:
    SphericalSupport() = default;
    SphericalSupport(int n, std::vector<SupportPoint> points, std::optional<DenseSampler> dense = std::nullopt)
        : n_(n), points_(std::move(points)), dense_(std::move(dense)) {
        if (n_ < 1) throw DomainError("support dimension must be positive");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const auto& p = points_[i];
            if (p.y.size() != n_) {
                throw DomainError("support point " + std::to_string(i) + " has wrong dimension");
            }
            if (std::abs(p.y.norm() - 1.0) > 1e-12) {
                throw DomainError("support point " + std::to_string(i) + " is not a unit vector");
            }
            if (!std::isfinite(p.phi)) {
                throw DomainError("support point " + std::to_string(i) + " has non-finite phi");
            }
        }
        if (dense_) dense_dirs_ = sphere_directions(n_, dense_->resolution_deg);
    }

    /// phi identically c on the whole sphere (the cone |x| - c for c = 0).
    static SphericalSupport constant(int n, double c, double resolution_deg = 1.0) {
        return SphericalSupport(n, {}, DenseSampler::constant(c, resolution_deg));
    }

    int dim() const { return n_; }
    const std::vector<SupportPoint>& points() const { return points_; }
    const std::optional<DenseSampler>& dense() const { return dense_; }
    const std::vector<Vec>& dense_directions() const { return dense_dirs_; }
    bool empty() const { return points_.empty() && !dense_; }

private:
    int n_ = 0;
    std::vector<SupportPoint> points_;
    std::optional<DenseSampler> dense_;
    std::vector<Vec> dense_dirs_;
};

enum class DomainKind { Wedge, Splits, NonSplitting };

inline const char* to_string(DomainKind k) {
    switch (k) {
        case DomainKind::Wedge: return "wedge";
        case DomainKind::Splits: return "splits";
        case DomainKind::NonSplitting: return "non-splitting";
    }
    return "?";
}

/// Minimal affine subspace A = a0 + span(V) containing F, for splitting domains.
struct Classification {
    DomainKind kind = DomainKind::NonSplitting;
    int affine_dim = 0;
    Vec a0;
    Mat basis;  // n x affine_dim, orthonormal columns
};

inline constexpr double kAffineRankTol = 1e-10;

inline Classification classify_support(const SphericalSupport& s) {
    const int n = s.dim();
    const auto& pts = s.points();
    if (!s.dense() && pts.size() < 2) {
        throw DomainError("classification needs at least 2 support points");
    }
    Classification c;
    c.affine_dim = n;
    c.a0 = Vec::Zero(n);
    c.basis = Mat::Identity(n, n);
    if (s.dense()) return c;

    Vec mean = Vec::Zero(n);
    for (const auto& p : pts) mean += p.y;
    mean /= static_cast<double>(pts.size());
    Mat centered(n, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) centered.col(static_cast<Eigen::Index>(i)) = pts[i].y - mean;
    Eigen::JacobiSVD<Mat> svd(centered, Eigen::ComputeFullU);
    const Vec sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > kAffineRankTol ? 1 : 0;

    if (rank >= n) return c;
    c.affine_dim = rank;
    c.basis = svd.matrixU().leftCols(rank);
    c.a0 = mean - c.basis * (c.basis.transpose() * mean);
    c.kind = pts.size() == 2 ? DomainKind::Wedge : DomainKind::Splits;
    return c;
}

class RegularDomain {
public:
    RegularDomain() = default;
    explicit RegularDomain(SphericalSupport support) : support_(std::move(support)) {
        if (support_.empty()) throw DomainError("regular domain needs a non-empty support");
        cls_ = classify_support(support_);
    }

    const SphericalSupport& support() const { return support_; }
    const Classification& classification() const { return cls_; }
    int dim() const { return support_.dim(); }

private:
    SphericalSupport support_;
    Classification cls_;
};

inline Classification classify(const RegularDomain& d) { return classify_support(d.support()); }

namespace detail {

inline Vec angle_dir(double a) {
    Vec y(2);
    y << std::cos(a), std::sin(a);
    return y;
}

/// Local refinement of the dense sup around the best sampled direction.
inline double refine_dense(const DenseSampler& s, const Vec& x, const Vec& y0, double best) {
    const int n = static_cast<int>(x.size());
    const double step = s.resolution_deg * std::numbers::pi / 180.0;
    auto f = [&](const Vec& y) { return x.dot(y) - s.phi(y); };
    if (n == 2) {
        const double a0 = std::atan2(y0(1), y0(0));
        double lo = a0 - step, hi = a0 + step;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
        double fc = f(angle_dir(c)), fd = f(angle_dir(d));
        for (int it = 0; it < 60; ++it) {
            if (fc > fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - g * (hi - lo);
                fc = f(angle_dir(c));
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + g * (hi - lo);
                fd = f(angle_dir(d));
            }
        }
        return std::max({best, fc, fd});
    }
    if (n == 3) {
        // compass search on the tangent plane, projected back to the sphere
        Vec y = y0;
        Vec t1 = (std::abs(y(0)) < 0.9 ? Vec::Unit(3, 0) : Vec::Unit(3, 1));
        double delta = step;
        double fy = best;
        for (int it = 0; it < 60 && delta > 1e-12; ++it) {
            Vec e1 = (t1 - t1.dot(y) * y).normalized();
            const Eigen::Vector3d y3 = y, e13 = e1;
            Vec e2 = y3.cross(e13);
            bool improved = false;
            for (const Vec& e : {e1, Vec(-e1), e2, Vec(-e2)}) {
                Vec cand = (y + delta * e).normalized();
                const double fc = f(cand);
                if (fc > fy) {
                    y = cand;
                    fy = fc;
                    improved = true;
                    break;
                }
            }
            if (!improved) delta *= 0.5;
        }
        return std::max(best, fy);
    }
    return best;
}

}  // namespace detail

struct SupportArgmax {
    double value = -std::numeric_limits<double>::infinity();
    Vec y;
    double phi = 0.0;
};

/// Maximizing support direction of V_phi at x over the finite points and
/// the dense sample grid (without local refinement).
inline SupportArgmax support_argmax(const SphericalSupport& s, const Vec& x) {
    if (s.empty()) throw DomainError("V_phi of an empty support");
    if (x.size() != s.dim()) throw DomainError("point dimension does not match the support");
    SupportArgmax best;
    for (const auto& p : s.points()) {
        const double v = x.dot(p.y) - p.phi;
        if (v > best.value) best = SupportArgmax{v, p.y, p.phi};
    }
    if (s.dense()) {
        for (const auto& y : s.dense_directions()) {
            const double ph = s.dense()->phi(y);
            const double v = x.dot(y) - ph;
            if (v > best.value) best = SupportArgmax{v, y, ph};
        }
    }
    return best;
}

inline double eval_Vphi(const SphericalSupport& s, const Vec& x) {
    if (s.empty()) throw DomainError("V_phi of an empty support");
    if (x.size() != s.dim()) throw DomainError("point dimension does not match the support");
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& p : s.points()) v = std::max(v, x.dot(p.y) - p.phi);
    if (s.dense()) {
        double best = -std::numeric_limits<double>::infinity();
        const Vec* arg = nullptr;
        for (const auto& y : s.dense_directions()) {
            const double val = x.dot(y) - s.dense()->phi(y);
            if (val > best) {
                best = val;
                arg = &y;
            }
        }
        v = std::max(v, detail::refine_dense(*s.dense(), x, *arg, best));
    }
    return v;
}

inline double eval_Vphi(const RegularDomain& d, const Vec& x) { return eval_Vphi(d.support(), x); }

/// Result of reading phi(y) back from a sampled graph.
struct PhiRecovery {
    double value = 0.0;              // sup over all nodes of <x,y> - u(x)
    bool divergent = false;          // running sup grows linearly in the radius
    double slope = 0.0;              // growth rate between R/2 and R
    std::vector<double> radii;       // radii of the running sup
    std::vector<double> running_sup; // sup over |x| <= radii[i]
    bool monotone = true;            // running_sup non-decreasing
};

inline constexpr double kDivergenceSlope = 1e-3;

inline PhiRecovery recover_phi(const GraphGrid& u, const Vec& y) {
    if (y.size() != u.dim()) throw DomainError("direction dimension does not match the grid");
    PhiRecovery r;
    const int steps = 16;
    std::vector<std::pair<double, double>> samples;  // (|x|, <x,y> - u)
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u.role(i) == NodeRole::Outside || !std::isfinite(u[i])) continue;
        const Vec x = u.coords(i);
        samples.emplace_back(x.norm(), x.dot(y) - u[i]);
    }
    if (samples.empty()) throw DomainError("recover_phi: grid holds no values");
    std::sort(samples.begin(), samples.end());
    const double R = samples.back().first;
    double running = -std::numeric_limits<double>::infinity();
    std::size_t cursor = 0;
    for (int s = 1; s <= steps; ++s) {
        const double rad = R * s / steps;
        while (cursor < samples.size() && samples[cursor].first <= rad * (1 + 1e-14)) {
            running = std::max(running, samples[cursor].second);
            ++cursor;
        }
        if (!r.running_sup.empty() && running < r.running_sup.back()) r.monotone = false;
        r.radii.push_back(rad);
        r.running_sup.push_back(running);
    }
    r.value = r.running_sup.back();
    const double half = r.running_sup[steps / 2 - 1];
    r.slope = (r.value - half) / (0.5 * R);
    r.divergent = r.slope > kDivergenceSlope;
    return r;
}

/// Cosmological time of (x, t): sup over xi in the past cone of the
/// Lorentzian distance sqrt((t - V(xi))^2 - |x - xi|^2), searched on a
/// coarse grid then refined by compass ascent. Approximates from below.
namespace detail {

/// Exact cosmological time for a finite support: the past realizing point
/// lies on a stratum where at least two support planes meet, and on each
/// stratum the squared Lorentzian distance is a concave quadratic.
inline double cosmological_time_finite(const std::vector<SupportPoint>& pts, const Vec& x, double t, double vx) {
    const int n = static_cast<int>(x.size());
    const int m = static_cast<int>(pts.size());
    double best = t - vx;
    std::vector<int> S;
    auto evaluate = [&]() {
        const int s = static_cast<int>(S.size());
        const Vec& y0 = pts[S[0]].y;
        const double p0 = pts[S[0]].phi;
        Mat D(s - 1, n);
        Vec rhs(s - 1);
        for (int i = 1; i < s; ++i) {
            D.row(i - 1) = (pts[S[i]].y - y0).transpose();
            rhs(i - 1) = pts[S[i]].phi - p0;
        }
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(D);
        if (cod.rank() < s - 1) return;
        const Vec xi0 = cod.solve(rhs);
        Mat N(n, 0);
        if (s - 1 < n) {
            const Mat K = Eigen::FullPivLU<Mat>(D).kernel();
            N = Eigen::HouseholderQR<Mat>(K).householderQ() * Mat::Identity(n, K.cols());
        }
        const double c = t - xi0.dot(y0) + p0;
        const Vec d = x - xi0;
        Vec xi = xi0;
        if (N.cols() > 0) {
            const Vec b = N.transpose() * y0;
            const Mat A = Mat::Identity(N.cols(), N.cols()) - b * b.transpose();
            const Vec z = A.ldlt().solve(N.transpose() * d - c * b);
            xi = xi0 + N * z;
        }
        const double lap = t - (xi.dot(y0) - p0);
        double vxi = -std::numeric_limits<double>::infinity();
        for (const auto& p : pts) vxi = std::max(vxi, xi.dot(p.y) - p.phi);
        if (vxi > xi.dot(y0) - p0 + 1e-10 * (1.0 + xi.norm())) return;
        const double dist2 = (x - xi).squaredNorm();
        if (lap > 0.0 && lap * lap > dist2) best = std::max(best, std::sqrt(lap * lap - dist2));
    };
    auto recurse = [&](auto&& self, int start) -> void {
        if (S.size() >= 2) evaluate();
        if (static_cast<int>(S.size()) == n + 1) return;
        for (int i = start; i < m; ++i) {
            S.push_back(i);
            self(self, i + 1);
            S.pop_back();
        }
    };
    recurse(recurse, 0);
    return best;
}

}  // namespace detail

inline constexpr std::size_t kExactCosmologicalTimeMaxPoints = 16;

inline double cosmological_time(const RegularDomain& d, const Vec& x, double t, int grid_per_axis = 0) {
    const int n = d.dim();
    if (x.size() != n) throw DomainError("point dimension does not match the domain");
    const auto& sup = d.support();
    if (sup.dense() && sup.points().empty() && sup.dense()->kind == "constant") {
        const double c = sup.dense()->value;
        if (!(t > x.norm() - c)) throw DomainError("cosmological_time: point lies outside the domain (t <= V_phi(x))");
        return std::sqrt((t + c) * (t + c) - x.squaredNorm());
    }
    const double vx = eval_Vphi(d, x);
    if (!(t > vx)) throw DomainError("cosmological_time: point lies outside the domain (t <= V_phi(x))");
    if (!sup.dense() && sup.points().size() <= kExactCosmologicalTimeMaxPoints) {
        return detail::cosmological_time_finite(sup.points(), x, t, vx);
    }
    auto objective = [&](const Vec& xi) {
        const double lap = t - eval_Vphi(d, xi);
        const double dist2 = (x - xi).squaredNorm();
        if (lap <= 0.0 || dist2 >= lap * lap) return -1.0;
        return std::sqrt(lap * lap - dist2);
    };
    if (grid_per_axis <= 0) grid_per_axis = n <= 2 ? 41 : 15;

    Vec best = x;
    double fbest = t - vx;
    double rho = t - vx;
    for (int expand = 0; expand < 8; ++expand) {
        bool edge = false;
        const int m = grid_per_axis;
        std::size_t total = 1;
        for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(m);
        Vec xi(n);
        for (std::size_t id = 0; id < total; ++id) {
            std::size_t rem = id;
            for (int a = 0; a < n; ++a) {
                const int k = static_cast<int>(rem % m);
                rem /= m;
                xi(a) = x(a) + rho * (2.0 * k / (m - 1) - 1.0);
            }
            const double f = objective(xi);
            if (f > fbest) {
                fbest = f;
                best = xi;
                edge = (xi - x).cwiseAbs().maxCoeff() > 0.8 * rho;
            }
        }
        if (!edge) break;
        rho *= 2.0;
    }

    double delta = 2.0 * rho / (grid_per_axis - 1);
    for (int halving = 0; halving < 40; ++halving) {
        bool improved = true;
        int guard = 0;
        while (improved && guard++ < 200) {
            improved = false;
            for (int a = 0; a < n; ++a) {
                for (double sgn : {1.0, -1.0}) {
                    Vec cand = best;
                    cand(a) += sgn * delta;
                    const double f = objective(cand);
                    if (f > fbest) {
                        fbest = f;
                        best = cand;
                        improved = true;
                    }
                }
            }
        }
        delta *= 0.5;
    }
    return std::max(fbest, t - vx);
}

/// Height t above x with cosmological time exactly tau.
inline double cosmological_level(const RegularDomain& d, const Vec& x, double tau) {
    if (!(tau > 0.0)) throw DomainError("cosmological level needs tau > 0");
    const auto& sup = d.support();
    if (sup.dense() && sup.points().empty() && sup.dense()->kind == "constant") {
        return std::sqrt(tau * tau + x.squaredNorm()) - sup.dense()->value;
    }
    const double vx = eval_Vphi(d, x);
    auto f = [&](double t) { return cosmological_time(d, x, t) - tau; };
    double lo = vx + 1e-12 * (1.0 + std::abs(vx)), hi = vx + tau;
    const double fhi = f(hi);
    if (fhi <= 0.0) return hi;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, f(lo), fhi,
                                                     boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
}

/// Evaluator returning nullopt outside its domain of definition.
using GraphEvaluator = std::function<std::optional<double>(const Vec&)>;

struct NullRayHit {
    std::optional<Vec> point;  // (x, x_{n+1}) in R^{n+1}
    double parameter = 0.0;
    int iterations = 0;
    std::string diagnostic;
};

/// First intersection of the future null ray s -> (x0 + s v, y0 + s), s >= 0,
/// with the graph of u. F(s) = y0 + s - u(x0 + s v) is increasing when u is
/// spacelike, so a sign change is bracketed by doubling and then resolved
/// by safeguarded Newton steps.
inline NullRayHit intersect_null_ray(const GraphEvaluator& u, const Vec& point, const Vec& v,
                                     double tol = 1e-13) {
    const auto n = v.size();
    if (point.size() != n + 1) throw DomainError("spacetime point must have n + 1 coordinates");
    if (std::abs(v.norm() - 1.0) > 1e-12) throw DomainError("ray direction must be a unit vector");
    const Vec x0 = point.head(n);
    const double y0 = point(n);
    NullRayHit hit;
    auto F = [&](double s) -> std::optional<double> {
        const auto val = u(x0 + s * v);
        if (!val) return std::nullopt;
        return y0 + s - *val;
    };
    const auto f0 = F(0.0);
    if (!f0) {
        hit.diagnostic = "start point outside the graph domain";
        return hit;
    }
    if (*f0 > 0.0) {
        hit.diagnostic = "start point lies above the graph; no forward crossing";
        return hit;
    }
    auto finish = [&](double s) {
        Vec out(n + 1);
        out.head(n) = x0 + s * v;
        out(n) = y0 + s;
        hit.point = out;
        hit.parameter = s;
    };
    if (*f0 == 0.0) {
        finish(0.0);
        hit.diagnostic = "start point on the graph";
        return hit;
    }
    double lo = 0.0, flo = *f0;
    double hi = std::max(1.0, -*f0);
    std::optional<double> fhi;
    for (;;) {
        fhi = F(hi);
        if (!fhi) {
            // shrink toward the edge of the domain before giving up
            double a = lo, b = hi;
            for (int k = 0; k < 60; ++k) {
                const double mid = 0.5 * (a + b);
                const auto fm = F(mid);
                if (fm) {
                    a = mid;
                    if (*fm >= 0.0) {
                        hi = mid;
                        fhi = fm;
                        break;
                    }
                    lo = mid;
                    flo = *fm;
                } else {
                    b = mid;
                }
            }
            if (!fhi) {
                hit.diagnostic = "ray leaves the graph domain before crossing (F = " +
                                 std::to_string(flo) + " at the exit)";
                return hit;
            }
            break;
        }
        if (*fhi >= 0.0) break;
        lo = hi;
        flo = *fhi;
        hi *= 2.0;
        if (hi > 1e12) {
            hit.diagnostic = "no crossing found up to parameter 1e12";
            return hit;
        }
    }
    double s = lo - flo * (hi - lo) / (*fhi - flo);
    for (int it = 0; it < 200; ++it) {
        hit.iterations = it + 1;
        const auto fs = F(s);
        if (!fs) break;
        if (std::abs(*fs) <= tol || hi - lo <= tol * (1.0 + std::abs(s))) {
            finish(s);
            hit.diagnostic = "converged";
            return hit;
        }
        if (*fs < 0.0) {
            lo = s;
            flo = *fs;
        } else {
            hi = s;
            fhi = *fs;
        }
        const double e = 1e-7 * (1.0 + std::abs(s));
        const auto fp = F(s + e);
        const auto fm = F(s - e);
        double next = 0.5 * (lo + hi);
        if (fp && fm) {
            const double df = (*fp - *fm) / (2.0 * e);
            if (df > 0.0) {
                const double newton = s - *fs / df;
                if (newton > lo && newton < hi) next = newton;
            }
        }
        s = next;
    }
    finish(s);
    hit.diagnostic = "bracket resolved to tolerance";
    return hit;
}

inline NullRayHit intersect_null_ray(const GraphGrid& u, const Vec& point, const Vec& v) {
    GraphEvaluator eval = [&u](const Vec& x) -> std::optional<double> {
        if (x.norm() > u.radius()) return std::nullopt;
        return u.interpolate(x);
    };
    return intersect_null_ray(eval, point, v);
}

}  // namespace minkcsc
