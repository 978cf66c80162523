#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minkcsc/dirichlet.hpp"
#include "minkcsc/errors.hpp"
#include "minkcsc/graph_grid.hpp"
#include "minkcsc/regular_domain.hpp"

namespace minkcsc {

/// Finite points plus the dense sample directions (with their phi values).
inline std::vector<SupportPoint> support_sample(const SphericalSupport& s) {
    std::vector<SupportPoint> out = s.points();
    if (s.dense()) {
        for (const auto& y : s.dense_directions()) out.push_back({y, s.dense()->phi(y)});
    }
    return out;
}

/// A regular domain whose support spans an affine k-plane is a boosted
/// product of a k-dimensional regular domain with R^{n-k}. The boost has
/// velocity beta along e, the unit normal of the plane's offset.
struct BoostedSlice {
    int n = 0;
    int k = 0;
    Mat basis;  // n x k, orthonormal directions of the affine plane
    Vec e;      // unit offset direction (zero when beta == 0)
    double beta = 0.0;
    double gamma = 1.0;
    SphericalSupport slice;  // support of the k-dimensional domain

    Vec project(const Vec& x) const { return basis.transpose() * x; }

    /// Height of the full graph at x given the slice graph value w(project(x)).
    double lift(const Vec& x, double w) const { return beta * x.dot(e) + w / gamma; }

    /// Value of the slice right-hand side reproducing H_2 = c in dimension n
    /// for the product with R^{n-k}.
    double slice_sigma2_rhs(double c) const {
        if (k < 2) throw DomainError("a one-dimensional slice carries no admissible H_2 solution");
        return c * n * (n - 1.0) / (k * (k - 1.0));
    }

    double slice_cmc_rhs(double c) const { return c * n / static_cast<double>(k); }
};

/// Slice of the finite support `pts` whose affine hull has dimension k and
/// direction space spanned by the columns of `dirs` (n x k).
inline BoostedSlice make_slice(const std::vector<SupportPoint>& pts, const Mat& dirs) {
    if (pts.empty()) throw DomainError("slice of an empty support");
    BoostedSlice s;
    s.n = static_cast<int>(pts.front().y.size());
    s.k = static_cast<int>(dirs.cols());
    if (s.k == s.n) {
        s.basis = Mat::Identity(s.n, s.n);
    } else {
        Eigen::HouseholderQR<Mat> qr(dirs);
        s.basis = qr.householderQ() * Mat::Identity(s.n, s.k);
    }
    const Vec c0 = pts.front().y - s.basis * (s.basis.transpose() * pts.front().y);
    s.beta = c0.norm();
    if (!(s.beta < 1.0 - 1e-12)) throw DomainError("support plane does not cross the open ball");
    s.e = s.beta > 1e-14 ? Vec(c0 / s.beta) : Vec(Vec::Zero(s.n));
    if (s.beta <= 1e-14) s.beta = 0.0;
    s.gamma = 1.0 / std::sqrt(1.0 - s.beta * s.beta);
    std::vector<SupportPoint> sp;
    for (const auto& p : pts) sp.push_back({(s.basis.transpose() * p.y).normalized(), s.gamma * p.phi});
    s.slice = SphericalSupport(s.k, std::move(sp));
    return s;
}

/// Product slice of a splitting domain from its classification.
inline BoostedSlice product_slice(const RegularDomain& d) {
    const auto& c = d.classification();
    if (c.kind == DomainKind::NonSplitting) throw DomainError("domain does not split");
    return make_slice(d.support().points(), c.basis);
}

inline double triple_support_function(const std::array<SupportPoint, 3>& T, const Vec& x) {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& p : T) v = std::max(v, x.dot(p.y) - p.phi);
    return v;
}

/// Entire-surface approximation attached to three support points: a 2D
/// constant Gauss curvature graph over the boosted slice, extended by
/// product and boosted back.
struct TripleSurface {
    std::array<SupportPoint, 3> triple;
    BoostedSlice slice;
    GraphGrid surface;       // slice graph w on a 2D ball
    double slice_rhs = 0.0;  // lambda_1 lambda_2 of the slice surface
    SolveReport report;

    std::optional<double> value(const Vec& x) const {
        const auto w = surface.interpolate(slice.project(x));
        if (!w) return std::nullopt;
        return slice.lift(x, *w);
    }
};

struct BarrierOptions {
    SolverOptions solver;
    std::size_t max_triples = 12;  // greedy selection above this many support points
    double strict_factor = 0.95;   // alpha = factor * sqrt(h0) when h0 == h1
    double padding = 0.25;         // upper solve runs on a ball of radius (1 + padding) R
    double lower_level = 0.8;      // triple rim data sits on the level T = lower_level / sqrt(rhs)
};

/// Same lattice on a ball enlarged by the relative padding.
inline GraphGrid padded_geometry(const GraphGrid& g, double padding) {
    if (!(padding >= 0.0)) throw DomainError("padding must be non-negative");
    return GraphGrid(g.dim(), g.radius() * (1.0 + padding), g.spacing());
}

/// Values of `src` on the masked nodes of `geometry` (same spacing).
inline GraphGrid restrict_to(const GraphGrid& src, const GraphGrid& geometry) {
    GraphGrid g = geometry;
    g.transfer_from(src);
    for (auto i : g.interior_nodes())
        if (!std::isfinite(g[i])) throw DomainError("source grid does not cover the target grid");
    for (auto i : g.band_nodes())
        if (!std::isfinite(g[i])) throw DomainError("source grid does not cover the target grid");
    return g;
}

inline double upper_barrier_alpha(double h0, double h1, double strict_factor = 0.95) {
    if (!(h0 > 0.0) || !(h0 <= h1)) throw DomainError("barrier bounds need 0 < h0 <= h1");
    return h0 == h1 ? strict_factor * std::sqrt(h0) : std::sqrt(h0);
}

/// Level set {T = tau} of the cosmological time as a graph over R^n.
inline BoundaryFn cosmological_boundary(const RegularDomain& d, double tau) {
    return [d, tau](const Vec& x) { return cosmological_level(d, x, tau); };
}

/// Node count with positive-definite discrete Hessian fails.
inline std::size_t convexity_violations(const GraphGrid& u) {
    std::size_t bad = 0;
    for (auto i : u.interior_nodes()) {
        const Mat q = u.jet(i).q;
        Eigen::SelfAdjointEigenSolver<Mat> es(q);
        if (!(es.eigenvalues().minCoeff() > 0.0)) ++bad;
    }
    return bad;
}

/// Pairs of 3^n-neighbour nodes violating |u_i - u_j| <= |x_i - x_j|.
inline std::size_t lipschitz_violations(const GraphGrid& u, double rel_tol = 1e-9) {
    std::size_t bad = 0;
    const int n = u.dim();
    int cube = 1;
    for (int a = 0; a < n; ++a) cube *= 3;
    auto visit = [&](std::size_t i) {
        const Lattice l = u.lattice(i);
        for (int c = 0; c < cube; ++c) {
            Lattice m = l;
            int code = c;
            double d2 = 0.0;
            for (int a = 0; a < n; ++a) {
                const int off = code % 3 - 1;
                code /= 3;
                m[a] += off;
                d2 += off * off;
            }
            if (d2 == 0.0) continue;
            const auto v = u.value_at_lattice(m);
            if (!v) continue;
            if (std::abs(*v - u[i]) > std::sqrt(d2) * u.spacing() * (1.0 + rel_tol)) ++bad;
        }
    };
    for (auto i : u.interior_nodes()) visit(i);
    for (auto i : u.band_nodes()) visit(i);
    return bad;
}

/// CMC graph with H_1 = alpha approximating the entire solution in the
/// domain, with Dirichlet data on the cosmological level set T = 1/alpha,
/// solved on the padded ball and restricted to geometry.
inline SolveResult upper_barrier_solve(const RegularDomain& d, double alpha, const GraphGrid& geometry,
                                       const SolverOptions& opts = {}, double padding = 0.25) {
    if (d.classification().kind != DomainKind::NonSplitting) {
        throw DomainError(std::string("domain is ") + to_string(d.classification().kind) +
                          "; reduce to the product slice before building barriers");
    }
    if (geometry.dim() != d.dim()) throw DomainError("grid dimension does not match the domain");
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    auto res = solve_cmc(padded_geometry(geometry, padding), alpha, cosmological_boundary(d, 1.0 / alpha), opts);
    res.solution = restrict_to(res.solution, geometry);
    const std::size_t bad = convexity_violations(res.solution);
    if (bad) {
        throw ConstructionError("upper barrier is not strictly convex at " + std::to_string(bad) + " nodes");
    }
    return res;
}

inline GraphGrid upper_barrier(const RegularDomain& d, double h0, double h1, const GraphGrid& geometry,
                               const BarrierOptions& opts = {}) {
    return upper_barrier_solve(d, upper_barrier_alpha(h0, h1, opts.strict_factor), geometry, opts.solver,
                               opts.padding)
        .solution;
}

inline TripleSurface build_triple_surface(const std::array<SupportPoint, 3>& T, double h1,
                                          const GraphGrid& geometry, const SolverOptions& opts = {},
                                          double level = 1.0) {
    if (!(level > 0.0)) throw DomainError("level factor must be positive");
    if (!(h1 > 0.0)) throw DomainError("h1 must be positive");
    const int n = geometry.dim();
    if (n < 2) throw DomainError("triple surfaces need n >= 2");
    Mat dirs(n, 2);
    dirs.col(0) = T[1].y - T[0].y;
    dirs.col(1) = T[2].y - T[0].y;
    if (Eigen::FullPivLU<Mat>(dirs).rank() < 2) throw DomainError("triple points are not in general position");
    TripleSurface ts;
    ts.triple = T;
    ts.slice = make_slice({T[0], T[1], T[2]}, dirs);
    ts.slice_rhs = ts.slice.slice_sigma2_rhs(h1);
    const double h = geometry.spacing();
    const GraphGrid plane(2, geometry.radius() + 2.0 * h, h);
    const RegularDomain slice_domain(ts.slice.slice);
    auto res = solve_sigma2(plane, RhsSpec::constant_value(ts.slice_rhs),
                            cosmological_boundary(slice_domain, level / std::sqrt(ts.slice_rhs)), opts);
    ts.surface = std::move(res.solution);
    ts.report = std::move(res.report);
    return ts;
}

/// All triples of a support of at most `max_triples` points; otherwise a
/// greedy cover built from local triples around probe argmax directions.
inline std::vector<std::array<std::size_t, 3>> select_triples(const std::vector<SupportPoint>& pts,
                                                              const GraphGrid& probe, std::size_t max_triples) {
    const std::size_t m = pts.size();
    if (m < 3) throw DomainError("lower barrier needs at least 3 support points");
    std::vector<std::array<std::size_t, 3>> out;
    if (m <= max_triples) {
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b < m; ++b)
                for (std::size_t c = b + 1; c < m; ++c) out.push_back({a, b, c});
        return out;
    }
    std::vector<Vec> xs;
    const auto& nodes = probe.interior_nodes();
    const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 400);
    for (std::size_t i = 0; i < nodes.size(); i += stride) xs.push_back(probe.coords(nodes[i]));
    auto V = [&](const Vec& x) {
        double v = -std::numeric_limits<double>::infinity();
        for (const auto& p : pts) v = std::max(v, x.dot(p.y) - p.phi);
        return v;
    };
    std::vector<double> vphi(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) vphi[i] = V(xs[i]);

    std::vector<std::array<std::size_t, 3>> cand;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::pair<double, std::size_t>> near;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) near.emplace_back((pts[j].y - pts[i].y).norm(), j);
        std::partial_sort(near.begin(), near.begin() + std::min<std::size_t>(4, near.size()), near.end());
        const std::size_t kk = std::min<std::size_t>(4, near.size());
        for (std::size_t a = 0; a < kk; ++a)
            for (std::size_t b = a + 1; b < kk; ++b) {
                std::array<std::size_t, 3> t{i, near[a].second, near[b].second};
                std::sort(t.begin(), t.end());
                cand.push_back(t);
            }
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    std::vector<double> cover(xs.size(), -std::numeric_limits<double>::infinity());
    std::vector<bool> used(cand.size(), false);
    while (out.size() < max_triples) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = cand.size();
        for (std::size_t c = 0; c < cand.size(); ++c) {
            if (used[c]) continue;
            const std::array<SupportPoint, 3> T{pts[cand[c][0]], pts[cand[c][1]], pts[cand[c][2]]};
            double score = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < xs.size(); ++i) {
                score = std::min(score, std::max(cover[i], triple_support_function(T, xs[i])) - vphi[i]);
            }
            if (score > best) {
                best = score;
                arg = c;
            }
        }
        if (arg == cand.size()) break;
        used[arg] = true;
        out.push_back(cand[arg]);
        const std::array<SupportPoint, 3> T{pts[cand[arg][0]], pts[cand[arg][1]], pts[cand[arg][2]]};
        for (std::size_t i = 0; i < xs.size(); ++i) cover[i] = std::max(cover[i], triple_support_function(T, xs[i]));
    }
    return out;
}

/// Node-wise sup of the triple surfaces over the masked nodes of geometry.
inline GraphGrid lower_barrier(const std::vector<TripleSurface>& surfaces, const GraphGrid& geometry) {
    if (surfaces.empty()) throw DomainError("lower barrier needs at least one triple surface");
    GraphGrid g = geometry;
    auto eval = [&](const Vec& x) {
        double v = -std::numeric_limits<double>::infinity();
        for (const auto& s : surfaces) {
            const auto z = s.value(x);
            if (!z) throw ConstructionError("triple surface does not cover the barrier grid");
            v = std::max(v, *z);
        }
        return v;
    };
    g.fill_masked(eval);
    return g;
}

inline GraphGrid lower_barrier(const RegularDomain& d, double h1, const GraphGrid& geometry,
                               const BarrierOptions& opts = {}) {
    const auto pts = support_sample(d.support());
    std::vector<TripleSurface> surfaces;
    for (const auto& t : select_triples(pts, geometry, opts.max_triples)) {
        surfaces.push_back(build_triple_surface({pts[t[0]], pts[t[1]], pts[t[2]]}, h1, geometry, opts.solver, opts.lower_level));
    }
    GraphGrid g = lower_barrier(surfaces, geometry);
    const std::size_t bad = lipschitz_violations(g);
    if (bad) throw ConstructionError("lower barrier is not 1-Lipschitz at " + std::to_string(bad) + " node pairs");
    return g;
}

struct BarrierPair {
    GraphGrid lower;
    GraphGrid upper;
    double C0 = 0.0;     // smallest width with upper < V_phi + C0 on the grid (plus 1e-9)
    double alpha = 0.0;  // mean curvature of the upper barrier
    std::size_t triples = 0;
};

inline double max_width(const GraphGrid& g, const RegularDomain& d) {
    double w = -std::numeric_limits<double>::infinity();
    for (auto i : g.interior_nodes()) w = std::max(w, g[i] - eval_Vphi(d, g.coords(i)));
    for (auto i : g.band_nodes()) w = std::max(w, g[i] - eval_Vphi(d, g.coords(i)));
    return w;
}

inline BarrierPair build_barrier_pair(const RegularDomain& d, double h0, double h1, const GraphGrid& geometry,
                                      const BarrierOptions& opts = {}) {
    BarrierPair p;
    p.alpha = upper_barrier_alpha(h0, h1, opts.strict_factor);
    p.upper = upper_barrier_solve(d, p.alpha, geometry, opts.solver, opts.padding).solution;
    const auto pts = support_sample(d.support());
    const auto sel = select_triples(pts, geometry, opts.max_triples);
    std::vector<TripleSurface> surfaces;
    for (const auto& t : sel) {
        surfaces.push_back(build_triple_surface({pts[t[0]], pts[t[1]], pts[t[2]]}, h1, geometry, opts.solver, opts.lower_level));
    }
    p.lower = lower_barrier(surfaces, geometry);
    p.triples = sel.size();
    p.C0 = max_width(p.upper, d) + 1e-9;
    return p;
}

struct PairReport {
    std::size_t convexity_violations = 0;
    std::size_t lipschitz_violations = 0;
    std::size_t sandwich_violations = 0;  // nodes breaking V < lower < upper < V + C0
    std::size_t probe_violations = 0;     // probe solutions leaving the pair
    double min_lower_gap = 0.0;           // min(lower - V_phi)
    double min_pair_gap = 0.0;            // min(upper - lower)
    double max_width = 0.0;               // max(upper - V_phi)
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Checks of the barrier definition on the grid; probes are Dirichlet
/// solutions whose boundary values lie between the barriers.
inline PairReport validate_pair(const BarrierPair& pair, const RegularDomain& d,
                                const std::vector<GraphGrid>& probes = {}, double tol = 1e-9) {
    PairReport r;
    r.convexity_violations = convexity_violations(pair.upper);
    r.lipschitz_violations = lipschitz_violations(pair.lower);
    r.min_lower_gap = r.min_pair_gap = std::numeric_limits<double>::infinity();
    r.max_width = -std::numeric_limits<double>::infinity();
    auto visit = [&](std::size_t i) {
        const Vec x = pair.upper.coords(i);
        const double v = eval_Vphi(d, x);
        const double lo = pair.lower[i], up = pair.upper[i];
        r.min_lower_gap = std::min(r.min_lower_gap, lo - v);
        r.min_pair_gap = std::min(r.min_pair_gap, up - lo);
        r.max_width = std::max(r.max_width, up - v);
        if (!(v < lo && lo < up && up < v + pair.C0)) ++r.sandwich_violations;
    };
    if (!pair.lower.same_geometry(pair.upper)) throw DomainError("barrier grids differ");
    for (auto i : pair.upper.interior_nodes()) visit(i);
    for (auto i : pair.upper.band_nodes()) visit(i);
    for (const auto& u : probes) {
        auto count = [&](std::size_t i) {
            const auto lo = pair.lower.value_at_lattice(u.lattice(i));
            const auto up = pair.upper.value_at_lattice(u.lattice(i));
            if (!lo || !up) throw DomainError("barrier grids do not cover the probe grid");
            if (u[i] < *lo - tol || u[i] > *up + tol) ++r.probe_violations;
        };
        for (auto i : u.interior_nodes()) count(i);
        for (auto i : u.band_nodes()) count(i);
    }
    if (r.convexity_violations) r.violations.push_back("upper barrier not strictly convex");
    if (r.lipschitz_violations) r.violations.push_back("lower barrier not 1-Lipschitz");
    if (r.sandwich_violations) r.violations.push_back("sandwich V < lower < upper < V + C0 violated");
    if (r.probe_violations) r.violations.push_back("probe solution leaves the barrier pair");
    return r;
}

/// sigma_2 Dirichlet solution on the pair grid with boundary values
/// lower + weight (upper - lower).
inline SolveResult probe_solution(const BarrierPair& pair, const RhsSpec& rhs, double weight = 0.5,
                                  const SolverOptions& opts = {}) {
    if (!(weight >= 0.0 && weight <= 1.0)) throw DomainError("probe weight must lie in [0, 1]");
    const GraphGrid& lo = pair.lower;
    const GraphGrid& up = pair.upper;
    BoundaryFn bd = [&](const Vec& x) {
        const auto a = lo.interpolate(x), b = up.interpolate(x);
        if (!a || !b) throw DomainError("probe boundary outside the barrier grids");
        return *a + weight * (*b - *a);
    };
    return solve_sigma2(lo, rhs, bd, opts);
}

}  // namespace minkcsc
