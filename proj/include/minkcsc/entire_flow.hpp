#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "minkcsc/barriers.hpp"
#include "minkcsc/dirichlet.hpp"
#include "minkcsc/errors.hpp"
#include "minkcsc/graph_grid.hpp"
#include "minkcsc/regular_domain.hpp"

namespace minkcsc {

struct EntireOptions {
    double R0 = 1.0;          // inner ball on which stages are compared
    int stages = 6;           // radii R0 * 2^{i/2}, i < stages
    double spacing = 1.0 / 16.0;
    double tol = 1e-5;        // sup-norm stage difference on B_{R0}
    double barrier_factor = 1.0;  // boundary CMC barrier has H_1 = factor * sqrt(h0)
    double padding = 0.25;
    bool require_convergence = true;
    SolverOptions solver;
};

struct StageRecord {
    double radius = 0.0;
    std::size_t unknowns = 0;
    int newton_iterations = 0;
    double final_residual = 0.0;
    double inner_difference = std::numeric_limits<double>::quiet_NaN();
};

struct EntireReport {
    std::vector<StageRecord> stages;
    double alpha = 0.0;         // mean curvature of the boundary barrier
    bool converged = false;
    bool monotone_decay = true; // stage differences non-increasing after the first
    bool trapped = true;        // final stage between V_phi and the upper barrier
    int slice_dim = 0;          // > 0 when solved by product reduction
    std::string message;

    std::vector<double> differences() const {
        std::vector<double> d;
        for (const auto& s : stages)
            if (!std::isnan(s.inner_difference)) d.push_back(s.inner_difference);
        return d;
    }
};

class EntireNonConvergence : public std::runtime_error {
public:
    EntireNonConvergence(const std::string& what, EntireReport report)
        : std::runtime_error(what), report_(std::move(report)) {}
    const EntireReport& report() const { return report_; }

private:
    EntireReport report_;
};

struct EntireResult {
    GraphGrid solution;  // on the ball of radius R0
    EntireReport report;
};

inline std::vector<double> exhaustion_radii(double R0, int stages) {
    if (!(R0 > 0.0) || stages < 1) throw DomainError("schedule needs R0 > 0 and at least one stage");
    std::vector<double> r;
    for (int i = 0; i < stages; ++i) r.push_back(R0 * std::pow(2.0, 0.5 * i));
    return r;
}

namespace detail {

inline double inner_difference(const GraphGrid& a, const GraphGrid& b, const GraphGrid& inner) {
    double d = 0.0;
    auto visit = [&](std::size_t i) {
        const auto l = inner.lattice(i);
        const auto va = a.value_at_lattice(l), vb = b.value_at_lattice(l);
        if (!va || !vb) throw DomainError("stage grids do not cover the inner ball");
        d = std::max(d, std::abs(*va - *vb));
    };
    for (auto i : inner.interior_nodes()) visit(i);
    for (auto i : inner.band_nodes()) visit(i);
    return d;
}

inline GraphGrid copy_onto(const GraphGrid& src, const GraphGrid& geometry) {
    GraphGrid g = geometry;
    auto put = [&](std::size_t i) {
        const auto v = src.value_at_lattice(geometry.lattice(i));
        if (!v) throw DomainError("source grid does not cover the target ball");
        g[i] = *v;
    };
    for (auto i : geometry.interior_nodes()) put(i);
    for (auto i : geometry.band_nodes()) put(i);
    return g;
}

inline std::string format_differences(const EntireReport& r) {
    std::ostringstream os;
    os.precision(3);
    os << "stage differences:";
    for (double d : r.differences()) os << ' ' << std::scientific << d;
    return os.str();
}

inline EntireResult solve_entire_direct(const RegularDomain& d, const RhsSpec& rhs, const EntireOptions& o) {
    const int n = d.dim();
    const auto radii = exhaustion_radii(o.R0, o.stages);
    EntireReport rep;
    rep.alpha = upper_barrier_alpha(rhs.h0, rhs.h1, o.barrier_factor);
    const GraphGrid outer(n, radii.back(), o.spacing);
    const GraphGrid upper = upper_barrier_solve(d, rep.alpha, outer, o.solver, o.padding).solution;
    const GraphGrid inner(n, o.R0, o.spacing);
    BoundaryFn bd = [&](const Vec& x) {
        const auto v = upper.interpolate(x);
        if (!v) throw DomainError("boundary point outside the barrier grid");
        return *v;
    };

    std::optional<GraphGrid> prev;
    for (double R : radii) {
        const GraphGrid grid(n, R, o.spacing);
        SolveResult res;
        try {
            res = solve_sigma2(grid, rhs, bd, o.solver);
        } catch (const NonConvergence& e) {
            if (o.require_convergence || !prev) throw;
            rep.message = "stage at R = " + std::to_string(R) + " failed: " + e.what();
            break;
        }
        StageRecord s;
        s.radius = R;
        s.unknowns = res.report.unknowns;
        s.newton_iterations = res.report.newton_iterations;
        s.final_residual = res.report.final_residual;
        if (prev) s.inner_difference = inner_difference(res.solution, *prev, inner);
        rep.stages.push_back(s);
        prev = std::move(res.solution);
        if (!std::isnan(s.inner_difference) && s.inner_difference <= o.tol) {
            rep.converged = true;
            break;
        }
    }

    const auto diffs = rep.differences();
    for (std::size_t i = 2; i < diffs.size(); ++i)
        if (diffs[i] > diffs[i - 1] * (1.0 + 1e-9)) rep.monotone_decay = false;
    for (auto i : prev->interior_nodes()) {
        const double v = eval_Vphi(d, prev->coords(i));
        const auto up = upper.interpolate(prev->coords(i));
        if (!((*prev)[i] > v) || !up || (*prev)[i] > *up + 1e-9) rep.trapped = false;
    }
    if (!rep.converged) {
        std::ostringstream os;
        os << "exhaustion did not reach " << o.tol << " on B_R0; " << format_differences(rep);
        const std::string what = os.str();
        if (rep.message.empty()) rep.message = what;
        if (o.require_convergence) throw EntireNonConvergence(what, rep);
    }
    return EntireResult{copy_onto(*prev, inner), std::move(rep)};
}

}  // namespace detail

/// Entire solution approximation by exhaustion with the upper barrier as
/// boundary data. Splitting domains are solved in their minimal slice and
/// extended by product.
inline EntireResult solve_entire(const RegularDomain& d, const RhsSpec& rhs, const EntireOptions& opts = {}) {
    rhs.validate();
    if (!(opts.tol > 0.0) || !(opts.spacing > 0.0)) throw DomainError("tolerance and spacing must be positive");
    const auto& cls = d.classification();
    if (cls.kind == DomainKind::NonSplitting) {
        if (!d.support().dense() && d.support().points().size() < 3)
            throw DomainError("entire solves need at least 3 support points");
        return detail::solve_entire_direct(d, rhs, opts);
    }
    if (!rhs.constant) throw DomainError("product reduction needs a constant right-hand side");
    const BoostedSlice slice = product_slice(d);
    if (slice.k < 2) throw DomainError("a wedge carries no entire solution with positive H_2");
    EntireOptions so = opts;
    so.R0 = opts.R0 + 2.0 * opts.spacing;
    auto sub = detail::solve_entire_direct(RegularDomain(slice.slice), RhsSpec::constant_value(slice.slice_sigma2_rhs(*rhs.constant)), so);
    GraphGrid full(d.dim(), opts.R0, opts.spacing);
    full.fill_masked([&](const Vec& x) {
        const auto w = sub.solution.interpolate(slice.project(x));
        if (!w) throw DomainError("slice solution does not cover the projected ball");
        return slice.lift(x, *w);
    });
    sub.report.slice_dim = slice.k;
    return EntireResult{std::move(full), std::move(sub.report)};
}

inline EntireResult solve_entire(const RegularDomain& d, double c, const EntireOptions& opts = {}) {
    return solve_entire(d, RhsSpec::constant_value(c), opts);
}

struct OrderingResult {
    bool ordered = true;
    double min_gap = std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    bool preconditions = true;  // H_2[u+] <= H_2[u-] node-wise and u- admissible

    explicit operator bool() const { return ordered; }
};

/// u_plus >= u_minus at every masked node, with the minimum gap.
inline OrderingResult ordering_check(const GraphGrid& u_plus, const GraphGrid& u_minus, const RegularDomain& d,
                                     double tol = 0.0) {
    if (!u_plus.same_geometry(u_minus)) throw DomainError("ordering check needs a shared grid");
    if (u_plus.dim() != d.dim()) throw DomainError("grid and domain dimensions differ");
    OrderingResult r;
    auto visit = [&](std::size_t i) {
        const double g = u_plus[i] - u_minus[i];
        r.min_gap = std::min(r.min_gap, g);
        if (g < -tol) ++r.violations;
    };
    for (auto i : u_plus.interior_nodes()) visit(i);
    for (auto i : u_plus.band_nodes()) visit(i);
    r.ordered = r.violations == 0;
    const auto cp = grid_curvatures(u_plus), cm = grid_curvatures(u_minus);
    for (std::size_t k = 0; k < cp.size() && k < cm.size(); ++k) {
        if (!cm[k].admissible || cp[k].H2 > cm[k].H2 + 1e-9) r.preconditions = false;
    }
    return r;
}

/// Leaves of constant H_2 = c on a common ball, strictly decreasing in c.
struct Foliation {
    RegularDomain domain;
    GraphGrid grid;
    std::map<double, GraphGrid> leaves;
    std::map<double, EntireReport> reports;

    std::vector<double> levels() const {
        std::vector<double> c;
        for (const auto& [k, v] : leaves) c.push_back(k);
        return c;
    }

    /// min over nodes of leaf(c_i) - leaf(c_{i+1}) for adjacent levels.
    std::vector<double> adjacent_gaps() const {
        std::vector<double> gaps;
        const GraphGrid* last = nullptr;
        for (const auto& [c, leaf] : leaves) {
            if (last) gaps.push_back(ordering_check(*last, leaf, domain).min_gap);
            last = &leaf;
        }
        return gaps;
    }

    bool strictly_ordered() const {
        for (double g : adjacent_gaps())
            if (!(g > 0.0)) return false;
        return true;
    }

    void add_leaf(double c, EntireResult r) {
        if (!r.solution.same_geometry(grid)) throw DomainError("leaf grid differs from the foliation grid");
        leaves[c] = std::move(r.solution);
        reports[c] = std::move(r.report);
    }
};

inline void check_levels(const std::vector<double>& c_list) {
    if (c_list.empty()) throw DomainError("foliation needs at least one level");
    for (std::size_t i = 0; i < c_list.size(); ++i) {
        if (!(c_list[i] > 0.0)) throw DomainError("foliation levels must be positive");
        if (i && !(c_list[i] > c_list[i - 1])) throw DomainError("foliation levels must be strictly increasing");
    }
}

/// One leaf per level; levels are independent and run on up to `jobs` threads.
inline Foliation foliate(const RegularDomain& d, const std::vector<double>& c_list, const EntireOptions& opts = {},
                         int jobs = 1) {
    check_levels(c_list);
    Foliation f{d, GraphGrid(d.dim(), opts.R0, opts.spacing), {}, {}};
    const std::size_t workers = static_cast<std::size_t>(std::max(1, jobs));
    for (std::size_t start = 0; start < c_list.size(); start += workers) {
        std::vector<std::future<EntireResult>> batch;
        const std::size_t stop = std::min(c_list.size(), start + workers);
        for (std::size_t i = start; i < stop; ++i) {
            batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                       [&, c = c_list[i]] { return solve_entire(d, c, opts); }));
        }
        for (std::size_t i = start; i < stop; ++i) f.add_leaf(c_list[i], batch[i - start].get());
    }
    return f;
}

struct TimeValue {
    double S = 0.0;       // -n(n-1) c*
    double c = 0.0;       // interpolated level
    double c_below = 0.0; // bracketing levels
    double c_above = 0.0;
};

/// Scalar curvature level S = -n(n-1)c* of the point (x, t), with c* linear
/// in c between the leaves bracketing t at x.
inline TimeValue time_value(const Foliation& f, const Vec& x, double t) {
    if (f.leaves.empty()) throw DomainError("empty foliation");
    std::vector<double> cs, vs;
    for (const auto& [c, leaf] : f.leaves) {
        const auto v = leaf.interpolate(x);
        if (!v) throw RangeError("x lies outside the foliation grid");
        cs.push_back(c);
        vs.push_back(*v);
    }
    const int n = f.domain.dim();
    auto result = [&](double c, double lo, double hi) { return TimeValue{-n * (n - 1.0) * c, c, lo, hi}; };
    if (t > vs.front() || t < vs.back()) {
        std::ostringstream os;
        os << "point (t = " << t << ") lies " << (t > vs.front() ? "above the leaf c = " : "below the leaf c = ")
           << (t > vs.front() ? cs.front() : cs.back()) << " (computed levels " << cs.front() << " .. " << cs.back()
           << ")";
        throw RangeError(os.str());
    }
    std::size_t lo = 0, hi = vs.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (vs[mid] >= t) lo = mid; else hi = mid;
    }
    if (t == vs[lo]) return result(cs[lo], cs[lo], cs[lo]);
    if (t == vs[hi]) return result(cs[hi], cs[hi], cs[hi]);
    const double w = (vs[lo] - t) / (vs[lo] - vs[hi]);
    return result(cs[lo] + w * (cs[hi] - cs[lo]), cs[lo], cs[hi]);
}

inline double time_function(const Foliation& f, const Vec& x, double t) { return time_value(f, x, t).S; }

/// time_function after inserting leaves at midpoint levels until the leaf
/// values bracketing t at x differ by at most gap_tol.
inline double time_function_refined(Foliation& f, const Vec& x, double t, double gap_tol,
                                    const EntireOptions& opts = {}, int max_new_leaves = 16) {
    if (!(gap_tol > 0.0)) throw DomainError("gap tolerance must be positive");
    for (int k = 0;; ++k) {
        const TimeValue tv = time_value(f, x, t);
        if (tv.c_below == tv.c_above) return tv.S;
        const double vb = *f.leaves.at(tv.c_below).interpolate(x);
        const double va = *f.leaves.at(tv.c_above).interpolate(x);
        if (vb - va <= gap_tol || k == max_new_leaves) return tv.S;
        const double mid = 0.5 * (tv.c_below + tv.c_above);
        f.add_leaf(mid, solve_entire(f.domain, mid, opts));
    }
}

}  // namespace minkcsc
