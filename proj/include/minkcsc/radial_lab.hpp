#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/numeric/odeint.hpp>

#include "minkcsc/curvature.hpp"
#include "minkcsc/errors.hpp"

namespace minkcsc {

using RadialFn = std::function<double(double)>;

struct ProfileOptions {
    double quad_tol = 1e-12;     // absolute and relative tolerance of the adaptive integrator
    double taylor_radius = 1e-6; // H(r) = h(0) r below this radius
    double uniform_radius = 1.0; // uniform nodes up to here, geometric beyond
    double u0 = 0.0;             // anchor u(0)
};

/// Radial graph u(|x|) in R^{n,1} with prescribed mean curvature h(|x|).
struct RadialProfile {
    int n = 0;
    std::vector<double> r, h, H, vprime, vsecond, u, sigma2;
    std::shared_ptr<const boost::math::interpolators::quintic_hermite<std::vector<double>>> interp;

    double r_max() const { return r.back(); }
    std::size_t size() const { return r.size(); }

    void check_radius(double rho) const {
        if (!(rho >= 0.0) || rho > r_max() * (1.0 + 1e-14)) {
            std::ostringstream os;
            os << "radius " << rho << " outside the profile range [0, " << r_max() << "]";
            throw RangeError(os.str());
        }
    }
    double u_at(double rho) const {
        check_radius(rho);
        return (*interp)(std::min(rho, r_max()));
    }
    double vprime_at(double rho) const {
        check_radius(rho);
        return interp->prime(std::min(rho, r_max()));
    }
    double vsecond_at(double rho) const {
        check_radius(rho);
        return interp->double_prime(std::min(rho, r_max()));
    }
    double operator()(const Vec& x) const { return u_at(x.norm()); }

    /// Exact radial jet: Du = v' x/r, D^2u = v'' xx^T/r^2 + (v'/r)(I - xx^T/r^2).
    JetPoint jet_at(const Vec& x) const {
        if (x.size() != n) throw DomainError("point dimension differs from the profile dimension");
        const double rho = x.norm();
        JetPoint j{Vec::Zero(n), Mat::Zero(n, n)};
        if (rho < 1e-12) {
            j.q = vsecond_at(0.0) * Mat::Identity(n, n);
            return j;
        }
        const Vec e = x / rho;
        const double d1 = vprime_at(rho), d2 = vsecond_at(rho);
        j.p = d1 * e;
        j.q = d2 * e * e.transpose() + (d1 / rho) * (Mat::Identity(n, n) - e * e.transpose());
        return j;
    }
};

namespace detail {

inline std::vector<double> radial_nodes(double r_max, int nodes, double uniform_radius) {
    if (nodes < 8) throw DomainError("radial profiles need at least 8 nodes");
    std::vector<double> r;
    const double ra = std::min(uniform_radius, r_max);
    const int nu = ra < r_max ? std::max(4, nodes / 4) : nodes - 1;
    for (int i = 0; i <= nu; ++i) r.push_back(ra * i / nu);
    if (ra < r_max) {
        const int ng = nodes - 1 - nu;
        for (int i = 1; i <= ng; ++i) r.push_back(ra * std::pow(r_max / ra, static_cast<double>(i) / ng));
        r.back() = r_max;
    }
    return r;
}

}  // namespace detail

/// sigma_2 of the radial graph from h, H = v'/sqrt(1 - v'^2) and v' at radius r > 0.
inline double radial_sigma2(int n, double r, double h, double vp) {
    const double w = std::sqrt(1.0 - vp * vp);
    return (n - 1.0) / (w * w) * (vp / r) * (n * h * w - 0.5 * n * vp / r);
}

/// H(r) = (n / r^{n-1}) int_0^r s^{n-1} h(s) ds, v' = H / sqrt(1 + H^2),
/// u = u(0) + int_0^r v'.
inline RadialProfile build_profile(int n, const RadialFn& h, double r_max, int nodes,
                                   const ProfileOptions& o = {}) {
    if (n < 1 || n > kMaxJetDim) throw DomainError("profile dimension must lie in [1, 8]");
    if (!(r_max > 0.0)) throw DomainError("r_max must be positive");
    const double h0 = h(0.0);
    if (!std::isfinite(h0) || !(h0 > 0.0)) throw DomainError("h must have a positive finite value at r = 0");
    auto hp = [&](double s) {
        const double v = h(s);
        if (!(v > 0.0) || !std::isfinite(v)) {
            std::ostringstream os;
            os << "h is not positive at r = " << s;
            throw DomainError(os.str());
        }
        return v;
    };

    RadialProfile p;
    p.n = n;
    p.r = detail::radial_nodes(r_max, nodes, o.uniform_radius);
    const std::size_t N = p.r.size();
    p.h.resize(N);
    p.H.resize(N);
    p.vprime.resize(N);
    p.vsecond.resize(N);
    p.u.resize(N);
    p.sigma2.resize(N);

    auto H_from = [&](double s, double I) { return s < o.taylor_radius ? h0 * s : n * I / std::pow(s, n - 1); };

    // y = (I, u) with I' = s^{n-1} h(s), u' = v'(s); Taylor start at taylor_radius.
    using State = std::array<double, 2>;
    auto rhs = [&](const State& y, State& dy, double s) {
        dy[0] = std::pow(s, n - 1) * hp(s);
        const double Hs = H_from(s, y[0]);
        dy[1] = Hs / std::sqrt(1.0 + Hs * Hs);
    };
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_dense_output(o.quad_tol, o.quad_tol, odeint::runge_kutta_dopri5<State>());
    const double rt = o.taylor_radius;
    State y{h0 * std::pow(rt, n) / n, o.u0 + 0.5 * h0 * rt * rt};
    stepper.initialize(y, rt, 1e-3 * rt);
    for (std::size_t i = 0; i < N; ++i) {
        const double ri = p.r[i];
        p.h[i] = hp(ri);
        double I;
        if (ri < rt) {
            I = h0 * std::pow(ri, n) / n;
            p.u[i] = o.u0 + 0.5 * h0 * ri * ri;
        } else {
            while (stepper.current_time() < ri) stepper.do_step(rhs);
            State yi;
            stepper.calc_state(ri, yi);
            I = yi[0];
            p.u[i] = yi[1];
        }
        const double Hi = H_from(ri, I);
        p.H[i] = Hi;
        p.vprime[i] = Hi / std::sqrt(1.0 + Hi * Hi);
        const double dH = ri < rt ? h0 : n * p.h[i] - (n - 1.0) * Hi / ri;
        p.vsecond[i] = dH / std::pow(1.0 + Hi * Hi, 1.5);
        p.sigma2[i] = ri < rt ? 0.5 * n * (n - 1.0) * h0 * h0 : radial_sigma2(n, ri, p.h[i], p.vprime[i]);
    }
    p.interp = std::make_shared<const boost::math::interpolators::quintic_hermite<std::vector<double>>>(
        std::vector<double>(p.r), std::vector<double>(p.u), std::vector<double>(p.vprime),
        std::vector<double>(p.vsecond));
    return p;
}

struct BoundednessReport {
    double r_max = 0.0;
    double half_increment = 0.0;      // u(r_max) - u(r_max / 2)
    double doubling_increment = 0.0;  // u(2 r_max) - u(r_max)
    double vprime_exponent = 0.0;     // log-log slope of v' on [r_max, 2 r_max]
    double tail_bound = std::numeric_limits<double>::infinity();  // int_{2 r_max}^inf v' for a power tail
    double tolerance = 1e-6;
    bool plateau = false;             // doubling_increment < tolerance
    bool bounded_by_exponent = false; // v' decays faster than 1/r

    double sup_estimate(const RadialProfile& p) const { return p.u_at(2.0 * r_max) + tail_bound; }
};

/// Plateau certificate of a profile built up to 2 r_max, plus the power-law
/// tail of v'.
inline BoundednessReport boundedness_certificate(const RadialProfile& p, double tol = 1e-6) {
    BoundednessReport b;
    b.r_max = 0.5 * p.r_max();
    b.tolerance = tol;
    b.half_increment = p.u_at(b.r_max) - p.u_at(0.5 * b.r_max);
    b.doubling_increment = p.u_at(2.0 * b.r_max) - p.u_at(b.r_max);
    b.plateau = b.doubling_increment < tol;
    const double v1 = p.vprime_at(b.r_max), v2 = p.vprime_at(2.0 * b.r_max);
    b.vprime_exponent = std::log(v2 / v1) / std::log(2.0);
    b.bounded_by_exponent = b.vprime_exponent < -1.0 - 1e-3;
    if (b.bounded_by_exponent) b.tail_bound = 2.0 * b.r_max * v2 / (-b.vprime_exponent - 1.0);
    return b;
}

inline BoundednessReport boundedness_certificate(int n, const RadialFn& h, double r_max, int nodes = 2000,
                                                 double tol = 1e-6) {
    return boundedness_certificate(build_profile(n, h, 2.0 * r_max, nodes), tol);
}

/// h(r) = r^{-n/2} k(r) with k = A B / (A + B), A = c0 r^{n/2}, B = r^delta.
inline RadialFn admissible_k_profile(int n, double delta, double c0) {
    const double a = 0.5 * n - delta;
    return [=](double r) { return c0 / (c0 * std::pow(r, a) + 1.0); };
}

inline void check_admissible_delta(int n, double delta) {
    if (n < 5) {
        throw DomainError("admissible bounded profiles need n >= 5: the constraint 0 < delta < n/2 - 2 is empty");
    }
    if (!(delta > 0.0) || !(delta < 0.5 * n - 2.0)) {
        std::ostringstream os;
        os << "delta = " << delta << " violates 0 < delta < n/2 - 2 = " << 0.5 * n - 2.0;
        throw DomainError(os.str());
    }
}

/// Bounded radial graph with H_1 > 0 and H_2 > 0; both k monotonicity and
/// sigma_2 > 0 are checked at every node.
inline RadialProfile admissible_bounded_profile(int n, double delta, double c0, double r_max, int nodes = 2000,
                                                ProfileOptions o = {}) {
    check_admissible_delta(n, delta);
    if (!(c0 > 0.0)) throw DomainError("c0 must be positive");
    auto prof = build_profile(n, admissible_k_profile(n, delta, c0), r_max, nodes, o);
    double prev = 0.0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double k = std::pow(prof.r[i], 0.5 * n) * prof.h[i];
        if (k < prev * (1.0 - 1e-12)) throw ConstructionError("k is not non-decreasing at r = " + std::to_string(prof.r[i]));
        prev = k;
        if (!(prof.sigma2[i] > 0.0))
            throw ConstructionError("sigma_2 is not positive at r = " + std::to_string(prof.r[i]));
    }
    return prof;
}

/// Central-difference jet of f at x with step eps.
inline JetPoint fd_jet(const std::function<double(const Vec&)>& f, const Vec& x, double eps) {
    const int n = static_cast<int>(x.size());
    JetPoint j{Vec::Zero(n), Mat::Zero(n, n)};
    const double f0 = f(x);
    for (int a = 0; a < n; ++a) {
        Vec xp = x, xm = x;
        xp(a) += eps;
        xm(a) -= eps;
        const double fp = f(xp), fm = f(xm);
        j.p(a) = (fp - fm) / (2.0 * eps);
        j.q(a, a) = (fp - 2.0 * f0 + fm) / (eps * eps);
        for (int b = a + 1; b < n; ++b) {
            Vec pp = x, pm = x, mp = x, mm = x;
            pp(a) += eps; pp(b) += eps;
            pm(a) += eps; pm(b) -= eps;
            mp(a) -= eps; mp(b) += eps;
            mm(a) -= eps; mm(b) -= eps;
            j.q(a, b) = j.q(b, a) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * eps * eps);
        }
    }
    return j;
}

/// u(x) = sqrt(x_1^2 + w(x')^2) for an inner function w on R^{n-1} with values in [m, M].
struct WedgeEvaluator {
    int n = 0;
    std::function<double(const Vec&)> inner;
    double m = 0.0;
    double M = 0.0;
    double inner_radius = std::numeric_limits<double>::infinity();  // |x'| range of the inner function

    double c() const { return M * M; }
    double operator()(const Vec& x) const {
        if (x.size() != n) throw DomainError("point dimension differs from the wedge dimension");
        const double w = inner(x.tail(n - 1));
        return std::sqrt(x(0) * x(0) + w * w);
    }
};

struct WedgeOptions {
    int samples = 10000;
    int probes = 10000;
    double x1_range = 10.0;      // |x_1| sampled in [0, x1_range]
    double inner_range = 10.0;   // |x'| sampled in [0, min(inner_range, inner_radius)]
    double fd_step = 1e-3;
    double margin = 1e-9;        // H_1, H_2 must exceed this
    unsigned seed = 7;
};

struct WedgeReport {
    WedgeEvaluator u;
    std::size_t samples = 0;
    std::size_t sandwich_violations = 0;
    std::size_t probes = 0;
    double min_H1 = std::numeric_limits<double>::infinity();
    double min_H2 = std::numeric_limits<double>::infinity();
};

/// Sandwich |x_1| <= u <= sqrt(x_1^2 + M^2) on random samples and H_1, H_2 > 0
/// from finite-difference jets; ConstructionError when admissibility fails.
inline WedgeReport wedge_admissible(WedgeEvaluator u, const WedgeOptions& o = {}) {
    if (u.n < 2) throw DomainError("wedge graphs need n >= 2");
    if (!(u.m > 0.0) || !(u.m <= u.M) || !std::isfinite(u.M)) throw ConstructionError("inner function is not bounded in (0, inf)");
    WedgeReport rep;
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double rin = std::min(o.inner_range, 0.99 * u.inner_radius);
    auto sample = [&] {
        Vec x(u.n);
        x(0) = o.x1_range * uni(rng);
        Vec d(u.n - 1);
        for (int a = 0; a < u.n - 1; ++a) d(a) = gauss(rng);
        const double rad = rin * std::pow(0.5 * (uni(rng) + 1.0), 1.0 / (u.n - 1));
        x.tail(u.n - 1) = d.norm() > 0 ? Vec(rad * d / d.norm()) : Vec(Vec::Zero(u.n - 1));
        return x;
    };
    std::function<double(const Vec&)> f = [&](const Vec& x) { return u(x); };
    for (int s = 0; s < o.samples; ++s) {
        const Vec x = sample();
        const double v = u(x), a = std::abs(x(0));
        if (!(a <= v && v <= std::sqrt(a * a + u.c()))) ++rep.sandwich_violations;
    }
    rep.samples = static_cast<std::size_t>(o.samples);
    for (int s = 0; s < o.probes; ++s) {
        const Vec x = sample();
        const JetPoint j = fd_jet(f, x, o.fd_step);
        const double H1 = curvature_Hk(j, 1), H2 = curvature_Hk(j, 2);
        rep.min_H1 = std::min(rep.min_H1, H1);
        rep.min_H2 = std::min(rep.min_H2, H2);
        if (!(H1 > o.margin) || !(H2 > o.margin)) {
            std::ostringstream os;
            os << "wedge graph is not admissible at |x_1| = " << std::abs(x(0)) << ", |x'| = " << x.tail(u.n - 1).norm()
               << " (H_1 = " << H1 << ", H_2 = " << H2 << ")";
            throw ConstructionError(os.str());
        }
    }
    rep.probes = static_cast<std::size_t>(o.probes);
    rep.u = std::move(u);
    return rep;
}

/// Wedge evaluator from an (n-1)-dimensional bounded admissible profile anchored at u'(0) = u0.
inline WedgeEvaluator wedge_from_profile(int n, const RadialProfile& inner, double u0) {
    if (inner.n != n - 1) throw DomainError("inner profile must have dimension n - 1");
    if (!(u0 > 0.0)) throw DomainError("inner anchor must be positive");
    const auto b = boundedness_certificate(inner);
    if (!b.bounded_by_exponent) throw ConstructionError("inner profile is not bounded");
    const double shift = u0 - inner.u_at(0.0);
    WedgeEvaluator w;
    w.n = n;
    auto prof = std::make_shared<const RadialProfile>(inner);
    w.inner = [prof, shift](const Vec& xp) { return prof->u_at(xp.norm()) + shift; };
    w.m = u0;
    w.M = b.sup_estimate(inner) + shift;
    w.inner_radius = inner.r_max();
    return w;
}

inline WedgeReport wedge_admissible(int n, double delta, double c0, double r_max, double u0 = 1.0,
                                    const WedgeOptions& o = {}, int nodes = 2000) {
    if (n < 6) throw DomainError("wedge construction needs n >= 6");
    const auto inner = admissible_bounded_profile(n - 1, delta, c0, r_max, nodes);
    return wedge_admissible(wedge_from_profile(n, inner, u0), o);
}

struct ObstructionReport {
    std::vector<double> radii;
    std::vector<double> growth;      // u(R) - u(0)
    std::vector<double> increments;  // growth between consecutive radii
    double growth_exponent = 0.0;    // d log(growth) / d log R at the last pair
    double log_slope = 0.0;          // last increment / log(R_k / R_{k-1})
    bool unbounded = false;          // increments do not decay
};

/// n = 2 radial graphs with positive mean curvature grow without bound.
inline ObstructionReport two_d_obstruction_probe(const RadialFn& h,
                                                 std::vector<double> radii = {1e1, 1e2, 1e3, 1e4},
                                                 int nodes = 2000) {
    if (radii.size() < 3) throw DomainError("obstruction probe needs at least three radii");
    std::sort(radii.begin(), radii.end());
    const auto p = build_profile(2, h, radii.back(), nodes);
    ObstructionReport r;
    r.radii = radii;
    for (double R : radii) r.growth.push_back(p.u_at(R) - p.u_at(0.0));
    for (std::size_t i = 1; i < radii.size(); ++i) r.increments.push_back(r.growth[i] - r.growth[i - 1]);
    const std::size_t k = radii.size() - 1;
    r.growth_exponent = std::log(r.growth[k] / r.growth[k - 1]) / std::log(radii[k] / radii[k - 1]);
    r.log_slope = r.increments.back() / std::log(radii[k] / radii[k - 1]);
    const double ratio = (r.increments.back() / std::log(radii[k] / radii[k - 1])) /
                         (r.increments[r.increments.size() - 2] / std::log(radii[k - 1] / radii[k - 2]));
    r.unbounded = ratio >= 0.9;
    return r;
}

}  // namespace minkcsc
