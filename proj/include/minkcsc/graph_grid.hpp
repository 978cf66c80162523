#pragma once

// Masked uniform Cartesian grid over a ball B_R in R^n, n in {1, 2, 3}.
//
// Nodes sit on the lattice h * Z^n, index range [-N, N]^n with
// N = round(R / h) + 1, so grids sharing a spacing nest and values can be
// transferred exactly by lattice coordinates. Interior nodes satisfy
// |x| < R; band nodes are the non-interior nodes within one cell (in the
// max-norm) of an interior node and carry Dirichlet data.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "minkcsc/curvature.hpp"
#include "minkcsc/errors.hpp"

namespace minkcsc {

enum class NodeRole : std::uint8_t { Outside = 0, Interior = 1, Band = 2 };

using Lattice = std::array<int, 3>;

class GraphGrid {
public:
    GraphGrid() = default;

    GraphGrid(int n, double radius, double spacing) : n_(n), radius_(radius), h_(spacing) {
        if (n < 1 || n > 3) throw DomainError("GraphGrid dimension must be 1, 2 or 3");
        if (!(radius > 0.0) || !(spacing > 0.0)) throw DomainError("GraphGrid needs R > 0 and h > 0");
        half_ = static_cast<int>(std::lround(radius / spacing)) + 1;
        side_ = 2 * half_ + 1;
        std::size_t total = 1;
        for (int a = 0; a < n_; ++a) total *= static_cast<std::size_t>(side_);
        values_.assign(total, std::numeric_limits<double>::quiet_NaN());
        roles_.assign(total, NodeRole::Outside);
        build_mask();
    }

    /// Grid with m_nodes lattice points across the diameter [-R, R].
    static GraphGrid with_nodes(int n, double radius, int m_nodes) {
        if (m_nodes < 3) throw DomainError("GraphGrid needs at least 3 nodes per axis");
        return GraphGrid(n, radius, 2.0 * radius / (m_nodes - 1));
    }

    int dim() const { return n_; }
    double radius() const { return radius_; }
    double spacing() const { return h_; }
    int half_extent() const { return half_; }
    int side() const { return side_; }
    std::size_t size() const { return values_.size(); }

    bool same_geometry(const GraphGrid& o) const {
        return n_ == o.n_ && half_ == o.half_ && h_ == o.h_ && radius_ == o.radius_;
    }

    Lattice lattice(std::size_t idx) const {
        Lattice l{0, 0, 0};
        for (int a = 0; a < n_; ++a) {
            l[a] = static_cast<int>(idx % side_) - half_;
            idx /= side_;
        }
        return l;
    }

    std::optional<std::size_t> index(const Lattice& l) const {
        std::size_t idx = 0;
        std::size_t stride = 1;
        for (int a = 0; a < n_; ++a) {
            if (l[a] < -half_ || l[a] > half_) return std::nullopt;
            idx += static_cast<std::size_t>(l[a] + half_) * stride;
            stride *= side_;
        }
        return idx;
    }

    std::size_t stride(int axis) const {
        std::size_t s = 1;
        for (int a = 0; a < axis; ++a) s *= side_;
        return s;
    }

    Vec coords(std::size_t idx) const {
        const Lattice l = lattice(idx);
        Vec x(n_);
        for (int a = 0; a < n_; ++a) x(a) = l[a] * h_;
        return x;
    }

    NodeRole role(std::size_t idx) const { return roles_[idx]; }
    bool interior(std::size_t idx) const { return roles_[idx] == NodeRole::Interior; }
    bool band(std::size_t idx) const { return roles_[idx] == NodeRole::Band; }

    const std::vector<std::size_t>& interior_nodes() const { return interior_; }
    const std::vector<std::size_t>& band_nodes() const { return band_; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double& operator[](std::size_t idx) { return values_[idx]; }
    double operator[](std::size_t idx) const { return values_[idx]; }

    /// Assign f(x) at every lattice node.
    template <class F>
    void fill(F&& f) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = f(coords(i));
    }

    /// Assign f(x) on interior and band nodes only.
    template <class F>
    void fill_masked(F&& f) {
        for (auto i : interior_) values_[i] = f(coords(i));
        for (auto i : band_) values_[i] = f(coords(i));
    }

    template <class F>
    void fill_band(F&& f) {
        for (auto i : band_) values_[i] = f(coords(i));
    }

    /// Central-difference jet at an interior node.
    JetPoint jet(std::size_t idx) const {
        JetPoint j{Vec::Zero(n_), Mat::Zero(n_, n_)};
        const double u0 = values_[idx];
        const double inv2h = 0.5 / h_;
        const double invh2 = 1.0 / (h_ * h_);
        for (int a = 0; a < n_; ++a) {
            const std::size_t sa = stride(a);
            const double up = values_[idx + sa];
            const double um = values_[idx - sa];
            j.p(a) = (up - um) * inv2h;
            j.q(a, a) = (up - 2.0 * u0 + um) * invh2;
            for (int b = a + 1; b < n_; ++b) {
                const std::size_t sb = stride(b);
                const double v = (values_[idx + sa + sb] - values_[idx + sa - sb] -
                                  values_[idx - sa + sb] + values_[idx - sa - sb]) *
                                 0.25 * invh2;
                j.q(a, b) = v;
                j.q(b, a) = v;
            }
        }
        return j;
    }

    /// max over interior nodes of the central-difference |Du|.
    double max_discrete_gradient() const {
        double g = 0.0;
        for (auto i : interior_) {
            double s = 0.0;
            for (int a = 0; a < n_; ++a) {
                const std::size_t sa = stride(a);
                const double d = (values_[i + sa] - values_[i - sa]) * 0.5 / h_;
                s += d * d;
            }
            g = std::max(g, std::sqrt(s));
        }
        return g;
    }

    /// Multilinear interpolation; nullopt if x leaves the lattice or touches
    /// a node without a finite value.
    std::optional<double> interpolate(const Vec& x) const {
        Lattice base{0, 0, 0};
        std::array<double, 3> frac{0, 0, 0};
        for (int a = 0; a < n_; ++a) {
            const double s = x(a) / h_;
            int b = static_cast<int>(std::floor(s));
            if (b == half_ && std::abs(s - half_) < 1e-12) b = half_ - 1;
            if (b < -half_ || b + 1 > half_) return std::nullopt;
            base[a] = b;
            frac[a] = s - b;
        }
        double acc = 0.0;
        for (int corner = 0; corner < (1 << n_); ++corner) {
            Lattice l = base;
            double w = 1.0;
            for (int a = 0; a < n_; ++a) {
                const bool up = (corner >> a) & 1;
                l[a] += up ? 1 : 0;
                w *= up ? frac[a] : 1.0 - frac[a];
            }
            if (w == 0.0) continue;
            const auto idx = index(l);
            if (!idx || !std::isfinite(values_[*idx])) return std::nullopt;
            acc += w * values_[*idx];
        }
        return acc;
    }

    /// Copy values from a grid with the same spacing at shared lattice nodes.
    /// Returns the number of nodes written.
    std::size_t transfer_from(const GraphGrid& src) {
        if (src.n_ != n_ || std::abs(src.h_ - h_) > 1e-14 * h_) {
            throw DomainError("transfer_from needs grids with equal dimension and spacing");
        }
        std::size_t count = 0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const auto j = src.index(lattice(i));
            if (j && std::isfinite(src.values_[*j])) {
                values_[i] = src.values_[*j];
                ++count;
            }
        }
        return count;
    }

    /// Value at the node sharing lattice coordinates with node `idx` of `other`.
    std::optional<double> value_at_lattice(const Lattice& l) const {
        const auto i = index(l);
        if (!i || !std::isfinite(values_[*i])) return std::nullopt;
        return values_[*i];
    }

private:
    void build_mask() {
        const double r2 = radius_ * radius_ * (1.0 - 1e-12);
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const Vec x = coords(i);
            if (x.squaredNorm() < r2) roles_[i] = NodeRole::Interior;
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (roles_[i] == NodeRole::Interior) {
                interior_.push_back(i);
                continue;
            }
            const Lattice l = lattice(i);
            bool near = false;
            const int cube = n_ == 1 ? 3 : (n_ == 2 ? 9 : 27);
            for (int c = 0; c < cube && !near; ++c) {
                Lattice m = l;
                int code = c;
                for (int a = 0; a < n_; ++a) {
                    m[a] += code % 3 - 1;
                    code /= 3;
                }
                const auto j = index(m);
                near = j && roles_[*j] == NodeRole::Interior;
            }
            if (near) {
                roles_[i] = NodeRole::Band;
                band_.push_back(i);
            }
        }
    }

    int n_ = 0;
    double radius_ = 0.0;
    double h_ = 0.0;
    int half_ = 0;
    int side_ = 0;
    std::vector<double> values_;
    std::vector<NodeRole> roles_;
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> band_;
};

/// Grid holding f at every lattice node (interior, band and outside).
template <class F>
GraphGrid sample_graph(int n, double radius, double spacing, F&& f) {
    GraphGrid g(n, radius, spacing);
    g.fill(std::forward<F>(f));
    return g;
}

}  // namespace minkcsc
