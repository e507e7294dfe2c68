#pragma once

// Compact metric spaces used as phase spaces: the unit interval, the circle
// R/Z and the d-torus R^d/Z^d with the sup-over-coordinates circle metric.
// Grids are uniform lattices standing in for the continuum.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "naifs/errors.hpp"

namespace naifs {

inline constexpr int kMaxDim = 4;

enum class SpaceKind { interval, circle, torus };

inline std::string to_string(SpaceKind k) {
    switch (k) {
        case SpaceKind::interval: return "interval";
        case SpaceKind::circle: return "circle";
        case SpaceKind::torus: return "torus";
    }
    return "?";
}

struct Point {
    std::array<double, kMaxDim> c{};
    int dim = 1;

    Point() = default;
    Point(std::initializer_list<double> coords) : dim(static_cast<int>(coords.size())) {
        if (coords.size() == 0 || coords.size() > kMaxDim)
            throw InputError("Point: dimension must be in 1.." + std::to_string(kMaxDim));
        std::copy(coords.begin(), coords.end(), c.begin());
    }
    static Point from(const double* coords, int dim) {
        Point p;
        p.dim = dim;
        std::copy(coords, coords + dim, p.c.begin());
        return p;
    }

    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    const double* data() const { return c.data(); }
    double* data() { return c.data(); }

    friend bool operator==(const Point& a, const Point& b) {
        if (a.dim != b.dim) return false;
        for (int i = 0; i < a.dim; ++i)
            if (a.c[static_cast<std::size_t>(i)] != b.c[static_cast<std::size_t>(i)]) return false;
        return true;
    }
};

namespace detail {

inline double wrap01(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;  // x slightly below an integer
    return r;
}

inline double circle_gap(double a, double b) {
    const double d = std::fabs(a - b);
    return std::min(d, 1.0 - d);
}

} // namespace detail

class Space {
public:
    static Space interval() { return Space(SpaceKind::interval, 1); }
    static Space circle() { return Space(SpaceKind::circle, 1); }
    static Space torus(int d) {
        if (d < 1 || d > kMaxDim) throw InputError("torus dimension must be in 1.." + std::to_string(kMaxDim));
        return Space(SpaceKind::torus, d);
    }

    SpaceKind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool periodic() const { return kind_ != SpaceKind::interval; }

    /// 1 for the interval, 1/2 for the circle and, with the sup metric, 1/2
    /// for every torus.
    double diameter() const { return kind_ == SpaceKind::interval ? 1.0 : 0.5; }

    std::string name() const {
        return kind_ == SpaceKind::torus ? "torus" + std::to_string(dim_) : to_string(kind_);
    }

    /// Distance on raw coordinate arrays; the hot path of every estimator.
    double distance(const double* x, const double* y) const {
        if (kind_ == SpaceKind::interval) return std::fabs(x[0] - y[0]);
        double d = detail::circle_gap(x[0], y[0]);
        for (int i = 1; i < dim_; ++i) d = std::max(d, detail::circle_gap(x[i], y[i]));
        return d;
    }

    double distance(const Point& x, const Point& y) const {
        if (x.dim != dim_ || y.dim != dim_)
            throw InputError("distance: point dimension does not match " + name());
        return distance(x.data(), y.data());
    }

    /// Representative in [0,1] (interval) or [0,1)^d (circle, torus).
    void canonicalize(double* x) const {
        if (kind_ == SpaceKind::interval) {
            x[0] = std::clamp(x[0], 0.0, 1.0);
            return;
        }
        for (int i = 0; i < dim_; ++i) x[i] = detail::wrap01(x[i]);
    }

    Point canonical(Point p) const {
        if (p.dim != dim_) throw InputError("canonical: point dimension does not match " + name());
        canonicalize(p.data());
        return p;
    }

    bool contains(const Point& p) const {
        if (p.dim != dim_) return false;
        for (int i = 0; i < dim_; ++i) {
            const double v = p[i];
            if (!(v >= 0.0)) return false;
            if (kind_ == SpaceKind::interval ? v > 1.0 : v >= 1.0) return false;
        }
        return true;
    }

    friend bool operator==(const Space&, const Space&) = default;

private:
    Space(SpaceKind k, int d) : kind_(k), dim_(d) {}
    SpaceKind kind_;
    int dim_;
};

/// Uniform lattice. Points are stored flat (index-major, coordinate-minor) in
/// lexicographic order of their coordinates.
class Grid {
public:
    Grid(Space space, double mesh) : space_(space) {
        if (!(mesh > 0.0) || !std::isfinite(mesh)) throw InputError("grid mesh must be positive");
        if (mesh > space.diameter() + 1e-15) throw InputError("grid mesh exceeds the space diameter");
        // 1e-9 keeps 1/h from rounding up when h is an exact reciprocal.
        cells_ = static_cast<std::size_t>(std::ceil(1.0 / mesh - 1e-9));
        cells_ = std::max<std::size_t>(cells_, 1);
        per_axis_ = space.kind() == SpaceKind::interval ? cells_ + 1 : cells_;
        spacing_ = 1.0 / static_cast<double>(cells_);
        mesh_ = mesh;

        std::size_t total = 1;
        for (int i = 0; i < space.dim(); ++i) {
            if (total > (std::size_t{1} << 32) / per_axis_) throw InputError("grid too large");
            total *= per_axis_;
        }
        size_ = total;
        coords_.resize(size_ * static_cast<std::size_t>(space.dim()));
        const int d = space.dim();
        for (std::size_t idx = 0; idx < size_; ++idx) {
            std::size_t rest = idx;
            for (int axis = d - 1; axis >= 0; --axis) {
                const std::size_t k = rest % per_axis_;
                rest /= per_axis_;
                coords_[idx * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis)] =
                    static_cast<double>(k) / static_cast<double>(cells_);
            }
        }
    }

    const Space& space() const { return space_; }
    double mesh() const { return mesh_; }
    /// Actual lattice spacing, 1/ceil(1/h) <= h.
    double spacing() const { return spacing_; }
    std::size_t size() const { return size_; }
    std::size_t per_axis() const { return per_axis_; }
    int dim() const { return space_.dim(); }

    const double* coords(std::size_t i) const { return coords_.data() + i * static_cast<std::size_t>(dim()); }
    Point point(std::size_t i) const { return Point::from(coords(i), dim()); }
    const std::vector<double>& flat() const { return coords_; }

    /// Index of the lattice neighbour one step up along an axis, or size() when
    /// there is none (right end of the interval).
    std::size_t neighbor(std::size_t i, int axis) const {
        std::size_t stride = 1;
        for (int a = dim() - 1; a > axis; --a) stride *= per_axis_;
        const std::size_t k = (i / stride) % per_axis_;
        if (k + 1 < per_axis_) return i + stride;
        if (space_.kind() == SpaceKind::interval) return size_;
        return i - k * stride;
    }

    /// Index of the lattice point closest to p (coordinate-wise rounding).
    std::size_t nearest(const Point& p) const {
        std::size_t idx = 0;
        for (int axis = 0; axis < dim(); ++axis) {
            auto k = static_cast<std::size_t>(std::llround(p[axis] * static_cast<double>(cells_)));
            if (space_.periodic()) k %= cells_;
            else k = std::min(k, cells_);
            idx = idx * per_axis_ + k;
        }
        return idx;
    }

    /// Calls fn(index) for every lattice point whose coordinates are all within
    /// r of c along each axis (a superset of the sup-metric closed ball).
    template <class Fn>
    void for_each_in_box(const double* c, double r, Fn&& fn) const {
        const int d = dim();
        const auto cells = static_cast<double>(cells_);
        std::array<std::vector<std::size_t>, kMaxDim> axis_idx;
        for (int a = 0; a < d; ++a) {
            auto& list = axis_idx[static_cast<std::size_t>(a)];
            const auto lo = static_cast<long long>(std::ceil((c[a] - r) * cells - 1e-9));
            const auto hi = static_cast<long long>(std::floor((c[a] + r) * cells + 1e-9));
            if (space_.periodic()) {
                const auto n = static_cast<long long>(cells_);
                if (hi - lo + 1 >= n) {
                    for (long long k = 0; k < n; ++k) list.push_back(static_cast<std::size_t>(k));
                } else {
                    for (long long k = lo; k <= hi; ++k) list.push_back(static_cast<std::size_t>(((k % n) + n) % n));
                }
            } else {
                for (long long k = std::max(lo, 0LL); k <= std::min<long long>(hi, static_cast<long long>(cells_)); ++k)
                    list.push_back(static_cast<std::size_t>(k));
            }
            if (list.empty()) return;
        }
        std::array<std::size_t, kMaxDim> pos{};
        for (;;) {
            std::size_t idx = 0;
            for (int a = 0; a < d; ++a) idx = idx * per_axis_ + axis_idx[static_cast<std::size_t>(a)][pos[static_cast<std::size_t>(a)]];
            fn(idx);
            int a = d - 1;
            while (a >= 0 && ++pos[static_cast<std::size_t>(a)] == axis_idx[static_cast<std::size_t>(a)].size()) {
                pos[static_cast<std::size_t>(a)] = 0;
                --a;
            }
            if (a < 0) return;
        }
    }

private:
    Space space_;
    double mesh_ = 0;
    double spacing_ = 0;
    std::size_t cells_ = 0;
    std::size_t per_axis_ = 0;
    std::size_t size_ = 0;
    std::vector<double> coords_;
};

inline double distance(const Space& s, const Point& x, const Point& y) { return s.distance(x, y); }

inline Grid grid_points(const Space& s, double h) { return Grid(s, h); }

/// Grid points strictly closer than r to c, in grid order.
inline std::vector<std::size_t> ball_points(const Grid& g, const Point& c, double r) {
    if (!(r > 0.0)) throw InputError("ball_points: radius must be positive");
    if (c.dim != g.dim()) throw InputError("ball_points: center dimension mismatch");
    std::vector<std::size_t> out;
    g.for_each_in_box(c.data(), r, [&](std::size_t i) {
        if (g.space().distance(g.coords(i), c.data()) < r) out.push_back(i);
    });
    std::sort(out.begin(), out.end());
    return out;
}

/// Closed-ball variant, used for subset entropy on cl(U).
inline std::vector<std::size_t> closed_ball_points(const Grid& g, const Point& c, double r) {
    if (!(r > 0.0)) throw InputError("closed_ball_points: radius must be positive");
    if (c.dim != g.dim()) throw InputError("closed_ball_points: center dimension mismatch");
    std::vector<std::size_t> out;
    g.for_each_in_box(c.data(), r, [&](std::size_t i) {
        if (g.space().distance(g.coords(i), c.data()) <= r) out.push_back(i);
    });
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace naifs
