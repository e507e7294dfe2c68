#pragma once

// Concrete self-maps: expanding circle maps kx+b, integer torus endomorphisms,
// the Pomeau-Manneville intermittent map, and monotone interval maps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <array>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "naifs/errors.hpp"
#include "naifs/spaces.hpp"

namespace naifs {

struct MapInfo {
    std::string family;
    std::vector<double> params;
    bool monotone = false;
    bool expanding = false;         // uniformly expanding local diffeomorphism
    bool weakly_expanding = false;  // derivative >= 1, not uniform
    bool isometry = false;
    double sigma = 1.0;             // expansion factor (meaningful if expanding)
    double rho = 0.0;               // injectivity constant (meaningful if has_branches)
    double lipschitz = 1.0;
    int degree = 1;                 // number of preimages of a generic point
    bool has_branches = false;
};

/// A continuous self-map of a Space. Implementations are immutable.
class Map {
public:
    virtual ~Map() = default;

    const Space& space() const { return space_; }
    const MapInfo& info() const { return info_; }

    /// In-place evaluation on one point's coordinates; output is canonical.
    virtual void apply(double* x) const = 0;

    /// In-place evaluation of `count` points stored contiguously.
    virtual void apply_many(double* xs, std::size_t count) const {
        const auto d = static_cast<std::size_t>(space_.dim());
        for (std::size_t i = 0; i < count; ++i) apply(xs + i * d);
    }

    Point operator()(const Point& x) const {
        if (x.dim != space_.dim()) throw InputError("map applied to a point of the wrong dimension");
        Point y = x;
        apply(y.data());
        return y;
    }

    /// Jacobian, or nullopt where the map is not differentiable.
    virtual std::optional<Eigen::MatrixXd> derivative(const Point& x) const = 0;

    /// All preimages of y, canonical, sorted lexicographically.
    virtual std::vector<Point> inverse_branches(const Point& y) const {
        (void)y;
        throw UnsupportedCapability(info_.family + ": inverse branches not available");
    }

    /// Preimage of y closest to `ref`. For an expanding map and y near f(ref)
    /// this is the local inverse branch through ref.
    Point local_inverse(const Point& ref, const Point& y) const {
        const auto pre = inverse_branches(y);
        if (pre.empty()) throw ResolutionError(info_.family + ": no preimage found");
        std::size_t best = 0;
        double best_d = space_.distance(pre[0], ref);
        for (std::size_t i = 1; i < pre.size(); ++i) {
            const double d = space_.distance(pre[i], ref);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return pre[best];
    }

    /// Canonical text form, used for hashing and serialization.
    virtual std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        os << info_.family << '(';
        for (std::size_t i = 0; i < info_.params.size(); ++i) os << (i ? "," : "") << info_.params[i];
        os << ')';
        return os.str();
    }

protected:
    Map(Space s, MapInfo info) : space_(s), info_(std::move(info)) {}

    Space space_;
    MapInfo info_;
};

using MapRef = std::shared_ptr<const Map>;

namespace detail {

inline void sort_points(std::vector<Point>& pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return std::lexicographical_compare(a.c.begin(), a.c.begin() + a.dim, b.c.begin(), b.c.begin() + b.dim);
    });
}

inline Eigen::MatrixXd scalar_matrix(double v) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = v;
    return m;
}

} // namespace detail

/// x -> kx + b (mod 1). k = 1 is a rotation.
class CircleAffine final : public Map {
public:
    CircleAffine(int k, double b) : Map(Space::circle(), make_info(k, b)), k_(k), b_(detail::wrap01(b)) {}

    int k() const { return k_; }
    double b() const { return b_; }

    void apply(double* x) const override { x[0] = detail::wrap01(k_ * x[0] + b_); }

    void apply_many(double* xs, std::size_t count) const override {
        const double k = k_;
        const double b = b_;
        for (std::size_t i = 0; i < count; ++i) {
            double v = k * xs[i] + b;
            v -= std::floor(v);
            xs[i] = v >= 1.0 ? 0.0 : v;
        }
    }

    std::optional<Eigen::MatrixXd> derivative(const Point&) const override {
        return detail::scalar_matrix(k_);
    }

    std::vector<Point> inverse_branches(const Point& y) const override {
        const double base = detail::wrap01(y[0] - b_);
        std::vector<Point> out;
        out.reserve(static_cast<std::size_t>(k_));
        for (int j = 0; j < k_; ++j) out.push_back(Point{detail::wrap01((base + j) / k_)});
        detail::sort_points(out);
        return out;
    }

private:
    static MapInfo make_info(int k, double b) {
        if (k < 1) throw InputError("circle_affine: degree k must be >= 1");
        if (!std::isfinite(b)) throw InputError("circle_affine: offset must be finite");
        MapInfo info;
        info.family = "circle_affine";
        info.params = {static_cast<double>(k), detail::wrap01(b)};
        info.degree = k;
        info.lipschitz = k;
        info.has_branches = true;
        info.rho = 1.0 / (4.0 * k);
        info.sigma = k;
        info.expanding = k >= 2;
        info.isometry = k == 1;
        info.monotone = k == 1;
        return info;
    }

    int k_;
    double b_;
};

/// x -> Ax (mod 1) on the d-torus, A an integer matrix with all |eigenvalues| > 1.
/// Expansion is measured in the sup metric the torus carries here:
/// sigma = 1/||A^-1||_inf, the largest constant with ||Av|| >= sigma ||v||.
class TorusEndo final : public Map {
public:
    explicit TorusEndo(const Eigen::MatrixXi& a) : Map(Space::torus(check_dim(a)), make_info(a)), a_(a) {
        ad_ = a_.cast<double>();
        inv_ = ad_.inverse();
        det_ = static_cast<long>(std::llround(std::fabs(ad_.determinant())));
    }

    const Eigen::MatrixXi& matrix() const { return a_; }

    void apply(double* x) const override {
        const int d = space_.dim();
        std::array<double, kMaxDim> out{};
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += a_(i, j) * x[j];
            out[static_cast<std::size_t>(i)] = detail::wrap01(s);
        }
        std::copy(out.begin(), out.begin() + d, x);
    }

    std::optional<Eigen::MatrixXd> derivative(const Point&) const override { return ad_; }

    std::vector<Point> inverse_branches(const Point& y) const override {
        // Preimages are A^{-1}(y + m) for integer m with Ax in the box A[0,1)^d.
        const int d = space_.dim();
        std::array<long, kMaxDim> lo{}, hi{};
        for (int i = 0; i < d; ++i) {
            long neg = 0, pos = 0;
            for (int j = 0; j < d; ++j) (a_(i, j) < 0 ? neg : pos) += a_(i, j);
            lo[static_cast<std::size_t>(i)] = neg - 1;
            hi[static_cast<std::size_t>(i)] = pos + 1;
        }
        std::vector<Point> out;
        std::array<long, kMaxDim> m = lo;
        Eigen::VectorXd rhs(d);
        for (;;) {
            for (int i = 0; i < d; ++i) rhs(i) = y[i] + static_cast<double>(m[static_cast<std::size_t>(i)]);
            Eigen::VectorXd x = inv_ * rhs;
            bool inside = true;
            for (int i = 0; i < d; ++i)
                if (x(i) < -1e-12 || x(i) >= 1.0 - 1e-12) inside = false;
            if (inside) {
                Point p;
                p.dim = d;
                for (int i = 0; i < d; ++i) p[i] = detail::wrap01(std::max(0.0, x(i)));
                out.push_back(p);
            }
            int axis = 0;
            while (axis < d && ++m[static_cast<std::size_t>(axis)] > hi[static_cast<std::size_t>(axis)]) {
                m[static_cast<std::size_t>(axis)] = lo[static_cast<std::size_t>(axis)];
                ++axis;
            }
            if (axis == d) break;
        }
        detail::sort_points(out);
        // Near-duplicates can appear when a preimage sits on the box boundary.
        std::vector<Point> uniq;
        for (const auto& p : out)
            if (uniq.empty() || space_.distance(uniq.back(), p) > 1e-10) uniq.push_back(p);
        if (uniq.size() > 1 && space_.distance(uniq.front(), uniq.back()) <= 1e-10) uniq.pop_back();
        return uniq;
    }

    std::string describe() const override {
        std::ostringstream os;
        os << "torus_endo(";
        for (int i = 0; i < a_.rows(); ++i)
            for (int j = 0; j < a_.cols(); ++j) os << ((i || j) ? "," : "") << a_(i, j);
        os << ')';
        return os.str();
    }

private:
    static int check_dim(const Eigen::MatrixXi& a) {
        if (a.rows() != a.cols() || a.rows() < 1 || a.rows() > kMaxDim)
            throw InputError("torus_endo: matrix must be square of size 1.." + std::to_string(kMaxDim));
        return static_cast<int>(a.rows());
    }

    static MapInfo make_info(const Eigen::MatrixXi& a) {
        const Eigen::MatrixXd ad = a.cast<double>();
        const double det = ad.determinant();
        if (std::fabs(det) < 0.5) throw InputError("torus_endo: matrix is singular");
        const Eigen::VectorXcd ev = ad.eigenvalues();
        for (int i = 0; i < ev.size(); ++i)
            if (std::abs(ev(i)) <= 1.0 + 1e-12)
                throw InputError("torus_endo: eigenvalue of modulus " + std::to_string(std::abs(ev(i))) +
                                 " is not > 1");
        const double norm = ad.cwiseAbs().rowwise().sum().maxCoeff();
        const double inv_norm = ad.inverse().cwiseAbs().rowwise().sum().maxCoeff();
        MapInfo info;
        info.family = "torus_endo";
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) info.params.push_back(a(i, j));
        info.degree = static_cast<int>(std::llround(std::fabs(det)));
        info.lipschitz = norm;
        info.has_branches = true;
        info.rho = 1.0 / (4.0 * norm);
        info.sigma = 1.0 / inv_norm;
        info.expanding = info.sigma >= 1.0 + 1e-9;
        return info;
    }

    Eigen::MatrixXi a_;
    Eigen::MatrixXd ad_;
    Eigen::MatrixXd inv_;
    long det_ = 1;
};

/// Pomeau-Manneville map on the circle:
///   x + 2^a x^(1+a)   on [0, 1/2),
///   2x - 1            on [1/2, 1).
/// The left branch reaches 1 at 1/2, so the map is continuous on R/Z.
class PomeauManneville final : public Map {
public:
    explicit PomeauManneville(double alpha) : Map(Space::circle(), make_info(alpha)), alpha_(alpha) {
        c_ = std::pow(2.0, alpha_);
    }

    double alpha() const { return alpha_; }

    double left(double x) const { return x + c_ * std::pow(x, 1.0 + alpha_); }

    void apply(double* x) const override {
        const double v = x[0];
        x[0] = detail::wrap01(v < 0.5 ? left(v) : 2.0 * v - 1.0);
    }

    std::optional<Eigen::MatrixXd> derivative(const Point& x) const override {
        const double v = x[0];
        if (v == 0.5) return std::nullopt;
        if (v > 0.5) return detail::scalar_matrix(2.0);
        return detail::scalar_matrix(1.0 + (1.0 + alpha_) * c_ * std::pow(v, alpha_));
    }

    std::vector<Point> inverse_branches(const Point& y) const override {
        const double t = y[0];
        // Left branch: bisection on the increasing function left(x) - t over [0, 1/2].
        double lo = 0.0, hi = 0.5;
        while (hi - lo > 1e-14) {
            const double mid = 0.5 * (lo + hi);
            (left(mid) < t ? lo : hi) = mid;
        }
        std::vector<Point> out{Point{0.5 * (lo + hi)}, Point{0.5 * (t + 1.0)}};
        for (auto& p : out) p[0] = detail::wrap01(p[0]);
        detail::sort_points(out);
        return out;
    }

private:
    static MapInfo make_info(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("pomeau_manneville: alpha must lie in (0,1)");
        MapInfo info;
        info.family = "pomeau_manneville";
        info.params = {alpha};
        info.degree = 2;
        info.lipschitz = 2.0;
        info.has_branches = true;
        info.rho = 1.0 / 8.0;
        info.sigma = 1.0;
        info.weakly_expanding = true;
        return info;
    }

    double alpha_;
    double c_ = 1.0;
};

/// Monotone self-maps of [0,1] given by a closed-form family or a table.
class MonotoneInterval final : public Map {
public:
    enum class Kind { power, shift_scale, affine, tabulated };

    /// x^p, p >= 1.
    static std::shared_ptr<MonotoneInterval> power(double p) {
        if (!(p >= 1.0) || !std::isfinite(p)) throw InputError("power: exponent must be >= 1");
        return std::shared_ptr<MonotoneInterval>(new MonotoneInterval(Kind::power, {p}, "power", p, true));
    }

    /// (x + c) / s. With s = 2 this is the half-shift family.
    static std::shared_ptr<MonotoneInterval> shift_scale(double c, double s, std::string family = "shift_scale") {
        if (!(s > 0.0) || !std::isfinite(c)) throw InputError(family + ": scale must be positive");
        if (c / s < -1e-15 || (1.0 + c) / s > 1.0 + 1e-15)
            throw InputError(family + ": image of [0,1] leaves [0,1]");
        std::vector<double> params = family == "half_shift" ? std::vector<double>{c} : std::vector<double>{c, s};
        return std::shared_ptr<MonotoneInterval>(
            new MonotoneInterval(Kind::shift_scale, std::move(params), std::move(family), 1.0 / s, true, c, s));
    }

    /// a x + b.
    static std::shared_ptr<MonotoneInterval> affine(double a, double b) {
        const double y0 = b, y1 = a + b;
        if (std::min(y0, y1) < -1e-15 || std::max(y0, y1) > 1.0 + 1e-15)
            throw InputError("affine: image of [0,1] leaves [0,1]");
        return std::shared_ptr<MonotoneInterval>(
            new MonotoneInterval(Kind::affine, {a, b}, "affine", std::fabs(a), true, b, a));
    }

    /// Piecewise-linear interpolation of values at uniform knots 0, 1/(m-1), ..., 1.
    static std::shared_ptr<MonotoneInterval> tabulated(std::vector<double> values) {
        if (values.size() < 2) throw InputError("tabulated: need at least two values");
        bool up = true, down = true;
        double lip = 0.0;
        const double step = 1.0 / static_cast<double>(values.size() - 1);
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] >= 0.0 && values[i] <= 1.0)) throw InputError("tabulated: values must lie in [0,1]");
            if (i) {
                up = up && values[i] >= values[i - 1];
                down = down && values[i] <= values[i - 1];
                lip = std::max(lip, std::fabs(values[i] - values[i - 1]) / step);
            }
        }
        if (!up && !down) throw InputError("tabulated: values are not monotone");
        auto params = values;
        return std::shared_ptr<MonotoneInterval>(
            new MonotoneInterval(Kind::tabulated, std::move(params), "tabulated", lip, true));
    }

    Kind kind() const { return kind_; }

    double eval(double x) const {
        switch (kind_) {
            case Kind::power: return std::pow(x, info_.params[0]);
            case Kind::shift_scale: return (x + a_) / b_;
            case Kind::affine: return b_ * x + a_;
            case Kind::tabulated: {
                const auto& v = info_.params;
                const double pos = x * static_cast<double>(v.size() - 1);
                auto i = static_cast<std::size_t>(std::floor(pos));
                if (i >= v.size() - 1) return v.back();
                const double t = pos - static_cast<double>(i);
                return v[i] + t * (v[i + 1] - v[i]);
            }
        }
        return x;
    }

    void apply(double* x) const override { x[0] = std::clamp(eval(x[0]), 0.0, 1.0); }

    std::optional<Eigen::MatrixXd> derivative(const Point& x) const override {
        const double v = x[0];
        switch (kind_) {
            case Kind::power: {
                const double p = info_.params[0];
                return detail::scalar_matrix(p == 1.0 ? 1.0 : p * std::pow(v, p - 1.0));
            }
            case Kind::shift_scale: return detail::scalar_matrix(1.0 / b_);
            case Kind::affine: return detail::scalar_matrix(b_);
            case Kind::tabulated: {
                const auto& vals = info_.params;
                const double m = static_cast<double>(vals.size() - 1);
                const double pos = v * m;
                if (pos == std::floor(pos) && pos > 0.0 && pos < m) return std::nullopt;  // kink at a knot
                auto i = std::min(static_cast<std::size_t>(std::floor(pos)), vals.size() - 2);
                return detail::scalar_matrix((vals[i + 1] - vals[i]) * m);
            }
        }
        return std::nullopt;
    }

private:
    MonotoneInterval(Kind kind, std::vector<double> params, std::string family, double lip, bool monotone,
                     double a = 0.0, double b = 1.0)
        : Map(Space::interval(), [&] {
              MapInfo info;
              info.family = std::move(family);
              info.params = std::move(params);
              info.monotone = monotone;
              info.lipschitz = lip;
              return info;
          }()),
          kind_(kind),
          a_(a),
          b_(b) {}

    Kind kind_;
    double a_;  // shift_scale: c;  affine: intercept
    double b_;  // shift_scale: s;  affine: slope
};

/// Identity on any space; the finite-order generator of the negative examples.
class IdentityMap final : public Map {
public:
    explicit IdentityMap(Space s) : Map(s, make_info()) {}

    void apply(double*) const override {}
    void apply_many(double*, std::size_t) const override {}

    std::optional<Eigen::MatrixXd> derivative(const Point&) const override {
        return Eigen::MatrixXd::Identity(space_.dim(), space_.dim());
    }

    std::vector<Point> inverse_branches(const Point& y) const override { return {y}; }

private:
    static MapInfo make_info() {
        MapInfo info;
        info.family = "identity";
        info.monotone = true;
        info.isometry = true;
        info.has_branches = true;
        info.rho = 0.25;
        return info;
    }
};

/// g_{r-1} o ... o g_0; the generator type of blocked systems.
class ComposedMap final : public Map {
public:
    explicit ComposedMap(std::vector<MapRef> parts) : Map(check(parts), make_info(parts)), parts_(std::move(parts)) {}

    const std::vector<MapRef>& parts() const { return parts_; }

    void apply(double* x) const override {
        for (const auto& p : parts_) p->apply(x);
    }

    void apply_many(double* xs, std::size_t count) const override {
        for (const auto& p : parts_) p->apply_many(xs, count);
    }

    std::optional<Eigen::MatrixXd> derivative(const Point& x) const override {
        Point y = x;
        Eigen::MatrixXd j = Eigen::MatrixXd::Identity(space_.dim(), space_.dim());
        for (const auto& p : parts_) {
            auto dj = p->derivative(y);
            if (!dj) return std::nullopt;
            j = *dj * j;
            p->apply(y.data());
        }
        return j;
    }

    std::vector<Point> inverse_branches(const Point& y) const override {
        std::vector<Point> level{y};
        for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) {
            std::vector<Point> next;
            for (const auto& p : level) {
                auto pre = (*it)->inverse_branches(p);
                next.insert(next.end(), pre.begin(), pre.end());
            }
            level = std::move(next);
        }
        detail::sort_points(level);
        return level;
    }

    std::string describe() const override {
        std::string s = "compose(";
        for (std::size_t i = 0; i < parts_.size(); ++i) s += (i ? "," : "") + parts_[i]->describe();
        return s + ")";
    }

private:
    static Space check(const std::vector<MapRef>& parts) {
        if (parts.empty()) throw InputError("compose: empty map list");
        for (const auto& p : parts)
            if (!(p->space() == parts.front()->space())) throw InputError("compose: maps act on different spaces");
        return parts.front()->space();
    }

    static MapInfo make_info(const std::vector<MapRef>& parts) {
        MapInfo info;
        info.family = "compose";
        info.monotone = true;
        info.expanding = true;
        info.isometry = true;
        info.has_branches = true;
        info.sigma = 1.0;
        info.lipschitz = 1.0;
        info.rho = 1.0;
        bool weak = true;
        double lip_before = 1.0;
        for (const auto& p : parts) {
            const auto& q = p->info();
            info.monotone = info.monotone && q.monotone;
            info.expanding = info.expanding && q.expanding;
            weak = weak && (q.expanding || q.weakly_expanding);
            info.isometry = info.isometry && q.isometry;
            info.has_branches = info.has_branches && q.has_branches;
            info.sigma *= q.sigma;
            info.degree *= q.degree;
            info.rho = std::min(info.rho, q.rho / lip_before);
            lip_before *= q.lipschitz;
        }
        info.lipschitz = lip_before;
        info.weakly_expanding = !info.expanding && weak;
        return info;
    }

    std::vector<MapRef> parts_;
};

/// Builds a map from a family name and a flat parameter list.
///
///   circle_affine   {k, b}        kx + b mod 1 (b optional)
///   rotation        {alpha}       x + alpha mod 1
///   torus_endo      {a11, a12, ...} row-major integer d x d matrix
///   pomeau_manneville {alpha}
///   power           {p}           x^p on [0,1]
///   square          {}            x^2
///   half_shift      {c}           (x + c)/2
///   shift_scale     {c, s}        (x + c)/s
///   affine          {a, b}        ax + b
///   tabulated       {y0, ..., ym} piecewise-linear monotone table
///   identity        {}            on the given space
inline MapRef make_map(const std::string& family, const std::vector<double>& p,
                       std::optional<Space> space = std::nullopt) {
    auto need = [&](std::size_t lo, std::size_t hi) {
        if (p.size() < lo || p.size() > hi)
            throw InputError(family + ": expected " + std::to_string(lo) +
                             (lo == hi ? "" : ".." + std::to_string(hi)) + " parameters, got " +
                             std::to_string(p.size()));
    };
    auto as_int = [&](double v, const char* what) {
        if (v != std::floor(v) || std::fabs(v) > 1e6) throw InputError(family + ": " + what + " must be an integer");
        return static_cast<int>(v);
    };
    auto on = [&](const Space& natural) {
        if (space && !(*space == natural))
            throw InputError(family + " acts on " + natural.name() + ", not on " + space->name());
    };

    if (family == "circle_affine") {
        need(1, 2);
        on(Space::circle());
        return std::make_shared<CircleAffine>(as_int(p[0], "k"), p.size() > 1 ? p[1] : 0.0);
    }
    if (family == "rotation") {
        need(1, 1);
        on(Space::circle());
        return std::make_shared<CircleAffine>(1, p[0]);
    }
    if (family == "torus_endo") {
        const auto d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(p.size()))));
        if (d < 1 || static_cast<std::size_t>(d * d) != p.size())
            throw InputError("torus_endo: parameter count must be a perfect square");
        on(Space::torus(d));
        Eigen::MatrixXi a(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) a(i, j) = as_int(p[static_cast<std::size_t>(i * d + j)], "matrix entry");
        return std::make_shared<TorusEndo>(a);
    }
    if (family == "pomeau_manneville") {
        need(1, 1);
        on(Space::circle());
        return std::make_shared<PomeauManneville>(p[0]);
    }
    if (family == "power") {
        need(1, 1);
        on(Space::interval());
        return MonotoneInterval::power(p[0]);
    }
    if (family == "square") {
        need(0, 0);
        on(Space::interval());
        return MonotoneInterval::power(2.0);
    }
    if (family == "half_shift") {
        need(1, 1);
        on(Space::interval());
        return MonotoneInterval::shift_scale(p[0], 2.0, "half_shift");
    }
    if (family == "shift_scale") {
        need(2, 2);
        on(Space::interval());
        return MonotoneInterval::shift_scale(p[0], p[1]);
    }
    if (family == "affine") {
        need(2, 2);
        on(Space::interval());
        return MonotoneInterval::affine(p[0], p[1]);
    }
    if (family == "tabulated") {
        on(Space::interval());
        return MonotoneInterval::tabulated(p);
    }
    if (family == "identity") {
        need(0, 0);
        return std::make_shared<IdentityMap>(space.value_or(Space::circle()));
    }
    throw InputError("unknown map family '" + family + "'");
}

/// Jacobian at x; empty where the map is not differentiable.
inline std::optional<Eigen::MatrixXd> derivative(const MapRef& m, const Point& x) { return m->derivative(x); }

inline std::vector<Point> inverse_branches(const MapRef& m, const Point& y) { return m->inverse_branches(y); }

} // namespace naifs
