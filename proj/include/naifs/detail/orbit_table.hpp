#pragma once

// Orbit tables and the greedy nets built on them.
//
// An OrbitTable stores phi_w^{m,j}(y) for every candidate y and every step
// j = 0..n, so a Bowen distance is a max over n+1 precomputed coordinates.
// Nets are found with a range tree over runs of consecutive rows: two points
// within eps in d_{w,n} are within eps at every step, so a subtree whose
// orbit arcs are farther than eps at some step can be skipped.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <unordered_map>
#include <utility>
#include <vector>

#include "naifs/naifs_core.hpp"
#include "naifs/spaces.hpp"

namespace naifs::detail {

struct OrbitTable {
    Space space = Space::circle();
    std::size_t count = 0;
    std::size_t steps = 0;  // n; rows 0..n
    std::vector<double> data;

    int dim() const { return space.dim(); }
    const double* at(std::size_t j, std::size_t i) const {
        return data.data() + (j * count + i) * static_cast<std::size_t>(space.dim());
    }

    double step_distance(std::size_t j, std::size_t a, std::size_t b) const {
        return space.distance(at(j, a), at(j, b));
    }

    double bowen(std::size_t a, std::size_t b) const {
        double d = 0.0;
        for (std::size_t j = 0; j <= steps; ++j) d = std::max(d, step_distance(j, a, b));
        return d;
    }

    /// d_{w,n}(a, b) <= eps, scanning late steps first where orbits diverge.
    bool within(std::size_t a, std::size_t b, double eps) const {
        for (std::size_t j = steps + 1; j-- > 0;)
            if (step_distance(j, a, b) > eps) return false;
        return true;
    }

    /// d_{w,n}(a, b) < eps.
    bool within_strict(std::size_t a, std::size_t b, double eps) const {
        for (std::size_t j = steps + 1; j-- > 0;)
            if (step_distance(j, a, b) >= eps) return false;
        return true;
    }
};

/// Orbits of `count` points (flat coordinates) along the first n symbols of w.
inline OrbitTable compute_orbits(const NaifsSchedule& s, const Word& w, std::size_t n, const double* coords,
                                 std::size_t count) {
    if (n > w.size()) throw InputError("orbit table: n exceeds the word length");
    OrbitTable t;
    t.space = s.space();
    t.count = count;
    t.steps = n;
    const auto d = static_cast<std::size_t>(t.space.dim());
    t.data.resize((n + 1) * count * d);
    std::copy(coords, coords + count * d, t.data.begin());
    for (std::size_t j = 0; j < n; ++j) {
        double* next = t.data.data() + (j + 1) * count * d;
        std::copy(t.data.data() + j * count * d, t.data.data() + (j + 1) * count * d, next);
        s.map(w.start + j, w.symbols[j]).apply_many(next, count);
    }
    return t;
}

/// Orbit table over a subset of grid points (all of them when `subset` is empty).
inline OrbitTable compute_orbits(const NaifsSchedule& s, const Word& w, std::size_t n, const Grid& g,
                                 const std::vector<std::size_t>* subset) {
    if (!subset) return compute_orbits(s, w, n, g.flat().data(), g.size());
    const auto d = static_cast<std::size_t>(g.dim());
    std::vector<double> coords(subset->size() * d);
    for (std::size_t i = 0; i < subset->size(); ++i)
        std::copy(g.coords((*subset)[i]), g.coords((*subset)[i]) + d, coords.begin() + static_cast<std::ptrdiff_t>(i * d));
    return compute_orbits(s, w, n, coords.data(), subset->size());
}

/// Range index over orbit-table rows for "is some inserted point within r of
/// point i in d_{w,n}" queries. A binary tree over runs of consecutive rows
/// stores, for every node, the smallest arc (or interval) holding the node's
/// points at each step and axis, plus the number of inserted points below it.
/// A query descends only into nodes that are within r of the orbit of i at
/// every step. Consecutive grid points have nearby orbits, so the arcs of
/// small nodes stay short.
class OrbitIndex {
public:
    OrbitIndex(const OrbitTable& t, double radius)
        : table_(&t), radius_(radius + 1e-12 * std::max(1.0, radius)), periodic_(t.space.periodic()) {
        dims_ = (t.steps + 1) * static_cast<std::size_t>(t.dim());
        const std::size_t leaves = std::max<std::size_t>(1, (t.count + kLeaf - 1) / kLeaf);
        size_ = 1;
        while (size_ < leaves) size_ <<= 1;
        lo_.assign(2 * size_ * dims_, 0.0);
        hi_.assign(2 * size_ * dims_, -1.0);  // empty
        kept_.assign(2 * size_, 0);
        inserted_.assign(t.count, 0);
        for (std::size_t l = 0; l < leaves; ++l) build_leaf(l);
        for (std::size_t node = size_; node-- > 1;) merge(node);
    }

    void insert(std::size_t i) {
        if (inserted_[i]) return;
        inserted_[i] = 1;
        for (std::size_t node = size_ + i / kLeaf; node; node >>= 1) ++kept_[node];
    }

    /// Calls fn(j) for inserted points j whose node passes the range test,
    /// until fn returns true. Every inserted point within r is offered.
    template <class Fn>
    bool any_near(std::size_t i, Fn&& fn) const {
        query_.resize(dims_);
        for (std::size_t k = 0; k < dims_; ++k) query_[k] = coord(k, i);
        const std::size_t home = size_ + i / kLeaf;
        std::size_t stack[128];
        std::size_t top = 0;
        stack[top++] = 1;
        while (top) {
            const std::size_t node = stack[--top];
            if (!kept_[node] || !reaches(node)) continue;
            if (node >= size_) {
                const std::size_t first = (node - size_) * kLeaf;
                const std::size_t last = std::min(first + kLeaf, table_->count);
                for (std::size_t j = last; j-- > first;)
                    if (inserted_[j] && fn(j)) return true;
                continue;
            }
            // The child on the side of i is searched first: nearby rows are the likeliest hits.
            const int level = std::bit_width(home) - std::bit_width(node);
            const bool right = (home >> (level - 1)) & 1u;
            const std::size_t near = 2 * node + (right ? 1 : 0);
            stack[top++] = near ^ 1u;
            stack[top++] = near;
        }
        return false;
    }

private:
    static constexpr std::size_t kLeaf = 8;

    // Component k = step * dim + axis.
    double coord(std::size_t k, std::size_t i) const {
        const auto d = static_cast<std::size_t>(table_->dim());
        return table_->at(k / d, i)[k % d];
    }

    void build_leaf(std::size_t l) {
        const std::size_t first = l * kLeaf;
        const std::size_t last = std::min(first + kLeaf, table_->count);
        if (first >= last) return;
        const std::size_t node = size_ + l;
        for (std::size_t k = 0; k < dims_; ++k) {
            double v = coord(k, first), lo = v, hi = v;
            for (std::size_t j = first + 1; j < last; ++j) {
                const double x = coord(k, j);
                if (periodic_) {
                    double step = x - detail::wrap01(v);
                    step -= std::floor(step + 0.5);  // signed circular difference in [-1/2, 1/2)
                    v += step;
                } else {
                    v = x;
                }
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            set(node, k, lo, hi);
        }
    }

    void set(std::size_t node, std::size_t k, double lo, double hi) {
        if (periodic_ && hi - lo >= 1.0) {
            lo = 0.0;
            hi = 1.0;
        }
        lo_[node * dims_ + k] = lo;
        hi_[node * dims_ + k] = hi;
    }

    bool empty(std::size_t node) const { return hi_[node * dims_] < lo_[node * dims_]; }

    void merge(std::size_t node) {
        const std::size_t a = 2 * node, b = 2 * node + 1;
        if (empty(a) && empty(b)) return;
        for (std::size_t k = 0; k < dims_; ++k) {
            if (empty(b) || empty(a)) {
                const std::size_t c = empty(a) ? b : a;
                set(node, k, lo_[c * dims_ + k], hi_[c * dims_ + k]);
                continue;
            }
            const double a0 = lo_[a * dims_ + k], a1 = hi_[a * dims_ + k];
            const double b0 = lo_[b * dims_ + k], b1 = hi_[b * dims_ + k];
            if (!periodic_) {
                set(node, k, std::min(a0, b0), std::max(a1, b1));
                continue;
            }
            // Smallest of the two arcs starting at either left end that hold both.
            const double la = a1 - a0, lb = b1 - b0;
            const double sb = a0 + detail::wrap01(b0 - a0);
            const double end1 = std::max(a1, sb + lb);
            const double sa = b0 + detail::wrap01(a0 - b0);
            const double end2 = std::max(b1, sa + la);
            if (end1 - a0 <= end2 - b0) set(node, k, a0, end1);
            else set(node, k, b0, end2);
        }
    }

    double gap(std::size_t node, std::size_t k, double x) const {
        const double lo = lo_[node * dims_ + k], hi = hi_[node * dims_ + k];
        if (!periodic_) return std::max({0.0, lo - x, x - hi});
        const double len = hi - lo;
        if (len >= 1.0) return 0.0;
        const double u = detail::wrap01(x - lo);
        if (u <= len) return 0.0;
        return std::min(u - len, 1.0 - u);
    }

    bool reaches(std::size_t node) const {
        for (std::size_t k = dims_; k-- > 0;)  // late steps prune most
            if (gap(node, k, query_[k]) > radius_) return false;
        return true;
    }

    const OrbitTable* table_;
    double radius_;
    bool periodic_;
    std::size_t dims_ = 1;
    std::size_t size_ = 1;
    std::vector<double> lo_, hi_;
    std::vector<std::uint32_t> kept_;
    std::vector<char> inserted_;
    mutable std::vector<double> query_;
};

enum class NetRule {
    separated,  // keep a point iff it is > eps from every kept point
    strict      // keep a point iff it is >= eps from every kept point
};

/// Greedy net in the given scan order.
inline std::vector<std::size_t> greedy_net(const OrbitTable& t, const std::vector<std::size_t>& order, double eps,
                                           NetRule rule) {
    OrbitIndex index(t, eps);
    std::vector<std::size_t> kept;
    auto close = [&](std::size_t i, std::size_t j) {
        return rule == NetRule::separated ? t.within(i, j, eps) : t.within_strict(i, j, eps);
    };
    for (std::size_t i : order) {
        const bool blocked = (!kept.empty() && close(i, kept.back())) ||
                             index.any_near(i, [&](std::size_t j) { return close(i, j); });
        if (!blocked) {
            kept.push_back(i);
            index.insert(i);
        }
    }
    return kept;
}

inline std::vector<std::size_t> identity_order(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

/// Compressed adjacency: for each point the points within eps (<= or <),
/// itself included, in increasing index order.
struct Adjacency {
    std::vector<std::size_t> offset;
    std::vector<std::uint32_t> items;

    std::size_t size() const { return offset.empty() ? 0 : offset.size() - 1; }
    const std::uint32_t* begin(std::size_t i) const { return items.data() + offset[i]; }
    const std::uint32_t* end(std::size_t i) const { return items.data() + offset[i + 1]; }
    std::size_t degree(std::size_t i) const { return offset[i + 1] - offset[i]; }
};

inline Adjacency ball_adjacency(const OrbitTable& t, double eps, bool strict) {
    OrbitIndex index(t, eps);
    for (std::size_t i = 0; i < t.count; ++i) index.insert(i);
    Adjacency adj;
    adj.offset.reserve(t.count + 1);
    adj.offset.push_back(0);
    std::vector<std::uint32_t> row;
    for (std::size_t i = 0; i < t.count; ++i) {
        row.clear();
        index.any_near(i, [&](std::size_t j) {
            if (strict ? t.within_strict(i, j, eps) : t.within(i, j, eps)) row.push_back(static_cast<std::uint32_t>(j));
            return false;
        });
        std::sort(row.begin(), row.end());
        adj.items.insert(adj.items.end(), row.begin(), row.end());
        adj.offset.push_back(adj.items.size());
    }
    return adj;
}

/// Greedy set cover: repeatedly take the ball covering the most uncovered
/// points (smallest index on ties). Returns the chosen centres.
inline std::vector<std::size_t> greedy_cover(const Adjacency& adj) {
    const std::size_t n = adj.size();
    std::vector<char> covered(n, 0);
    std::vector<std::size_t> gain(n);
    // Max-heap on (gain, -index) with lazy re-evaluation; gains only decrease.
    using Entry = std::pair<std::size_t, std::int64_t>;
    std::priority_queue<Entry> heap;
    for (std::size_t i = 0; i < n; ++i) {
        gain[i] = adj.degree(i);
        heap.emplace(gain[i], -static_cast<std::int64_t>(i));
    }
    std::size_t left = n;
    std::vector<std::size_t> chosen;
    while (left > 0 && !heap.empty()) {
        auto [g, neg] = heap.top();
        heap.pop();
        const auto i = static_cast<std::size_t>(-neg);
        std::size_t fresh = 0;
        for (const auto* p = adj.begin(i); p != adj.end(i); ++p) fresh += !covered[*p];
        if (fresh != g) {
            if (fresh > 0) heap.emplace(fresh, neg);
            continue;
        }
        if (fresh == 0) continue;
        chosen.push_back(i);
        for (const auto* p = adj.begin(i); p != adj.end(i); ++p)
            if (!covered[*p]) {
                covered[*p] = 1;
                --left;
            }
    }
    return chosen;
}

/// Weighted greedy set cover: take the ball minimising
/// weight / (newly covered points). Weights are given as logs.
inline std::vector<std::size_t> greedy_weighted_cover(const Adjacency& adj, const std::vector<double>& log_weight) {
    const std::size_t n = adj.size();
    std::vector<char> covered(n, 0);
    // Min-heap on (log w - log gain, index); the ratio only grows as gains shrink.
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::vector<std::size_t> gain(n);
    for (std::size_t i = 0; i < n; ++i) {
        gain[i] = adj.degree(i);
        heap.emplace(log_weight[i] - std::log(static_cast<double>(gain[i])), i);
    }
    std::size_t left = n;
    std::vector<std::size_t> chosen;
    while (left > 0 && !heap.empty()) {
        auto [score, i] = heap.top();
        heap.pop();
        std::size_t fresh = 0;
        for (const auto* p = adj.begin(i); p != adj.end(i); ++p) fresh += !covered[*p];
        if (fresh == 0) continue;
        if (fresh != gain[i]) {
            gain[i] = fresh;
            heap.emplace(log_weight[i] - std::log(static_cast<double>(fresh)), i);
            continue;
        }
        chosen.push_back(i);
        for (const auto* p = adj.begin(i); p != adj.end(i); ++p)
            if (!covered[*p]) {
                covered[*p] = 1;
                --left;
            }
    }
    return chosen;
}

inline double log_sum_exp(const std::vector<double>& v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

} // namespace naifs::detail
