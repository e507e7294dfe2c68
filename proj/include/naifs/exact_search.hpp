#pragma once

// Exact optimisation over at most 24 candidate points, by branch and bound on
// bitmasks: maximum-weight independent sets (separated sets) and
// minimum-weight set covers (spanning sets).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "naifs/errors.hpp"

namespace naifs::exact {

inline constexpr std::size_t kMaxPoints = 24;
using Mask = std::uint32_t;

struct Selection {
    double value = 0.0;
    Mask members = 0;
    std::size_t size() const { return static_cast<std::size_t>(std::popcount(members)); }
};

inline void check_size(std::size_t n, const char* what) {
    if (n > kMaxPoints)
        throw InputError(std::string(what) + ": exact search is limited to " + std::to_string(kMaxPoints) +
                         " points, got " + std::to_string(n));
}

namespace detail {

struct IndependentSearch {
    const std::vector<Mask>& conflict;
    const std::vector<double>& weight;
    Selection best;

    double bound(Mask cand) const {
        double s = 0.0;
        for (Mask m = cand; m; m &= m - 1) s += weight[static_cast<std::size_t>(std::countr_zero(m))];
        return s;
    }

    void run(Mask cand, Mask chosen, double value) {
        if (value > best.value) best = {value, chosen};
        if (!cand || value + bound(cand) <= best.value) return;
        const int v = std::countr_zero(cand);
        const Mask bit = Mask{1} << v;
        run(cand & ~conflict[static_cast<std::size_t>(v)] & ~bit, chosen | bit, value + weight[static_cast<std::size_t>(v)]);
        if (conflict[static_cast<std::size_t>(v)] & cand) run(cand & ~bit, chosen, value);
    }
};

struct CoverSearch {
    const std::vector<Mask>& ball;
    const std::vector<double>& weight;
    std::vector<std::vector<int>> coverers;  // per element, centres covering it, by weight
    double min_weight = 0.0;
    Selection best{std::numeric_limits<double>::infinity(), 0};

    void run(Mask uncovered, Mask allowed, Mask chosen, double cost) {
        if (!uncovered) {
            if (cost < best.value) best = {cost, chosen};
            return;
        }
        if (cost + min_weight >= best.value) return;
        // Branch on the uncovered element with the fewest allowed coverers.
        int pick = -1;
        std::size_t fewest = std::numeric_limits<std::size_t>::max();
        for (Mask m = uncovered; m; m &= m - 1) {
            const int e = std::countr_zero(m);
            std::size_t c = 0;
            for (int centre : coverers[static_cast<std::size_t>(e)]) c += (allowed >> centre) & 1u;
            if (c < fewest) {
                fewest = c;
                pick = e;
            }
        }
        if (fewest == 0) return;
        Mask forbid = 0;
        for (int centre : coverers[static_cast<std::size_t>(pick)]) {
            if (!((allowed >> centre) & 1u)) continue;
            const Mask bit = Mask{1} << centre;
            run(uncovered & ~ball[static_cast<std::size_t>(centre)], allowed & ~bit & ~forbid, chosen | bit,
                cost + weight[static_cast<std::size_t>(centre)]);
            forbid |= bit;  // later branches do not use this centre for `pick`
        }
    }
};

} // namespace detail

/// Maximum total weight of a set with no two members in conflict.
/// conflict[i] is the mask of points that may not be chosen together with i.
inline Selection max_weight_independent(const std::vector<Mask>& conflict, const std::vector<double>& weight) {
    check_size(conflict.size(), "max_weight_independent");
    if (weight.size() != conflict.size()) throw InputError("max_weight_independent: size mismatch");
    const std::size_t n = conflict.size();
    if (n == 0) return {};
    detail::IndependentSearch s{conflict, weight, {}};
    const Mask all = n == 32 ? ~Mask{0} : ((Mask{1} << n) - 1);
    s.run(all, 0, 0.0);
    return s.best;
}

/// Minimum total weight of centres whose balls cover every point.
/// ball[i] is the mask of points covered when i is chosen; weights must be > 0.
inline Selection min_weight_cover(const std::vector<Mask>& ball, const std::vector<double>& weight) {
    check_size(ball.size(), "min_weight_cover");
    if (weight.size() != ball.size()) throw InputError("min_weight_cover: size mismatch");
    const std::size_t n = ball.size();
    if (n == 0) return {};
    detail::CoverSearch s{ball, weight, std::vector<std::vector<int>>(n)};
    s.min_weight = *std::min_element(weight.begin(), weight.end());
    for (std::size_t c = 0; c < n; ++c)
        for (Mask m = ball[c]; m; m &= m - 1) s.coverers[static_cast<std::size_t>(std::countr_zero(m))].push_back(static_cast<int>(c));
    for (auto& list : s.coverers)
        std::stable_sort(list.begin(), list.end(), [&](int a, int b) { return weight[static_cast<std::size_t>(a)] < weight[static_cast<std::size_t>(b)]; });
    const Mask all = (Mask{1} << n) - 1;
    s.run(all, all, 0, 0.0);
    if (!std::isfinite(s.best.value)) throw InputError("min_weight_cover: the balls do not cover all points");
    return s.best;
}

} // namespace naifs::exact
