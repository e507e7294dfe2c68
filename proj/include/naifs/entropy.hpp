#pragma once

// Separated, spanning and cover counts along words, their averages over word
// ensembles, and the entropy estimators built on them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "naifs/detail/orbit_table.hpp"
#include "naifs/errors.hpp"
#include "naifs/exact_search.hpp"
#include "naifs/fit.hpp"
#include "naifs/naifs_core.hpp"
#include "naifs/parallel.hpp"
#include "naifs/spaces.hpp"

namespace naifs {

/// Candidate subset of grid indices; nullptr means the whole grid.
using Subset = const std::vector<std::size_t>*;

namespace detail {

inline void check_count_args(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n, double eps) {
    if (!(s.space() == g.space())) throw InputError("grid and schedule live on different spaces");
    if (n > w.size()) throw InputError("n exceeds the word length");
    if (!(eps > 0.0)) throw InputError("eps must be positive");
    check_word(s, w);
}

inline void check_subset(const Grid& g, Subset y) {
    if (!y) return;
    if (y->empty()) throw InputError("candidate subset is empty");
    for (std::size_t i : *y)
        if (i >= g.size()) throw InputError("candidate subset index outside the grid");
}

inline std::size_t subset_size(const Grid& g, Subset y) { return y ? y->size() : g.size(); }

/// Maps table rows back to grid indices.
inline std::vector<std::size_t> rows_to_grid(const std::vector<std::size_t>& rows, Subset y) {
    if (!y) return rows;
    std::vector<std::size_t> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back((*y)[r]);
    return out;
}

/// Conflict (d <= eps) or coverage (d <= eps / d < eps) masks for exact search.
inline std::vector<exact::Mask> ball_masks(const OrbitTable& t, double eps, bool strict, bool exclude_self) {
    exact::check_size(t.count, "exact count");
    std::vector<exact::Mask> m(t.count, 0);
    for (std::size_t i = 0; i < t.count; ++i)
        for (std::size_t j = 0; j < t.count; ++j) {
            if (exclude_self && i == j) continue;
            if (strict ? t.within_strict(i, j, eps) : t.within(i, j, eps)) m[i] |= exact::Mask{1} << j;
        }
    return m;
}

/// Grid-adjacent pairs (lattice neighbours along each axis), as table rows.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> adjacent_pairs(const Grid& g, Subset y) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    std::vector<std::int64_t> row_of;
    if (y) {
        row_of.assign(g.size(), -1);
        for (std::size_t r = 0; r < y->size(); ++r) row_of[(*y)[r]] = static_cast<std::int64_t>(r);
    }
    const std::size_t count = subset_size(g, y);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t i = y ? (*y)[r] : r;
        for (int a = 0; a < g.dim(); ++a) {
            const std::size_t j = g.neighbor(i, a);
            if (j >= g.size() || j == i) continue;
            const std::int64_t rj = y ? row_of[j] : static_cast<std::int64_t>(j);
            if (rj >= 0) out.emplace_back(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(rj));
        }
    }
    return out;
}

/// Net size and, on small candidate sets, greedy set cover; the smaller
/// of the two is a certified upper bound for the minimal cover.
inline std::size_t cover_bound(const OrbitTable& t, double eps, bool strict, std::size_t cover_limit) {
    const auto net = greedy_net(t, identity_order(t.count), eps, strict ? NetRule::strict : NetRule::separated);
    std::size_t best = net.size();
    if (t.count <= cover_limit) best = std::min(best, greedy_cover(ball_adjacency(t, eps, strict)).size());
    return best;
}

} // namespace detail

/// Greedy (n,w,eps)-separated set: Y scanned in grid order, a point is kept iff
/// its Bowen distance to every kept point exceeds eps. Returns grid indices.
inline std::vector<std::size_t> separated_set(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n,
                                              double eps, Subset y = nullptr) {
    detail::check_count_args(s, g, w, n, eps);
    detail::check_subset(g, y);
    const auto t = detail::compute_orbits(s, w, n, g, y);
    return detail::rows_to_grid(detail::greedy_net(t, detail::identity_order(t.count), eps, detail::NetRule::separated), y);
}

/// s_n(Y; w, eps): greedy lower bound, or the true maximum when exact (|Y| <= 24).
inline std::size_t separated_count(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n, double eps,
                                   bool exact = false, Subset y = nullptr) {
    detail::check_count_args(s, g, w, n, eps);
    detail::check_subset(g, y);
    if (exact) exact::check_size(detail::subset_size(g, y), "separated_count");
    const auto t = detail::compute_orbits(s, w, n, g, y);
    if (!exact) return detail::greedy_net(t, detail::identity_order(t.count), eps, detail::NetRule::separated).size();
    const auto conflict = detail::ball_masks(t, eps, false, true);
    return exact::max_weight_independent(conflict, std::vector<double>(t.count, 1.0)).size();
}

/// r_n(Y; w, eps) with spanning points drawn from Y and closed balls (<= eps).
/// Heuristic: the smaller of the greedy separated net (maximal, hence spanning)
/// and greedy set cover when |Y| <= cover_limit. Exact: minimum cover (|Y| <= 24).
inline std::size_t spanning_count(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n, double eps,
                                  bool exact = false, Subset y = nullptr, std::size_t cover_limit = 2048) {
    detail::check_count_args(s, g, w, n, eps);
    detail::check_subset(g, y);
    if (exact) exact::check_size(detail::subset_size(g, y), "spanning_count");
    const auto t = detail::compute_orbits(s, w, n, g, y);
    if (!exact) return detail::cover_bound(t, eps, false, cover_limit);
    const auto balls = detail::ball_masks(t, eps, false, false);
    return exact::min_weight_cover(balls, std::vector<double>(t.count, 1.0)).size();
}

/// Number of open dynamical balls B(x; w, n, eps), x in the grid, needed to
/// cover the grid (greedy upper bound; exact when requested and <= 24 points).
inline std::size_t cover_count(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n, double eps,
                               bool exact = false, Subset y = nullptr, std::size_t cover_limit = 2048) {
    detail::check_count_args(s, g, w, n, eps);
    detail::check_subset(g, y);
    if (exact) exact::check_size(detail::subset_size(g, y), "cover_count");
    const auto t = detail::compute_orbits(s, w, n, g, y);
    if (!exact) return detail::cover_bound(t, eps, true, cover_limit);
    const auto balls = detail::ball_masks(t, eps, true, false);
    return exact::min_weight_cover(balls, std::vector<double>(t.count, 1.0)).size();
}

struct CountOptions {
    std::size_t budget = 4096;
    std::uint64_t seed = 0;
    unsigned threads = default_threads();
    std::size_t cover_limit = 2048;
    bool compute_cover = true;
    bool keep_per_word = false;
    std::size_t start = 1;
    Subset subset = nullptr;
    double saturation_fraction = 0.95;
};

struct CountRecord {
    double eps = 0.0;
    std::size_t n = 0;
    BigInt ensemble_size = 0;
    std::size_t words_evaluated = 0;
    bool sampled = false;
    double s_mean = 0.0, s_stderr = 0.0;
    double r_mean = 0.0, r_stderr = 0.0;
    double cover_mean = std::numeric_limits<double>::quiet_NaN();
    double unresolved = 0.0;          // mean fraction of adjacent pairs with d_{w,n} > eps/10
    bool lipschitz_distorted = false; // Lip^n h > eps/10
    bool saturated = false;           // s_mean >= saturation_fraction * |Y|
    std::size_t y_size = 0;
    std::vector<double> per_word_s;
};

namespace detail {

struct WordCounts {
    std::vector<double> s, r, cover, unresolved;
};

inline WordCounts count_word(const OrbitTable& t, const std::vector<double>& eps_list,
                             const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                             const CountOptions& opt) {
    WordCounts out;
    const auto order = identity_order(t.count);
    std::vector<double> pair_d;
    pair_d.reserve(pairs.size());
    for (const auto& [a, b] : pairs) pair_d.push_back(t.bowen(a, b));
    for (double eps : eps_list) {
        const auto net = greedy_net(t, order, eps, NetRule::separated);
        const bool small = t.count <= opt.cover_limit;
        double r = static_cast<double>(net.size());
        if (small) r = std::min(r, static_cast<double>(greedy_cover(ball_adjacency(t, eps, false)).size()));
        double c = std::numeric_limits<double>::quiet_NaN();
        if (opt.compute_cover) c = static_cast<double>(cover_bound(t, eps, true, opt.cover_limit));
        std::size_t bad = 0;
        for (double d : pair_d) bad += d > eps / 10.0;
        out.s.push_back(static_cast<double>(net.size()));
        out.r.push_back(r);
        out.cover.push_back(c);
        out.unresolved.push_back(pairs.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(pairs.size()));
    }
    return out;
}

inline void mean_and_stderr(const std::vector<double>& v, bool sampled, double& mean, double& se) {
    double sum = 0.0;
    for (double x : v) sum += x;
    mean = sum / static_cast<double>(v.size());
    se = 0.0;
    if (sampled && v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
}

inline void check_lists(const std::vector<double>& eps_list, const std::vector<std::size_t>& n_list) {
    if (eps_list.empty() || n_list.empty()) throw InputError("eps and n lists must be nonempty");
    for (double e : eps_list)
        if (!(e > 0.0)) throw InputError("eps values must be positive");
    for (std::size_t n : n_list)
        if (n < 1) throw InputError("n values must be >= 1");
}

} // namespace detail

/// S_n and R_n (and the cover count) averaged over words(S, start, n, budget, seed)
/// for every (eps, n). Records are ordered by eps as given, then by n as given.
/// Word i of every ensemble is the same for all n when sampling, so curves in n
/// use common random words.
inline std::vector<CountRecord> averaged_counts(const NaifsSchedule& s, const Grid& g, const std::vector<double>& eps_list,
                                                const std::vector<std::size_t>& n_list, const CountOptions& opt = {}) {
    detail::check_lists(eps_list, n_list);
    if (!(s.space() == g.space())) throw InputError("grid and schedule live on different spaces");
    detail::check_subset(g, opt.subset);
    const auto pairs = detail::adjacent_pairs(g, opt.subset);
    const std::size_t y_size = detail::subset_size(g, opt.subset);
    const double lip = s.max_lipschitz();

    std::vector<std::vector<CountRecord>> by_n(n_list.size());
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const std::size_t n = n_list[ni];
        const WordEnsemble ens(s, opt.start, n, opt.budget, opt.seed);
        std::vector<detail::WordCounts> per_word(ens.count());
        parallel_for(ens.count(), opt.threads, [&](std::size_t i) {
            const Word w = ens.at(i);
            const auto t = detail::compute_orbits(s, w, n, g, opt.subset);
            per_word[i] = detail::count_word(t, eps_list, pairs, opt);
        });
        for (std::size_t e = 0; e < eps_list.size(); ++e) {
            CountRecord rec;
            rec.eps = eps_list[e];
            rec.n = n;
            rec.ensemble_size = ens.ensemble_size();
            rec.words_evaluated = ens.count();
            rec.sampled = ens.sampled();
            rec.y_size = y_size;
            std::vector<double> sv, rv, cv, uv;
            for (const auto& pw : per_word) {
                sv.push_back(pw.s[e]);
                rv.push_back(pw.r[e]);
                cv.push_back(pw.cover[e]);
                uv.push_back(pw.unresolved[e]);
            }
            double dummy = 0.0;
            detail::mean_and_stderr(sv, rec.sampled, rec.s_mean, rec.s_stderr);
            detail::mean_and_stderr(rv, rec.sampled, rec.r_mean, rec.r_stderr);
            detail::mean_and_stderr(cv, rec.sampled, rec.cover_mean, dummy);
            detail::mean_and_stderr(uv, false, rec.unresolved, dummy);
            rec.lipschitz_distorted = std::pow(lip, static_cast<double>(n)) * g.spacing() > rec.eps / 10.0;
            rec.saturated = rec.s_mean >= opt.saturation_fraction * static_cast<double>(y_size);
            if (opt.keep_per_word) rec.per_word_s = std::move(sv);
            by_n[ni].push_back(std::move(rec));
        }
    }
    std::vector<CountRecord> out;
    for (std::size_t e = 0; e < eps_list.size(); ++e)
        for (std::size_t ni = 0; ni < n_list.size(); ++ni) out.push_back(by_n[ni][e]);
    return out;
}

using EntropyEstimate = RateEstimate;

inline std::vector<FitRow> fit_rows(const std::vector<CountRecord>& records) {
    std::vector<FitRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records)
        rows.push_back({r.eps, r.n, std::log(r.s_mean), r.s_mean > 0 ? r.s_stderr / r.s_mean : 0.0, r.saturated,
                        r.unresolved});
    return rows;
}

/// Entropy from count records: slope of log S_n against n at the smallest
/// usable eps. Requires at least two eps values and three n values.
inline EntropyEstimate entropy_estimate(const std::vector<CountRecord>& records, const FitOptions& opt = {}) {
    std::vector<double> eps;
    std::vector<std::size_t> ns;
    for (const auto& r : records) {
        if (std::find(eps.begin(), eps.end(), r.eps) == eps.end()) eps.push_back(r.eps);
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
    }
    if (eps.size() < 2) throw InputError("entropy_estimate: at least two eps values are required");
    if (ns.size() < 3) throw InputError("entropy_estimate: at least three n values are required");
    auto est = fit_rates(fit_rows(records), opt);
    for (const auto& r : records)
        if (r.lipschitz_distorted) {
            est.warnings.push_back("lipschitz: Lip^n * h exceeds eps/10 for some (eps, n)");
            break;
        }
    return est;
}

struct ShiftRate {
    std::size_t k = 1;
    EntropyEstimate estimate;
};

struct AsymptoticEstimate {
    std::vector<ShiftRate> shifts;
    double value = 0.0;        // estimate at the largest shift
    double uncertainty = 0.0;
    bool monotone = true;      // rate(k_i) <= rate(k_j) + slack for all i < j
    std::vector<std::string> violations;
    bool chaotic = false;      // value > 3 * uncertainty
};

/// Entropy of the shifted systems Phi_k for each k; the last one estimates h*.
inline AsymptoticEstimate asymptotic_entropy(const NaifsSchedule& s, const Grid& g, const std::vector<double>& eps_list,
                                             const std::vector<std::size_t>& n_list, const std::vector<std::size_t>& k_list,
                                             const CountOptions& opt = {}, double slack = 0.05,
                                             const FitOptions& fit = {}) {
    if (k_list.empty()) throw InputError("asymptotic_entropy: shift list is empty");
    for (std::size_t i = 0; i < k_list.size(); ++i)
        if (k_list[i] < 1 || (i && k_list[i] <= k_list[i - 1]))
            throw InputError("asymptotic_entropy: shifts must be increasing and >= 1");
    AsymptoticEstimate out;
    for (std::size_t k : k_list) {
        const NaifsSchedule sk = shifted(s, k);
        CountOptions o = opt;
        o.seed = derive_seed(opt.seed, "shift/" + std::to_string(k));
        out.shifts.push_back({k, entropy_estimate(averaged_counts(sk, g, eps_list, n_list, o), fit)});
    }
    for (std::size_t i = 0; i < out.shifts.size(); ++i)
        for (std::size_t j = i + 1; j < out.shifts.size(); ++j) {
            const auto& a = out.shifts[i].estimate;
            const auto& b = out.shifts[j].estimate;
            const double allow = slack + 3.0 * std::hypot(a.uncertainty, b.uncertainty);
            if (a.value > b.value + allow) {
                out.monotone = false;
                out.violations.push_back("rate(k=" + std::to_string(out.shifts[i].k) + ")=" + detail::fmt(a.value) +
                                         " exceeds rate(k=" + std::to_string(out.shifts[j].k) +
                                         ")=" + detail::fmt(b.value));
            }
        }
    out.value = out.shifts.back().estimate.value;
    out.uncertainty = out.shifts.back().estimate.uncertainty;
    out.chaotic = out.value > 3.0 * out.uncertainty;
    return out;
}

struct NonwanderingResult {
    std::vector<double> radii;                     // r, r/2, ... down to >= 2h
    std::vector<std::vector<std::uint8_t>> returns;  // returns[k][i]: point i returns at radii[k]
    std::vector<std::uint8_t> marked;              // returns at every radius
    std::vector<std::size_t> points;               // indices of marked grid points
    std::size_t n_max = 0, m_max = 0, budget = 0;
};

/// Scale-stamped approximation of the nonwandering set. A grid point x
/// returns at radius r' if some tested word w in I^{m,n} (m <= m_max,
/// 1 <= n <= n_max) maps a grid point of B(x, r') into B(x, r'). It is marked
/// when it returns at every radius of the ladder r, r/2, ... (all >= 2h),
/// standing in for "every neighbourhood".
inline NonwanderingResult nonwandering_set(const NaifsSchedule& s, const Grid& g, double r, std::size_t n_max,
                                           std::size_t m_max, std::size_t budget, std::uint64_t seed,
                                           unsigned threads = default_threads()) {
    if (!(s.space() == g.space())) throw InputError("grid and schedule live on different spaces");
    if (!(r >= 2.0 * g.spacing())) throw InputError("nonwandering_set: radius must be at least twice the grid spacing");
    if (n_max < 1 || m_max < 1) throw InputError("nonwandering_set: n_max and m_max must be >= 1");
    NonwanderingResult out;
    out.n_max = n_max;
    out.m_max = m_max;
    out.budget = budget;
    for (double rr = r; rr >= 2.0 * g.spacing(); rr /= 2.0) out.radii.push_back(rr);
    const std::size_t levels = out.radii.size();
    const Space& sp = g.space();

    // One task per (m, word); each fills its own marks, merged afterwards.
    struct Task {
        std::size_t m;
        Word w;
    };
    std::vector<Task> tasks;
    for (std::size_t m = 1; m <= m_max; ++m) {
        const WordEnsemble ens(s, m, n_max, budget, derive_seed(seed, "nonwandering/" + std::to_string(m)));
        for (std::size_t i = 0; i < ens.count(); ++i) tasks.push_back({m, ens.at(i)});
    }
    std::vector<std::vector<std::vector<std::uint8_t>>> marks(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t ti) {
        auto& mk = marks[ti];
        mk.assign(levels, std::vector<std::uint8_t>(g.size(), 0));
        const auto t = detail::compute_orbits(s, tasks[ti].w, n_max, g, nullptr);
        for (std::size_t y = 0; y < g.size(); ++y) {
            const double* py = t.at(0, y);
            for (std::size_t n = 1; n <= n_max; ++n) {
                const double* pz = t.at(n, y);
                const double dyz = sp.distance(py, pz);
                for (std::size_t k = 0; k < levels; ++k) {
                    const double rk = out.radii[k];
                    if (dyz >= 2.0 * rk) break;  // radii decrease
                    g.for_each_in_box(py, rk, [&](std::size_t x) {
                        const double* px = g.coords(x);
                        if (sp.distance(px, py) < rk && sp.distance(px, pz) < rk) mk[k][x] = 1;
                    });
                }
            }
        }
    });
    out.returns.assign(levels, std::vector<std::uint8_t>(g.size(), 0));
    for (const auto& mk : marks)
        for (std::size_t k = 0; k < levels; ++k)
            for (std::size_t x = 0; x < g.size(); ++x) out.returns[k][x] |= mk[k][x];
    out.marked.assign(g.size(), 1);
    for (std::size_t x = 0; x < g.size(); ++x) {
        for (std::size_t k = 0; k < levels; ++k) out.marked[x] &= out.returns[k][x];
        if (out.marked[x]) out.points.push_back(x);
    }
    return out;
}

struct EntropyPointProbe {
    EntropyEstimate local;
    EntropyEstimate global;
    double gap = 0.0;  // local - global
    std::size_t y_size = 0;
};

/// Compares the entropy on the closed ball around x0 with the global entropy.
inline EntropyPointProbe entropy_point_probe(const NaifsSchedule& s, const Grid& g, const Point& x0, double radius,
                                             const std::vector<double>& eps_list, const std::vector<std::size_t>& n_list,
                                             const CountOptions& opt = {}, const FitOptions& fit = {}) {
    if (!(radius >= 4.0 * g.spacing())) throw InputError("entropy_point_probe: radius must be at least 4h");
    const auto y = closed_ball_points(g, g.space().canonical(x0), radius);
    if (y.size() < 16)
        throw ResolutionError("entropy_point_probe: the ball holds " + std::to_string(y.size()) +
                              " grid points; at least 16 are needed");
    EntropyPointProbe out;
    out.y_size = y.size();
    CountOptions local = opt;
    local.subset = &y;
    CountOptions global = opt;
    global.subset = nullptr;
    out.local = entropy_estimate(averaged_counts(s, g, eps_list, n_list, local), fit);
    out.global = entropy_estimate(averaged_counts(s, g, eps_list, n_list, global), fit);
    out.gap = out.local.value - out.global.value;
    return out;
}

} // namespace naifs
