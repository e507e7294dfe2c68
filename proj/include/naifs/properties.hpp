#pragma once

// Specification tracing through inverse branches, topological exactness,
// and expansivity certificates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "naifs/certificate.hpp"
#include "naifs/errors.hpp"
#include "naifs/fit.hpp"
#include "naifs/naifs_core.hpp"
#include "naifs/parallel.hpp"
#include "naifs/random.hpp"
#include "naifs/spaces.hpp"

namespace naifs {

namespace detail {

/// Smallest k >= 0 with base^k * start >= target, tolerant to rounding.
inline std::size_t steps_to_reach(double base, double start, double target, std::size_t cap = 10000) {
    double v = start;
    std::size_t k = 0;
    while (v < target * (1.0 - 1e-12)) {
        v *= base;
        if (++k > cap) throw PreconditionError("no finite step count: expansion factor too small");
    }
    return k;
}

inline bool all_circle_affine(const NaifsSchedule& s) {
    return s.all_maps([](const MapInfo& i) { return i.family == "circle_affine" && i.expanding; });
}

inline double word_rho(const NaifsSchedule& s, const Word& w, std::size_t from, std::size_t to) {
    double r = 1e300;
    for (std::size_t i = from; i < to; ++i) r = std::min(r, s.map(w.start + i, w.symbols[i]).info().rho);
    return r;
}

inline double word_lipschitz(const NaifsSchedule& s, const Word& w) {
    double l = 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) l *= s.map(w.start + i, w.symbols[i]).info().lipschitz;
    return l;
}

} // namespace detail

struct ExactnessOptions {
    std::size_t cap = 24;          // largest n tried
    std::size_t centers = 64;      // grid points used as ball centres
    std::size_t budget = 64;       // words per (m, n)
    std::size_t m_max = 2;         // start levels 1..m_max
    std::uint64_t seed = 0;
    std::size_t max_samples = std::size_t{1} << 22;  // per ball image
    unsigned threads = default_threads();
};

struct ExactnessResult {
    std::size_t value = 0;                 // N used downstream
    std::optional<std::size_t> analytic;   // ceil(log_sigma(1/(2 delta))) + 1 for circle_affine schedules
    std::size_t empirical = 0;             // smallest n passing the image test (un-padded)
};

/// N(delta): images of delta-balls under words of length >= N are h-dense.
/// Ball images are sampled at spacing h/(2 Lip_w) so every h-bin reached by
/// the continuum image is hit by a sample.
inline ExactnessResult exactness_N(const NaifsSchedule& s, double delta, const Grid& g, const ExactnessOptions& opt = {}) {
    if (!(delta > 0.0)) throw InputError("exactness_N: delta must be positive");
    if (!(s.space() == g.space())) throw InputError("grid and schedule live on different spaces");
    if (!s.all_maps([](const MapInfo& i) { return (i.expanding || i.weakly_expanding) && i.has_branches; }))
        throw PreconditionError("exactness_N: every map must be expanding (the schedule contains a non-expanding map)");

    ExactnessResult out;
    if (detail::all_circle_affine(s)) out.analytic = detail::steps_to_reach(s.sigma_min(), 2.0 * delta, 1.0) + 1;

    const Space& sp = g.space();
    const int d = sp.dim();
    const std::size_t cells = sp.periodic() ? g.per_axis() : g.per_axis() - 1;
    std::vector<std::size_t> centres;
    const std::size_t step = std::max<std::size_t>(1, g.size() / std::max<std::size_t>(1, opt.centers));
    for (std::size_t i = 0; i < g.size() && centres.size() < opt.centers; i += step) centres.push_back(i);

    auto dense_image = [&](const Word& w, std::size_t centre) {
        const double spacing = g.spacing() / (2.0 * std::max(1.0, detail::word_lipschitz(s, w)));
        const auto per_axis = static_cast<std::size_t>(std::ceil(2.0 * delta / spacing));
        double total = 1.0;
        for (int a = 0; a < d; ++a) total *= static_cast<double>(per_axis);
        if (total > static_cast<double>(opt.max_samples))
            throw ResolutionError("exactness_N: ball image needs " + std::to_string(total) +
                                  " samples; lower the cap or coarsen the grid");
        std::size_t bins_total = 1;
        for (int a = 0; a < d; ++a) bins_total *= cells;
        std::vector<char> hit(bins_total, 0);
        std::size_t hits = 0;
        const double* c = g.coords(centre);
        std::array<std::size_t, kMaxDim> pos{};
        for (;;) {
            Point x;
            x.dim = d;
            bool inside = true;
            for (int a = 0; a < d; ++a) {
                const double off = -delta + (static_cast<double>(pos[static_cast<std::size_t>(a)]) + 0.5) * spacing;
                if (!(std::fabs(off) < delta)) inside = false;
                x[a] = c[a] + off;
            }
            if (inside && (sp.periodic() || (x[0] >= 0.0 && x[0] <= 1.0))) {
                x = sp.canonical(x);
                x = apply_word(s, w, w.size(), x);
                std::size_t bin = 0;
                for (int a = 0; a < d; ++a) {
                    auto b = static_cast<std::size_t>(std::floor(x[a] * static_cast<double>(cells)));
                    bin = bin * cells + std::min(b, cells - 1);
                }
                if (!hit[bin]) {
                    hit[bin] = 1;
                    ++hits;
                }
            }
            int a = d - 1;
            while (a >= 0 && ++pos[static_cast<std::size_t>(a)] == per_axis) {
                pos[static_cast<std::size_t>(a)] = 0;
                --a;
            }
            if (a < 0) break;
        }
        return hits == bins_total;
    };

    for (std::size_t n = 1; n <= opt.cap; ++n) {
        std::vector<Word> ws;
        for (std::size_t m = 1; m <= opt.m_max; ++m) {
            const WordEnsemble ens(s, m, n, opt.budget, derive_seed(opt.seed, "exactness/" + std::to_string(m)));
            for (std::size_t i = 0; i < ens.count(); ++i) ws.push_back(ens.at(i));
        }
        const std::size_t jobs = ws.size() * centres.size();
        std::vector<char> ok(jobs, 0);
        parallel_for(jobs, opt.threads, [&](std::size_t j) {
            ok[j] = dense_image(ws[j / centres.size()], centres[j % centres.size()]) ? 1 : 0;
        });
        if (std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; })) {
            out.empirical = n;
            break;
        }
    }
    if (out.empirical == 0)
        throw ResolutionError("exactness_N: ball images are not h-dense for any n <= " + std::to_string(opt.cap) +
                              " (not exact at this scale)");
    if (out.analytic && out.empirical > *out.analytic)
        throw ResolutionError("exactness_N: empirical N=" + std::to_string(out.empirical) + " exceeds analytic N=" +
                              std::to_string(*out.analytic));
    out.value = out.analytic ? *out.analytic : out.empirical + 1;
    return out;
}

/// h_{w,x}^{m,n}(y): the preimage z of y under phi_w^{m,n} whose orbit follows
/// that of x, obtained by composing local inverse branches along the orbit of x.
inline Point inverse_branch_compose(const NaifsSchedule& s, const Word& w, const Point& x, const Point& y) {
    check_word(s, w);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& info = s.map(w.start + i, w.symbols[i]).info();
        if (!info.has_branches || !(info.expanding || info.weakly_expanding || info.isometry))
            throw PreconditionError("inverse_branch_compose: " + info.family + " has no inverse branches");
    }
    const auto orb = orbit(s, w, x);
    const double rho = w.size() ? detail::word_rho(s, w, 0, w.size()) : 1e300;
    if (!(s.space().distance(y, orb.back()) < rho))
        throw InputError("inverse_branch_compose: y is not within rho of the image of x");
    Point z = s.space().canonical(y);
    for (std::size_t j = w.size(); j-- > 0;) z = s.map(w.start + j, w.symbols[j]).local_inverse(orb[j], z);
    return z;
}

struct TraceInstance {
    Word word;                                            // starts at the level of time 0
    std::vector<Point> targets;                           // x_1 .. x_s
    std::vector<std::pair<std::size_t, std::size_t>> windows;  // (j_m, k_m)
    double delta = 0.0;
};

struct TraceReport {
    std::vector<double> window_error;
    double max_error = 0.0;
    bool pass = false;
};

inline void check_instance(const NaifsSchedule& s, const TraceInstance& inst) {
    if (inst.targets.empty() || inst.targets.size() != inst.windows.size())
        throw InputError("trace instance: one window per target is required");
    if (!(inst.delta > 0.0)) throw InputError("trace instance: delta must be positive");
    for (std::size_t m = 0; m < inst.windows.size(); ++m) {
        const auto [j, k] = inst.windows[m];
        if (j > k) throw InputError("trace instance: window start after its end");
        if (m && j <= inst.windows[m - 1].second) throw InputError("trace instance: windows must be increasing");
        if (inst.targets[m].dim != s.space().dim()) throw InputError("trace instance: target dimension mismatch");
    }
    if (inst.windows.front().first != 0) throw InputError("trace instance: the first window must start at 0");
    if (inst.word.size() < inst.windows.back().second) throw InputError("trace instance: word shorter than the windows");
    check_word(s, inst.word);
}

/// Random instance: `targets` uniform points, window lengths in [0, max_window],
/// consecutive windows separated by exactly `gap`, and a uniform word.
inline TraceInstance random_trace_instance(const NaifsSchedule& s, std::size_t targets, std::size_t gap,
                                         std::size_t max_window, double delta, Rng& rng) {
    if (targets < 1) throw InputError("random_trace_instance: at least one target is required");
    TraceInstance inst;
    inst.delta = delta;
    std::size_t t = 0;
    for (std::size_t m = 0; m < targets; ++m) {
        if (m) t += gap;
        const std::size_t len = rng.below(max_window + 1);
        inst.windows.emplace_back(t, t + len);
        t += len;
        Point p;
        p.dim = s.space().dim();
        for (int a = 0; a < p.dim; ++a) p[a] = rng.uniform();
        inst.targets.push_back(p);
    }
    inst.word.start = 1;
    inst.word.symbols.resize(t);
    for (std::size_t j = 0; j < t; ++j)
        inst.word.symbols[j] = static_cast<std::uint32_t>(rng.below(s.level_size(1 + j)));
    return inst;
}

/// Largest distance between the orbit of x and the orbit of each target over its window.
inline TraceReport verify_trace(const NaifsSchedule& s, const TraceInstance& inst, const Point& x) {
    check_instance(s, inst);
    const auto ox = orbit(s, inst.word, x);
    TraceReport rep;
    for (std::size_t m = 0; m < inst.targets.size(); ++m) {
        const auto om = orbit(s, inst.word, inst.targets[m]);
        double e = 0.0;
        for (std::size_t i = inst.windows[m].first; i <= inst.windows[m].second; ++i)
            e = std::max(e, s.space().distance(ox[i], om[i]));
        rep.window_error.push_back(e);
        rep.max_error = std::max(rep.max_error, e);
    }
    rep.pass = rep.max_error <= inst.delta;
    return rep;
}

/// Builds a point whose orbit delta-traces every window, by the backward pass:
/// starting inside the last window, each gap is crossed by a grid point of the
/// radius-min(delta, rho) ball at the end of the previous window whose image
/// lands within rho of the current point, refined to an exact preimage by
/// inverse branches, then pulled back through the previous window along the
/// target orbit.
inline Point trace_specification(const NaifsSchedule& s, const Grid& g, const TraceInstance& inst,
                                 std::optional<std::size_t> required_gap = std::nullopt) {
    check_instance(s, inst);
    if (!s.uniformly_expanding())
        throw PreconditionError("trace_specification: the schedule is not uniformly expanding");
    const std::size_t gap_needed = required_gap ? *required_gap : exactness_N(s, inst.delta, g).value;
    for (std::size_t m = 1; m < inst.windows.size(); ++m)
        if (inst.windows[m].first - inst.windows[m - 1].second < gap_needed)
            throw PreconditionError("trace_specification: gap " + std::to_string(m) + " is shorter than N=" +
                                    std::to_string(gap_needed));

    const Space& sp = s.space();
    const Word& w = inst.word;
    const double r = std::min(inst.delta, s.rho_min());
    auto segment = [&](std::size_t from, std::size_t to) {
        return Word{w.start + from,
                    std::vector<std::uint32_t>(w.symbols.begin() + static_cast<std::ptrdiff_t>(from),
                                               w.symbols.begin() + static_cast<std::ptrdiff_t>(to))};
    };

    const std::size_t last = inst.targets.size() - 1;
    Point p = apply_word(s, w, inst.windows[last].first, inst.targets[last]);
    for (std::size_t m = last; m-- > 0;) {
        const auto [jm, km] = inst.windows[m];
        const std::size_t jn = inst.windows[m + 1].first;
        const Point um = apply_word(s, w, km, inst.targets[m]);
        const Word gap = segment(km, jn);
        const double rho_gap = detail::word_rho(s, w, km, jn);

        auto cand = ball_points(g, um, r);
        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(cand.size());
        for (std::size_t c : cand) ranked.emplace_back(sp.distance(apply_word(s, gap, gap.size(), g.point(c)), p), c);
        std::sort(ranked.begin(), ranked.end());

        std::optional<Point> v;
        for (const auto& [dist, c] : ranked) {
            if (!(dist < rho_gap)) break;
            const Point z = inverse_branch_compose(s, gap, g.point(c), p);
            if (!(sp.distance(z, um) < r)) continue;
            if (sp.distance(apply_word(s, gap, gap.size(), z), p) > 1e-9) continue;
            v = z;
            break;
        }
        if (!v)
            throw ResolutionError("trace_specification: no grid point of the ball at the end of window " +
                                  std::to_string(m + 1) + " reaches the next segment; refine the grid");
        const Point ref = apply_word(s, w, jm, inst.targets[m]);
        p = inverse_branch_compose(s, segment(jm, km), ref, *v);
    }
    const Point x = p;  // windows[0].first == 0

    const auto rep = verify_trace(s, inst, x);
    if (!rep.pass)
        throw ResolutionError("trace_specification: constructed point misses a window by " +
                              std::to_string(rep.max_error));
    return x;
}

/// Brute force over grid points: the first one that traces every window, if any.
inline std::optional<Point> search_trace(const NaifsSchedule& s, const Grid& g, const TraceInstance& inst) {
    check_instance(s, inst);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.point(i);
        if (verify_trace(s, inst, x).pass) return x;
    }
    return std::nullopt;
}

struct ExpansivityOptions {
    std::size_t pairs = 2000;
    std::size_t n_cap = 64;
    std::uint64_t seed = 0;
};

/// delta-expansivity: analytic for uniformly expanding schedules
/// (delta := min(delta, rho), k0(gamma) = ceil(log_sigma(delta/gamma)) + 1),
/// otherwise an empirical scan over random pairs and random words.
inline ExpansivityCertificate expansivity_check(const NaifsSchedule& s, double delta, const std::vector<double>& gammas,
                                                const ExpansivityOptions& opt = {}) {
    if (!(delta > 0.0)) throw InputError("expansivity_check: delta must be positive");
    for (double gm : gammas)
        if (!(gm > 0.0)) throw InputError("expansivity_check: gamma values must be positive");
    ExpansivityCertificate cert;
    cert.system_hash = s.hash();
    if (s.uniformly_expanding()) {
        cert.method = "analytic";
        cert.delta = std::min(delta, s.rho_min());
        if (cert.delta < delta) cert.notes.push_back("delta lowered to the injectivity constant rho");
        const double sigma = s.sigma_min();
        for (double gm : gammas) {
            const std::size_t k = detail::steps_to_reach(sigma, gm, cert.delta);
            cert.gamma_table.emplace_back(gm, k + 1);
        }
        cert.expansive = true;
        return cert;
    }

    cert.method = "empirical scan";
    cert.delta = delta;
    cert.expansive = true;
    const Space& sp = s.space();
    Rng rng(derive_seed(opt.seed, "expansivity"));
    auto random_point = [&] {
        Point p;
        p.dim = sp.dim();
        for (int a = 0; a < sp.dim(); ++a) p[a] = rng.uniform();
        return p;
    };
    for (double gm : gammas) {
        if (gm > sp.diameter()) {
            cert.notes.push_back("gamma above the diameter skipped");
            continue;
        }
        std::size_t k0 = 1;
        bool found = true;
        for (std::size_t t = 0; t < opt.pairs; ++t) {
            Point x = random_point(), y = random_point();
            while (sp.distance(x, y) < gm) y = random_point();
            Word w{1, std::vector<std::uint32_t>(opt.n_cap)};
            for (std::size_t j = 0; j < opt.n_cap; ++j)
                w.symbols[j] = static_cast<std::uint32_t>(rng.below(s.level_size(1 + j)));
            std::size_t first = 0;
            double dmax = sp.distance(x, y);
            if (dmax > cert.delta) first = 0;
            else {
                first = opt.n_cap + 1;
                for (std::size_t j = 0; j < opt.n_cap; ++j) {
                    const Map& f = s.map(1 + j, w.symbols[j]);
                    f.apply(x.data());
                    f.apply(y.data());
                    if (sp.distance(x, y) > cert.delta) {
                        first = j + 1;
                        break;
                    }
                }
            }
            if (first > opt.n_cap) {
                found = false;
                cert.counterexample = "gamma=" + detail::fmt(gm) + ": a pair stays within delta for " +
                                      std::to_string(opt.n_cap) + " steps";
                break;
            }
            k0 = std::max(k0, first);
        }
        if (!found) {
            cert.expansive = false;
            break;
        }
        cert.gamma_table.emplace_back(gm, k0);
    }
    cert.notes.push_back("empirical verdict at scale: " + std::to_string(opt.pairs) + " pairs, words up to length " +
                         std::to_string(opt.n_cap));
    return cert;
}

/// Spot check of a certificate: random pairs with d >= gamma and random words
/// of length k0(gamma); returns the number of pairs with d_{w,k0} <= delta.
inline std::size_t certificate_violations(const NaifsSchedule& s, const ExpansivityCertificate& cert,
                                          std::size_t pairs, std::uint64_t seed) {
    const Space& sp = s.space();
    Rng rng(derive_seed(seed, "certificate-check"));
    std::size_t bad = 0;
    for (const auto& [gm, k0] : cert.gamma_table) {
        for (std::size_t t = 0; t < pairs; ++t) {
            Point x, y;
            x.dim = y.dim = sp.dim();
            do {
                for (int a = 0; a < sp.dim(); ++a) {
                    x[a] = rng.uniform();
                    y[a] = rng.uniform();
                }
            } while (sp.distance(x, y) < gm);
            Word w{1, std::vector<std::uint32_t>(k0)};
            for (std::size_t j = 0; j < k0; ++j) w.symbols[j] = static_cast<std::uint32_t>(rng.below(s.level_size(1 + j)));
            bad += bowen_distance(s, w, k0, x, y) <= cert.delta;
        }
    }
    return bad;
}

} // namespace naifs
