#pragma once

// Topological pressure along words: Birkhoff sums, the weighted spanning
// infimum Q_n, the weighted separated supremum P_n, the open-cover sum C_n,
// their word averages, and growth-rate estimates.
//
// Weights e^{S_{w,n} psi} are handled as logs throughout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "naifs/certificate.hpp"
#include "naifs/detail/orbit_table.hpp"
#include "naifs/entropy.hpp"
#include "naifs/errors.hpp"
#include "naifs/exact_search.hpp"
#include "naifs/fit.hpp"
#include "naifs/naifs_core.hpp"
#include "naifs/parallel.hpp"

namespace naifs {

/// Continuous observable from a small catalog:
///   zero, constant(c), cos2pi (cos 2 pi x_1), hat(center, width, height).
class Potential {
public:
    static Potential zero() { return Potential("zero", {}, 0.0, 0.0); }
    static Potential constant(double c) { return Potential("constant", {c}, std::fabs(c), 0.0); }
    static Potential cos2pi() { return Potential("cos2pi", {}, 1.0, 2.0 * std::numbers::pi); }
    static Potential hat(double center, double width, double height) {
        if (!(width > 0.0)) throw InputError("hat potential: width must be positive");
        return Potential("hat", {center, width, height}, std::fabs(height), std::fabs(height) / width);
    }

    const std::string& name() const { return name_; }
    const std::vector<double>& params() const { return params_; }
    double sup_bound() const { return sup_; }
    double lipschitz_bound() const { return lip_; }
    bool is_zero() const { return name_ == "zero" || (name_ == "constant" && params_[0] == 0.0); }

    /// psi(x); the hat uses the circle distance on periodic spaces.
    double operator()(const double* x, bool periodic) const {
        if (name_ == "zero") return 0.0;
        if (name_ == "constant") return params_[0];
        if (name_ == "cos2pi") return std::cos(2.0 * std::numbers::pi * x[0]);
        double d = std::fabs(x[0] - params_[0]);
        if (periodic) d = std::min(d, 1.0 - d);
        return params_[2] * std::max(0.0, 1.0 - d / params_[1]);
    }

    double operator()(const Point& x, const Space& s) const { return (*this)(x.data(), s.periodic()); }

    std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        os << name_ << '(';
        for (std::size_t i = 0; i < params_.size(); ++i) os << (i ? "," : "") << params_[i];
        os << ')';
        return os.str();
    }

private:
    Potential(std::string name, std::vector<double> params, double sup, double lip)
        : name_(std::move(name)), params_(std::move(params)), sup_(sup), lip_(lip) {}

    std::string name_;
    std::vector<double> params_;
    double sup_;
    double lip_;
};

inline Potential make_potential(const std::string& name, const std::vector<double>& p) {
    auto need = [&](std::size_t k) {
        if (p.size() != k) throw InputError("potential " + name + ": expected " + std::to_string(k) + " parameters");
    };
    if (name == "zero") return need(0), Potential::zero();
    if (name == "constant") return need(1), Potential::constant(p[0]);
    if (name == "cos2pi") return need(0), Potential::cos2pi();
    if (name == "hat") return need(3), Potential::hat(p[0], p[1], p[2]);
    throw InputError("unknown potential '" + name + "'");
}

/// S_{w,n} psi(x) = sum_{j=0}^{n} psi(phi_w^{m,j} x): n+1 terms.
inline double birkhoff_sum(const NaifsSchedule& s, const Word& w, std::size_t n, const Potential& psi, Point x) {
    if (n > w.size()) throw InputError("birkhoff_sum: n exceeds the word length");
    const bool per = s.space().periodic();
    double sum = psi(x.data(), per);
    for (std::size_t j = 0; j < n; ++j) {
        s.map(w.start + j, w.symbols[j]).apply(x.data());
        sum += psi(x.data(), per);
    }
    return sum;
}

enum class BoundKind { exact, lower, upper };

inline std::string to_string(BoundKind b) {
    switch (b) {
        case BoundKind::exact: return "exact";
        case BoundKind::lower: return "lower bound";
        case BoundKind::upper: return "upper bound";
    }
    return "?";
}

/// A weighted sum sum_{x in F} e^{S_{w,n} psi(x)}, kept as its logarithm.
struct WeightedSum {
    double log_value = -std::numeric_limits<double>::infinity();
    std::size_t members = 0;
    BoundKind bound = BoundKind::exact;
    double value() const { return std::exp(log_value); }
};

namespace detail {

inline std::vector<double> birkhoff_logs(const OrbitTable& t, const Potential& psi) {
    const bool per = t.space.periodic();
    std::vector<double> lw(t.count, 0.0);
    for (std::size_t j = 0; j <= t.steps; ++j)
        for (std::size_t i = 0; i < t.count; ++i) lw[i] += psi(t.at(j, i), per);
    return lw;
}

inline double lse_of(const std::vector<double>& lw, const std::vector<std::size_t>& idx) {
    std::vector<double> v;
    v.reserve(idx.size());
    for (std::size_t i : idx) v.push_back(lw[i]);
    return log_sum_exp(v);
}

/// Scan order by weight; ties keep grid order.
inline std::vector<std::size_t> weight_order(const std::vector<double>& lw, bool descending) {
    auto order = identity_order(lw.size());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return descending ? lw[a] > lw[b] : lw[a] < lw[b];
    });
    return order;
}

inline WeightedSum separated_sup(const OrbitTable& t, const std::vector<double>& lw, double eps, bool exact) {
    if (exact) {
        const auto conflict = ball_masks(t, eps, false, true);
        const double m = *std::max_element(lw.begin(), lw.end());
        std::vector<double> w(lw.size());
        for (std::size_t i = 0; i < lw.size(); ++i) w[i] = std::exp(lw[i] - m);
        const auto sel = exact::max_weight_independent(conflict, w);
        return {m + std::log(sel.value), sel.size(), BoundKind::exact};
    }
    const auto kept = greedy_net(t, weight_order(lw, true), eps, NetRule::separated);
    return {lse_of(lw, kept), kept.size(), BoundKind::lower};
}

inline WeightedSum spanning_inf(const OrbitTable& t, const std::vector<double>& lw, double eps, bool exact,
                                std::size_t cover_limit) {
    if (exact) {
        const auto balls = ball_masks(t, eps, false, false);
        const double m = *std::max_element(lw.begin(), lw.end());
        std::vector<double> w(lw.size());
        for (std::size_t i = 0; i < lw.size(); ++i) w[i] = std::exp(lw[i] - m);
        const auto sel = exact::min_weight_cover(balls, w);
        return {m + std::log(sel.value), sel.size(), BoundKind::exact};
    }
    const auto net = greedy_net(t, weight_order(lw, false), eps, NetRule::separated);
    WeightedSum best{lse_of(lw, net), net.size(), BoundKind::upper};
    if (t.count <= cover_limit) {
        const auto chosen = greedy_weighted_cover(ball_adjacency(t, eps, false), lw);
        const double v = lse_of(lw, chosen);
        if (v < best.log_value) best = {v, chosen.size(), BoundKind::upper};
    }
    return best;
}

/// Cover by open dynamical eps/2-balls (d_{w,n}-diameter < eps); each ball
/// weighs e^{max of S_{w,n} psi over its grid members}.
inline WeightedSum cover_sum(const OrbitTable& t, const std::vector<double>& lw, double eps, std::size_t cover_limit) {
    const double r = eps / 2.0;
    auto ball_max = [&](const Adjacency& adj, std::size_t c) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto* p = adj.begin(c); p != adj.end(c); ++p) m = std::max(m, lw[*p]);
        return m;
    };
    if (t.count <= cover_limit) {
        const auto adj = ball_adjacency(t, r, true);
        std::vector<double> bw(t.count);
        for (std::size_t i = 0; i < t.count; ++i) bw[i] = ball_max(adj, i);
        const auto chosen = greedy_weighted_cover(adj, bw);
        return {lse_of(bw, chosen), chosen.size(), BoundKind::upper};
    }
    const auto centres = greedy_net(t, weight_order(lw, false), r, NetRule::strict);
    OrbitIndex index(t, r);
    for (std::size_t i = 0; i < t.count; ++i) index.insert(i);
    std::vector<double> v;
    v.reserve(centres.size());
    for (std::size_t c : centres) {
        double m = lw[c];
        index.any_near(c, [&](std::size_t j) {
            if (t.within_strict(c, j, r)) m = std::max(m, lw[j]);
            return false;
        });
        v.push_back(m);
    }
    return {log_sum_exp(v), centres.size(), BoundKind::upper};
}

inline void check_pressure_args(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n, double eps,
                                bool exact, Subset y) {
    check_count_args(s, g, w, n, eps);
    check_subset(g, y);
    if (exact) exact::check_size(subset_size(g, y), "exact pressure");
}

} // namespace detail

/// Q_n(w, psi, eps): exact minimum over spanning sets drawn from Y (|Y| <= 24),
/// or an upper bound (weighted greedy cover / light-first net).
inline WeightedSum weighted_spanning_inf(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n, double eps,
                                         const Potential& psi, bool exact = false, Subset y = nullptr,
                                         std::size_t cover_limit = 2048) {
    detail::check_pressure_args(s, g, w, n, eps, exact, y);
    const auto t = detail::compute_orbits(s, w, n, g, y);
    return detail::spanning_inf(t, detail::birkhoff_logs(t, psi), eps, exact, cover_limit);
}

/// P_n(w, psi, eps): exact maximum over separated subsets of Y (|Y| <= 24),
/// or a lower bound (heavy-first greedy net).
inline WeightedSum weighted_separated_sup(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n,
                                          double eps, const Potential& psi, bool exact = false, Subset y = nullptr) {
    detail::check_pressure_args(s, g, w, n, eps, exact, y);
    const auto t = detail::compute_orbits(s, w, n, g, y);
    return detail::separated_sup(t, detail::birkhoff_logs(t, psi), eps, exact);
}

/// C_n(w, psi, eps): greedy weighted cover by dynamical eps/2-balls (upper bound).
inline WeightedSum cover_pressure_sum(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n, double eps,
                                      const Potential& psi, Subset y = nullptr, std::size_t cover_limit = 2048) {
    detail::check_pressure_args(s, g, w, n, eps, false, y);
    const auto t = detail::compute_orbits(s, w, n, g, y);
    return detail::cover_sum(t, detail::birkhoff_logs(t, psi), eps, cover_limit);
}

/// Var_{w,n}(psi, eps) over grid pairs with d_{w,n} < eps (a lower bound for the
/// supremum over the continuum).
inline double variation(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n, double eps,
                        const Potential& psi, Subset y = nullptr) {
    detail::check_count_args(s, g, w, n, eps);
    detail::check_subset(g, y);
    const auto t = detail::compute_orbits(s, w, n, g, y);
    const auto lw = detail::birkhoff_logs(t, psi);
    detail::OrbitIndex index(t, eps);
    double var = 0.0;
    for (std::size_t i = 0; i < t.count; ++i) {
        index.any_near(i, [&](std::size_t j) {
            if (t.within_strict(i, j, eps)) var = std::max(var, std::fabs(lw[i] - lw[j]));
            return false;
        });
        index.insert(i);
    }
    return var;
}

/// Largest |psi(a) - psi(b)| over pairs of same-time orbit points with
/// d(a, b) <= r, for pairs whose Bowen distance is <= r.
inline double orbit_oscillation(const NaifsSchedule& s, const Grid& g, const Word& w, std::size_t n, double r,
                                const Potential& psi, Subset y = nullptr) {
    detail::check_count_args(s, g, w, n, r);
    detail::check_subset(g, y);
    const auto t = detail::compute_orbits(s, w, n, g, y);
    const bool per = t.space.periodic();
    double best = 0.0;
    for (std::size_t i = 0; i < t.count; ++i)
        for (std::size_t k = i + 1; k < t.count; ++k)
            if (t.within(i, k, r))
                for (std::size_t j = 0; j <= t.steps; ++j)
                    best = std::max(best, std::fabs(psi(t.at(j, i), per) - psi(t.at(j, k), per)));
    return best;
}

struct PressureRecord {
    double eps = 0.0;
    std::size_t n = 0;
    BigInt ensemble_size = 0;
    std::size_t words_evaluated = 0;
    bool sampled = false;
    // Means over words, as logs (the plain means can overflow).
    double log_q_mean = 0.0, log_p_mean = 0.0, log_c_mean = 0.0;
    // Standard errors of the logs (delta method); 0 when exhaustive.
    double log_q_se = 0.0, log_p_se = 0.0, log_c_se = 0.0;
    double p_count_mean = 0.0;  // points in the separated sets behind P_n
    double unresolved = 0.0;
    bool saturated = false;
    std::size_t y_size = 0;

    double q_mean() const { return std::exp(log_q_mean); }
    double p_mean() const { return std::exp(log_p_mean); }
    double c_mean() const { return std::exp(log_c_mean); }
};

namespace detail {

/// log of the mean of e^{v_i}, and the standard error of that log.
inline void log_mean(const std::vector<double>& logs, bool sampled, double& lm, double& lse) {
    const double m = *std::max_element(logs.begin(), logs.end());
    const auto k = static_cast<double>(logs.size());
    double sum = 0.0;
    for (double v : logs) sum += std::exp(v - m);
    const double mean = sum / k;
    lm = m + std::log(mean);
    lse = 0.0;
    if (sampled && logs.size() > 1) {
        double ss = 0.0;
        for (double v : logs) {
            const double d = std::exp(v - m) - mean;
            ss += d * d;
        }
        lse = std::sqrt(ss / (k - 1.0) / k) / mean;
    }
}

} // namespace detail

/// Q_n, P_n and C_n averaged over words(S, start, n, budget, seed).
inline std::vector<PressureRecord> averaged_pressure(const NaifsSchedule& s, const Grid& g,
                                                     const std::vector<double>& eps_list,
                                                     const std::vector<std::size_t>& n_list, const Potential& psi,
                                                     const CountOptions& opt = {}) {
    detail::check_lists(eps_list, n_list);
    if (!(s.space() == g.space())) throw InputError("grid and schedule live on different spaces");
    detail::check_subset(g, opt.subset);
    const auto pairs = detail::adjacent_pairs(g, opt.subset);
    const std::size_t y_size = detail::subset_size(g, opt.subset);

    struct PerWord {
        std::vector<double> q, p, c, pc, un;
    };
    std::vector<std::vector<PressureRecord>> by_n(n_list.size());
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const std::size_t n = n_list[ni];
        const WordEnsemble ens(s, opt.start, n, opt.budget, opt.seed);
        std::vector<PerWord> per_word(ens.count());
        parallel_for(ens.count(), opt.threads, [&](std::size_t i) {
            const Word w = ens.at(i);
            const auto t = detail::compute_orbits(s, w, n, g, opt.subset);
            const auto lw = detail::birkhoff_logs(t, psi);
            std::vector<double> pair_d;
            for (const auto& [a, b] : pairs) pair_d.push_back(t.bowen(a, b));
            auto& pw = per_word[i];
            for (double eps : eps_list) {
                const auto p = detail::separated_sup(t, lw, eps, false);
                pw.p.push_back(p.log_value);
                pw.pc.push_back(static_cast<double>(p.members));
                pw.q.push_back(detail::spanning_inf(t, lw, eps, false, opt.cover_limit).log_value);
                pw.c.push_back(opt.compute_cover ? detail::cover_sum(t, lw, eps, opt.cover_limit).log_value
                                                 : std::numeric_limits<double>::quiet_NaN());
                std::size_t bad = 0;
                for (double d : pair_d) bad += d > eps / 10.0;
                pw.un.push_back(pairs.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(pairs.size()));
            }
        });
        for (std::size_t e = 0; e < eps_list.size(); ++e) {
            PressureRecord rec;
            rec.eps = eps_list[e];
            rec.n = n;
            rec.ensemble_size = ens.ensemble_size();
            rec.words_evaluated = ens.count();
            rec.sampled = ens.sampled();
            rec.y_size = y_size;
            std::vector<double> q, p, c;
            double pc = 0.0, un = 0.0;
            for (const auto& pw : per_word) {
                q.push_back(pw.q[e]);
                p.push_back(pw.p[e]);
                c.push_back(pw.c[e]);
                pc += pw.pc[e];
                un += pw.un[e];
            }
            detail::log_mean(q, rec.sampled, rec.log_q_mean, rec.log_q_se);
            detail::log_mean(p, rec.sampled, rec.log_p_mean, rec.log_p_se);
            if (opt.compute_cover) detail::log_mean(c, rec.sampled, rec.log_c_mean, rec.log_c_se);
            else rec.log_c_mean = std::numeric_limits<double>::quiet_NaN();
            rec.p_count_mean = pc / static_cast<double>(per_word.size());
            rec.unresolved = un / static_cast<double>(per_word.size());
            rec.saturated = rec.p_count_mean >= opt.saturation_fraction * static_cast<double>(y_size);
            by_n[ni].push_back(std::move(rec));
        }
    }
    std::vector<PressureRecord> out;
    for (std::size_t e = 0; e < eps_list.size(); ++e)
        for (std::size_t ni = 0; ni < n_list.size(); ++ni) out.push_back(by_n[ni][e]);
    return out;
}

struct PressureEstimate {
    RateEstimate rate;  // from log P_n
    double q_value = std::numeric_limits<double>::quiet_NaN();  // same fit on log Q_n
    double q_uncertainty = std::numeric_limits<double>::quiet_NaN();
    std::string label;

    double value() const { return rate.value; }
    double uncertainty() const { return rate.uncertainty; }
};

inline std::vector<FitRow> pressure_rows(const std::vector<PressureRecord>& records, bool use_q) {
    std::vector<FitRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records)
        rows.push_back({r.eps, r.n, use_q ? r.log_q_mean : r.log_p_mean, use_q ? r.log_q_se : r.log_p_se, r.saturated,
                        r.unresolved});
    return rows;
}

/// Pressure from records: the entropy fit applied to log P_n, with log Q_n as a cross-check.
inline PressureEstimate pressure_estimate(const std::vector<PressureRecord>& records, const FitOptions& opt = {}) {
    PressureEstimate out;
    out.rate = fit_rates(pressure_rows(records, false), opt);
    out.label = "pressure (eps -> 0 at the smallest usable eps)";
    try {
        const auto q = fit_rates(pressure_rows(records, true), opt);
        out.q_value = q.value;
        out.q_uncertainty = q.uncertainty;
        if (std::fabs(q.value - out.rate.value) > 3.0 * std::hypot(q.uncertainty, out.rate.uncertainty) + 0.05)
            out.rate.warnings.push_back("cross-check: rates from Q_n and P_n differ by " +
                                        detail::fmt(q.value - out.rate.value));
    } catch (const SaturationError&) {
        out.rate.warnings.push_back("cross-check: no usable window for Q_n");
    }
    return out;
}

/// Pressure read off at one scale eps < delta, valid for delta-expansive systems.
inline PressureEstimate fixed_scale_pressure(const NaifsSchedule& s, const Grid& g, double eps,
                                             const ExpansivityCertificate& cert, const Potential& psi,
                                             const std::vector<std::size_t>& n_list, const CountOptions& opt = {},
                                             const FitOptions& fit = {}) {
    if (!cert.expansive)
        throw PreconditionError("fixed_scale_pressure: the certificate does not establish expansivity (" +
                                cert.method + ")");
    if (cert.system_hash != s.hash())
        throw PreconditionError("fixed_scale_pressure: the certificate was issued for a different system");
    if (!(eps > 0.0 && eps < cert.delta))
        throw PreconditionError("fixed_scale_pressure: eps must satisfy 0 < eps < delta = " + detail::fmt(cert.delta));
    auto out = pressure_estimate(averaged_pressure(s, g, {eps}, n_list, psi, opt), fit);
    out.label = "fixed-scale (valid under delta-expansivity, delta=" + detail::fmt(cert.delta) + ")";
    return out;
}

} // namespace naifs
