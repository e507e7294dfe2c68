#pragma once

// Growth-rate fits shared by the entropy and pressure estimators.
//
// For each scale eps the rate is the least-squares slope of log(value) against
// n over a clean window: the longest run of n, starting from the smallest, in
// which counts are neither saturated (close to the number of candidate points)
// nor distorted (the grid no longer resolves eps along the orbits). The
// reported value is the slope at the smallest eps that has a clean window of
// at least three points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "naifs/errors.hpp"

namespace naifs {

struct FitRow {
    double eps = 0.0;
    std::size_t n = 0;
    double log_value = 0.0;  // log of the averaged quantity
    double log_se = 0.0;     // standard error of log_value (sampling only)
    bool saturated = false;
    double unresolved = 0.0;  // fraction of grid-adjacent pairs pulled apart by more than eps/10
};

struct FitOptions {
    double unresolved_limit = 0.01;
    std::size_t min_points = 3;
    bool use_distortion_guard = true;
};

struct EpsFit {
    double eps = 0.0;
    bool usable = false;
    std::size_t n_min = 0, n_max = 0, points = 0;
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double fit_se = 0.0;       // from residuals
    double sampling_se = 0.0;  // propagated word-sampling error
    double rms_residual = 0.0;
    double suffix_max = std::numeric_limits<double>::quiet_NaN();  // max of log(value)/n over the upper half of the window
    std::size_t saturated_rows = 0, distorted_rows = 0;

    double se() const { return std::sqrt(fit_se * fit_se + sampling_se * sampling_se); }
};

struct RateEstimate {
    std::vector<double> eps_schedule;  // decreasing
    std::size_t n_min = 0, n_max = 0;
    std::vector<EpsFit> per_eps;       // same order as eps_schedule
    double value = std::numeric_limits<double>::quiet_NaN();
    double uncertainty = std::numeric_limits<double>::quiet_NaN();
    double value_eps = std::numeric_limits<double>::quiet_NaN();
    bool distortion_guard_relaxed = false;
    std::vector<std::string> warnings;
};

namespace detail {

inline EpsFit fit_one(double eps, std::vector<FitRow> rows, const FitOptions& opt, bool with_distortion) {
    std::sort(rows.begin(), rows.end(), [](const FitRow& a, const FitRow& b) { return a.n < b.n; });
    EpsFit f;
    f.eps = eps;
    std::vector<const FitRow*> window;
    for (const auto& r : rows) {
        f.saturated_rows += r.saturated;
        f.distorted_rows += r.unresolved > opt.unresolved_limit;
    }
    for (const auto& r : rows) {
        const bool distorted = with_distortion && r.unresolved > opt.unresolved_limit;
        if (r.saturated || distorted || !std::isfinite(r.log_value)) break;
        window.push_back(&r);
    }
    f.points = window.size();
    if (window.empty()) return f;
    f.n_min = window.front()->n;
    f.n_max = window.back()->n;
    if (window.size() < std::max<std::size_t>(opt.min_points, 2)) return f;

    const double m = static_cast<double>(window.size());
    double mean_n = 0.0, mean_y = 0.0;
    for (const auto* r : window) {
        mean_n += static_cast<double>(r->n);
        mean_y += r->log_value;
    }
    mean_n /= m;
    mean_y /= m;
    double sxx = 0.0, sxy = 0.0;
    for (const auto* r : window) {
        const double dx = static_cast<double>(r->n) - mean_n;
        sxx += dx * dx;
        sxy += dx * (r->log_value - mean_y);
    }
    f.slope = sxy / sxx;
    f.intercept = mean_y - f.slope * mean_n;
    double ssr = 0.0, var_sampling = 0.0;
    for (const auto* r : window) {
        const double dx = static_cast<double>(r->n) - mean_n;
        const double res = r->log_value - (f.intercept + f.slope * static_cast<double>(r->n));
        ssr += res * res;
        const double c = dx / sxx;
        var_sampling += c * c * r->log_se * r->log_se;
    }
    f.rms_residual = std::sqrt(ssr / m);
    f.fit_se = window.size() > 2 ? std::sqrt(ssr / (m - 2.0) / sxx) : 0.0;
    f.sampling_se = std::sqrt(var_sampling);
    const std::size_t half = window.size() / 2;
    for (std::size_t i = half; i < window.size(); ++i) {
        const double v = window[i]->log_value / static_cast<double>(window[i]->n);
        if (!(f.suffix_max >= v)) f.suffix_max = v;
    }
    f.usable = true;
    return f;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

} // namespace detail

/// Per-eps slopes and the value at the smallest usable eps.
/// Throws SaturationError when no eps has a usable window even after the
/// distortion guard is relaxed.
inline RateEstimate fit_rates(const std::vector<FitRow>& rows, const FitOptions& opt = {}) {
    if (rows.empty()) throw InputError("fit_rates: no records");
    std::map<double, std::vector<FitRow>, std::greater<>> by_eps;
    std::size_t n_min = std::numeric_limits<std::size_t>::max(), n_max = 0;
    for (const auto& r : rows) {
        if (!(r.eps > 0.0)) throw InputError("fit_rates: eps must be positive");
        by_eps[r.eps].push_back(r);
        n_min = std::min(n_min, r.n);
        n_max = std::max(n_max, r.n);
    }

    RateEstimate est;
    est.n_min = n_min;
    est.n_max = n_max;
    for (const auto& [eps, list] : by_eps) est.eps_schedule.push_back(eps);

    auto run = [&](bool with_distortion) {
        est.per_eps.clear();
        for (const auto& [eps, list] : by_eps) est.per_eps.push_back(detail::fit_one(eps, list, opt, with_distortion));
        for (auto it = est.per_eps.rbegin(); it != est.per_eps.rend(); ++it)
            if (it->usable) return &*it;
        return static_cast<EpsFit*>(nullptr);
    };

    const EpsFit* chosen = run(opt.use_distortion_guard);
    if (!chosen && opt.use_distortion_guard) {
        chosen = run(false);
        if (chosen) {
            est.distortion_guard_relaxed = true;
            est.warnings.push_back("distortion: no scale has a clean window of " + std::to_string(opt.min_points) +
                                   " points once unresolved counts are excluded; fitted with the saturation guard "
                                   "only, refine the grid");
        }
    }
    if (!chosen)
        throw SaturationError("every fit window is saturated or shorter than " + std::to_string(opt.min_points) +
                              " points; refine the grid or lower n");

    est.value = chosen->slope;
    est.uncertainty = chosen->se();
    est.value_eps = chosen->eps;

    for (const auto& f : est.per_eps) {
        if (f.saturated_rows)
            est.warnings.push_back("saturation: eps=" + detail::fmt(f.eps) + " has " +
                                   std::to_string(f.saturated_rows) + " saturated rows");
        if (f.distorted_rows && !est.distortion_guard_relaxed)
            est.warnings.push_back("distortion: eps=" + detail::fmt(f.eps) + " has " +
                                   std::to_string(f.distorted_rows) + " rows where the grid does not resolve eps");
        if (!f.usable) est.warnings.push_back("eps=" + detail::fmt(f.eps) + " has no usable window");
    }
    // Rates should not decrease as eps decreases.
    const EpsFit* prev = nullptr;
    for (const auto& f : est.per_eps) {
        if (!f.usable) continue;
        if (prev && f.slope < prev->slope - 3.0 * std::hypot(f.se(), prev->se()) - 1e-9)
            est.warnings.push_back("monotonicity: rate at eps=" + detail::fmt(f.eps) + " is below the rate at eps=" +
                                   detail::fmt(prev->eps));
        prev = &f;
    }
    return est;
}

} // namespace naifs
