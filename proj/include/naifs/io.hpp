#pragma once

// CSV and JSON serialization of records, estimates and certificates, plus
// atomic file output. Numbers are written in shortest round-trip form so the
// same values always produce the same bytes.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "naifs/certificate.hpp"
#include "naifs/entropy.hpp"
#include "naifs/errors.hpp"
#include "naifs/fit.hpp"
#include "naifs/pressure.hpp"
#include "naifs/properties.hpp"

namespace naifs::io {

using json = nlohmann::ordered_json;

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string hex(std::uint64_t h) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + sizeof buf, h, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

/// NaN and infinities become null so the output stays valid JSON.
inline json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- tables ----------------------------------------------------------------

inline std::string counts_csv(const std::vector<CountRecord>& records) {
    std::string out = "eps,n,ensemble_size,sampled,s_mean,s_stderr,r_mean,r_stderr,cover_mean\n";
    for (const auto& r : records) {
        out += num(r.eps) + "," + std::to_string(r.n) + "," + r.ensemble_size.str() + "," + (r.sampled ? "1" : "0") +
               "," + num(r.s_mean) + "," + num(r.s_stderr) + "," + num(r.r_mean) + "," + num(r.r_stderr) + "," +
               num(r.cover_mean) + "\n";
    }
    return out;
}

inline std::string pressure_csv(const std::vector<PressureRecord>& records) {
    std::string out = "eps,n,q_mean,p_mean,c_mean,q_stderr,p_stderr,c_stderr\n";
    // Means are reported as logs' exponentials; stderrs are of the logs.
    for (const auto& r : records) {
        out += num(r.eps) + "," + std::to_string(r.n) + "," + num(r.q_mean()) + "," + num(r.p_mean()) + "," +
               num(r.c_mean()) + "," + num(r.log_q_se) + "," + num(r.log_p_se) + "," + num(r.log_c_se) + "\n";
    }
    return out;
}

// ---- JSON ------------------------------------------------------------------

inline json to_json(const EpsFit& f) {
    return json{{"eps", f.eps},           {"usable", f.usable},         {"n_min", f.n_min},
                {"n_max", f.n_max},       {"points", f.points},         {"slope", jnum(f.slope)},
                {"intercept", jnum(f.intercept)}, {"fit_se", f.fit_se}, {"sampling_se", f.sampling_se},
                {"rms_residual", f.rms_residual}, {"saturated_rows", f.saturated_rows},
                {"distorted_rows", f.distorted_rows}};
}

/// The shared estimate schema: kind, system_hash, value, uncertainty, per_eps, warnings.
inline json estimate_json(const std::string& kind, std::uint64_t system_hash, const RateEstimate& e) {
    json per = json::array();
    for (const auto& f : e.per_eps) per.push_back(to_json(f));
    json eps = json::array();
    for (double v : e.eps_schedule) eps.push_back(v);
    return json{{"kind", kind},
                {"system_hash", hex(system_hash)},
                {"value", jnum(e.value)},
                {"uncertainty", jnum(e.uncertainty)},
                {"value_eps", jnum(e.value_eps)},
                {"eps_schedule", eps},
                {"n_range", {e.n_min, e.n_max}},
                {"distortion_guard_relaxed", e.distortion_guard_relaxed},
                {"per_eps", per},
                {"warnings", e.warnings}};
}

inline json estimate_json(const std::string& kind, std::uint64_t system_hash, const PressureEstimate& p) {
    auto j = estimate_json(kind, system_hash, p.rate);
    j["label"] = p.label;
    j["q_value"] = jnum(p.q_value);
    j["q_uncertainty"] = jnum(p.q_uncertainty);
    return j;
}

inline json to_json(const CountRecord& r) {
    return json{{"eps", r.eps},
                {"n", r.n},
                {"ensemble_size", r.ensemble_size.str()},
                {"words_evaluated", r.words_evaluated},
                {"sampled", r.sampled},
                {"s_mean", r.s_mean},
                {"s_stderr", r.s_stderr},
                {"r_mean", r.r_mean},
                {"r_stderr", r.r_stderr},
                {"cover_mean", jnum(r.cover_mean)},
                {"unresolved", r.unresolved},
                {"saturated", r.saturated},
                {"y_size", r.y_size}};
}

inline json to_json(const PressureRecord& r) {
    return json{{"eps", r.eps},
                {"n", r.n},
                {"ensemble_size", r.ensemble_size.str()},
                {"words_evaluated", r.words_evaluated},
                {"sampled", r.sampled},
                {"log_q_mean", r.log_q_mean},
                {"log_p_mean", r.log_p_mean},
                {"log_c_mean", r.log_c_mean},
                {"log_q_se", r.log_q_se},
                {"log_p_se", r.log_p_se},
                {"log_c_se", r.log_c_se},
                {"p_count_mean", r.p_count_mean},
                {"unresolved", r.unresolved},
                {"saturated", r.saturated},
                {"y_size", r.y_size}};
}

inline json to_json(const ExpansivityCertificate& c) {
    json table = json::array();
    for (const auto& [g, k] : c.gamma_table) table.push_back(json{{"gamma", g}, {"k0", k}});
    return json{{"delta", c.delta},
                {"gamma_table", table},
                {"method", c.method},
                {"system_hash", hex(c.system_hash)},
                {"expansive", c.expansive},
                {"counterexample", c.counterexample ? json(*c.counterexample) : json(nullptr)},
                {"notes", c.notes}};
}

inline json to_json(const Point& p) {
    json a = json::array();
    for (int i = 0; i < p.dim; ++i) a.push_back(p[i]);
    return a;
}

inline json to_json(const TraceReport& r) {
    return json{{"window_error", r.window_error}, {"max_error", r.max_error}, {"pass", r.pass}};
}

inline json to_json(const Word& w) { return json{{"start", w.start}, {"symbols", w.symbols}}; }

inline json to_json(const TraceInstance& inst) {
    json targets = json::array();
    for (const auto& p : inst.targets) targets.push_back(to_json(p));
    json windows = json::array();
    for (const auto& [j, k] : inst.windows) windows.push_back({j, k});
    return json{{"word", to_json(inst.word)}, {"targets", targets}, {"windows", windows}, {"delta", inst.delta}};
}

inline json to_json(const ExactnessResult& e) {
    return json{{"value", e.value},
                {"analytic", e.analytic ? json(*e.analytic) : json(nullptr)},
                {"empirical", e.empirical}};
}

} // namespace naifs::io
