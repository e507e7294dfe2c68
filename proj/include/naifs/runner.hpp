#pragma once

// Config-driven experiment runner: executes one experiment, writes its
// payload files atomically, and records a manifest; `report` merges the
// manifests found under a directory.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "naifs/config.hpp"
#include "naifs/entropy.hpp"
#include "naifs/errors.hpp"
#include "naifs/io.hpp"
#include "naifs/pressure.hpp"
#include "naifs/properties.hpp"

#ifndef NAIFS_VERSION
#define NAIFS_VERSION "0.1.0"
#endif

namespace naifs {

inline constexpr const char* kVersion = NAIFS_VERSION;

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_precondition = 2, exit_numeric = 3 };

struct RunOverrides {
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::size_t> budget;
};

struct StageTiming {
    std::string name;
    double seconds = 0.0;
};

struct RunManifest {
    std::uint64_t config_hash = 0;
    std::string version = kVersion;
    std::string kind;
    std::string system;
    std::uint64_t system_hash = 0;
    double wall_time = 0.0;
    std::vector<StageTiming> stages;
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;
    std::string summary;  // one line
    double value = std::numeric_limits<double>::quiet_NaN();
    double uncertainty = std::numeric_limits<double>::quiet_NaN();
    io::json curves = io::json::array();  // [{curve, x, y}]
    int exit_code = exit_ok;
};

inline io::json to_json(const RunManifest& m) {
    io::json stages = io::json::array();
    for (const auto& s : m.stages) stages.push_back({{"name", s.name}, {"seconds", s.seconds}});
    return io::json{{"config_hash", io::hex(m.config_hash)},
                    {"version", m.version},
                    {"kind", m.kind},
                    {"system", m.system},
                    {"system_hash", io::hex(m.system_hash)},
                    {"wall_time", m.wall_time},
                    {"stages", stages},
                    {"warnings", m.warnings},
                    {"outputs", m.outputs},
                    {"summary", m.summary},
                    {"value", io::jnum(m.value)},
                    {"uncertainty", io::jnum(m.uncertainty)},
                    {"curves", m.curves},
                    {"exit_code", m.exit_code}};
}

namespace detail {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string value_pm(double v, double u) { return fmt(v) + " +- " + fmt(u); }

inline void add_eps_curve(RunManifest& m, const std::string& name, const RateEstimate& e) {
    for (const auto& f : e.per_eps)
        if (f.usable) m.curves.push_back({{"curve", name}, {"x", f.eps}, {"y", f.slope}});
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

inline std::string join(const std::vector<std::string>& v, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

} // namespace detail

/// Payload files keyed by name; manifest.json is added by the caller.
using Payload = std::map<std::string, std::string>;

/// Runs the experiment without touching the file system.
inline Payload execute(const ExperimentConfig& c, RunManifest& m) {
    const auto warn = validate(c);
    m.warnings.insert(m.warnings.end(), warn.begin(), warn.end());
    const NaifsSchedule s = make_schedule(c);
    const Grid g(s.space(), c.mesh);
    const unsigned threads = c.threads ? c.threads : default_threads();
    m.kind = c.kind;
    m.system = s.describe();
    m.system_hash = s.hash();

    CountOptions o;
    o.budget = c.budget;
    o.seed = derive_seed(c.seed, c.kind);
    o.threads = threads;
    o.cover_limit = c.cover_limit;
    o.compute_cover = c.compute_cover;
    const auto ns = c.n_list();
    Payload out;
    auto stage = [&](const std::string& name, const std::function<void()>& fn) {
        detail::Stopwatch sw;
        fn();
        m.stages.push_back({name, sw.seconds()});
    };
    auto take = [&](const std::vector<std::string>& w) {
        for (const auto& x : w)
            if (std::find(m.warnings.begin(), m.warnings.end(), x) == m.warnings.end()) m.warnings.push_back(x);
    };

    if (c.kind == "entropy") {
        std::vector<CountRecord> recs;
        stage("counts", [&] { recs = averaged_counts(s, g, c.eps, ns, o); });
        const auto est = entropy_estimate(recs);
        auto j = io::estimate_json("entropy", s.hash(), est);
        for (const auto& r : recs) j["records"].push_back(io::to_json(r));
        out["counts.csv"] = io::counts_csv(recs);
        out["entropy.json"] = io::dump(j);
        m.value = est.value;
        m.uncertainty = est.uncertainty;
        take(est.warnings);
        detail::add_eps_curve(m, "entropy_vs_eps", est);
        m.summary = "entropy " + detail::value_pm(est.value, est.uncertainty);
    } else if (c.kind == "asymptotic_entropy") {
        AsymptoticEstimate a;
        stage("shifted counts", [&] { a = asymptotic_entropy(s, g, c.eps, ns, c.shifts, o, c.slack); });
        io::json shifts = io::json::array();
        std::string csv = "k,value,uncertainty\n";
        for (const auto& sh : a.shifts) {
            shifts.push_back(io::json{{"k", sh.k}, {"estimate", io::estimate_json("entropy", s.hash(), sh.estimate)}});
            csv += std::to_string(sh.k) + "," + io::num(sh.estimate.value) + "," + io::num(sh.estimate.uncertainty) + "\n";
            m.curves.push_back({{"curve", "entropy_vs_shift"}, {"x", sh.k}, {"y", sh.estimate.value}});
            take(sh.estimate.warnings);
        }
        out["shifts.csv"] = csv;
        out["asymptotic.json"] = io::dump(io::json{{"kind", "asymptotic_entropy"},
                                                   {"system_hash", io::hex(s.hash())},
                                                   {"value", io::jnum(a.value)},
                                                   {"uncertainty", io::jnum(a.uncertainty)},
                                                   {"monotone", a.monotone},
                                                   {"chaotic", a.chaotic},
                                                   {"violations", a.violations},
                                                   {"shifts", shifts},
                                                   {"warnings", m.warnings}});
        take(a.violations);
        m.value = a.value;
        m.uncertainty = a.uncertainty;
        m.summary = "asymptotic entropy " + detail::value_pm(a.value, a.uncertainty) +
                    (a.chaotic ? " (chaotic)" : " (not chaotic at this resolution)");
    } else if (c.kind == "pressure") {
        const Potential psi = make_potential(c.potential, c.potential_params);
        std::vector<PressureRecord> recs;
        stage("weighted sums", [&] { recs = averaged_pressure(s, g, c.eps, ns, psi, o); });
        const auto est = pressure_estimate(recs);
        auto j = io::estimate_json("pressure", s.hash(), est);
        j["potential"] = psi.describe();
        for (const auto& r : recs) j["records"].push_back(io::to_json(r));
        out["pressure.csv"] = io::pressure_csv(recs);
        out["pressure.json"] = io::dump(j);
        m.value = est.value();
        m.uncertainty = est.uncertainty();
        take(est.rate.warnings);
        detail::add_eps_curve(m, "pressure_vs_eps", est.rate);
        m.summary = "pressure(" + psi.describe() + ") " + detail::value_pm(est.value(), est.uncertainty());
    } else if (c.kind == "fixed_scale_pressure") {
        const Potential psi = make_potential(c.potential, c.potential_params);
        ExpansivityCertificate cert;
        const std::vector<double> gammas = c.gammas.empty() ? std::vector<double>{c.fixed_eps / 2.0} : c.gammas;
        stage("certificate", [&] { cert = expansivity_check(s, c.delta, gammas, {2000, 64, derive_seed(c.seed, "cert")}); });
        out["certificate.json"] = io::dump(io::to_json(cert));
        PressureEstimate est;
        stage("weighted sums", [&] { est = fixed_scale_pressure(s, g, c.fixed_eps, cert, psi, ns, o); });
        auto j = io::estimate_json("fixed_scale_pressure", s.hash(), est);
        j["potential"] = psi.describe();
        j["eps"] = c.fixed_eps;
        out["fixed_scale_pressure.json"] = io::dump(j);
        m.value = est.value();
        m.uncertainty = est.uncertainty();
        take(est.rate.warnings);
        m.summary = "fixed-scale pressure(" + psi.describe() + ") at eps=" + detail::fmt(c.fixed_eps) + " " +
                    detail::value_pm(est.value(), est.uncertainty());
    } else if (c.kind == "nonwandering") {
        NonwanderingResult nw;
        stage("returns", [&] {
            nw = nonwandering_set(s, g, c.radius, c.n_max, c.m_max, c.budget, derive_seed(c.seed, "nonwandering"), threads);
        });
        std::string csv = "index";
        for (int a = 0; a < g.dim(); ++a) csv += ",x" + std::to_string(a);
        csv += "\n";
        for (std::size_t i : nw.points) {
            csv += std::to_string(i);
            for (int a = 0; a < g.dim(); ++a) csv += "," + io::num(g.coords(i)[a]);
            csv += "\n";
        }
        out["nonwandering.csv"] = csv;
        io::json j{{"kind", "nonwandering"},
                   {"system_hash", io::hex(s.hash())},
                   {"radii", nw.radii},
                   {"n_max", nw.n_max},
                   {"m_max", nw.m_max},
                   {"budget", nw.budget},
                   {"marked", nw.points.size()},
                   {"grid_size", g.size()}};
        m.summary = "nonwandering estimate: " + std::to_string(nw.points.size()) + " of " + std::to_string(g.size()) +
                    " grid points";
        if (c.eps.size() >= 2 && !nw.points.empty()) {
            CountOptions on = o;
            on.subset = &nw.points;
            std::vector<CountRecord> local, global;
            stage("entropy on the estimate", [&] {
                local = averaged_counts(s, g, c.eps, ns, on);
                global = averaged_counts(s, g, c.eps, ns, o);
            });
            const auto el = entropy_estimate(local);
            const auto eg = entropy_estimate(global);
            j["entropy_on_set"] = io::estimate_json("entropy", s.hash(), el);
            j["entropy_global"] = io::estimate_json("entropy", s.hash(), eg);
            take(el.warnings);
            take(eg.warnings);
            m.value = el.value;
            m.uncertainty = el.uncertainty;
            m.summary += "; entropy on it " + detail::value_pm(el.value, el.uncertainty) + " vs global " +
                         detail::value_pm(eg.value, eg.uncertainty);
        }
        out["nonwandering.json"] = io::dump(j);
    } else if (c.kind == "entropy_point") {
        std::vector<Point> centers;
        for (const auto& p : c.centers) {
            Point q;
            q.dim = static_cast<int>(p.size());
            for (int a = 0; a < q.dim; ++a) q[a] = p[static_cast<std::size_t>(a)];
            centers.push_back(q);
        }
        Rng rng(derive_seed(c.seed, "centers"));
        for (std::size_t i = 0; i < c.random_centers; ++i) {
            Point q;
            q.dim = g.dim();
            for (int a = 0; a < q.dim; ++a) q[a] = rng.uniform();
            centers.push_back(q);
        }
        std::string csv = "center,local,local_se,global,global_se,gap,y_size\n";
        io::json probes = io::json::array();
        double worst = 0.0;
        stage("probes", [&] {
            for (const auto& x0 : centers) {
                const auto pr = entropy_point_probe(s, g, x0, c.radius, c.eps, ns, o);
                std::string cs;
                for (int a = 0; a < x0.dim; ++a) cs += (a ? " " : "") + io::num(x0[a]);
                csv += cs + "," + io::num(pr.local.value) + "," + io::num(pr.local.uncertainty) + "," +
                       io::num(pr.global.value) + "," + io::num(pr.global.uncertainty) + "," + io::num(pr.gap) + "," +
                       std::to_string(pr.y_size) + "\n";
                probes.push_back(io::json{{"center", io::to_json(x0)},
                                          {"local", io::estimate_json("entropy", s.hash(), pr.local)},
                                          {"global", io::estimate_json("entropy", s.hash(), pr.global)},
                                          {"gap", pr.gap},
                                          {"y_size", pr.y_size}});
                worst = std::max(worst, std::fabs(pr.gap));
                take(pr.local.warnings);
            }
        });
        out["entropy_points.csv"] = csv;
        out["entropy_points.json"] =
            io::dump(io::json{{"kind", "entropy_point"}, {"system_hash", io::hex(s.hash())}, {"probes", probes}});
        m.value = worst;
        m.uncertainty = 0.0;
        m.summary = "entropy points: largest |local - global| = " + detail::fmt(worst) + " over " +
                    std::to_string(centers.size()) + " centres";
    } else if (c.kind == "specification") {
        ExactnessOptions eo;
        eo.seed = derive_seed(c.seed, "exactness");
        eo.threads = threads;
        ExactnessResult ex;
        stage("exactness", [&] { ex = exactness_N(s, c.delta, g, eo); });
        io::json runs = io::json::array();
        std::size_t passed = 0;
        stage("tracing", [&] {
            for (std::size_t i = 0; i < c.instances; ++i) {
                Rng rng(derive_seed(derive_seed(c.seed, "instances"), i));
                const std::size_t targets = 2 + rng.below(c.max_targets - 1);
                const auto inst = random_trace_instance(s, targets, ex.value, c.max_window, c.delta, rng);
                io::json r{{"instance", io::to_json(inst)}};
                try {
                    const Point x = trace_specification(s, g, inst, ex.value);
                    const auto rep = verify_trace(s, inst, x);
                    r["point"] = io::to_json(x);
                    r["report"] = io::to_json(rep);
                    passed += rep.pass;
                } catch (const ResolutionError& e) {
                    r["error"] = e.what();
                }
                runs.push_back(std::move(r));
            }
        });
        const double rate = static_cast<double>(passed) / static_cast<double>(c.instances);
        out["specification.json"] = io::dump(io::json{{"kind", "specification"},
                                                      {"system_hash", io::hex(s.hash())},
                                                      {"delta", c.delta},
                                                      {"exactness", io::to_json(ex)},
                                                      {"pass_rate", rate},
                                                      {"runs", runs}});
        m.value = rate;
        m.uncertainty = 0.0;
        m.summary = "specification: " + std::to_string(passed) + "/" + std::to_string(c.instances) +
                    " traces verified (N=" + std::to_string(ex.value) + ")";
        if (passed < c.instances) {
            m.warnings.push_back("resolution: some instances could not be traced at this grid");
            m.exit_code = exit_numeric;
        }
    } else if (c.kind == "expansivity") {
        ExpansivityCertificate cert;
        stage("certificate", [&] { cert = expansivity_check(s, c.delta, c.gammas, {2000, 64, derive_seed(c.seed, "cert")}); });
        out["certificate.json"] = io::dump(io::to_json(cert));
        m.value = cert.expansive ? 1.0 : 0.0;
        m.uncertainty = 0.0;
        std::string table;
        for (const auto& [gm, k] : cert.gamma_table) table += " k0(" + detail::fmt(gm) + ")=" + std::to_string(k);
        m.summary = std::string("expansivity: ") + (cert.expansive ? "certified" : "not expansive at this scale") +
                    " (" + cert.method + ", delta=" + detail::fmt(cert.delta) + ")" + table;
    }
    return out;
}

/// Runs and writes outputs under `dir`: payload files, config.toml and manifest.json.
inline RunManifest run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir) {
    detail::Stopwatch sw;
    RunManifest m;
    ExperimentConfig hashed = c;
    hashed.threads = 0;
    hashed.out.clear();
    m.config_hash = config_hash(hashed);
    Payload files = execute(c, m);
    files["config.toml"] = serialize(c);
    for (const auto& [name, content] : files) {
        io::write_atomic(dir / name, content);
        m.outputs.push_back(name);
    }
    m.outputs.push_back("manifest.json");
    m.wall_time = sw.seconds();
    io::write_atomic(dir / "manifest.json", io::dump(to_json(m)));
    return m;
}

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const UnsupportedCapability*>(&e))
        return exit_precondition;
    if (dynamic_cast<const SaturationError*>(&e) || dynamic_cast<const ResolutionError*>(&e)) return exit_numeric;
    return exit_config;
}

/// The `run` command: load, apply overrides, execute, print one summary line.
inline int run_command(const std::filesystem::path& config_path, const RunOverrides& ov, std::ostream& out,
                       std::ostream& err) {
    try {
        ExperimentConfig c = load_config(config_path);
        if (ov.out) c.out = *ov.out;
        if (ov.threads) c.threads = *ov.threads;
        if (ov.budget) c.budget = *ov.budget;
        const auto m = run_experiment(c, c.out);
        for (const auto& w : m.warnings) err << "warning: " << w << "\n";
        out << m.summary << "\n";
        return m.exit_code;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        err << (code == exit_precondition ? "precondition: " : code == exit_numeric ? "numerical: " : "error: ")
            << e.what() << "\n";
        return code;
    }
}

struct ReportSummary {
    std::size_t runs = 0;
    std::vector<std::string> skipped;
    std::string table_csv;
    std::string plot_csv;
};

/// Merges every manifest.json under `dir` into report.csv and plot_data.csv.
inline ReportSummary report(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw InputError("report: " + dir.string() + " is not a directory");
    std::vector<fs::path> manifests;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() == "manifest.json") manifests.push_back(e.path());
    std::sort(manifests.begin(), manifests.end());
    ReportSummary rep;
    rep.table_csv = "run,kind,system,value,uncertainty,warnings\n";
    rep.plot_csv = "run,curve,x,y\n";
    for (const auto& p : manifests) {
        const std::string run = fs::relative(p.parent_path(), dir).generic_string();
        try {
            const auto j = io::json::parse(io::read_file(p));
            const auto num = [](const io::json& v) { return v.is_number() ? io::num(v.get<double>()) : std::string("nan"); };
            rep.table_csv += detail::csv_field(run) + "," + detail::csv_field(j.at("kind").get<std::string>()) + "," +
                             detail::csv_field(j.at("system").get<std::string>()) + "," + num(j.at("value")) + "," +
                             num(j.at("uncertainty")) + "," +
                             detail::csv_field(detail::join(j.at("warnings").get<std::vector<std::string>>(), "; ")) +
                             "\n";
            for (const auto& c : j.at("curves"))
                rep.plot_csv += detail::csv_field(run) + "," + c.at("curve").get<std::string>() + "," + num(c.at("x")) +
                                "," + num(c.at("y")) + "\n";
            ++rep.runs;
        } catch (const std::exception& e) {
            rep.skipped.push_back(p.generic_string() + ": " + e.what());
        }
    }
    if (rep.runs == 0)
        throw InputError("report: no readable manifest under " + dir.string() +
                         (rep.skipped.empty() ? "" : " (" + std::to_string(rep.skipped.size()) + " corrupt)"));
    io::write_atomic(dir / "report.csv", rep.table_csv);
    io::write_atomic(dir / "plot_data.csv", rep.plot_csv);
    return rep;
}

inline int report_command(const std::filesystem::path& dir, std::ostream& out, std::ostream& err) {
    try {
        const auto rep = report(dir);
        for (const auto& s : rep.skipped) err << "warning: skipped corrupt manifest " << s << "\n";
        out << rep.runs << " run(s) merged into " << (dir / "report.csv").string() << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }
}

} // namespace naifs
