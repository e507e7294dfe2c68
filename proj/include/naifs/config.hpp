#pragma once

// Experiment configuration: TOML in, validated struct out, and back.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "naifs/errors.hpp"
#include "naifs/map_zoo.hpp"
#include "naifs/naifs_core.hpp"
#include "naifs/pressure.hpp"
#include "naifs/random.hpp"
#include "naifs/spaces.hpp"

namespace naifs {

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"entropy",      "asymptotic_entropy", "pressure",      "fixed_scale_pressure",
                                                "nonwandering", "entropy_point",      "specification", "expansivity"};
    return kinds;
}

struct MapEntry {
    std::string family;
    std::vector<double> params;
    bool operator==(const MapEntry&) const = default;
};

struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 0;
    std::size_t budget = 4096;
    unsigned threads = 0;  // 0: NAIFS_THREADS or 1
    std::string out = "out";

    // [space]
    std::string space = "circle";
    int dim = 1;

    // [schedule]
    std::vector<std::vector<MapEntry>> levels;
    std::string tail = "constant";  // "constant" or "periodic"
    std::size_t period = 1;

    // [grid]
    double mesh = 1.0 / 4096;

    // [estimate]
    std::vector<double> eps;
    std::size_t n_min = 2, n_max = 9;
    std::vector<std::size_t> shifts;
    std::size_t cover_limit = 2048;
    bool compute_cover = true;
    double slack = 0.05;

    // [potential]
    std::string potential = "zero";
    std::vector<double> potential_params;

    // [properties]
    double delta = 0.125;
    std::vector<double> gammas;
    double fixed_eps = 0.0;
    std::size_t instances = 20;
    std::size_t max_targets = 4;
    std::size_t max_window = 3;

    // [probe]: entropy points and the nonwandering set
    double radius = 0.1;
    std::vector<std::vector<double>> centers;
    std::size_t random_centers = 0;
    std::size_t m_max = 1;

    bool operator==(const ExperimentConfig&) const = default;

    std::vector<std::size_t> n_list() const {
        std::vector<std::size_t> v;
        for (std::size_t n = n_min; n <= n_max; ++n) v.push_back(n);
        return v;
    }
};

namespace detail {

template <class T>
T req(const toml::table& t, const char* key, const std::string& where) {
    auto v = t[key].value<T>();
    if (!v) throw InputError("config: missing or mistyped '" + where + key + "'");
    return *v;
}

template <class T>
void opt_value(const toml::table& t, const char* key, T& dst, const std::string& where) {
    const auto node = t[key];
    if (!node) return;
    auto v = node.value<T>();
    if (!v) throw InputError("config: mistyped '" + where + key + "'");
    dst = *v;
}

inline std::vector<double> doubles(const toml::node& n, const std::string& what) {
    const auto* a = n.as_array();
    if (!a) throw InputError("config: '" + what + "' must be an array of numbers");
    std::vector<double> v;
    for (const auto& e : *a) {
        auto x = e.value<double>();
        if (!x) throw InputError("config: '" + what + "' must contain numbers only");
        v.push_back(*x);
    }
    return v;
}

inline std::vector<std::size_t> sizes(const toml::node& n, const std::string& what) {
    const auto* a = n.as_array();
    if (!a) throw InputError("config: '" + what + "' must be an array of integers");
    std::vector<std::size_t> v;
    for (const auto& e : *a) {
        auto x = e.value<std::int64_t>();
        if (!x || *x < 0) throw InputError("config: '" + what + "' must contain non-negative integers");
        v.push_back(static_cast<std::size_t>(*x));
    }
    return v;
}

inline const toml::table* section(const toml::table& root, const char* name) {
    const auto node = root[name];
    if (!node) return nullptr;
    const auto* t = node.as_table();
    if (!t) throw InputError(std::string("config: '") + name + "' must be a table");
    return t;
}

template <class T>
std::size_t as_size(T v, const char* what) {
    if (v < 0) throw InputError(std::string("config: '") + what + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

inline toml::array to_array(const std::vector<double>& v) {
    toml::array a;
    for (double x : v) a.push_back(x);
    return a;
}

inline toml::array to_array(const std::vector<std::size_t>& v) {
    toml::array a;
    for (std::size_t x : v) a.push_back(static_cast<std::int64_t>(x));
    return a;
}

} // namespace detail

inline ExperimentConfig parse_config(const toml::table& root) {
    ExperimentConfig c;
    c.kind = detail::req<std::string>(root, "kind", "");
    if (!root["seed"]) throw InputError("config: 'seed' is mandatory");
    c.seed = static_cast<std::uint64_t>(detail::req<std::int64_t>(root, "seed", ""));
    std::int64_t i64 = static_cast<std::int64_t>(c.budget);
    detail::opt_value(root, "budget", i64, "");
    c.budget = detail::as_size(i64, "budget");
    i64 = c.threads;
    detail::opt_value(root, "threads", i64, "");
    c.threads = static_cast<unsigned>(detail::as_size(i64, "threads"));
    detail::opt_value(root, "out", c.out, "");

    if (const auto* t = detail::section(root, "space")) {
        detail::opt_value(*t, "kind", c.space, "space.");
        std::int64_t d = c.dim;
        detail::opt_value(*t, "dim", d, "space.");
        c.dim = static_cast<int>(d);
    }

    const auto* sch = detail::section(root, "schedule");
    if (!sch) throw InputError("config: '[schedule]' is required");
    detail::opt_value(*sch, "tail", c.tail, "schedule.");
    i64 = static_cast<std::int64_t>(c.period);
    detail::opt_value(*sch, "period", i64, "schedule.");
    c.period = detail::as_size(i64, "schedule.period");
    const auto* levels = (*sch)["levels"].as_array();
    if (!levels) throw InputError("config: 'schedule.levels' must be an array of levels");
    for (const auto& lv : *levels) {
        const auto* maps = lv.as_array();
        if (!maps) throw InputError("config: each level must be an array of maps");
        std::vector<MapEntry> level;
        for (const auto& m : *maps) {
            const auto* mt = m.as_table();
            if (!mt) throw InputError("config: each map must be a table {family = ..., params = [...]}");
            MapEntry entry;
            entry.family = detail::req<std::string>(*mt, "family", "schedule.levels[].");
            if (const auto p = (*mt)["params"]) entry.params = detail::doubles(*p.node(), "params");
            level.push_back(std::move(entry));
        }
        c.levels.push_back(std::move(level));
    }

    if (const auto* t = detail::section(root, "grid")) detail::opt_value(*t, "mesh", c.mesh, "grid.");

    if (const auto* t = detail::section(root, "estimate")) {
        if (const auto e = (*t)["eps"]) c.eps = detail::doubles(*e.node(), "estimate.eps");
        if (const auto n = (*t)["n"]) {
            const auto v = detail::sizes(*n.node(), "estimate.n");
            if (v.size() != 2) throw InputError("config: 'estimate.n' must be [n_min, n_max]");
            c.n_min = v[0];
            c.n_max = v[1];
        }
        if (const auto k = (*t)["shifts"]) c.shifts = detail::sizes(*k.node(), "estimate.shifts");
        i64 = static_cast<std::int64_t>(c.cover_limit);
        detail::opt_value(*t, "cover_limit", i64, "estimate.");
        c.cover_limit = detail::as_size(i64, "estimate.cover_limit");
        detail::opt_value(*t, "compute_cover", c.compute_cover, "estimate.");
        detail::opt_value(*t, "slack", c.slack, "estimate.");
    }

    if (const auto* t = detail::section(root, "potential")) {
        detail::opt_value(*t, "name", c.potential, "potential.");
        if (const auto p = (*t)["params"]) c.potential_params = detail::doubles(*p.node(), "potential.params");
    }

    if (const auto* t = detail::section(root, "properties")) {
        detail::opt_value(*t, "delta", c.delta, "properties.");
        if (const auto g = (*t)["gammas"]) c.gammas = detail::doubles(*g.node(), "properties.gammas");
        detail::opt_value(*t, "fixed_eps", c.fixed_eps, "properties.");
        for (auto [key, dst] : {std::pair{"instances", &c.instances}, std::pair{"max_targets", &c.max_targets},
                                std::pair{"max_window", &c.max_window}}) {
            i64 = static_cast<std::int64_t>(*dst);
            detail::opt_value(*t, key, i64, "properties.");
            *dst = detail::as_size(i64, key);
        }
    }

    if (const auto* t = detail::section(root, "probe")) {
        detail::opt_value(*t, "radius", c.radius, "probe.");
        if (const auto cs = (*t)["centers"]) {
            const auto* a = cs.as_array();
            if (!a) throw InputError("config: 'probe.centers' must be an array of points");
            for (const auto& p : *a) c.centers.push_back(detail::doubles(p, "probe.centers[]"));
        }
        for (auto [key, dst] : {std::pair{"random_centers", &c.random_centers}, std::pair{"m_max", &c.m_max}}) {
            i64 = static_cast<std::int64_t>(*dst);
            detail::opt_value(*t, key, i64, "probe.");
            *dst = detail::as_size(i64, key);
        }
    }
    return c;
}

inline Space make_space(const ExperimentConfig& c) {
    if (c.space == "interval") return Space::interval();
    if (c.space == "circle") return Space::circle();
    if (c.space == "torus") return Space::torus(c.dim);
    throw InputError("config: unknown space '" + c.space + "' (interval, circle, torus)");
}

inline NaifsSchedule make_schedule(const ExperimentConfig& c) {
    const Space sp = make_space(c);
    if (c.levels.empty()) throw InputError("config: the schedule needs at least one level");
    std::vector<Level> levels;
    for (const auto& lv : c.levels) {
        Level level;
        for (const auto& m : lv) level.push_back(make_map(m.family, m.params, sp));
        levels.push_back(std::move(level));
    }
    if (c.tail == "constant") return NaifsSchedule::constant_tail(std::move(levels));
    if (c.tail == "periodic") return NaifsSchedule::periodic(std::move(levels), c.period);
    throw InputError("config: unknown tail '" + c.tail + "' (constant, periodic)");
}

/// Structural checks; returns warnings for suspicious but legal values.
inline std::vector<std::string> validate(const ExperimentConfig& c) {
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
        throw InputError("config: unknown experiment kind '" + c.kind + "'");
    const NaifsSchedule s = make_schedule(c);  // families and parameters
    const Grid g(s.space(), c.mesh);
    (void)make_potential(c.potential, c.potential_params);
    if (c.budget < 1) throw InputError("config: budget must be >= 1");
    if (c.n_min < 1 || c.n_max < c.n_min) throw InputError("config: estimate.n must satisfy 1 <= n_min <= n_max");
    std::vector<std::string> warnings;
    for (double e : c.eps) {
        if (!(e > 0.0)) throw InputError("config: eps values must be positive");
        if (!(e > 2.0 * c.mesh)) warnings.push_back("eps=" + detail::fmt(e) + " is not above 2h");
    }
    const bool needs_eps = c.kind == "entropy" || c.kind == "asymptotic_entropy" || c.kind == "pressure" ||
                           c.kind == "entropy_point";
    if (needs_eps && c.eps.size() < 2) throw InputError("config: '" + c.kind + "' needs at least two eps values");
    if (c.kind == "asymptotic_entropy" && c.shifts.empty()) throw InputError("config: estimate.shifts is empty");
    if (c.kind == "fixed_scale_pressure" && !(c.fixed_eps > 0.0))
        throw InputError("config: properties.fixed_eps must be positive");
    if (c.kind == "expansivity" && c.gammas.empty()) throw InputError("config: properties.gammas is empty");
    if ((c.kind == "entropy_point" || c.kind == "nonwandering") && !(c.radius > 0.0))
        throw InputError("config: probe.radius must be positive");
    if (c.kind == "entropy_point" && c.centers.empty() && c.random_centers == 0)
        throw InputError("config: entropy_point needs probe.centers or probe.random_centers");
    for (const auto& p : c.centers)
        if (static_cast<int>(p.size()) != s.space().dim()) throw InputError("config: centre dimension mismatch");
    if (c.kind == "specification" && (c.max_targets < 2 || c.instances < 1))
        throw InputError("config: specification needs max_targets >= 2 and instances >= 1");
    return warnings;
}

inline ExperimentConfig parse_config_string(std::string_view text, const std::string& source = "config") {
    try {
        return parse_config(toml::parse(text, source));
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config: " << e.description() << " (" << e.source() << ")";
        throw InputError(os.str());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    try {
        return parse_config(toml::parse_file(path.string()));
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config: " << e.description() << " (" << e.source() << ")";
        throw InputError(os.str());
    }
}

/// Every field, explicitly; parse(serialize(c)) == c.
inline std::string serialize(const ExperimentConfig& c) {
    toml::table root;
    root.insert("kind", c.kind);
    root.insert("seed", static_cast<std::int64_t>(c.seed));
    root.insert("budget", static_cast<std::int64_t>(c.budget));
    root.insert("threads", static_cast<std::int64_t>(c.threads));
    root.insert("out", c.out);

    root.insert("space", toml::table{{"kind", c.space}, {"dim", c.dim}});

    toml::array levels;
    for (const auto& lv : c.levels) {
        toml::array maps;
        for (const auto& m : lv) maps.push_back(toml::table{{"family", m.family}, {"params", detail::to_array(m.params)}});
        levels.push_back(std::move(maps));
    }
    root.insert("schedule", toml::table{{"tail", c.tail},
                                        {"period", static_cast<std::int64_t>(c.period)},
                                        {"levels", std::move(levels)}});
    root.insert("grid", toml::table{{"mesh", c.mesh}});
    root.insert("estimate", toml::table{{"eps", detail::to_array(c.eps)},
                                        {"n", detail::to_array(std::vector<std::size_t>{c.n_min, c.n_max})},
                                        {"shifts", detail::to_array(c.shifts)},
                                        {"cover_limit", static_cast<std::int64_t>(c.cover_limit)},
                                        {"compute_cover", c.compute_cover},
                                        {"slack", c.slack}});
    root.insert("potential", toml::table{{"name", c.potential}, {"params", detail::to_array(c.potential_params)}});
    root.insert("properties", toml::table{{"delta", c.delta},
                                          {"gammas", detail::to_array(c.gammas)},
                                          {"fixed_eps", c.fixed_eps},
                                          {"instances", static_cast<std::int64_t>(c.instances)},
                                          {"max_targets", static_cast<std::int64_t>(c.max_targets)},
                                          {"max_window", static_cast<std::int64_t>(c.max_window)}});
    toml::array centers;
    for (const auto& p : c.centers) centers.push_back(detail::to_array(p));
    root.insert("probe", toml::table{{"radius", c.radius},
                                     {"centers", std::move(centers)},
                                     {"random_centers", static_cast<std::int64_t>(c.random_centers)},
                                     {"m_max", static_cast<std::int64_t>(c.m_max)}});
    std::ostringstream os;
    os << root << "\n";
    return os.str();
}

inline std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a(serialize(c)); }

} // namespace naifs
