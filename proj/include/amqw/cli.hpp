#pragma once

// Configuration-driven runner behind the amqw command-line tool.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "amqw/band_solver.hpp"
#include "amqw/dynamics.hpp"
#include "amqw/effective_model.hpp"
#include "amqw/errors.hpp"
#include "amqw/io.hpp"
#include "amqw/lattice_model.hpp"
#include "amqw/spectral.hpp"

#ifndef AMQW_VERSION
#define AMQW_VERSION "0.0.0"
#endif

namespace amqw::cli {

using nlohmann::json;

inline constexpr const char* version = AMQW_VERSION;

enum ExitCode : int { Ok = 0, ConfigFailure = 2, NumericalFailure = 3 };

class ConfigError : public Error {
public:
    using Error::Error;
};

struct WalkOptions {
    std::vector<double> times;
    bool corr_t = false;
    double threshold = 0.01;
};

struct SweepOptions {
    std::string variable;
    double from = 0.0;
    double to = 0.0;
    int steps = 2;
    bool k0_only = false;
};

struct RunConfig {
    std::string command;
    int L = 10;
    ModelParams params;
    WalkOptions walk;
    SweepOptions sweep;
    std::string bound = "infinite";
    std::filesystem::path output = "out";
};

inline const std::vector<std::string>& commands()
{
    static const std::vector<std::string> c{"spectrum", "bands", "walk", "effective", "sweep"};
    return c;
}

inline const std::vector<std::string>& sweep_variables()
{
    static const std::vector<std::string> v{"J_a", "J_m", "U", "g", "eps_a", "eps_m", "Delta"};
    return v;
}

namespace detail {

inline bool contains(const std::vector<std::string>& v, const std::string& s)
{
    return std::find(v.begin(), v.end(), s) != v.end();
}

inline void unknown_keys(const json& obj, const std::string& where, const std::set<std::string>& known,
                         std::vector<std::string>& issues)
{
    for (const auto& [k, _] : obj.items())
        if (!known.count(k))
            issues.push_back(where + k + ": unknown key");
}

inline bool finite_number(const json& j) { return j.is_number() && std::isfinite(j.get<double>()); }

} // namespace detail

/// Problems that would stop `run` from starting. Empty means the config is usable.
inline std::vector<std::string> validate(const json& cfg)
{
    std::vector<std::string> issues;
    if (!cfg.is_object())
        return {"config: must be a JSON object"};
    detail::unknown_keys(cfg, "", {"command", "lattice", "params", "walk", "bands", "sweep", "output"}, issues);

    std::string command;
    if (!cfg.contains("command") || !cfg["command"].is_string())
        issues.emplace_back("command: missing or not a string");
    else if (command = cfg["command"].get<std::string>(); !detail::contains(commands(), command))
        issues.push_back("command: unknown command '" + command + "'");

    if (!cfg.contains("lattice") || !cfg["lattice"].is_object() || !cfg["lattice"].contains("L")) {
        issues.emplace_back("lattice.L: missing");
    } else {
        detail::unknown_keys(cfg["lattice"], "lattice.", {"L"}, issues);
        const json& L = cfg["lattice"]["L"];
        if (!L.is_number_integer() || L.get<long>() < 1)
            issues.emplace_back("lattice.L: must be an integer >= 1");
    }

    double g = 0.0;
    if (!cfg.contains("params") || !cfg["params"].is_object()) {
        issues.emplace_back("params: missing");
    } else {
        const json& p = cfg["params"];
        detail::unknown_keys(p, "params.", {"J_a", "J_m", "U", "g", "eps_a", "eps_m", "Delta"}, issues);
        for (const auto& [k, v] : p.items())
            if (!detail::finite_number(v))
                issues.push_back("params." + k + ": must be a finite number");
        if (p.contains("Delta") && p.contains("eps_m"))
            issues.emplace_back("params.Delta: give either eps_m or Delta, not both");
        if (p.contains("Delta") && p.contains("eps_a"))
            issues.emplace_back("params.Delta: the Delta shorthand fixes eps_a = 0; drop eps_a");
        if (p.contains("g") && detail::finite_number(p["g"]))
            g = p["g"].get<double>();
    }

    if (cfg.contains("walk")) {
        const json& w = cfg["walk"];
        if (!w.is_object()) {
            issues.emplace_back("walk: must be an object");
        } else {
            detail::unknown_keys(w, "walk.", {"t_max", "samples", "times", "corr_t", "threshold"}, issues);
            if (w.contains("times") && (w.contains("t_max") || w.contains("samples")))
                issues.emplace_back("walk.times: give either an explicit times list or t_max/samples");
            if (w.contains("t_max") && (!detail::finite_number(w["t_max"]) || w["t_max"].get<double>() < 0.0))
                issues.emplace_back("walk.t_max: must be a finite number >= 0");
            if (w.contains("samples") && (!w["samples"].is_number_integer() || w["samples"].get<long>() < 2))
                issues.emplace_back("walk.samples: must be an integer >= 2");
            if (w.contains("times")) {
                const json& t = w["times"];
                bool ok = t.is_array() && !t.empty();
                double prev = -1.0;
                for (std::size_t i = 0; ok && i < t.size(); ++i) {
                    ok = detail::finite_number(t[i]) && t[i].get<double>() >= 0.0 && t[i].get<double>() > prev;
                    if (ok)
                        prev = t[i].get<double>();
                }
                if (!ok)
                    issues.emplace_back("walk.times: must be a non-empty ascending list of finite times >= 0");
            }
            if (w.contains("corr_t") && !w["corr_t"].is_boolean())
                issues.emplace_back("walk.corr_t: must be true or false");
            if (w.contains("threshold") &&
                (!detail::finite_number(w["threshold"]) || !(w["threshold"].get<double>() > 0.0) ||
                 w["threshold"].get<double>() > 0.2))
                issues.emplace_back("walk.threshold: must lie in (0, 0.2]");
        }
    }

    if (cfg.contains("bands")) {
        const json& b = cfg["bands"];
        if (!b.is_object()) {
            issues.emplace_back("bands: must be an object");
        } else {
            detail::unknown_keys(b, "bands.", {"bound"}, issues);
            if (b.contains("bound") && !(b["bound"] == "infinite" || b["bound"] == "ring"))
                issues.emplace_back("bands.bound: must be \"infinite\" or \"ring\"");
        }
    }

    if (command == "sweep" && !cfg.contains("sweep"))
        issues.emplace_back("sweep: required for the sweep command");
    if (cfg.contains("sweep")) {
        const json& s = cfg["sweep"];
        if (!s.is_object()) {
            issues.emplace_back("sweep: must be an object");
        } else {
            detail::unknown_keys(s, "sweep.", {"variable", "from", "to", "steps", "k0_only"}, issues);
            if (!s.contains("variable") || !s["variable"].is_string() ||
                !detail::contains(sweep_variables(), s["variable"].get<std::string>()))
                issues.emplace_back("sweep.variable: must be one of J_a, J_m, U, g, eps_a, eps_m, Delta");
            for (const char* k : {"from", "to"})
                if (!s.contains(k) || !detail::finite_number(s[k]))
                    issues.push_back(std::string("sweep.") + k + ": must be a finite number");
            if (!s.contains("steps") || !s["steps"].is_number_integer() || s["steps"].get<long>() < 2)
                issues.emplace_back("sweep.steps: must be an integer >= 2");
            if (s.contains("k0_only") && !s["k0_only"].is_boolean())
                issues.emplace_back("sweep.k0_only: must be true or false");
        }
    }

    if (command == "effective" && g == 0.0)
        issues.emplace_back("params.g: the effective model needs g != 0");

    if (cfg.contains("output") && (!cfg["output"].is_string() || cfg["output"].get<std::string>().empty()))
        issues.emplace_back("output: must be a non-empty path");
    return issues;
}

/// Builds a RunConfig from a config that passed `validate`.
inline RunConfig parse(const json& cfg)
{
    if (const auto issues = validate(cfg); !issues.empty())
        throw ConfigError(issues.front());
    RunConfig rc;
    rc.command = cfg["command"].get<std::string>();
    rc.L = cfg["lattice"]["L"].get<int>();
    const json& p = cfg["params"];
    rc.params.J_a = p.value("J_a", 0.0);
    rc.params.J_m = p.value("J_m", 0.0);
    rc.params.U = p.value("U", 0.0);
    rc.params.g = p.value("g", 0.0);
    rc.params.eps_a = p.value("eps_a", 0.0);
    rc.params.eps_m = p.contains("Delta") ? p["Delta"].get<double>() : p.value("eps_m", 0.0);

    const json w = cfg.value("walk", json::object());
    if (w.contains("times")) {
        rc.walk.times = w["times"].get<std::vector<double>>();
    } else {
        const double scale = rc.params.J_a != 0.0 ? std::abs(rc.params.J_a) : 1.0;
        rc.walk.times = time_grid(w.value("t_max", 10.0 / scale), w.value("samples", std::size_t{600}));
    }
    rc.walk.corr_t = w.value("corr_t", false);
    rc.walk.threshold = w.value("threshold", 0.01);

    rc.bound = cfg.value("bands", json::object()).value("bound", std::string("infinite"));

    if (cfg.contains("sweep")) {
        const json& s = cfg["sweep"];
        rc.sweep.variable = s["variable"].get<std::string>();
        rc.sweep.from = s["from"].get<double>();
        rc.sweep.to = s["to"].get<double>();
        rc.sweep.steps = s["steps"].get<int>();
        rc.sweep.k0_only = s.value("k0_only", false);
    }
    rc.output = cfg.value("output", std::string("out"));
    return rc;
}

/// Config with every default filled in, in a form `parse` accepts again.
inline json resolved(const RunConfig& rc)
{
    json out;
    out["command"] = rc.command;
    out["lattice"] = {{"L", rc.L}};
    out["params"] = {{"J_a", rc.params.J_a}, {"J_m", rc.params.J_m}, {"U", rc.params.U},
                     {"g", rc.params.g},     {"eps_a", rc.params.eps_a}, {"eps_m", rc.params.eps_m}};
    out["walk"] = {{"times", rc.walk.times}, {"corr_t", rc.walk.corr_t}, {"threshold", rc.walk.threshold}};
    out["bands"] = {{"bound", rc.bound}};
    if (rc.command == "sweep")
        out["sweep"] = {{"variable", rc.sweep.variable},
                        {"from", rc.sweep.from},
                        {"to", rc.sweep.to},
                        {"steps", rc.sweep.steps},
                        {"k0_only", rc.sweep.k0_only}};
    out["output"] = rc.output.string();
    return out;
}

/// Applies "a.b.c=value". The value is read as JSON when it parses, otherwise
/// as a plain string.
inline void apply_override(json& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;

    json* node = &cfg;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty())
            throw ConfigError("--set: empty key segment in '" + path + "'");
        if (!node->is_object())
            *node = json::object();
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

struct RunReport {
    std::vector<std::string> files;
    json summary = json::object();
};

namespace detail {

inline std::string path_str(const std::filesystem::path& dir, const char* name) { return (dir / name).string(); }

inline void write_spectrum_rows(io::CsvWriter& csv, const SpectrumResult& r, const Lattice& lat)
{
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const int n = *r.k_index[static_cast<std::size_t>(i)];
        csv.row(n, lat.momentum(n), r.eigenvalues(i), r.molecular_fraction[static_cast<std::size_t>(i)],
                std::string(to_string(r.band_class[static_cast<std::size_t>(i)])));
    }
}

inline void count_classes(const SpectrumResult& r, json& summary)
{
    json counts = json::object();
    for (BandClass c : {BandClass::Scattering, BandClass::DbsLower, BandClass::DbsUpper, BandClass::Unclassified})
        counts[to_string(c)] = std::count(r.band_class.begin(), r.band_class.end(), c);
    summary["band_class_counts"] = counts;
}

inline RunReport run_spectrum(const RunConfig& rc)
{
    const HilbertSpace space(Lattice(rc.L));
    const SpectrumResult r = diagonalize_blocks(rc.params, space);
    io::CsvWriter csv(path_str(rc.output, "spectrum.csv"), {"k_index", "K", "E_tilde", "P_m", "band_class"});
    write_spectrum_rows(csv, r, space.lattice());
    RunReport rep{{"spectrum.csv"}, json::object()};
    rep.summary["dimension"] = space.dimension();
    count_classes(r, rep.summary);
    return rep;
}

inline RunReport run_bands(const RunConfig& rc)
{
    const Lattice lat(rc.L);
    io::CsvWriter csv(path_str(rc.output, "bands_analytic.csv"), {"K", "type", "param", "E_tilde", "residual"});
    std::size_t scatter = 0;
    std::size_t bound = 0;
    for (int n = -rc.L; n <= rc.L; ++n) {
        const double K = lat.momentum(n);
        if (rc.params.J_a != 0.0) {
            for (const auto& s : scattering_roots(rc.params, lat, n)) {
                csv.row(K, "scatter", s.k, s.E_tilde, s.residual);
                ++scatter;
            }
        }
        const auto sols = rc.bound == "ring" && rc.params.J_a != 0.0 ? ring_bound_solutions(rc.params, lat, n)
                                                                      : bound_solutions(rc.params, K);
        for (const auto& b : sols) {
            csv.row(K, b.branch == Branch::Lower ? "bound_lower" : "bound_upper", b.alpha, b.E_tilde,
                    std::max(b.residual_contact, b.residual_bulk));
            ++bound;
        }
    }
    RunReport rep{{"bands_analytic.csv"}, json::object()};
    rep.summary["scattering_roots"] = scatter;
    rep.summary["bound_solutions"] = bound;
    return rep;
}

inline void write_corr(io::CsvWriter& csv, double t, const Eigen::MatrixXd& gamma, const Lattice& lat)
{
    for (Eigen::Index a = 0; a < gamma.rows(); ++a)
        for (Eigen::Index b = 0; b < gamma.cols(); ++b)
            csv.row(t, lat.to_label(static_cast<int>(a)), lat.to_label(static_cast<int>(b)), gamma(a, b));
}

inline json cones_json(const std::optional<LightCones>& c)
{
    if (!c)
        return nullptr;
    json j{{"v_outer", c->v_outer}, {"weight_outer", c->weight_outer}};
    j["v_inner"] = c->v_inner ? json(*c->v_inner) : json(nullptr);
    j["weight_inner"] = c->weight_inner;
    return j;
}

inline RunReport run_walk(const RunConfig& rc)
{
    const HilbertSpace space(Lattice(rc.L));
    const Lattice& lat = space.lattice();
    const WalkResult w = evolve(rc.params, space, initial_doublon(space), rc.walk.times, true);

    RunReport rep;
    {
        io::CsvWriter csv(path_str(rc.output, "walk_density.csv"), {"t", "site", "n_a", "n_m"});
        for (std::size_t i = 0; i < w.times.size(); ++i)
            for (int s = 0; s < lat.sites(); ++s)
                csv.row(w.times[i], lat.to_label(s), w.n_a[i][static_cast<std::size_t>(s)],
                        w.n_m[i][static_cast<std::size_t>(s)]);
        rep.files.emplace_back("walk_density.csv");
    }
    {
        io::CsvWriter csv(path_str(rc.output, "corr_final.csv"), {"t", "l1", "l2", "gamma"});
        write_corr(csv, w.times.back(), w.gamma.back(), lat);
        rep.files.emplace_back("corr_final.csv");
    }
    if (rc.walk.corr_t) {
        io::CsvWriter csv(path_str(rc.output, "corr_t.csv"), {"t", "l1", "l2", "gamma"});
        for (std::size_t i = 0; i < w.times.size(); ++i)
            write_corr(csv, w.times[i], w.gamma[i], lat);
        rep.files.emplace_back("corr_t.csv");
    }
    rep.summary["diagonal_weight_final"] = diagonal_weight(w.gamma.back());
    rep.summary["light_cones_atomic"] = cones_json(light_cone_speeds(w, rc.walk.threshold, DensityChannel::Atomic));
    rep.summary["light_cones_molecular"] =
        cones_json(light_cone_speeds(w, rc.walk.threshold, DensityChannel::Molecular));
    return rep;
}

inline RunReport run_effective(const RunConfig& rc)
{
    io::CsvWriter csv(path_str(rc.output, "effective.csv"), {"sigma", "E0", "A", "B", "onsite", "J_nn", "J_nnn"});
    RunReport rep{{"effective.csv"}, json::object()};
    json warnings = json::array();
    for (int sigma : {1, 2}) {
        const EffectiveModel m = effective_couplings(rc.params, sigma);
        csv.row(sigma, m.E0, m.A, m.B, m.onsite, m.J_nn, m.J_nnn);
        if (m.warning)
            warnings.push_back("sigma=" + std::to_string(sigma) + ": " + *m.warning);
        rep.summary["nn_cancellation_delta_sigma" + std::to_string(sigma)] = nn_cancellation_delta(rc.params, sigma);
    }
    rep.summary["warnings"] = warnings;
    return rep;
}

inline ModelParams with_variable(ModelParams p, const std::string& var, double v)
{
    if (var == "J_a")
        p.J_a = v;
    else if (var == "J_m")
        p.J_m = v;
    else if (var == "U")
        p.U = v;
    else if (var == "g")
        p.g = v;
    else if (var == "eps_a")
        p.eps_a = v;
    else if (var == "eps_m")
        p.eps_m = v;
    else if (var == "Delta")
        p.eps_m = 2.0 * p.eps_a + v;
    else
        throw ConfigError("sweep.variable: unknown variable '" + var + "'");
    return p;
}

inline RunReport run_sweep(const RunConfig& rc, unsigned jobs)
{
    const HilbertSpace space(Lattice(rc.L));
    const int steps = rc.sweep.steps;
    std::vector<double> values(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i)
        values[static_cast<std::size_t>(i)] =
            i + 1 == steps ? rc.sweep.to : rc.sweep.from + (rc.sweep.to - rc.sweep.from) * i / (steps - 1);

    std::vector<int> blocks;
    if (rc.sweep.k0_only)
        blocks.push_back(0);
    else
        for (int n = -rc.L; n <= rc.L; ++n)
            blocks.push_back(n);

    std::vector<std::optional<SpectrumResult>> results(values.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            try {
                results[i] = diagonalize_blocks(with_variable(rc.params, rc.sweep.variable, values[i]), space, blocks);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(values.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);

    io::CsvWriter csv(path_str(rc.output, "sweep.csv"), {"value", "k_index", "K", "E_tilde", "P_m", "band_class"});
    const Lattice& lat = space.lattice();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const SpectrumResult& r = *results[i];
        for (Eigen::Index s = 0; s < r.size(); ++s) {
            const auto u = static_cast<std::size_t>(s);
            const int n = *r.k_index[u];
            csv.row(values[i], n, lat.momentum(n), r.eigenvalues(s), r.molecular_fraction[u],
                    std::string(to_string(r.band_class[u])));
        }
    }
    RunReport rep{{"sweep.csv"}, json::object()};
    rep.summary["points"] = values.size();
    return rep;
}

} // namespace detail

/// Runs one command and writes its files into rc.output (created if needed).
inline RunReport run(const RunConfig& rc, unsigned jobs = 1)
{
    std::error_code ec;
    std::filesystem::create_directories(rc.output, ec);
    if (ec)
        throw ConfigError("output: cannot create directory " + rc.output.string() + ": " + ec.message());
    if (rc.command == "spectrum")
        return detail::run_spectrum(rc);
    if (rc.command == "bands")
        return detail::run_bands(rc);
    if (rc.command == "walk")
        return detail::run_walk(rc);
    if (rc.command == "effective")
        return detail::run_effective(rc);
    if (rc.command == "sweep")
        return detail::run_sweep(rc, jobs);
    throw ConfigError("command: unknown command '" + rc.command + "'");
}

inline void write_meta(const RunConfig& rc, const RunReport& rep, double wall_seconds)
{
    json meta;
    meta["config"] = resolved(rc);
    meta["version"] = version;
    meta["wall_time_s"] = wall_seconds;
    meta["files"] = rep.files;
    meta["summary"] = rep.summary;
    std::ofstream out(rc.output / "run_meta.json", std::ios::binary);
    if (!out)
        throw ConfigError("output: cannot write run_meta.json");
    out << meta.dump(2) << '\n';
}

} // namespace amqw::cli
