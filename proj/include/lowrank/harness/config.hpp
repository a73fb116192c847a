#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lowrank/instances.hpp"

namespace lowrank::harness {

enum class ExperimentKind { CompleteSweep, ApproxSweep, BoundsValidate, LowerboundDemo, SingleRun };

inline std::string kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::CompleteSweep: return "complete-sweep";
        case ExperimentKind::ApproxSweep: return "approx-sweep";
        case ExperimentKind::BoundsValidate: return "bounds-validate";
        case ExperimentKind::LowerboundDemo: return "lowerbound-demo";
        case ExperimentKind::SingleRun: return "single-run";
    }
    return "unknown";
}

/// Experiment description: flat key = value lines plus one [grid.<key>]
/// section per sweep dimension. CLI flags override file values. All indices
/// in emitted files are 0-based.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::CompleteSweep;

    // Instance family.
    Index d = 0; // 0: use n (square instances)
    Index n = 500;
    Index r = 10;
    double mu0 = 1.0;
    RowMode row_mode = RowMode::IncoherentGaussian;
    NormMode norm_mode = NormMode::Constant;
    double noise_sigma = 0.0;

    // Algorithm parameters.
    double tau_rel = 1e-8;
    double delta = 0.05;
    double exact_tol = 1e-9;
    Index m = 0;
    Index m1 = 0;         // 0: use m1_frac of the per-column total
    double m1_frac = 0.5; // adaptive approximation pass-1 share of the budget
    std::string algorithms = "adaptive,passive"; // approx sweep arms
    std::string algorithm = "complete";          // single-run arm
    bool include_matched = true;                 // lowerbound matched-budget passive arm

    // Sweep grids; empty grids fall back to the scalar value.
    std::vector<Index> m_grid;
    std::vector<Index> n_grid;
    std::vector<Index> r_grid;
    std::vector<double> mu0_grid;
    std::vector<double> p_grid;
    std::vector<double> budget_frac_grid;

    // Threshold-location mode for the completion sweep.
    std::string mode = "sweep"; // sweep | threshold
    double target_rate = 0.9;

    // Execution.
    int trials = 1;
    uint64_t seed = 1;
    int threads = 0; // 0: LOWRANK_THREADS env or hardware concurrency
    std::string out = "results.csv";
    bool emit_plots = true;
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

template <typename T>
std::vector<T> parse_values(const std::string& text) {
    std::vector<T> out;
    std::istringstream iss(text);
    std::string tok;
    while (iss >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (tok.empty()) continue;
        if constexpr (std::is_same_v<T, double>)
            out.push_back(std::stod(tok));
        else
            out.push_back(static_cast<T>(std::stoll(tok)));
    }
    return out;
}

inline bool parse_bool(const std::string& v) {
    const std::string s = lower(trim(v));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("config: expected a boolean, got '" + v + "'");
}

} // namespace detail

inline ExperimentKind parse_kind(const std::string& v) {
    const std::string s = detail::lower(detail::trim(v));
    if (s == "complete-sweep") return ExperimentKind::CompleteSweep;
    if (s == "approx-sweep") return ExperimentKind::ApproxSweep;
    if (s == "bounds-validate") return ExperimentKind::BoundsValidate;
    if (s == "lowerbound-demo") return ExperimentKind::LowerboundDemo;
    if (s == "single-run") return ExperimentKind::SingleRun;
    throw std::invalid_argument("config: unknown experiment kind '" + v + "'");
}

inline RowMode parse_row_mode(const std::string& v) {
    const std::string s = detail::lower(detail::trim(v));
    if (s == "gaussian" || s == "incoherent-gaussian") return RowMode::IncoherentGaussian;
    if (s == "rademacher") return RowMode::Rademacher;
    if (s == "basis" || s == "coherent-basis") return RowMode::CoherentBasis;
    throw std::invalid_argument("config: unknown row_mode '" + v + "'");
}

inline NormMode parse_norm_mode(const std::string& v) {
    const std::string s = detail::lower(detail::trim(v));
    if (s == "constant") return NormMode::Constant;
    if (s == "uniform" || s == "uniform-0.9-1.1") return NormMode::Uniform09to11;
    if (s == "lognormal" || s == "log-normal") return NormMode::LogNormal;
    throw std::invalid_argument("config: unknown norm_mode '" + v + "'");
}

inline std::string row_mode_name(RowMode m) {
    switch (m) {
        case RowMode::IncoherentGaussian: return "gaussian";
        case RowMode::Rademacher: return "rademacher";
        case RowMode::CoherentBasis: return "basis";
    }
    return "unknown";
}

inline std::string norm_mode_name(NormMode m) {
    switch (m) {
        case NormMode::Constant: return "constant";
        case NormMode::Uniform09to11: return "uniform";
        case NormMode::LogNormal: return "lognormal";
    }
    return "unknown";
}

/// Applies one key = value pair; grid keys are addressed as grid.<name>.
inline void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const std::string k = detail::lower(detail::trim(key));
    const std::string v = detail::trim(value);
    if (k == "experiment") cfg.kind = parse_kind(v);
    else if (k == "d") cfg.d = static_cast<Index>(std::stoll(v));
    else if (k == "n") cfg.n = static_cast<Index>(std::stoll(v));
    else if (k == "r") cfg.r = static_cast<Index>(std::stoll(v));
    else if (k == "mu0") cfg.mu0 = std::stod(v);
    else if (k == "row_mode") cfg.row_mode = parse_row_mode(v);
    else if (k == "norm_mode") cfg.norm_mode = parse_norm_mode(v);
    else if (k == "noise_sigma") cfg.noise_sigma = std::stod(v);
    else if (k == "tau_rel") cfg.tau_rel = std::stod(v);
    else if (k == "delta") cfg.delta = std::stod(v);
    else if (k == "exact_tol") cfg.exact_tol = std::stod(v);
    else if (k == "m") cfg.m = static_cast<Index>(std::stoll(v));
    else if (k == "m1") cfg.m1 = static_cast<Index>(std::stoll(v));
    else if (k == "m1_frac") cfg.m1_frac = std::stod(v);
    else if (k == "algorithms") cfg.algorithms = detail::lower(v);
    else if (k == "algorithm") cfg.algorithm = detail::lower(v);
    else if (k == "include_matched") cfg.include_matched = detail::parse_bool(v);
    else if (k == "mode") cfg.mode = detail::lower(v);
    else if (k == "target_rate") cfg.target_rate = std::stod(v);
    else if (k == "trials") cfg.trials = std::stoi(v);
    else if (k == "seed") cfg.seed = static_cast<uint64_t>(std::stoull(v));
    else if (k == "threads") cfg.threads = std::stoi(v);
    else if (k == "out") cfg.out = v;
    else if (k == "emit_plots") cfg.emit_plots = detail::parse_bool(v);
    else if (k == "grid.m") cfg.m_grid = detail::parse_values<Index>(v);
    else if (k == "grid.n") cfg.n_grid = detail::parse_values<Index>(v);
    else if (k == "grid.r") cfg.r_grid = detail::parse_values<Index>(v);
    else if (k == "grid.mu0") cfg.mu0_grid = detail::parse_values<double>(v);
    else if (k == "grid.p") cfg.p_grid = detail::parse_values<double>(v);
    else if (k == "grid.budget_frac") cfg.budget_frac_grid = detail::parse_values<double>(v);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

/// Reads a config file. Sections named [grid.<key>] expect a `values = ...`
/// line; everything else is flat key = value. '#' starts a comment.
inline ExperimentConfig parse_config_file(const std::string& path,
                                          ExperimentKind default_kind = ExperimentKind::CompleteSweep) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    ExperimentConfig cfg;
    cfg.kind = default_kind;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: malformed section at line " + std::to_string(lineno));
            section = detail::lower(detail::trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " + std::to_string(lineno));
        std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (!section.empty()) {
            if (detail::lower(key) != "values")
                throw std::invalid_argument("config: sections only take 'values =' (line " +
                                            std::to_string(lineno) + ")");
            key = section;
        }
        apply_override(cfg, key, value);
    }
    return cfg;
}

/// Grid accessors falling back to the scalar values.
inline std::vector<Index> grid_or(const std::vector<Index>& grid, Index scalar) {
    return grid.empty() ? std::vector<Index>{scalar} : grid;
}
inline std::vector<double> grid_or(const std::vector<double>& grid, double scalar) {
    return grid.empty() ? std::vector<double>{scalar} : grid;
}

/// Resolved output path: relative paths land under $LOWRANK_OUT_DIR when set.
inline std::string resolve_out_path(const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    const char* base = std::getenv("LOWRANK_OUT_DIR");
    if (!base || !*base) return path;
    std::string b(base);
    if (b.back() != '/') b.push_back('/');
    return b + path;
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("LOWRANK_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

} // namespace lowrank::harness
