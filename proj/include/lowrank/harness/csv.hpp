#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "lowrank/types.hpp"

namespace lowrank::harness {

/// Shortest decimal representation that round-trips the double exactly.
inline std::string fmt_double(double x) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == x) return buf;
    }
    return buf;
}

/// One raw result row. The header is frozen; every experiment writes all
/// fields (unused ones as zeros, documented per experiment in the README).
struct RawRow {
    std::string experiment;
    Index d = 0;
    Index n = 0;
    Index r = 0;
    double mu0_target = 0.0;
    double mu0_realized = 0.0;
    double column_mu = 0.0;
    Index m = 0;
    double p = 0.0;
    Index m1 = 0;
    Index m2 = 0;
    int trial = 0;
    uint64_t seed = 0;
    uint64_t raw_queries = 0;
    uint64_t unique_entries = 0;
    double frob_error = 0.0;
    double spectral_error = 0.0;
    double excess_eps = 0.0;
    int exact_success = 0;
    double wall_ms = 0.0;
};

inline constexpr const char* kRawHeader =
    "experiment,d,n,r,mu0_target,mu0_realized,column_mu,m,p,m1,m2,trial,seed,"
    "raw_queries,unique_entries,frob_error,spectral_error,excess_eps,exact_success,wall_ms";

inline std::string format_row(const RawRow& row) {
    std::string out;
    out.reserve(256);
    out += row.experiment;
    out += ',';
    out += std::to_string(row.d) + ',' + std::to_string(row.n) + ',' + std::to_string(row.r) + ',';
    out += fmt_double(row.mu0_target) + ',' + fmt_double(row.mu0_realized) + ',' +
           fmt_double(row.column_mu) + ',';
    out += std::to_string(row.m) + ',' + fmt_double(row.p) + ',' + std::to_string(row.m1) + ',' +
           std::to_string(row.m2) + ',';
    out += std::to_string(row.trial) + ',' + std::to_string(row.seed) + ',';
    out += std::to_string(row.raw_queries) + ',' + std::to_string(row.unique_entries) + ',';
    out += fmt_double(row.frob_error) + ',' + fmt_double(row.spectral_error) + ',' +
           fmt_double(row.excess_eps) + ',';
    out += std::to_string(row.exact_success) + ',' + fmt_double(row.wall_ms);
    return out;
}

inline void write_raw_csv(const std::string& path, const std::vector<RawRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << kRawHeader << '\n';
    for (const auto& row : rows) out << format_row(row) << '\n';
}

/// Aggregate CSVs carry experiment-specific columns; header passed by caller.
inline void write_agg_csv(const std::string& path, const std::string& header,
                          const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << header << '\n';
    for (const auto& line : lines) out << line << '\n';
}

inline std::string agg_path_for(const std::string& raw_path) {
    const std::string suffix = ".csv";
    if (raw_path.size() >= suffix.size() &&
        raw_path.compare(raw_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return raw_path.substr(0, raw_path.size() - suffix.size()) + ".agg.csv";
    return raw_path + ".agg.csv";
}

/// Nearest-rank quantile of an unsorted copy.
inline uint64_t quantile_u64(std::vector<uint64_t> values, double q) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const size_t idx = static_cast<size_t>(pos + 0.5);
    return values[std::min(idx, values.size() - 1)];
}

} // namespace lowrank::harness
