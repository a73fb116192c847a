#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace lowrank::harness {

namespace detail {

inline std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

struct PlotSpec {
    std::string name;    // script suffix
    std::string title;
    std::string x_col;
    std::string y_col;
    std::string group_col;    // empty: single curve
    std::string x_label;
    std::string y_label;
    std::string filter_col;   // empty: no filter
    std::string filter_value; // prefix match on filter_col
    bool logy = false;
};

inline constexpr const char* kPlotTemplate = R"PY(#!/usr/bin/env python3
"""@TITLE@

Reads @CSV@ and renders a PNG next to this script. Regenerate the CSV with
the lowrank CLI; an empty CSV yields empty axes.
"""
import csv
import os
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV = "@CSV@"
X, Y, GROUP = "@XCOL@", "@YCOL@", "@GROUPCOL@"
FILTER_COL, FILTER_VALUE = "@FCOL@", "@FVAL@"


def group_key(value):
    try:
        return (0, float(value), value)
    except ValueError:
        return (1, 0.0, value)


series = defaultdict(list)
if os.path.exists(CSV):
    with open(CSV, newline="") as fh:
        for row in csv.DictReader(fh):
            if FILTER_COL and not str(row.get(FILTER_COL, "")).startswith(FILTER_VALUE):
                continue
            try:
                x = float(row[X])
                y = float(row[Y])
            except (KeyError, TypeError, ValueError):
                continue
            series[row.get(GROUP, "") if GROUP else ""].append((x, y))

fig, ax = plt.subplots(figsize=(5.2, 4.0))
for key in sorted(series, key=group_key):
    pts = sorted(series[key])
    label = f"{GROUP}={key}" if GROUP else None
    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
ax.set_xlabel("@XLABEL@")
ax.set_ylabel("@YLABEL@")
ax.set_title("@TITLE@")
if @LOGY@ and series:
    ax.set_yscale("log")
if GROUP and series:
    ax.legend(fontsize=8)
fig.tight_layout()
out = os.path.splitext(os.path.abspath(__file__))[0] + ".png"
fig.savefig(out, dpi=150)
print(f"wrote {out}")
)PY";

inline std::string render_plot_script(const PlotSpec& spec, const std::string& csv_path) {
    std::string body = kPlotTemplate;
    body = replace_all(body, "@TITLE@", spec.title);
    body = replace_all(body, "@CSV@", csv_path);
    body = replace_all(body, "@XCOL@", spec.x_col);
    body = replace_all(body, "@YCOL@", spec.y_col);
    body = replace_all(body, "@GROUPCOL@", spec.group_col);
    body = replace_all(body, "@FCOL@", spec.filter_col);
    body = replace_all(body, "@FVAL@", spec.filter_value);
    body = replace_all(body, "@XLABEL@", spec.x_label);
    body = replace_all(body, "@YLABEL@", spec.y_label);
    body = replace_all(body, "@LOGY@", spec.logy ? "True" : "False");
    return body;
}

} // namespace detail

/// Writes standalone matplotlib scripts (one per figure analog) next to the
/// CSV they read. `kind` is one of complete | approx | bounds | lowerbound.
/// Returns the script paths.
inline std::vector<std::string> emit_plot_scripts(const std::string& kind,
                                                  const std::string& agg_csv_path,
                                                  const std::string& out_stem) {
    using detail::PlotSpec;
    std::vector<PlotSpec> specs;
    if (kind == "complete") {
        specs = {
            {"success_vs_p_by_n", "Exact recovery rate vs sampling fraction", "p", "success_rate",
             "n", "p = m/d", "success rate", "", "", false},
            {"success_vs_m_by_n", "Exact recovery rate vs probes per column", "m", "success_rate",
             "n", "m (probes per column)", "success rate", "", "", false},
            {"success_vs_p_by_r", "Exact recovery rate vs sampling fraction by rank", "p",
             "success_rate", "r", "p = m/d", "success rate", "", "", false},
            {"success_vs_p_rescaled_by_r", "Exact recovery rate vs p/(r log r)", "p_over_rlogr",
             "success_rate", "r", "p / (r log r)", "success rate", "", "", false},
        };
    } else if (kind == "approx") {
        specs = {
            {"eps_vs_p_by_r", "Excess risk vs sampling fraction", "p", "eps_mean", "r", "p (avg samples per column / d)",
             "excess risk", "experiment", "approx-adaptive", true},
            {"eps_over_sqrt_r_vs_p", "Rank-rescaled excess risk", "p", "eps_over_sqrt_r", "r",
             "p (avg samples per column / d)", "excess risk / sqrt(r)", "experiment", "approx-adaptive", true},
            {"sqrtp_eps_vs_p", "Budget-rescaled excess risk", "p", "eps_times_sqrt_p", "n",
             "p (avg samples per column / d)", "sqrt(p) * excess risk", "experiment", "approx-adaptive", false},
            {"adaptive_vs_passive", "Adaptive vs passive sampling", "p", "eps_mean", "experiment",
             "p (avg samples per column / d)", "excess risk", "", "", true},
        };
    } else if (kind == "bounds") {
        specs = {
            {"coverage_vs_m", "Projection bound coverage vs probe count", "m", "coverage", "delta",
             "m (probes)", "coverage", "", "", false},
        };
    } else if (kind == "lowerbound") {
        specs = {
            {"success_vs_budget", "Recovery rate vs entry budget on the hard family", "budget_frac",
             "success_rate", "experiment", "budget (fraction of entries)", "success rate", "", "",
             false},
        };
    } else {
        throw std::invalid_argument("emit_plot_scripts: unknown kind '" + kind + "'");
    }

    std::vector<std::string> written;
    for (const auto& spec : specs) {
        const std::string path = out_stem + "_" + spec.name + ".py";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("emit_plot_scripts: cannot write '" + path + "'");
        out << detail::render_plot_script(spec, agg_csv_path);
        written.push_back(path);
    }
    return written;
}

} // namespace lowrank::harness
