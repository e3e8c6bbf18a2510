"""Consolidated markdown report over a run directory."""

import json
import os

import numpy as np

from . import svg
from .errors import MissingArtifact
from .network import read_curves_csv
from .temporal import moving_average, read_series_csv

REQUIRED = ("concentration.csv", "density.json", "returns.json", "series.csv", "ccm.json")
FIGURES = ("fig1_concentration.svg", "fig2_density.svg", "fig3_returns.svg",
           "fig4a_series.svg", "fig4b_ccm.svg")
MOVING_AVERAGE_DAYS = 10
ABBREV = {"Creator": "Cr", "Consumer": "Co", "NonSpreader": "NS"}


def _load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _concentration_figure(curves):
    lines = [{"label": "equal share", "x": [0, 1], "y": [0, 1], "color": "#999999",
              "dash": "4 3"}]
    for i, (label, (x, y)) in enumerate(sorted(curves.items())):
        color = "#d62728" if label == "fake" else svg.PALETTE[(i + 1) % len(svg.PALETTE)]
        lines.append({"label": label, "x": np.r_[0.0, x], "y": np.r_[0.0, y], "color": color})
    return svg.line_chart(lines, "Content share vs user share", "share of users",
                          "share of content", xlim=(0, 1), ylim=(0, 1))


def _density_blocks(density):
    if "sweep" in density:
        return [(f"threshold {r['threshold']:g}", r["density"]) for r in density["sweep"]]
    return [("", density)]


def _density_figure(density):
    blocks = _density_blocks(density)
    cats = [f"{ABBREV[c['from']]}>{ABBREV[c['to']]}" for c in blocks[0][1]["cells"]]
    groups = [(label or "ratio", [c["ratio"] for c in d["cells"]]) for label, d in blocks]
    return svg.bar_chart(cats, groups, "Observed / expected links", "ratio", hline=1.0)


def _returns_figure(returns):
    cats = []
    same, other = [], []
    for role, rows in returns["profiles"].items():
        for r in rows:
            cats.append(f"{role[:4]} {r['bin']}")
            if r["empty"]:
                same.append(None)
                other.append(None)
                continue
            ps = r["p_creator"] if role == "Creator" else r["p_consumer"]
            same.append(ps)
            other.append(1.0 - ps)
    return svg.bar_chart(cats, [("same group", same), ("other group", other)],
                         "Return-group probability by silent days", "probability")


def _series_figure(series):
    day = series["day"]
    lines = []
    spec = (("fake_fraction", "fake (10-day MA)", "#000000", False),
            ("consumer_fraction", "consumers, rescaled", "#1f77b4", True),
            ("creator_fraction", "creators, rescaled", "#d62728", True))
    for col, label, color, rescale in spec:
        v = series[col]
        if np.all(np.isnan(v)):
            continue
        ma = moving_average(v, MOVING_AVERAGE_DAYS)
        if rescale:
            lo, hi = np.nanmin(ma), np.nanmax(ma)
            fk = moving_average(series["fake_fraction"], MOVING_AVERAGE_DAYS)
            flo, fhi = np.nanmin(fk), np.nanmax(fk)
            ma = flo + (ma - lo) / (hi - lo) * (fhi - flo) if hi > lo else ma
        lines.append({"label": label, "x": day, "y": ma, "color": color})
    return svg.line_chart(lines, "Daily fake volume and group sizes", "day", "fraction")


def _ccm_figure(ccm):
    lines = []
    band = None
    by_dir = {}
    for row in ccm["rows"]:
        by_dir.setdefault(row["direction"], []).append(row)
    for i, (direction, rows) in enumerate(sorted(by_dir.items())):
        rows = sorted(rows, key=lambda r: r["td"])
        td = [r["td"] for r in rows]
        lines.append({"label": direction, "x": td, "y": [r["rho"] for r in rows],
                      "color": svg.PALETTE[i]})
        p95 = [r["surrogate_p95"] for r in rows]
        if band is None:
            band = (td, [0.0] * len(td), p95, "surrogate 95% CL")
        else:
            band = (td, band[1], list(np.maximum(band[2], p95)), band[3])
    return svg.line_chart(lines, "Cross-map skill vs time delay", "time delay (days)",
                          "rho", band=band)


def _table(headers, rows):
    out = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    out += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return "\n".join(out)


def _num(v, fmt=".3f"):
    return "n/a" if v is None else format(v, fmt)


def report(run_dir):
    """Render ``report.md`` and five SVG figures from the artifacts in ``run_dir``.

    Raises
    ------
    MissingArtifact
        Naming the first required artifact that is absent.

    Returns
    -------
    list of str
        Paths of written files, report first.
    """
    for name in REQUIRED:
        if not os.path.exists(os.path.join(run_dir, name)):
            raise MissingArtifact(name)
    curves = read_curves_csv(os.path.join(run_dir, "concentration.csv"))
    density = _load_json(os.path.join(run_dir, "density.json"))
    returns = _load_json(os.path.join(run_dir, "returns.json"))
    series = read_series_csv(os.path.join(run_dir, "series.csv"))
    ccm = _load_json(os.path.join(run_dir, "ccm.json"))

    figs = [_concentration_figure(curves), _density_figure(density),
            _returns_figure(returns), _series_figure(series), _ccm_figure(ccm)]
    written = []
    for name, body in zip(FIGURES, figs):
        path = os.path.join(run_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
        written.append(path)

    md = ["# Analysis report", ""]
    md += ["## 1. Concentration of activity", "", f"![concentration]({FIGURES[0]})", ""]
    rows = []
    for label, (x, y) in sorted(curves.items()):
        i = int(np.searchsorted(x, 0.1, side="left"))
        rows.append((label, len(x), _num(float(y[min(i, len(y) - 1)]))))
    md += [_table(("content", "points", "share held by top 10% users"), rows), ""]

    md += ["## 2. Link density between groups", "", f"![density]({FIGURES[1]})", ""]
    for label, d in _density_blocks(density):
        if label:
            md += [f"**{label}**", ""]
        md += [f"Null model: {d['null']}; N = {d['n_nodes']}, L = {d['n_links']}; sizes "
               + ", ".join(f"{k}={v}" for k, v in sorted(d["sizes"].items())), ""]
        md += [_table(("from", "to", "observed", "expected", "ratio"),
                      [(c["from"], c["to"], c["observed"], _num(c["expected"], ".2f"),
                        _num(c["ratio"])) for c in d["cells"]]), ""]

    md += ["## 3. Return times", "", f"![returns]({FIGURES[2]})", ""]
    rows = []
    for role, prof in returns["profiles"].items():
        for r in prof:
            rows.append((role, r["bin"], r["n_to_creator"], r["n_to_consumer"],
                         _num(r["p_creator"]), _num(r["p_consumer"])))
    md += [_table(("from", "gap days", "to Creator", "to Consumer", "P(Creator)",
                   "P(Consumer)"), rows), "", f"Records outside all bins: {returns['unbinned']}", ""]

    md += ["## 4. Daily series", "", f"![series]({FIGURES[3]})", "",
           f"Lines show a {MOVING_AVERAGE_DAYS}-day centred moving average; group fractions "
           "are rescaled onto the fake-fraction range for comparison.", ""]
    if "cross_correlations" in ccm:
        md += [_table(("pair", "r"), [(k, _num(v)) for k, v in
                                      sorted(ccm["cross_correlations"].items())]), ""]

    md += ["## 5. Lagged cross mapping", "", f"![ccm]({FIGURES[4]})", ""]
    params = ccm.get("parameters", {})
    if params:
        md += ["Parameters: " + ", ".join(f"{k}={v}" for k, v in sorted(params.items())), ""]
    md += [_table(("direction", "td", "L", "rho", "surrogate p95", "significant"),
                  [(r["direction"], r["td"], r["L"], _num(r["rho"]), _num(r["surrogate_p95"]),
                    "yes" if r["significant"] else "no") for r in ccm["rows"]]), ""]
    path = os.path.join(run_dir, "report.md")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(md))
    return [path] + written
