"""Command-line entry point: ``infodemic <subcommand> [options]``.

Every subcommand writes its artifacts into ``--out`` together with a merged
``manifest.json`` describing each run (resolved config, input digests, seed,
tool version, outputs).  Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import configparser
import csv
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .ccm import CcmConfig, convergence_profile, select_embedding_dim, surrogate_test
from .classification import behavior_summary, classify_window, sensitivity_sweep
from .errors import DegenerateSeries, InfodemicError, SeriesTooShort
from .ingestion import (filter_events, label_events, parse_events, read_category_table,
                        write_category_table, write_events)
from .network import (build_network, concentration_curves, group_link_density,
                      write_curves_csv, write_density_json)
from .report import report
from .synthgen import (CoupledMapParams, PopulationParams, category_table,
                       gen_coupled_logistic, gen_lag_coupled, gen_population,
                       pipeline_params, table1_params)
from .temporal import (DEFAULT_BINS, cross_correlation, daily_series, first_return_times,
                       parse_bins, return_probability, transition_counts)

logger = logging.getLogger("infodemic")

SUBCOMMANDS = ("ingest", "classify", "summary", "concentration", "density", "transitions",
               "returns", "series", "ccm", "synth", "report")
PRESETS = ("small", "table1", "pipeline", "coupled", "lag")
CURVE_POINTS = 1000

DEFAULTS = {
    "threshold": "0.2",
    "window": "1d",
    "bins": ",".join(f"{a}-{b}" for a, b in DEFAULT_BINS),
    "embedding_dim": None,
    "tau": 1,
    "td": "-5..5",
    "library": None,
    "surrogates": 1000,
    "seed": 0,
    "out": ".",
    "format": "csv",
    "null": "uniform",
    "simple": False,
    "exclude_unlabeled": False,
    "start": None,
    "end": None,
    "x": "consumer_fraction",
    "y": "fake_fraction",
    "preset": "small",
    "lag": None,
    "max_malformed": 0.01,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p, *names):
    opts = {
        "events": lambda: p.add_argument("--events", help="event log (.csv or .jsonl)"),
        "categories": lambda: p.add_argument("--categories",
                                             help="domain,category CSV used to label events"),
        "filter": lambda: (
            p.add_argument("--start", help="first day (ISO date or epoch seconds)"),
            p.add_argument("--end", help="last day, inclusive"),
            p.add_argument("--exclude-unlabeled", action="store_true", default=None)),
        "threshold": lambda: p.add_argument("--threshold",
                                            help="creator threshold on the fake fraction"),
        "window": lambda: p.add_argument("--window", help="window length: 1d, Nd or full"),
        "format": lambda: p.add_argument("--format", choices=("csv", "json")),
    }
    for n in names:
        opts[n]()
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--config", help="flat key=value config file")


def build_parser():
    parser = _Parser(prog="infodemic",
                     description="Creator/consumer analysis of fake-news sharing logs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest", help="parse, label and filter an event log")
    _add_common(p, "events", "categories", "filter", "format")
    p.add_argument("--max-malformed", type=float)

    p = sub.add_parser("classify", help="per-window user roles")
    _add_common(p, "events", "categories", "filter", "threshold", "window", "format")

    p = sub.add_parser("summary", help="only-creator / only-consumer / mixed counts")
    _add_common(p, "events", "categories", "filter", "threshold", "window")

    p = sub.add_parser("concentration", help="content-share concentration curves")
    _add_common(p, "events", "categories", "filter")

    p = sub.add_parser("density", help="observed/expected links between groups")
    _add_common(p, "events", "categories", "filter", "threshold")
    p.add_argument("--null", choices=("uniform", "configuration"))
    p.add_argument("--simple", action="store_true", default=None,
                   help="collapse repeated retweets into one link")

    p = sub.add_parser("transitions", help="consecutive-day group transitions")
    _add_common(p, "events", "categories", "filter", "threshold")

    p = sub.add_parser("returns", help="first-return probabilities by silent-day bins")
    _add_common(p, "events", "categories", "filter", "threshold")
    p.add_argument("--bins", help="gap bins, e.g. 0-2,3-8,9-17,18-45")

    p = sub.add_parser("series", help="daily fake, creator and consumer fractions")
    _add_common(p, "events", "categories", "filter", "threshold")

    p = sub.add_parser("ccm", help="lagged convergent cross mapping with surrogates")
    _add_common(p)
    p.add_argument("--series", help="series CSV (from the series subcommand or synth)")
    p.add_argument("--x", help="column used as X")
    p.add_argument("--y", help="column used as Y")
    p.add_argument("--embedding-dim", type=int)
    p.add_argument("--tau", type=int)
    p.add_argument("--td", help="delays: a..b range or comma list")
    p.add_argument("--library", help="library size, or comma list for convergence")
    p.add_argument("--surrogates", type=int)

    p = sub.add_parser("synth", help="generate a synthetic corpus or coupled series")
    _add_common(p, "format")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--lag", type=int, help="delay for the lag preset")

    p = sub.add_parser("report", help="render report.md and SVG figures from a run")
    p.add_argument("--run", required=True, help="run directory with analysis artifacts")
    return parser


# -- config resolution ---------------------------------------------------------

def read_config(path):
    """Read a flat ``key = value`` file (``#`` comments allowed)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=", ":"))
    cp.optionxform = str
    try:
        cp.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"bad config file {path}: {exc}") from exc
    return {k.strip().replace("-", "_"): v.strip() for k, v in cp["config"].items()}


def _truthy(v):
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def resolve(args):
    """Merge flags over config over defaults; returns ``(settings, extra_config)``."""
    config = read_config(args.config) if getattr(args, "config", None) else {}
    settings = {}
    for key, default in DEFAULTS.items():
        if not hasattr(args, key):
            continue
        flag = getattr(args, key)
        if flag is not None:
            settings[key] = flag
        elif key in config:
            settings[key] = config[key]
        else:
            settings[key] = default
    for key in ("events", "categories", "series"):
        if hasattr(args, key):
            settings[key] = getattr(args, key) or config.get(key)
    extra = {k: v for k, v in config.items() if k not in DEFAULTS
             and k not in ("events", "categories", "series")}
    for key in ("simple", "exclude_unlabeled"):
        if key in settings:
            settings[key] = _truthy(settings[key])
    for key in ("seed", "tau", "surrogates"):
        if key in settings and settings[key] is not None:
            settings[key] = _int(settings[key], key)
    if settings.get("embedding_dim") is not None:
        settings["embedding_dim"] = _int(settings["embedding_dim"], "embedding_dim")
    if settings.get("lag") is not None:
        settings["lag"] = _int(settings["lag"], "lag")
    if "max_malformed" in settings:
        settings["max_malformed"] = float(settings["max_malformed"])
    return settings, extra


def _int(v, name):
    try:
        return int(v)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{name} must be an integer, got {v!r}") from exc


def parse_window(text):
    """``1d``/``Nd`` -> N; ``full`` -> None (one window over the whole log)."""
    t = str(text).strip().lower()
    if t == "full":
        return None
    if t.endswith("d") and t[:-1].isdigit() and int(t[:-1]) >= 1:
        return int(t[:-1])
    raise UsageError(f"bad window {text!r}; use 1d, Nd or full")


def parse_thresholds(text):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad threshold {text!r}") from exc
    if not vals:
        raise UsageError("empty threshold list")
    for v in vals:
        if not 0 < v <= 1:
            raise UsageError(f"threshold must be in (0, 1], got {v}")
    return vals


def parse_int_list(text, name):
    """``a..b`` inclusive range, comma list, or a single integer."""
    t = str(text).strip()
    try:
        if ".." in t:
            lo, hi = t.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(v) for v in t.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad {name} {text!r}; use a..b or a comma list") from exc


# -- I/O helpers ----------------------------------------------------------------

def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _events_format(path):
    return "jsonl" if str(path).lower().endswith((".jsonl", ".json")) else "csv"


def _require(settings, key):
    if not settings.get(key):
        raise UsageError(f"--{key.replace('_', '-')} is required")
    return settings[key]


def load_log(settings):
    path = _require(settings, "events")
    log = parse_events(path, format=_events_format(path),
                       max_malformed=settings.get("max_malformed", 0.01))
    if settings.get("categories"):
        log = label_events(log, read_category_table(settings["categories"]))
    if settings.get("start") or settings.get("end") or settings.get("exclude_unlabeled"):
        log = filter_events(log, settings.get("start"), settings.get("end"),
                            settings.get("exclude_unlabeled", False))
    return log


def _single_threshold(settings):
    vals = parse_thresholds(settings["threshold"])
    if len(vals) != 1:
        raise UsageError("this subcommand takes a single threshold")
    return vals[0]


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _clean(v):
    if isinstance(v, (float, np.floating)):
        return float(v) if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def update_manifest(out, command, settings, inputs, outputs):
    """Merge one run entry into ``out/manifest.json`` (deterministic, no timestamps)."""
    path = os.path.join(out, "manifest.json")
    manifest = {"tool": "infodemic", "version": __version__, "runs": {}}
    if os.path.exists(path):
        try:
            with open(path, encoding="utf-8") as fh:
                old = json.load(fh)
            manifest["runs"] = old.get("runs", {})
        except (OSError, ValueError):
            logger.warning("replacing unreadable manifest %s", path)
    config = {k: v for k, v in sorted(settings.items())
              if k not in ("out", "events", "categories", "series", "run")}
    manifest["runs"][command] = {
        "config": config,
        "inputs": {os.path.basename(p): sha256(p) for p in inputs if p},
        "seed": settings.get("seed"),
        "version": __version__,
        "outputs": sorted(os.path.basename(o) for o in outputs),
    }
    _write_json(path, manifest)


# -- subcommands ----------------------------------------------------------------

def cmd_ingest(s, out):
    log = load_log(s)
    fmt = "jsonl" if s["format"] == "json" else "csv"
    path = os.path.join(out, f"events.{fmt}")
    write_events(log, path, format=fmt)
    st = log.stats
    if st is not None:
        logger.info("read %d records, %d malformed, %d self-shares dropped",
                    st.records, st.malformed, st.self_shares)
    return [path]


def cmd_classify(s, out):
    log = load_log(s)
    assign = classify_window(log, _single_threshold(s), parse_window(s["window"]))
    if s["format"] == "json":
        path = os.path.join(out, "roles.json")
        rows = [dict(zip(("user", "window", "role", "total", "fake"), r))
                for r in assign.as_rows()]
        _write_json(path, {"threshold": assign.threshold, "window_days": assign.window_days,
                           "n_windows": assign.n_windows, "roles": rows})
    else:
        path = os.path.join(out, "roles.csv")
        assign.to_csv(path)
    return [path]


def cmd_summary(s, out):
    log = load_log(s)
    assign = classify_window(log, _single_threshold(s), parse_window(s["window"]))
    path = os.path.join(out, "summary.json")
    _write_json(path, behavior_summary(assign).to_dict())
    return [path]


def cmd_concentration(s, out):
    curves = concentration_curves(load_log(s))
    path = os.path.join(out, "concentration.csv")
    write_curves_csv(curves, path, max_points=CURVE_POINTS)
    return [path]


def cmd_density(s, out):
    log = load_log(s)
    thresholds = parse_thresholds(s["threshold"])
    path = os.path.join(out, "density.json")
    if len(thresholds) == 1:
        assign = classify_window(log, thresholds[0], window_days=None)
        net = build_network(log, simple=s["simple"])
        write_density_json(group_link_density(net, assign, null=s["null"]), path)
    else:
        write_density_json(sensitivity_sweep(log, thresholds, null=s["null"],
                                             simple=s["simple"]), path)
    return [path]


def _daily_assignment(s):
    log = load_log(s)
    return log, classify_window(log, _single_threshold(s), window_days=1)


def cmd_transitions(s, out):
    _, assign = _daily_assignment(s)
    path = os.path.join(out, "transitions.json")
    _write_json(path, transition_counts(assign).to_dict())
    return [path]


def cmd_returns(s, out):
    _, assign = _daily_assignment(s)
    try:
        bins = parse_bins(s["bins"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    profile = return_probability(first_return_times(assign), bins)
    path = os.path.join(out, "returns.json")
    _write_json(path, profile.to_dict())
    return [path]


def cmd_series(s, out):
    log, assign = _daily_assignment(s)
    path = os.path.join(out, "series.csv")
    daily_series(log, assign).to_csv(path)
    return [path]


def _read_columns(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DegenerateSeries(f"{path} has no header")
        cols = {k: [] for k in reader.fieldnames}
        for row in reader:
            for k, v in row.items():
                cols[k].append(float(v) if v not in ("", None) else np.nan)
    return {k: np.array(v) for k, v in cols.items()}


def _interpolate(v):
    ok = ~np.isnan(v)
    if not ok.any():
        raise DegenerateSeries("series has no observed values")
    out = v.copy()
    idx = np.arange(v.size)
    out[~ok] = np.interp(idx[~ok], idx[ok], v[ok])
    return out, int((~ok).sum())


def cmd_ccm(s, out):
    path = _require(s, "series")
    cols = _read_columns(path)
    xname, yname = s["x"], s["y"]
    for name in (xname, yname):
        if name not in cols:
            raise UsageError(f"column {name!r} not in {path}; have {sorted(cols)}")
    x, nx = _interpolate(cols[xname])
    y, ny = _interpolate(cols[yname])
    tds = parse_int_list(s["td"], "td")
    libs = parse_int_list(s["library"], "library") if s["library"] else None
    if libs is not None and (min(libs) < 1 or sorted(set(libs)) != libs):
        raise UsageError("library sizes must be positive and increasing")
    if s["surrogates"] < 1:
        raise UsageError("--surrogates must be >= 1")
    base = dict(tau=s["tau"], n_surrogates=s["surrogates"], seed=s["seed"],
                library_sizes=tuple(libs) if libs and len(libs) > 1 else None)
    rows, conv, params = [], {}, {"x": xname, "y": yname, "tau": s["tau"],
                                  "n_surrogates": s["surrogates"], "seed": s["seed"],
                                  "tds": tds}
    for src, tgt, sname, tname in ((x, y, xname, yname), (y, x, yname, xname)):
        direction = f"{sname}_xmap_{tname}"
        E = s["embedding_dim"]
        if E is None:
            E, _ = select_embedding_dim(src, s["tau"])
        cfg = CcmConfig(embedding_dim=E, **base)
        res = surrogate_test(src, tgt, cfg, tds, direction=direction,
                             library_size=libs[-1] if libs else None)
        rows += res.to_records()
        params[f"embedding_dim_{sname}"] = res.embedding_dim
        params["n_neighbors"] = res.n_neighbors
        params["library_size"] = res.library_size
        if libs is None or len(libs) > 1:
            try:
                cp = convergence_profile(src, tgt, cfg)
                conv[direction] = {"library_sizes": [int(v) for v in cp.library_sizes],
                                   "rho": [_clean(v) for v in cp.rho],
                                   "kendall_tau": _clean(cp.kendall_tau),
                                   "kendall_p": _clean(cp.kendall_p),
                                   "delta": _clean(cp.delta), "converges": bool(cp.converges)}
            except (ValueError, SeriesTooShort) as exc:
                logger.warning("no convergence profile for %s: %s", direction, exc)
    for r in rows:
        r["rho"] = _clean(r["rho"])
        r["surrogate_p95"] = _clean(r["surrogate_p95"])
    xcorr = {}
    if {"fake_fraction", "consumer_fraction", "creator_fraction"} <= set(cols):
        for other in ("consumer_fraction", "creator_fraction"):
            try:
                xcorr[f"{other}~fake_fraction"] = _clean(
                    cross_correlation(cols[other], cols["fake_fraction"]))
            except DegenerateSeries:
                xcorr[f"{other}~fake_fraction"] = None
    payload = {"parameters": params, "rows": rows, "convergence": conv,
               "interpolated_days": {xname: nx, yname: ny}}
    if xcorr:
        payload["cross_correlations"] = xcorr
    jpath = os.path.join(out, "ccm.json")
    _write_json(jpath, payload)
    cpath = os.path.join(out, "ccm.csv")
    with open(cpath, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("direction", "td", "L", "rho", "surrogate_p95", "significant"))
        for r in rows:
            w.writerow((r["direction"], r["td"], r["L"], r["rho"], r["surrogate_p95"],
                        int(r["significant"])))
    return [jpath, cpath]


def cmd_synth(s, extra, out):
    preset, seed = s["preset"], s["seed"]
    if preset in ("coupled", "lag"):
        params = CoupledMapParams.from_mapping({**extra, "seed": seed})
        if preset == "coupled":
            x, y = gen_coupled_logistic(params)
        else:
            if "beta_yx" not in extra and "beta_xy" not in extra:
                params = CoupledMapParams.from_mapping(
                    {"beta_xy": 0.0, "beta_yx": 0.32, **extra, "seed": seed})
            x, y = gen_lag_coupled(params, lag=s["lag"])
        path = os.path.join(out, "coupled.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("t", "x", "y"))
            for t, (a, b) in enumerate(zip(x, y)):
                w.writerow((t, repr(float(a)), repr(float(b))))
        return [path]
    overrides = PopulationParams.from_mapping(extra).__dict__ if extra else {}
    overrides = {k: overrides[k] for k in extra}
    if preset == "small":
        params = PopulationParams(**{**overrides, "seed": seed})
    elif preset == "table1":
        params = table1_params(seed=seed, **overrides)
    else:
        params = pipeline_params(seed=seed, **overrides)
    log, planted = gen_population(params)
    fmt = "jsonl" if s["format"] == "json" else "csv"
    epath = os.path.join(out, f"events.{fmt}")
    write_events(log, epath, format=fmt)
    cpath = os.path.join(out, "categories.csv")
    write_category_table(category_table(), cpath)
    rpath = os.path.join(out, "planted_roles.csv")
    planted.to_csv(rpath)
    return [epath, cpath, rpath]


HANDLERS = {
    "ingest": cmd_ingest, "classify": cmd_classify, "summary": cmd_summary,
    "concentration": cmd_concentration, "density": cmd_density,
    "transitions": cmd_transitions, "returns": cmd_returns, "series": cmd_series,
    "ccm": cmd_ccm,
}


def _setup_logging():
    level = os.environ.get("INFODEMIC_LOG", "WARNING").strip().upper()
    level = int(level) if level.isdigit() else getattr(logging, level, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def _normalise_argv(argv):
    # let "--td -5..5" through argparse, which would read -5..5 as an option
    out = list(argv)
    for i, a in enumerate(out[:-1]):
        if a in ("--td", "--library") and out[i + 1].startswith("-"):
            out[i:i + 2] = [f"{a}={out[i + 1]}"]
            return _normalise_argv(out)
    return out


def run(argv=None):
    """Run one subcommand; returns the process exit code."""
    _setup_logging()
    parser = build_parser()
    argv = _normalise_argv(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        if args.command == "report":
            written = report(args.run)
            for p in written:
                print(p)
            return 0
        settings, extra = resolve(args)
        if extra and args.command != "synth":
            raise UsageError(f"unknown config keys: {', '.join(sorted(extra))}")
        out = settings["out"]
        os.makedirs(out, exist_ok=True)
        if args.command == "synth":
            outputs = cmd_synth(settings, extra, out)
            settings = {**settings, **{f"param.{k}": v for k, v in sorted(extra.items())}}
            inputs = [args.config] if args.config else []
        else:
            outputs = HANDLERS[args.command](settings, out)
            inputs = [settings.get(k) for k in ("events", "categories", "series")]
            inputs.append(args.config)
        update_manifest(out, args.command, settings, [p for p in inputs if p], outputs)
        for p in outputs:
            print(p)
        return 0
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"infodemic: error: {exc}", file=sys.stderr)
        return 1
    except InfodemicError as exc:
        print(f"infodemic: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"infodemic: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"infodemic: error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
