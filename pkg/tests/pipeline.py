"""Fixed-seed end-to-end CLI run shared by the CLI, report and acceptance tests."""

import os

from infodemic.cli import run

SMALL_CONFIG = """\
# synthetic population
n_days = 45
n_creators = 30
n_consumers = 240
n_nonspreaders = 150
driver_amplitude = 1.0
"""

ANALYSES = ("concentration", "density", "returns", "series", "transitions", "summary",
            "classify")


def run_pipeline(out, seed=11, surrogates=200):
    """Run synth, every analysis subcommand, ccm and report into ``out``; return exit codes."""
    os.makedirs(out, exist_ok=True)
    cfg = os.path.join(out, "synth.cfg")
    with open(cfg, "w", encoding="utf-8") as fh:
        fh.write(SMALL_CONFIG)
    codes = {"synth": run(["synth", "--preset", "small", "--config", cfg,
                           "--seed", str(seed), "--out", out])}
    events = os.path.join(out, "events.csv")
    cats = os.path.join(out, "categories.csv")
    for cmd in ANALYSES:
        codes[cmd] = run([cmd, "--events", events, "--categories", cats, "--out", out])
    codes["ccm"] = run(["ccm", "--series", os.path.join(out, "series.csv"), "--td", "-5..5",
                        "--surrogates", str(surrogates), "--seed", "7", "--out", out])
    codes["report"] = run(["report", "--run", out])
    return codes


def snapshot(out):
    """``{file name: bytes}`` for every file in ``out``."""
    return {name: open(os.path.join(out, name), "rb").read()
            for name in sorted(os.listdir(out))}
