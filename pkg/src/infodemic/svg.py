"""Minimal deterministic SVG charts (line and grouped bar)."""

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 400
MARGIN = dict(left=60, right=250, top=40, bottom=50)
PALETTE = ("#d62728", "#1f77b4", "#000000", "#2ca02c", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _f(v):
    return f"{v:.2f}"


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def x(self, v):
        return MARGIN["left"] + (v - self.x0) / (self.x1 - self.x0) * self.pw

    def y(self, v):
        return MARGIN["top"] + (1 - (v - self.y0) / (self.y1 - self.y0)) * self.ph


def _ticks(lo, hi, n=5):
    """Round-valued ticks (steps of 1, 2 or 5 times a power of ten) inside [lo, hi]."""
    span = hi - lo
    raw = span / max(n - 1, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = np.ceil(lo / step - 1e-9) * step
    ticks = np.arange(first, hi + step * 1e-9, step)
    return np.round(ticks, 12)


def _axes(fr, title, xlabel, ylabel, xticks=None):
    out = [f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{fr.pw}" height="{fr.ph}" '
           'fill="none" stroke="#444"/>']
    for t in (xticks if xticks is not None else _ticks(fr.x0, fr.x1)):
        out.append(f'<text x="{_f(fr.x(t))}" y="{_f(HEIGHT - MARGIN["bottom"] + 16)}" '
                   f'font-size="10" text-anchor="middle">{_fmt_tick(t)}</text>')
    for t in _ticks(fr.y0, fr.y1):
        out.append(f'<text x="{_f(MARGIN["left"] - 6)}" y="{_f(fr.y(t) + 3)}" '
                   f'font-size="10" text-anchor="end">{_fmt_tick(t)}</text>')
    out.append(f'<text x="{WIDTH / 2 - MARGIN["right"] / 2:.2f}" y="22" font-size="14" '
               f'text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{MARGIN["left"] + fr.pw / 2:.2f}" y="{HEIGHT - 12}" font-size="11" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{MARGIN["top"] + fr.ph / 2:.2f}" font-size="11" '
               f'text-anchor="middle" transform="rotate(-90 14 {MARGIN["top"] + fr.ph / 2:.2f})">'
               f'{escape(ylabel)}</text>')
    return out


def _fmt_tick(t):
    t = 0.0 if abs(t) < 1e-12 else float(t)
    return f"{t:.0f}" if abs(t - round(t)) < 1e-9 else f"{t:.6g}"


def _legend(labels, colors, dashes=None):
    out = []
    x = WIDTH - MARGIN["right"] + 10
    for i, (lab, col) in enumerate(zip(labels, colors)):
        y = MARGIN["top"] + 14 + 16 * i
        dash = f' stroke-dasharray="{dashes[i]}"' if dashes and dashes[i] else ""
        out.append(f'<line x1="{x}" y1="{y}" x2="{x + 18}" y2="{y}" stroke="{col}" '
                   f'stroke-width="2"{dash}/>')
        out.append(f'<text x="{x + 24}" y="{y + 4}" font-size="10">{escape(str(lab))}</text>')
    return out


def _doc(body):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
                     + body + ["</svg>", ""])


def _polyline(fr, xs, ys, color, dash=None, width=1.5):
    pts = []
    segs = []
    for x, y in zip(xs, ys):
        if y is None or not np.isfinite(y):
            if pts:
                segs.append(pts)
            pts = []
            continue
        pts.append(f"{_f(fr.x(x))},{_f(fr.y(y))}")
    if pts:
        segs.append(pts)
    d = f' stroke-dasharray="{dash}"' if dash else ""
    return [f'<polyline points="{" ".join(s)}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{d}/>' for s in segs]


def line_chart(lines, title="", xlabel="", ylabel="", xlim=None, ylim=None, band=None,
               hline=None):
    """Render line series.

    ``lines`` is a list of dicts with ``label``, ``x``, ``y`` and optional
    ``color``/``dash``.  ``band`` is ``(x, lo, hi, label)`` drawn as a shaded
    area; ``hline`` a horizontal reference value.
    """
    xs = np.concatenate([np.asarray(l["x"], float) for l in lines])
    ys = np.concatenate([np.asarray(l["y"], float) for l in lines])
    if band is not None:
        ys = np.concatenate([ys, np.asarray(band[1], float), np.asarray(band[2], float)])
    ys = ys[np.isfinite(ys)]
    xlim = xlim or (float(xs.min()), float(xs.max()))
    if ylim is None:
        lo, hi = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
        pad = 0.05 * (hi - lo) if hi > lo else 0.5
        ylim = (lo - pad, hi + pad)
    fr = _Frame(xlim, ylim)
    body = _axes(fr, title, xlabel, ylabel)
    labels, colors, dashes = [], [], []
    if band is not None:
        bx, lo, hi, blabel = band
        up = [f"{_f(fr.x(x))},{_f(fr.y(v))}" for x, v in zip(bx, hi)]
        down = [f"{_f(fr.x(x))},{_f(fr.y(v))}" for x, v in zip(bx[::-1], lo[::-1])]
        body.append(f'<polygon points="{" ".join(up + down)}" fill="#999" fill-opacity="0.3" '
                    'stroke="none"/>')
        labels.append(blabel)
        colors.append("#999")
        dashes.append(None)
    if hline is not None:
        body.append(f'<line x1="{_f(fr.x(xlim[0]))}" y1="{_f(fr.y(hline))}" '
                    f'x2="{_f(fr.x(xlim[1]))}" y2="{_f(fr.y(hline))}" stroke="#000" '
                    'stroke-dasharray="4 3"/>')
    for i, l in enumerate(lines):
        col = l.get("color") or PALETTE[i % len(PALETTE)]
        body += _polyline(fr, l["x"], l["y"], col, l.get("dash"))
        labels.append(l["label"])
        colors.append(col)
        dashes.append(l.get("dash"))
    body += _legend(labels, colors, dashes)
    return _doc(body)


def bar_chart(categories, groups, title="", ylabel="", hline=None):
    """Grouped bars: ``groups`` is a list of ``(label, values)``, one value per category."""
    vals = np.array([[np.nan if v is None else v for v in g[1]] for g in groups], float)
    top = np.nanmax(vals) if np.isfinite(vals).any() else 1.0
    if hline is not None:
        top = max(top, hline)
    fr = _Frame((0, len(categories)), (0, top * 1.05))
    body = _axes(fr, title, "", ylabel, xticks=[])
    n = len(groups)
    slot = fr.pw / max(len(categories), 1)
    bw = slot * 0.8 / max(n, 1)
    for c, cat in enumerate(categories):
        cx = MARGIN["left"] + slot * c
        body.append(f'<text x="{_f(cx + slot / 2)}" y="{HEIGHT - MARGIN["bottom"] + 16}" '
                    f'font-size="9" text-anchor="middle">{escape(str(cat))}</text>')
        for g in range(n):
            v = vals[g, c]
            if not np.isfinite(v):
                continue
            x = cx + slot * 0.1 + g * bw
            body.append(f'<rect x="{_f(x)}" y="{_f(fr.y(v))}" width="{_f(bw)}" '
                        f'height="{_f(fr.y(0) - fr.y(v))}" fill="{PALETTE[g % len(PALETTE)]}"/>')
    if hline is not None:
        body.append(f'<line x1="{MARGIN["left"]}" y1="{_f(fr.y(hline))}" '
                    f'x2="{MARGIN["left"] + fr.pw}" y2="{_f(fr.y(hline))}" stroke="#000" '
                    'stroke-dasharray="4 3"/>')
    body += _legend([g[0] for g in groups], [PALETTE[i % len(PALETTE)] for i in range(n)])
    return _doc(body)
