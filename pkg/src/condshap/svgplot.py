"""Minimal hand-written SVG charts for the benchmark outputs."""

import itertools
from html import escape

import numpy as np

PALETTE = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02",
           "#a6761d", "#666666", "#1f78b4", "#b2df8a"]
_RAMP = [(68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)]


def _f(x):
    return f"{x:.2f}"


def ramp(t):
    """Viridis-like colour for ``t`` in [0, 1]."""
    t = min(max(float(t), 0.0), 1.0) * (len(_RAMP) - 1)
    i = min(int(t), len(_RAMP) - 2)
    a, b = _RAMP[i], _RAMP[i + 1]
    w = t - i
    r, g, bl = (round(a[c] + w * (b[c] - a[c])) for c in range(3))
    return f"#{r:02x}{g:02x}{bl:02x}"


class Canvas:
    def __init__(self, width, height, title=""):
        self.width = width
        self.height = height
        self.items = []
        if title:
            self.text(width / 2, 20, title, size=15, anchor="middle", weight="bold")

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                          f'stroke="{stroke}" stroke-width="{width}"{d}/>')

    def rect(self, x, y, w, h, fill="none", stroke="#000"):
        if h < 0:
            y, h = y + h, -h
        self.items.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" '
                          f'fill="{fill}" stroke="{stroke}"/>')

    def circle(self, x, y, r, fill="#000", opacity=1.0):
        self.items.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{r}" fill="{fill}" '
                          f'fill-opacity="{opacity}"/>')

    def text(self, x, y, s, size=11, anchor="start", weight="normal", rotate=None):
        tr = f' transform="rotate({rotate} {_f(x)} {_f(y)})"' if rotate is not None else ""
        self.items.append(f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" '
                          f'font-family="sans-serif" text-anchor="{anchor}" '
                          f'font-weight="{weight}"{tr}>{escape(str(s))}</text>')

    def to_string(self):
        body = "\n".join(self.items)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
                f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
                f'<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n')

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_string())


class Axes:
    """Linear data-to-pixel map for one panel, with ticks and labels."""

    def __init__(self, canvas, x0, y0, w, h, xlim, ylim):
        self.c, self.x0, self.y0, self.w, self.h = canvas, x0, y0, w, h
        self.xticks = _ticks(xlim)
        self.yticks = _ticks(ylim)
        self.xlim = _pad(xlim)
        self.ylim = _pad(ylim)

    def px(self, x):
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * self.w

    def py(self, y):
        lo, hi = self.ylim
        return self.y0 + self.h - (y - lo) / (hi - lo) * self.h

    def frame(self, xlabel="", ylabel="", xticks=True, yticks=True):
        c = self.c
        c.rect(self.x0, self.y0, self.w, self.h)
        if yticks:
            for v in self.yticks:
                y = self.py(v)
                c.line(self.x0 - 4, y, self.x0, y)
                c.text(self.x0 - 6, y + 4, f"{v:.2g}", size=9, anchor="end")
        if xticks:
            for v in self.xticks:
                x = self.px(v)
                c.line(x, self.y0 + self.h, x, self.y0 + self.h + 4)
                c.text(x, self.y0 + self.h + 15, f"{v:.2g}", size=9, anchor="middle")
        if xlabel:
            c.text(self.x0 + self.w / 2, self.y0 + self.h + 32, xlabel, anchor="middle")
        if ylabel:
            c.text(self.x0 - 42, self.y0 + self.h / 2, ylabel, anchor="middle", rotate=-90)


def _ticks(lim):
    lo, hi = float(lim[0]), float(lim[1])
    return np.linspace(lo, hi if hi > lo else lo + 1.0, 5)


def _pad(lim):
    lo, hi = float(lim[0]), float(lim[1])
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    return lo - 0.04 * span, hi + 0.04 * span


def mae_boxplot(report, path):
    """Per-instance MAE box per method, ordered by overall MAE."""
    methods = report.ordered_methods()
    n = len(methods)
    W, H = max(360, 90 * n + 120), 420
    c = Canvas(W, H, "Per-instance MAE of estimated Shapley values")
    vals = [report.per_instance_mae[m] for m in methods]
    top = max(float(v.max()) for v in vals)
    ax = Axes(c, 80, 40, W - 110, H - 150, (0.0, top), (0.0, top))
    ax.frame(ylabel="MAE (|phi_true - phi_est|, units of f)", xticks=False)
    slot = ax.w / n
    for i, (m, v) in enumerate(zip(methods, vals)):
        cx = ax.x0 + slot * (i + 0.5)
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        fence = q3 + 1.5 * (q3 - q1)
        low_fence = q1 - 1.5 * (q3 - q1)
        inside = v[(v <= fence) & (v >= low_fence)]
        bw = min(50.0, slot * 0.6)
        c.line(cx, ax.py(inside.min()), cx, ax.py(q1))
        c.line(cx, ax.py(q3), cx, ax.py(inside.max()))
        c.rect(cx - bw / 2, ax.py(q3), bw, ax.py(q1) - ax.py(q3),
               fill=PALETTE[i % len(PALETTE)], stroke="#000")
        c.line(cx - bw / 2, ax.py(med), cx + bw / 2, ax.py(med), width=2)
        for o in v[v > fence]:
            c.circle(cx, ax.py(o), 2.5, fill="#000", opacity=0.6)
        c.text(cx, ax.y0 + ax.h + 16, m, size=10, anchor="end", rotate=-30)
        c.text(cx, ax.y0 + ax.h + 60, f"MAE {report.overall_mae[m]:.3f}", size=9,
               anchor="middle")
    c.save(path)
    return path


def mae_scatter(report, path, color_by=None):
    """One panel per method pair: per-instance MAE of one against the other,
    coloured by distance to the training centre."""
    methods = report.ordered_methods()
    pairs = list(itertools.combinations(methods, 2))
    color_by = report.distance if color_by is None else np.asarray(color_by)
    cols = max(1, min(3, len(pairs)))
    rows = max(1, -(-len(pairs) // cols))
    pw, ph = 240, 220
    W, H = cols * (pw + 80) + 40, rows * (ph + 70) + 90
    c = Canvas(W, H, "Per-instance MAE, method against method (colour: distance to centre)")
    dmin, dmax = float(color_by.min()), float(color_by.max())
    span = dmax - dmin if dmax > dmin else 1.0
    for p, (a, b) in enumerate(pairs):
        r, k = divmod(p, cols)
        x0, y0 = 70 + k * (pw + 80), 45 + r * (ph + 70)
        va, vb = report.per_instance_mae[a], report.per_instance_mae[b]
        hi = max(float(va.max()), float(vb.max()))
        ax = Axes(c, x0, y0, pw, ph, (0.0, hi), (0.0, hi))
        ax.frame(xlabel=f"MAE {a}", ylabel=f"MAE {b}")
        c.line(ax.px(0), ax.py(0), ax.px(hi), ax.py(hi), stroke="#999", dash="4,3")
        for i in np.argsort(color_by, kind="stable"):
            c.circle(ax.px(va[i]), ax.py(vb[i]), 2.5, fill=ramp((color_by[i] - dmin) / span),
                     opacity=0.85)
    # colour bar
    bx, by = 20, H - 30
    for i in range(50):
        c.rect(bx + i * 4, by, 4, 10, fill=ramp(i / 49), stroke="none")
    c.text(bx, by - 4, f"distance {dmin:.2f}", size=9)
    c.text(bx + 200, by - 4, f"{dmax:.2f}", size=9, anchor="end")
    c.save(path)
    return path


def select_observations(predictions, phi0):
    """Positions of the lowest prediction, the one closest to ``phi0`` and the highest."""
    p = np.asarray(predictions, dtype=float)
    return [int(np.argmin(p)), int(np.argmin(np.abs(p - phi0))), int(np.argmax(p))]


def shapley_bars(truth, estimates, positions, predictions, path):
    """Grouped bars of true and estimated Shapley values for chosen observations."""
    series = [("truth", truth)] + list(estimates.items())
    M = truth[0].M
    n = len(positions)
    pw, ph = max(320, M * (12 * len(series) + 14)), 230
    W, H = pw + 230, n * (ph + 70) + 80
    c = Canvas(W, H, "True and estimated Shapley values")
    for r, pos in enumerate(positions):
        y0 = 45 + r * (ph + 70)
        vals = np.array([s[pos].phi for _, s in series])
        lo, hi = min(0.0, float(vals.min())), max(0.0, float(vals.max()))
        ax = Axes(c, 80, y0, pw, ph, (0, M), (lo, hi))
        ax.frame(ylabel="phi (units of f)", xticks=False)
        e = truth[pos]
        c.text(ax.x0 + 4, y0 - 6, f"observation {e.obs_id}: f(x*) = {predictions[pos]:.3f}, "
               f"phi0 = {e.phi0:.3f}", size=10)
        c.line(ax.x0, ax.py(0), ax.x0 + ax.w, ax.py(0), stroke="#555")
        slot = ax.w / M
        bw = slot * 0.8 / len(series)
        for j in range(M):
            base = ax.x0 + slot * j + slot * 0.1
            for s, (name, _) in enumerate(series):
                v = vals[s, j]
                c.rect(base + s * bw, ax.py(max(v, 0.0)), bw, abs(ax.py(v) - ax.py(0)),
                       fill=PALETTE[s % len(PALETTE)], stroke="none")
            c.text(ax.x0 + slot * (j + 0.5), ax.y0 + ax.h + 14, f"x{j + 1}", size=10,
                   anchor="middle")
    for s, (name, _) in enumerate(series):
        ly = 50 + s * 16
        c.rect(pw + 95, ly - 9, 10, 10, fill=PALETTE[s % len(PALETTE)], stroke="none")
        c.text(pw + 109, ly, name, size=10)
    c.save(path)
    return path
