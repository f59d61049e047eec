"""Minimal self-contained SVG line plots for diagrams and phase portraits."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

W, H = 640, 480
MARGIN = (70, 20, 30, 55)  # left, right, top, bottom

STYLES = {
    "stable": 'stroke="black" stroke-width="1.6" fill="none"',
    "unstable": 'stroke="black" stroke-width="1" stroke-dasharray="2,3" fill="none"',
    "fold": 'stroke="black" stroke-width="1.4" stroke-dasharray="8,5" fill="none"',
    "hopf": 'stroke="black" stroke-width="1.6" stroke-dasharray="1.5,3" fill="none"',
    "transcritical": 'stroke="#888888" stroke-width="1.6" fill="none"',
    "trajectory": 'stroke="#1f4e9c" stroke-width="1" fill="none"',
}


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, n)


class Plot:
    def __init__(self, xlabel, ylabel, title=""):
        self.xlabel, self.ylabel, self.title = xlabel, ylabel, title
        self.series = []  # (x, y, style)
        self.markers = []  # (x, y, label)

    def line(self, x, y, style="stable"):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if len(x):
            self.series.append((x, y, style))

    def marker(self, x, y, label):
        self.markers.append((float(x), float(y), label))

    def _limits(self):
        xs = [s[0] for s in self.series] + [np.array([m[0] for m in self.markers])]
        ys = [s[1] for s in self.series] + [np.array([m[1] for m in self.markers])]
        xa = np.concatenate([a for a in xs if a.size]) if any(a.size for a in xs) else np.array([0.0, 1.0])
        ya = np.concatenate([a for a in ys if a.size]) if any(a.size for a in ys) else np.array([0.0, 1.0])
        xa, ya = xa[np.isfinite(xa)], ya[np.isfinite(ya)]
        x0, x1 = (xa.min(), xa.max()) if xa.size else (0.0, 1.0)
        y0, y1 = (ya.min(), ya.max()) if ya.size else (0.0, 1.0)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.03 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def render(self) -> str:
        left, right, top, bottom = MARGIN
        x0, x1, y0, y1 = self._limits()
        pw, ph = W - left - right, H - top - bottom

        def tx(v):
            return left + (v - x0) / (x1 - x0) * pw

        def ty(v):
            return top + ph - (v - y0) / (y1 - y0) * ph

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
               f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
               f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
               f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
        for v in _ticks(x0, x1):
            out.append(f'<text x="{tx(v):.2f}" y="{top + ph + 15}" text-anchor="middle">{v:.4g}</text>')
        for v in _ticks(y0, y1):
            out.append(f'<text x="{left - 5}" y="{ty(v) + 4:.2f}" text-anchor="end">{v:.4g}</text>')
        out.append(f'<text x="{left + pw / 2}" y="{H - 12}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="15" y="{top + ph / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 15 {top + ph / 2})">{escape(self.ylabel)}</text>')
        if self.title:
            out.append(f'<text x="{left + pw / 2}" y="{top - 10}" text-anchor="middle">{escape(self.title)}</text>')
        for x, y, style in self.series:
            ok = np.isfinite(x) & np.isfinite(y)
            pts = " ".join(f"{tx(a):.2f},{ty(b):.2f}" for a, b in zip(x[ok], y[ok]))
            out.append(f'<polyline points="{pts}" {STYLES.get(style, STYLES["stable"])}/>')
        for x, y, label in self.markers:
            out.append(f'<circle cx="{tx(x):.2f}" cy="{ty(y):.2f}" r="3" fill="black"/>')
            out.append(f'<text x="{tx(x) + 5:.2f}" y="{ty(y) - 5:.2f}">{escape(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _runs(labels):
    """Consecutive index runs with the same label."""
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            yield start, i, labels[start]
            start = i


def branch_diagram(branches, events, component=0) -> str:
    """One-parameter diagram: x_component against the parameter, solid when stable."""
    param = branches[0].param if branches else "alpha"
    plot = Plot(param, f"x{component}")
    short = {"fold": "LP", "transcritical": "BP", "hopf": "HB"}
    for b in branches:
        labels = ["stable" if (r is not None and r.stable) else "unstable" for r in b.reports]
        for i, j, lab in _runs(labels):
            jj = min(j + 1, len(b.values))
            plot.line(b.values[i:jj], b.states[i:jj, component], lab)
    for e in events:
        plot.marker(e.params[param], e.state[component], short.get(e.kind, e.kind))
    return plot.render()


def two_parameter_diagram(curves) -> str:
    """Codimension-one curves in a parameter plane, styled by kind."""
    names = curves[0].params if curves else ("alpha", "u_f")
    plot = Plot(names[0], names[1])
    short = {"bautin": "GH", "bogdanov-takens": "BT"}
    for c in curves:
        plot.line(c.values[:, 0], c.values[:, 1], c.kind)
        for pt in c.points:
            plot.marker(pt.params[names[0]], pt.params[names[1]], short.get(pt.kind, pt.kind))
    return plot.render()


def phase_portrait(traj, axes=(0, 1)) -> str:
    i, j = axes
    plot = Plot(f"x{i}", f"x{j}")
    plot.line(traj.y[:, i], traj.y[:, j], "trajectory")
    if len(traj.t):
        plot.marker(traj.y[0, i], traj.y[0, j], "start")
    return plot.render()
