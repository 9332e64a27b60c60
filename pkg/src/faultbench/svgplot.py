"""Minimal self-contained SVG rendering of sweep results.

Pure text emission: drawing here can never feed back into the numbers it
displays. One chart style only: per-duration min/max whiskers, mean markers,
and the quadratic trend curve.
"""

from __future__ import annotations

import math

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 55


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(1, n - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.floor(lo / step) * step
    ticks = []
    v = start
    while v <= hi + step * 1e-9:
        if v >= lo - step * 1e-9:
            ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


class _Canvas:
    def __init__(self, x_range, y_range):
        self.parts: list[str] = []
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range

    def px(self, x: float) -> float:
        span = self.x1 - self.x0 or 1.0
        return MARGIN_L + (x - self.x0) / span * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y: float) -> float:
        span = self.y1 - self.y0 or 1.0
        return HEIGHT - MARGIN_B - (y - self.y0) / span * (HEIGHT - MARGIN_T - MARGIN_B)

    def line(self, x1, y1, x2, y2, color="#444", width=1.0):
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{color}" stroke-width="{_fmt(width)}"/>'
        )

    def rect(self, cx, cy, size, color):
        half = size / 2
        self.parts.append(
            f'<rect x="{_fmt(cx - half)}" y="{_fmt(cy - half)}" width="{_fmt(size)}" '
            f'height="{_fmt(size)}" fill="{color}"/>'
        )

    def polyline(self, points, color, width=2.0):
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{_fmt(width)}"/>'
        )

    def text(self, x, y, s, size=13, anchor="middle", rotate=None, color="#222"):
        extra = f' transform="rotate({rotate} {_fmt(x)} {_fmt(y)})"' if rotate else ""
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" fill="{color}" '
            f'font-family="sans-serif" text-anchor="{anchor}"{extra}>{s}</text>'
        )


def render_sweep_plot(durations, means, mins, maxs, fit, *, title: str,
                      xlabel: str, ylabel: str) -> str:
    """SVG chart string: whiskers (min..max), mean markers, fitted parabola.

    ``fit`` is (a, b, c) of the quadratic trend, or None to omit the curve.
    """
    durations = list(durations)
    x_lo, x_hi = min(durations), max(durations)
    pad = (x_hi - x_lo) * 0.06 or 0.05
    y_lo = 0.0
    y_hi = max(list(maxs) + list(means)) * 1.08 or 1.0

    cv = _Canvas((x_lo - pad, x_hi + pad), (y_lo, y_hi))

    # frame and ticks
    cv.line(MARGIN_L, MARGIN_T, MARGIN_L, HEIGHT - MARGIN_B)
    cv.line(MARGIN_L, HEIGHT - MARGIN_B, WIDTH - MARGIN_R, HEIGHT - MARGIN_B)
    for xt in _nice_ticks(x_lo, x_hi):
        px = cv.px(xt)
        cv.line(px, HEIGHT - MARGIN_B, px, HEIGHT - MARGIN_B + 5)
        cv.text(px, HEIGHT - MARGIN_B + 20, _fmt(xt), size=12)
    for yt in _nice_ticks(y_lo, y_hi):
        py = cv.py(yt)
        cv.line(MARGIN_L - 5, py, MARGIN_L, py)
        cv.line(MARGIN_L, py, WIDTH - MARGIN_R, py, color="#ddd", width=0.5)
        cv.text(MARGIN_L - 10, py + 4, _fmt(yt), size=12, anchor="end")

    # fitted curve
    if fit is not None:
        a, b, c = fit
        n = 120
        pts = []
        for i in range(n + 1):
            x = x_lo + (x_hi - x_lo) * i / n
            y = a * x * x + b * x + c
            pts.append((cv.px(x), cv.py(min(max(y, y_lo), y_hi))))
        cv.polyline(pts, color="#7b2d8b")

    # whiskers and means
    for x, m, lo, hi in zip(durations, means, mins, maxs):
        px = cv.px(x)
        cv.line(px, cv.py(lo), px, cv.py(hi), color="#888", width=1.2)
        cv.line(px - 4, cv.py(lo), px + 4, cv.py(lo), color="#888", width=1.2)
        cv.line(px - 4, cv.py(hi), px + 4, cv.py(hi), color="#888", width=1.2)
        cv.rect(px, cv.py(m), 7, "#c0392b")

    cv.text(WIDTH / 2, 22, title, size=15)
    cv.text(WIDTH / 2, HEIGHT - 12, xlabel, size=13)
    cv.text(18, HEIGHT / 2, ylabel, size=13, rotate=-90)

    body = "\n".join(cv.parts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n'
        f"{body}\n</svg>\n"
    )
