"""Minimal deterministic SVG line charts.

No timestamps, no randomness, fixed 800x600 viewBox, fixed-precision
coordinate formatting: the same figure data always yields the same
bytes. That keeps figures diffable and lets reproducibility be checked
by hashing output files.
"""

from __future__ import annotations

import math

WIDTH = 800
HEIGHT = 600
MARGIN_LEFT = 72
MARGIN_RIGHT = 24
MARGIN_TOP = 44
MARGIN_BOTTOM = 56

PALETTE = ("#1b6ca8", "#d1495b", "#66a182", "#8d6a9f", "#edae49", "#2e4057")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


class _Scale:
    def __init__(self, lo, hi, out_lo, out_hi):
        if not hi > lo:
            hi = lo + 1.0
        self.lo, self.hi = lo, hi
        self.out_lo, self.out_hi = out_lo, out_hi

    def __call__(self, v):
        f = (v - self.lo) / (self.hi - self.lo)
        return self.out_lo + f * (self.out_hi - self.out_lo)


def _finite_runs(xs, ys):
    """Split a series into runs of consecutive finite points."""
    run = []
    for x, y in zip(xs, ys):
        if math.isfinite(x) and math.isfinite(y):
            run.append((x, y))
        elif run:
            yield run
            run = []
    if run:
        yield run


def _data_limits(layers, key_x, key_y):
    vals_x, vals_y = [], []
    for layer in layers:
        for k, bucket in ((key_x, vals_x), (key_y, vals_y)):
            for v in layer.get(k, ()):
                if isinstance(v, (int, float)) and math.isfinite(v):
                    bucket.append(float(v))
    if not vals_x:
        vals_x = [0.0, 1.0]
    if not vals_y:
        vals_y = [0.0, 1.0]
    return (min(vals_x), max(vals_x)), (min(vals_y), max(vals_y))


def render(path, layers, *, title="", x_label="", y_label="",
           xlim=None, ylim=None, legend=True):
    """Write an SVG chart.

    Each layer is a dict with "type" in {"line", "points", "band",
    "segment"} plus "x"/"y" arrays ("y2" as well for bands, end point
    coordinates for segments), an optional "name" for the legend, and
    optional "dashed". Non-finite values break lines into gaps.
    """
    auto_x, auto_y = _data_limits(layers, "x", "y")
    xlim = xlim or auto_x
    ylim = ylim or auto_y
    sx = _Scale(xlim[0], xlim[1], MARGIN_LEFT, WIDTH - MARGIN_RIGHT)
    sy = _Scale(ylim[0], ylim[1], HEIGHT - MARGIN_BOTTOM, MARGIN_TOP)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    # axes box
    parts.append(
        f'<rect x="{_fmt(MARGIN_LEFT)}" y="{_fmt(MARGIN_TOP)}" '
        f'width="{_fmt(WIDTH - MARGIN_LEFT - MARGIN_RIGHT)}" '
        f'height="{_fmt(HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    # ticks and grid
    for i in range(5):
        tx = xlim[0] + i * (xlim[1] - xlim[0]) / 4.0
        px = sx(tx)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(HEIGHT - MARGIN_BOTTOM)}" '
            f'x2="{_fmt(px)}" y2="{_fmt(HEIGHT - MARGIN_BOTTOM + 6)}" '
            f'stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{_fmt(HEIGHT - MARGIN_BOTTOM + 22)}" '
            f'font-family="sans-serif" font-size="13" text-anchor="middle" '
            f'fill="#333333">{_tick_label(tx)}</text>'
        )
        ty = ylim[0] + i * (ylim[1] - ylim[0]) / 4.0
        py = sy(ty)
        parts.append(
            f'<line x1="{_fmt(MARGIN_LEFT - 6)}" y1="{_fmt(py)}" '
            f'x2="{_fmt(MARGIN_LEFT)}" y2="{_fmt(py)}" '
            f'stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(MARGIN_LEFT - 10)}" y="{_fmt(py + 4)}" '
            f'font-family="sans-serif" font-size="13" text-anchor="end" '
            f'fill="#333333">{_tick_label(ty)}</text>'
        )
    if title:
        parts.append(
            f'<text x="{_fmt(WIDTH / 2)}" y="26" font-family="sans-serif" '
            f'font-size="16" text-anchor="middle" fill="#111111">{title}</text>'
        )
    if x_label:
        parts.append(
            f'<text x="{_fmt((MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2)}" '
            f'y="{_fmt(HEIGHT - 14)}" font-family="sans-serif" font-size="14" '
            f'text-anchor="middle" fill="#111111">{x_label}</text>'
        )
    if y_label:
        cx, cy = 20, (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2
        parts.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" font-family="sans-serif" '
            f'font-size="14" text-anchor="middle" fill="#111111" '
            f'transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">{y_label}</text>'
        )

    color_i = 0
    legend_rows = []
    for layer in layers:
        kind = layer["type"]
        color = layer.get("color")
        if color is None and kind in ("line", "points"):
            color = PALETTE[color_i % len(PALETTE)]
            color_i += 1
        if kind == "band":
            xs, los, his = layer["x"], layer["y"], layer["y2"]
            pts = [(x, l) for x, l in zip(xs, los)]
            pts += [(x, u) for x, u in zip(reversed(list(xs)), reversed(list(his)))]
            coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts
                              if math.isfinite(x) and math.isfinite(y))
            parts.append(
                f'<polygon points="{coords}" fill="{layer.get("color", "#1b6ca8")}" '
                f'fill-opacity="0.15" stroke="none"/>'
            )
        elif kind == "segment":
            parts.append(
                f'<line x1="{_fmt(sx(layer["x1"]))}" y1="{_fmt(sy(layer["y1"]))}" '
                f'x2="{_fmt(sx(layer["x2"]))}" y2="{_fmt(sy(layer["y2"]))}" '
                f'stroke="{layer.get("color", "#888888")}" stroke-width="1" '
                f'stroke-dasharray="5,4"/>'
            )
        elif kind == "line":
            dash = ' stroke-dasharray="6,4"' if layer.get("dashed") else ""
            for run in _finite_runs(layer["x"], layer["y"]):
                coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in run)
                parts.append(
                    f'<polyline points="{coords}" fill="none" stroke="{color}" '
                    f'stroke-width="2"{dash}/>'
                )
            if layer.get("name"):
                legend_rows.append((layer["name"], color, bool(layer.get("dashed"))))
        elif kind == "points":
            for x, y in zip(layer["x"], layer["y"]):
                if math.isfinite(x) and math.isfinite(y):
                    parts.append(
                        f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="4" '
                        f'fill="{color}"/>'
                    )
            if layer.get("name"):
                legend_rows.append((layer["name"], color, False))
        else:
            raise ValueError(f"unknown layer type {kind!r}")

    if legend and legend_rows:
        lx = WIDTH - MARGIN_RIGHT - 190
        ly = MARGIN_TOP + 14
        for i, (name, color, dashed) in enumerate(legend_rows):
            yy = ly + i * 20
            dash = ' stroke-dasharray="6,4"' if dashed else ""
            parts.append(
                f'<line x1="{_fmt(lx)}" y1="{_fmt(yy - 4)}" x2="{_fmt(lx + 26)}" '
                f'y2="{_fmt(yy - 4)}" stroke="{color}" stroke-width="2"{dash}/>'
            )
            parts.append(
                f'<text x="{_fmt(lx + 32)}" y="{_fmt(yy)}" font-family="sans-serif" '
                f'font-size="13" fill="#111111">{name}</text>'
            )

    parts.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
