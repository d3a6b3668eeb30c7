"""SVG figures: trust-matrix heatmaps and conditional density plots.

Output is plain text built from fixed-precision numbers so identical
inputs give byte-identical documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .core import InvalidInputError
from .density import ConditionalDensityPair, Density
from .metrics import TrustMatrix

# Each channel is non-decreasing along the stops, so luminance is monotone in the value.
COLORMAPS: dict[str, tuple[tuple[int, int, int], ...]] = {
    "trust": (
        (12, 7, 38),
        (66, 16, 104),
        (147, 38, 104),
        (221, 81, 105),
        (247, 151, 110),
        (252, 253, 191),
    ),
    "gray": ((16, 16, 16), (240, 240, 240)),
}
UNDEFINED_PATTERN_ID = "no-data"
UNDEFINED_FILL = f"url(#{UNDEFINED_PATTERN_ID})"
MAX_CANVAS = 200_000


class ConfigurationError(InvalidInputError):
    """Rendering options that cannot produce a sensible figure."""


def colormap_rgb(value: float, name: str = "trust") -> tuple[int, int, int]:
    try:
        stops = COLORMAPS[name]
    except KeyError:
        raise ConfigurationError(f"unknown colormap {name!r}; choose from {sorted(COLORMAPS)}") from None
    v = min(max(float(value), 0.0), 1.0)
    pos = v * (len(stops) - 1)
    i = min(int(pos), len(stops) - 2)
    frac = pos - i
    lo, hi = stops[i], stops[i + 1]
    return tuple(int(round(a + (b - a) * frac)) for a, b in zip(lo, hi))


def colormap(value: float, name: str = "trust") -> str:
    return "#%02x%02x%02x" % colormap_rgb(value, name)


def colormap_hex_array(values: np.ndarray, name: str = "trust") -> np.ndarray:
    """Vectorised :func:`colormap`; same arithmetic, so identical strings."""
    stops = np.asarray(COLORMAPS[name], dtype=np.float64)
    v = np.clip(np.nan_to_num(np.asarray(values, dtype=np.float64), nan=0.0), 0.0, 1.0)
    pos = v * (len(stops) - 1)
    i = np.minimum(pos.astype(np.int64), len(stops) - 2)
    frac = (pos - i)[..., None]
    lo, hi = stops[i], stops[i + 1]
    rgb = np.round(lo + (hi - lo) * frac).astype(np.int64)
    packed = (rgb[..., 0] << 16) | (rgb[..., 1] << 8) | rgb[..., 2]
    return np.vectorize(lambda c: f"#{c:06x}", otypes=[object])(packed)


def relative_luminance(rgb: tuple[int, int, int]) -> float:
    """WCAG relative luminance of an sRGB triple."""

    def lin(c):
        c = c / 255.0
        return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4

    r, g, b = (lin(c) for c in rgb)
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


@dataclass(frozen=True)
class HeatmapStyle:
    colormap: str = "trust"
    undefined_cell: str = "#c8c8c8"
    cell_size: int = 24
    show_labels: bool = True
    annotate_support: bool = False

    def __post_init__(self):
        if self.colormap not in COLORMAPS:
            raise ConfigurationError(f"unknown colormap {self.colormap!r}")
        if isinstance(self.cell_size, bool) or int(self.cell_size) != self.cell_size or self.cell_size < 1:
            raise ConfigurationError(f"cell_size must be a positive integer, got {self.cell_size!r}")


def _fmt(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def render_trust_matrix(matrix: TrustMatrix, style: HeatmapStyle = HeatmapStyle()) -> str:
    """Heatmap with actor answers as rows and oracle answers as columns."""
    k = matrix.label_space.count
    cs = int(style.cell_size)
    side = k * cs
    if side > MAX_CANVAS:
        raise ConfigurationError(f"{k} classes at cell size {cs} exceed the {MAX_CANVAS}px canvas limit")
    labels = matrix.label_space.labels
    font = max(6.0, min(12.0, cs * 0.6))
    label_px = (max(len(s) for s in labels) * font * 0.6 + 8) if style.show_labels else 0.0
    left = 40 + label_px
    top = 56 + label_px
    legend_w = 90
    width = left + side + legend_w
    height = top + side + 30

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}" font-family="sans-serif">\n',
        "<defs>\n",
        f'<pattern id="{UNDEFINED_PATTERN_ID}" width="6" height="6" patternUnits="userSpaceOnUse" '
        'patternTransform="rotate(45)">'
        f'<rect width="6" height="6" fill="{style.undefined_cell}"/>'
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#8c8c8c" stroke-width="2"/></pattern>\n',
        '<linearGradient id="colorbar" x1="0" y1="1" x2="0" y2="0">',
    ]
    for i in range(11):
        out.append(f'<stop offset="{i / 10:.1f}" stop-color="{colormap(i / 10, style.colormap)}"/>')
    out.append("</linearGradient>\n</defs>\n")
    out.append(
        f'<text x="{_fmt(left)}" y="18" font-size="14">Trust matrix '
        f"(rows: actor answer y, columns: oracle answer z; alpha={matrix.params.alpha:g}, "
        f"beta={matrix.params.beta:g})</text>\n"
    )
    out.append(f'<text x="{_fmt(left + side / 2)}" y="38" font-size="12" text-anchor="middle">oracle answer z</text>\n')
    out.append(
        f'<text x="14" y="{_fmt(top + side / 2)}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {_fmt(top + side / 2)})">actor answer y</text>\n'
    )
    if style.show_labels:
        out.append(f'<g font-size="{_fmt(font)}">\n')
        for i, name in enumerate(labels):
            name = escape(name)
            cy = top + i * cs + cs / 2 + font * 0.35
            out.append(f'<text x="{_fmt(left - 4)}" y="{_fmt(cy)}" text-anchor="end">{name}</text>\n')
            cx = left + i * cs + cs / 2 + font * 0.35
            out.append(
                f'<text x="{_fmt(cx)}" y="{_fmt(top - 4)}" transform="rotate(-90 {_fmt(cx)} {_fmt(top - 4)})">'
                f"{name}</text>\n"
            )
        out.append("</g>\n")

    values = matrix.values
    support = matrix.support
    fills = colormap_hex_array(values, style.colormap)
    fills[support == 0] = UNDEFINED_FILL
    xs = [f'<rect x="{_fmt(left + z * cs)}" y="' for z in range(k)]
    tail = f'" width="{cs}" height="{cs}" fill="'
    out.append('<g id="cells" shape-rendering="crispEdges">\n')
    for y, row in enumerate(fills.tolist()):
        row_y = _fmt(top + y * cs) + tail
        out.extend(f'{x}{row_y}{fill}"/>\n' for x, fill in zip(xs, row))
    out.append("</g>\n")
    if style.annotate_support:
        out.append(f'<g id="support" font-size="{_fmt(max(5.0, cs * 0.35))}" text-anchor="middle">\n')
        for y, z in zip(*np.nonzero(support)):
            lum = relative_luminance(colormap_rgb(values[y, z], style.colormap))
            color = "#000000" if lum > 0.35 else "#ffffff"
            out.append(
                f'<text x="{_fmt(left + z * cs + cs / 2)}" y="{_fmt(top + y * cs + cs * 0.65)}" '
                f'fill="{color}">{int(support[y, z])}</text>\n'
            )
        out.append("</g>\n")

    bar_x = left + side + 20
    bar_h = min(side, 200)
    out.append(
        f'<rect x="{_fmt(bar_x)}" y="{_fmt(top)}" width="14" height="{_fmt(bar_h)}" fill="url(#colorbar)" '
        'stroke="#444444" stroke-width="0.5"/>\n'
        f'<text x="{_fmt(bar_x + 18)}" y="{_fmt(top + 8)}" font-size="10">1.0</text>\n'
        f'<text x="{_fmt(bar_x + 18)}" y="{_fmt(top + bar_h)}" font-size="10">0.0</text>\n'
        f'<rect x="{_fmt(bar_x)}" y="{_fmt(top + bar_h + 12)}" width="14" height="14" fill="{UNDEFINED_FILL}" '
        'stroke="#444444" stroke-width="0.5"/>\n'
        f'<text x="{_fmt(bar_x + 18)}" y="{_fmt(top + bar_h + 23)}" font-size="10">no data</text>\n'
    )
    out.append("</svg>\n")
    return "".join(out)


CURVE_STYLES = (
    ("unconditional", "F(Q_z)", "#4d4d4d", ' stroke-dasharray="6 4"'),
    ("correct", "F(y=z)F(Q_z|y=z)", "#1b9e77", ""),
    ("incorrect", "F(y≠z)F(Q_z|y≠z)", "#d95f02", ""),
)


def _curve_points(d: Density) -> tuple[np.ndarray, np.ndarray]:
    if d.kind == "histogram":
        xs = np.repeat(d.edges, 2)[1:-1]
        ys = np.repeat(d.values, 2)
        return xs, ys
    return d.grid, d.values


def _nice_step(span: float) -> float:
    raw = span / 5
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def render_density_plot(pair: ConditionalDensityPair, title: str = "") -> str:
    """Overlay the two prior-scaled conditional curves on the unconditional one."""
    kinds = {pair.correct.kind, pair.incorrect.kind, pair.unconditional.kind}
    if len(kinds) != 1:
        raise InvalidInputError("density pair mixes estimators")
    kind = kinds.pop()
    width, height = 640, 400
    left, right, top, bottom = 64, 24, 44, 52
    pw, ph = width - left - right, height - top - bottom
    peak = max(float(np.max(getattr(pair, name).values, initial=0.0)) for name, *_ in CURVE_STYLES)
    step = _nice_step(peak) if peak > 0 else 0.2
    ymax = step * math.ceil(peak / step) if peak > 0 else 1.0

    def sx(x):
        return left + x * pw

    def sy(y):
        return top + ph - (y / ymax) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">\n',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>\n',
        f'<text x="{width / 2:g}" y="24" font-size="14" text-anchor="middle">{escape(title)}</text>\n',
        f'<g stroke="#222222" stroke-width="1"><line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}"/>'
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}"/></g>\n',
        '<g font-size="10" fill="#222222">\n',
    ]
    for i in range(6):
        x = sx(i / 5)
        out.append(f'<text x="{_fmt(x)}" y="{top + ph + 14}" text-anchor="middle">{i / 5:.1f}</text>\n')
    n_ticks = int(round(ymax / step)) if peak > 0 else 5
    tick = ymax / n_ticks
    for i in range(n_ticks + 1):
        y = sy(i * tick)
        out.append(f'<text x="{left - 6}" y="{_fmt(y + 3)}" text-anchor="end">{i * tick:.3g}</text>\n')
    out.append("</g>\n")
    y_label = "probability mass per bin" if kind == "histogram" else "probability density"
    out.append(
        f'<text x="{left + pw / 2:g}" y="{height - 12}" font-size="12" text-anchor="middle">'
        "question-answer trust Q_z</text>\n"
        f'<text x="16" y="{top + ph / 2:g}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:g})">{y_label}</text>\n'
    )
    for name, label, color, dash in CURVE_STYLES:
        xs, ys = _curve_points(getattr(pair, name))
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs.tolist(), ys.tolist()))
        out.append(
            f'<polyline id="curve-{name}" fill="none" stroke="{color}" stroke-width="1.6"{dash} points="{pts}"/>\n'
        )
    lx, ly = left + pw - 170, top + 8
    out.append('<g id="legend" font-size="11">\n')
    for i, (name, label, color, dash) in enumerate(CURVE_STYLES):
        y = ly + i * 16
        mass = getattr(pair, name).total_mass
        out.append(
            f'<line x1="{lx}" y1="{y}" x2="{lx + 22}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>'
            f'<text x="{lx + 28}" y="{y + 4}">{escape(label)} (mass {mass:.3f})</text>\n'
        )
    out.append("</g>\n</svg>\n")
    return "".join(out)
