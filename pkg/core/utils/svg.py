"""Minimal SVG emitters for capacity curves, membrane traces and spike rasters."""

from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
REGULAR_COLOR = "#00bcd4"
BURST_COLOR = "#00606b"
NEGATIVE_COLOR = "#d62728"

WIDTH = 640
HEIGHT = 400
MARGIN = 50


def _document(body: List[str], width: int = WIDTH, height: int = HEIGHT) -> str:
    return "\n".join(
        [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
            *body,
            "</svg>",
            "",
        ]
    )


def _scale(values: np.ndarray, lo: float, hi: float, out_lo: float, out_hi: float) -> np.ndarray:
    span = hi - lo if hi > lo else 1.0
    return out_lo + (values - lo) / span * (out_hi - out_lo)


def _axes(title: str, xlabel: str, ylabel: str, x_range, y_range) -> List[str]:
    left, right = MARGIN, WIDTH - MARGIN
    top, bottom = MARGIN, HEIGHT - MARGIN
    return [
        f'<text x="{WIDTH / 2}" y="{top / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(ylabel)}</text>',
        f'<text x="{left}" y="{bottom + 15}" font-size="10">{x_range[0]:.3g}</text>',
        f'<text x="{right}" y="{bottom + 15}" text-anchor="end" font-size="10">{x_range[1]:.3g}</text>',
        f'<text x="{left - 5}" y="{bottom}" text-anchor="end" font-size="10">{y_range[0]:.3g}</text>',
        f'<text x="{left - 5}" y="{top + 10}" text-anchor="end" font-size="10">{y_range[1]:.3g}</text>',
    ]


def line_chart(
    series: Dict[str, Tuple[Sequence[float], Sequence[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
    markers: Optional[Dict[str, Sequence[float]]] = None,
) -> str:
    """
    Renders one polyline per named series. Points with a None/NaN y value are
    skipped. `markers` adds vertical tick marks (e.g. spike times) per name.
    """
    xs_all, ys_all = [], []
    for xs, ys in series.values():
        for x, y in zip(xs, ys):
            if y is None or not np.isfinite(y):
                continue
            xs_all.append(float(x))
            ys_all.append(float(y))
    x_range = (min(xs_all), max(xs_all)) if xs_all else (0.0, 1.0)
    y_range = (min(ys_all), max(ys_all)) if ys_all else (0.0, 1.0)

    body = _axes(title, xlabel, ylabel, x_range, y_range)
    for index, (name, (xs, ys)) in enumerate(series.items()):
        color = PALETTE[index % len(PALETTE)]
        points = [
            (float(x), float(y))
            for x, y in zip(xs, ys)
            if y is not None and np.isfinite(y)
        ]
        if not points:
            continue
        px = _scale(np.array([p[0] for p in points]), *x_range, MARGIN, WIDTH - MARGIN)
        py = _scale(np.array([p[1] for p in points]), *y_range, HEIGHT - MARGIN, MARGIN)
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        body.append(
            f'<text x="{WIDTH - MARGIN + 5}" y="{MARGIN + 14 * index}" font-size="10" '
            f'fill="{color}">{escape(name)}</text>'
        )
    for name, times in (markers or {}).items():
        if len(times) == 0:
            continue
        px = _scale(np.asarray(times, dtype=float), *x_range, MARGIN, WIDTH - MARGIN)
        for x in px:
            body.append(
                f'<line x1="{x:.2f}" y1="{MARGIN}" x2="{x:.2f}" y2="{MARGIN + 8}" '
                f'stroke="black"><title>{escape(name)}</title></line>'
            )
    return _document(body)


def raster_chart(panels: List[Tuple[str, np.ndarray]], title: str) -> str:
    """
    Renders stacked spike rasters. Each panel is (layer name, codes[neurons, T])
    with codes 0 rest, 1 regular, 2 burst, -1 negative.
    """
    cell = 8
    panel_gap = 24
    steps = max((codes.shape[1] for _, codes in panels), default=1)
    height = MARGIN + sum(codes.shape[0] * cell + panel_gap for _, codes in panels) + MARGIN
    width = max(WIDTH, MARGIN * 2 + steps * cell + 120)
    colors = {1: REGULAR_COLOR, 2: BURST_COLOR, -1: NEGATIVE_COLOR}

    body = [f'<text x="{width / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>']
    y0 = MARGIN
    for name, codes in panels:
        body.append(f'<text x="{MARGIN}" y="{y0 - 4}" font-size="11">{escape(name)}</text>')
        for row in range(codes.shape[0]):
            for step in range(codes.shape[1]):
                code = int(codes[row, step])
                if code == 0:
                    continue
                body.append(
                    f'<rect x="{MARGIN + step * cell}" y="{y0 + row * cell}" width="{cell - 1}" '
                    f'height="{cell - 1}" fill="{colors[code]}"/>'
                )
        y0 += codes.shape[0] * cell + panel_gap
    legend_x = width - 110
    for offset, (label, color) in enumerate(
        [("regular", REGULAR_COLOR), ("burst", BURST_COLOR), ("negative", NEGATIVE_COLOR)]
    ):
        body.append(f'<rect x="{legend_x}" y="{MARGIN + offset * 14}" width="10" height="10" fill="{color}"/>')
        body.append(f'<text x="{legend_x + 14}" y="{MARGIN + offset * 14 + 9}" font-size="10">{label}</text>')
    return _document(body, width=int(width), height=int(height))
