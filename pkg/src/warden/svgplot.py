"""Decision-region SVG rendering, dependency-free and deterministic.

The classifier is rasterized on a fixed grid over the two feature axes;
horizontal runs of same-class cells collapse into single rectangles, and
the training points are scattered on top colored by true label. Output
bytes depend only on the inputs (fixed float formatting, no timestamps),
so identical models produce identical files.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

# region fill, point fill per class
_REGION_FILL = ("#f7d4ce", "#cfe8d5")
_POINT_FILL = ("#b03a2e", "#1e7a46")

_WIDTH = 640
_HEIGHT = 480
_MARGIN = 48


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_decision_regions(
    predict_batch: Callable[[np.ndarray], np.ndarray],
    features: np.ndarray,
    labels: np.ndarray,
    feature_names: Sequence[str],
    grid_steps: int = 160,
) -> str:
    """SVG (as a string) of the classifier's regions over two features.

    ``predict_batch`` maps an (n, 2) float matrix to an n-vector of 0/1
    labels; ``features``/``labels`` are the points to scatter.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError("decision regions need exactly two feature columns")
    if X.shape[0] == 0:
        raise ValueError("cannot plot an empty dataset")
    if len(feature_names) != 2:
        raise ValueError("feature_names must name both axes")

    lo = X.min(axis=0)
    hi = X.max(axis=0)
    span = hi - lo
    # pad 10% each side; degenerate axes get a unit window
    pad = np.where(span > 0, span * 0.1, 1.0)
    lo = lo - pad
    hi = hi + pad

    plot_w = _WIDTH - 2 * _MARGIN
    plot_h = _HEIGHT - 2 * _MARGIN

    def px(v: float) -> float:
        return _MARGIN + (v - lo[0]) / (hi[0] - lo[0]) * plot_w

    def py(v: float) -> float:
        # SVG y grows downward; flip so larger feature values sit higher
        return _MARGIN + (hi[1] - v) / (hi[1] - lo[1]) * plot_h

    xs = np.linspace(lo[0], hi[0], grid_steps)
    ys = np.linspace(lo[1], hi[1], grid_steps)
    gx, gy = np.meshgrid(xs, ys)
    cells = np.column_stack([gx.ravel(), gy.ravel()])
    classes = np.asarray(predict_batch(cells), dtype=np.int64).reshape(grid_steps, grid_steps)

    cell_w = plot_w / grid_steps
    cell_h = plot_h / grid_steps

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">'
    )
    parts.append(f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>')

    # rasterized regions, one rect per horizontal run
    for row in range(grid_steps):
        # row 0 is the smallest feature-1 value, drawn at the bottom
        top = _MARGIN + plot_h - (row + 1) * cell_h
        col = 0
        while col < grid_steps:
            cls = int(classes[row, col])
            run = col
            while run < grid_steps and int(classes[row, run]) == cls:
                run += 1
            left = _MARGIN + col * cell_w
            width = (run - col) * cell_w
            parts.append(
                f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(width)}" '
                f'height="{_fmt(cell_h)}" fill="{_REGION_FILL[cls]}"/>'
            )
            col = run

    # scatter of the actual points
    for i in range(X.shape[0]):
        parts.append(
            f'<circle cx="{_fmt(px(X[i, 0]))}" cy="{_fmt(py(X[i, 1]))}" r="3" '
            f'fill="{_POINT_FILL[int(y[i])]}" stroke="#333333" stroke-width="0.5"/>'
        )

    # frame and axis labels
    parts.append(
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#444444" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{_WIDTH // 2}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{feature_names[0]}</text>'
    )
    parts.append(
        f'<text x="14" y="{_HEIGHT // 2}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 14 {_HEIGHT // 2})">{feature_names[1]}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
