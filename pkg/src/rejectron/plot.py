"""Dependency-free SVG line charts with a translucent mean +/- std band.

Output is a pure function of the input CSV: no timestamps, fixed number
formatting, and deterministic down-sampling to at most ``max_points``.
"""

import csv
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=40, bottom=50)

TITLES = {
    "risk": "Average risk",
    "fraction_queried": "Fraction of labels asked",
    "fraction_misclassified": "Fraction misclassified",
    "fraction_rejected": "Fraction rejected",
    "risk_vs_labels": "Risk versus labels asked",
}


class PlotError(Exception):
    pass


def read_curve(path):
    """Return ``(xlabel, xs, means, stds)`` from a three-column curve CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) != 3:
        raise PlotError(f"{path}: expected a three-column header")
    xs, means, stds = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            x, m, s = (float(v) for v in row)
        except ValueError as exc:
            raise PlotError(f"{path}:{lineno}: {exc}") from exc
        xs.append(x)
        means.append(m)
        stds.append(s)
    return rows[0][0], xs, means, stds


def _thin(n, max_points):
    if n <= max_points:
        return list(range(n))
    step = (n - 1) / (max_points - 1)
    return sorted({round(i * step) for i in range(max_points)})


def _ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def render_svg(title, xlabel, xs, means, stds, max_points=400):
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">'
        f"{escape(title)}</text>",
    ]
    if xs:
        keep = _thin(len(xs), max_points)
        x = [xs[i] for i in keep]
        lo_band = [means[i] - stds[i] for i in keep]
        hi_band = [means[i] + stds[i] for i in keep]
        mid = [means[i] for i in keep]
        x0, x1 = x[0], x[-1] if x[-1] > x[0] else x[0] + 1.0
        y0, y1 = min(lo_band), max(hi_band)
        if y1 - y0 < 1e-12:
            y0, y1 = y0 - 0.5, y1 + 0.5

        def sx(v):
            return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

        def sy(v):
            return MARGIN["top"] + (1.0 - (v - y0) / (y1 - y0)) * ph

        for tv in _ticks(y0, y1):
            parts.append(
                f'<line x1="{MARGIN["left"]}" y1="{sy(tv):.2f}" x2="{MARGIN["left"] + pw}" y2="{sy(tv):.2f}" '
                'stroke="#e0e0e0"/>'
            )
            parts.append(
                f'<text x="{MARGIN["left"] - 6}" y="{sy(tv) + 4:.2f}" text-anchor="end" font-family="sans-serif" '
                f'font-size="11">{tv:.4g}</text>'
            )
        for tv in _ticks(x0, x1):
            parts.append(
                f'<text x="{sx(tv):.2f}" y="{MARGIN["top"] + ph + 18}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11">{tv:.6g}</text>'
            )
        band = [(sx(a), sy(b)) for a, b in zip(x, hi_band)] + [(sx(a), sy(b)) for a, b in reversed(list(zip(x, lo_band)))]
        parts.append(
            '<polygon fill="#1f77b4" fill-opacity="0.25" stroke="none" points="'
            + " ".join(f"{a:.2f},{b:.2f}" for a, b in band)
            + '"/>'
        )
        parts.append(
            '<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="'
            + " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, mid))
            + '"/>'
        )
    parts.append(
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>'
    )
    parts.append(
        f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">{escape(xlabel)}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_csv(path, out_path):
    xlabel, xs, means, stds = read_curve(path)
    title = TITLES.get(path.stem, path.stem)
    out_path.write_text(render_svg(title, xlabel, xs, means, stds))
    return out_path
