"""Minimal static SVG charts (line plots and histograms).

Hand-rolled on purpose: the outputs are deterministic, dependency-free and
diff-friendly, and tests assert on their XML structure.
"""

from __future__ import annotations

import numpy as np

WIDTH = 800
HEIGHT = 480
MARGIN = {"left": 70.0, "right": 24.0, "top": 42.0, "bottom": 52.0}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e")


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _bounds(values) -> tuple[float, float]:
    lo = float(np.min(values))
    hi = float(np.max(values))
    if hi == lo:
        pad = abs(lo) * 0.1 + 1e-9
        return lo - pad, hi + pad
    return lo, hi


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str, xlim, ylim):
        self.parts: list[str] = []
        self.x0 = MARGIN["left"]
        self.y0 = MARGIN["top"]
        self.x1 = WIDTH - MARGIN["right"]
        self.y1 = HEIGHT - MARGIN["bottom"]
        self.xlim = xlim
        self.ylim = ylim
        self.parts.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
            f'font-family="sans-serif" font-size="13">'
        )
        self.parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
        self.parts.append(
            f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16">{title}</text>'
        )
        self._axes(xlabel, ylabel)

    def sx(self, x: float) -> float:
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * (self.x1 - self.x0)

    def sy(self, y: float) -> float:
        lo, hi = self.ylim
        return self.y1 - (y - lo) / (hi - lo) * (self.y1 - self.y0)

    def _axes(self, xlabel: str, ylabel: str) -> None:
        p = self.parts
        p.append(
            f'<g class="axes" stroke="black" fill="none">'
            f'<line x1="{_fmt(self.x0)}" y1="{_fmt(self.y1)}" x2="{_fmt(self.x1)}" y2="{_fmt(self.y1)}"/>'
            f'<line x1="{_fmt(self.x0)}" y1="{_fmt(self.y0)}" x2="{_fmt(self.x0)}" y2="{_fmt(self.y1)}"/>'
            f"</g>"
        )
        for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
            xv = self.xlim[0] + frac * (self.xlim[1] - self.xlim[0])
            yv = self.ylim[0] + frac * (self.ylim[1] - self.ylim[0])
            xpix = self.sx(xv)
            ypix = self.sy(yv)
            p.append(
                f'<line x1="{_fmt(xpix)}" y1="{_fmt(self.y1)}" x2="{_fmt(xpix)}" '
                f'y2="{_fmt(self.y1 + 5)}" stroke="black"/>'
                f'<text x="{_fmt(xpix)}" y="{_fmt(self.y1 + 20)}" text-anchor="middle">{xv:.4g}</text>'
            )
            p.append(
                f'<line x1="{_fmt(self.x0 - 5)}" y1="{_fmt(ypix)}" x2="{_fmt(self.x0)}" '
                f'y2="{_fmt(ypix)}" stroke="black"/>'
                f'<text x="{_fmt(self.x0 - 9)}" y="{_fmt(ypix + 4)}" text-anchor="end">{yv:.4g}</text>'
            )
        p.append(
            f'<text x="{(self.x0 + self.x1) / 2}" y="{HEIGHT - 12}" '
            f'text-anchor="middle">{xlabel}</text>'
        )
        p.append(
            f'<text x="16" y="{(self.y0 + self.y1) / 2}" text-anchor="middle" '
            f'transform="rotate(-90 16 {(self.y0 + self.y1) / 2})">{ylabel}</text>'
        )

    def legend(self, labels) -> None:
        x = self.x0 + 12
        y = self.y0 + 8
        for i, label in enumerate(labels):
            color = PALETTE[i % len(PALETTE)]
            self.parts.append(
                f'<g class="legend-entry">'
                f'<line x1="{_fmt(x)}" y1="{_fmt(y + 16 * i)}" x2="{_fmt(x + 24)}" '
                f'y2="{_fmt(y + 16 * i)}" stroke="{color}" stroke-width="2"/>'
                f'<text x="{_fmt(x + 30)}" y="{_fmt(y + 16 * i + 4)}">{label}</text>'
                f"</g>"
            )

    def finish(self) -> str:
        self.parts.append("</svg>")
        return "\n".join(self.parts) + "\n"


def line_chart(series, title: str, xlabel: str, ylabel: str) -> str:
    """Overlayed line chart. series: list of (label, xs, ys)."""
    if not series or any(len(xs) == 0 or len(xs) != len(ys) for _, xs, ys in series):
        raise ValueError("line chart needs non-empty, equal-length series")
    xlim = _bounds(np.concatenate([np.asarray(xs, float) for _, xs, _ in series]))
    ylim = _bounds(np.concatenate([np.asarray(ys, float) for _, _, ys in series]))
    canvas = _Canvas(title, xlabel, ylabel, xlim, ylim)
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(
            f"{_fmt(canvas.sx(float(x)))},{_fmt(canvas.sy(float(y)))}"
            for x, y in zip(xs, ys)
        )
        canvas.parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )
    canvas.legend([label for label, _, _ in series])
    return canvas.finish()


def histogram(series, bins: int, title: str, xlabel: str, ylabel: str) -> str:
    """Overlayed histogram. series: list of (label, values)."""
    if not series or any(len(values) == 0 for _, values in series):
        raise ValueError("histogram needs non-empty values")
    allv = np.concatenate([np.asarray(v, float) for _, v in series])
    lo, hi = _bounds(allv)
    edges = np.linspace(lo, hi, bins + 1)
    counts = [np.histogram(np.asarray(v, float), bins=edges)[0] for _, v in series]
    ylim = (0.0, float(max(c.max() for c in counts)) * 1.05)
    canvas = _Canvas(title, xlabel, ylabel, (lo, hi), ylim)
    for i, count in enumerate(counts):
        color = PALETTE[i % len(PALETTE)]
        for j, c in enumerate(count):
            if c == 0:
                continue
            x_left = canvas.sx(edges[j])
            x_right = canvas.sx(edges[j + 1])
            y_top = canvas.sy(float(c))
            canvas.parts.append(
                f'<rect x="{_fmt(x_left)}" y="{_fmt(y_top)}" '
                f'width="{_fmt(x_right - x_left)}" height="{_fmt(canvas.y1 - y_top)}" '
                f'fill="{color}" fill-opacity="0.45"/>'
            )
    canvas.legend([label for label, _ in series])
    return canvas.finish()
