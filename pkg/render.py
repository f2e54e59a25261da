"""SVG drawing of a decision in the upper half-plane."""

from __future__ import annotations

import logging
from html import escape
from pathlib import Path

from algorithm import Decision, Discrete, EllipticWitness
from config import SVG_HEIGHT, SVG_WIDTH
from ford import FixesInfinityError, Geodesic, Interval, ford_data
from moebius import INFINITY, scalar_to_str

logger = logging.getLogger(__name__)

_MARGIN = 0.25
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


class _Frame:
    """Maps half-plane coordinates onto the SVG canvas; the real axis sits near the bottom."""

    def __init__(self, lo: float, hi: float, top: float, width: int, height: int) -> None:
        self.lo = lo - _MARGIN
        self.scale = min(width / (hi - lo + 2 * _MARGIN), 0.8 * height / max(top, 1e-9))
        self.baseline = height - 20
        self.height = height

    def x(self, value: float) -> float:
        return round((value - self.lo) * self.scale, 3)

    def y(self, value: float) -> float:
        return round(self.baseline - value * self.scale, 3)

    def length(self, value: float) -> float:
        return round(value * self.scale, 3)


def _arc(frame: _Frame, lo: float, hi: float, color: str, dash: str = "") -> str:
    radius = frame.length((hi - lo) / 2)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<path d="M {frame.x(lo)} {frame.baseline} A {radius} {radius} 0 0 1 {frame.x(hi)} {frame.baseline}" '
        f'fill="none" stroke="{color}" stroke-width="1.5"{extra} />\n'
    )


def _vertical(frame: _Frame, at: float, color: str) -> str:
    x = frame.x(at)
    return f'<line x1="{x}" y1="0" x2="{x}" y2="{frame.baseline}" stroke="{color}" stroke-dasharray="4 3" />\n'


def _geodesic(frame: _Frame, g: Geodesic, color: str) -> str:
    if g.vertical:
        finite = g.end if g.start is INFINITY else g.start
        return _vertical(frame, float(finite), color)
    lo, hi = sorted((float(g.start), float(g.end)))
    return _arc(frame, lo, hi, color, dash="6 3")


def _circles(decision: Decision) -> list[tuple[str, Interval]]:
    verdict = decision.verdict
    if isinstance(verdict, Discrete):
        return [
            (f"{g.name}{suffix}", iv)
            for g in verdict.certificate.generators
            for suffix, iv in zip(("", "^-1"), g.footprints)
        ]
    _, B, C = decision.state.generators
    circles = []
    for name, M in (("B", B), ("C", C), ("BC", B * C)):
        try:
            footprints = ford_data(M).circle_footprints
        except FixesInfinityError:
            continue
        circles.extend((f"{name}{suffix}", iv) for suffix, iv in zip(("", "^-1"), footprints))
    return circles


def render_svg(decision: Decision, width: int = SVG_WIDTH, height: int = SVG_HEIGHT) -> str:
    """Isometric circles, the translation strip and (for Discrete) the domain geodesics."""
    verdict = decision.verdict
    circles = _circles(decision)
    points = [float(iv.lo) for _, iv in circles] + [float(iv.hi) for _, iv in circles] + [0.0, 2.0]
    lo, hi = min(points), max(points)
    top = max([float(iv.length) / 2 for _, iv in circles] + [1.0])
    frame = _Frame(lo, hi, top, width, height)

    body = [f'<line x1="0" y1="{frame.baseline}" x2="{width}" y2="{frame.baseline}" stroke="black" />\n']
    strip_lo = 0.0
    if isinstance(verdict, Discrete) and verdict.certificate.strip is not None:
        strip_lo = float(verdict.certificate.strip.lo)
    body.append(_vertical(frame, strip_lo, "gray"))
    body.append(_vertical(frame, strip_lo + 2, "gray"))

    for i, (name, iv) in enumerate(circles):
        color = _COLORS[(i // 2) % len(_COLORS)]
        body.append(_arc(frame, float(iv.lo), float(iv.hi), color))
        mid = (float(iv.lo) + float(iv.hi)) / 2
        body.append(
            f'<text x="{frame.x(mid)}" y="{frame.y(float(iv.length) / 2) - 4}" font-size="11" '
            f'text-anchor="middle" fill="{color}">{escape(name)}</text>\n'
        )

    if isinstance(verdict, Discrete) and verdict.construction is not None:
        for g in verdict.construction.domain[2:4]:
            body.append(_geodesic(frame, g, "black"))

    caption = f"{verdict.tag} at {decision.state.triple}"
    if isinstance(verdict, EllipticWitness):
        caption += f": {verdict.word} has trace {scalar_to_str(verdict.trace)}"
    body.append(f'<text x="10" y="16" font-size="13">{escape(caption)}</text>\n')

    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">\n'
        f"<title>{escape(caption)}</title>\n"
        + "".join(body)
        + "</svg>\n"
    )


def emit_svg(decision: Decision, path: str | Path, width: int = SVG_WIDTH, height: int = SVG_HEIGHT) -> Path:
    path = Path(path)
    path.write_text(render_svg(decision, width, height), encoding="utf-8")
    logger.info("wrote %s", path)
    return path
