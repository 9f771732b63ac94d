"""Deterministic SVG rendering of scenarios and run trajectories.

World-to-pixel transform: the world rectangle ``[0, width_m] x [0, height_m]``
is scaled uniformly by ``s = min((W - 2*M) / width_m, (H - 2*M) / height_m)``
and placed at margin ``M``; ``px = M + s*x``, ``py = H - M - s*y`` (y up in
the world, down in the image). Every number is printed with two decimals, so
equal inputs give byte-equal documents.
"""
from __future__ import annotations

import math
from typing import Sequence

from .objectives import ProxemicZones
from .world import Circle, Rect

WIDTH = 800
HEIGHT = 600
MARGIN = 20

STYLE = """
.world{fill:#ffffff;stroke:#888888;stroke-width:1}
.obstacle{fill:#000000;stroke:none}
.human{fill:#f4a261;stroke:#7a3e00;stroke-width:1.5}
.heading{stroke:#7a3e00;stroke-width:2}
.proxemic{fill:none;stroke:#e76f51;stroke-width:1;stroke-dasharray:4 3}
.track{fill:none;stroke:#7a3e00;stroke-width:1;stroke-dasharray:2 2}
.traj-traditional{fill:none;stroke:#1d3557;stroke-width:2}
.traj-paccet{fill:none;stroke:#2a9d8f;stroke-width:2.5}
.start{fill:#ffffff;stroke:#000000;stroke-width:1.5}
.goal{fill:#e9c46a;stroke:#000000;stroke-width:1}
.social-goal{fill:#9b5de5;stroke:#000000;stroke-width:1}
.label{font-family:monospace;font-size:12px;fill:#000000}
""".strip()


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


class _Frame:
    def __init__(self, width_m: float, height_m: float):
        self.s = min((WIDTH - 2 * MARGIN) / width_m, (HEIGHT - 2 * MARGIN) / height_m)

    def x(self, v: float) -> str:
        return _f(MARGIN + self.s * v)

    def y(self, v: float) -> str:
        return _f(HEIGHT - MARGIN - self.s * v)

    def d(self, v: float) -> str:
        return _f(self.s * v)


def _star(fr: _Frame, x: float, y: float, r_px: float, cls: str) -> str:
    cx = MARGIN + fr.s * x
    cy = HEIGHT - MARGIN - fr.s * y
    pts = []
    for k in range(10):
        r = r_px if k % 2 == 0 else r_px * 0.45
        a = -math.pi / 2 + k * math.pi / 5
        pts.append(f"{_f(cx + r * math.cos(a))},{_f(cy + r * math.sin(a))}")
    return f'<polygon class="{cls}" points="{" ".join(pts)}"/>'


def render_svg(logs: Sequence, config, social_goal=None) -> str:
    """SVG document with obstacles, humans, goals and one polyline per log.

    ``logs`` holds one or two RunLogs; each trajectory gets the stroke class
    ``traj-<mode>``. A log with fewer than two poses draws no path.
    """
    if not logs:
        raise ValueError("render_svg needs at least one run log")
    zones = ProxemicZones(**config.objectives.get("zones", {}))
    fr = _Frame(config.world.width_m, config.world.height_m)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f"<style>\n{STYLE}\n</style>",
           f'<rect class="world" x="{fr.x(0)}" y="{fr.y(config.world.height_m)}" '
           f'width="{fr.d(config.world.width_m)}" height="{fr.d(config.world.height_m)}"/>']

    for obs in config.obstacles:
        if isinstance(obs, Circle):
            out.append(f'<circle class="obstacle" cx="{fr.x(obs.center[0])}" '
                       f'cy="{fr.y(obs.center[1])}" r="{fr.d(obs.radius)}"/>')
        elif isinstance(obs, Rect):
            (x0, y0), (x1, y1) = obs.min_corner, obs.max_corner
            out.append(f'<rect class="obstacle" x="{fr.x(x0)}" y="{fr.y(y1)}" '
                       f'width="{fr.d(x1 - x0)}" height="{fr.d(y1 - y0)}"/>')

    end_t = max(log.records[-1].t for log in logs if log.records) if any(
        log.records for log in logs) else 0.0
    for h in config.humans:
        p = h.pose
        if h.velocity and any(h.velocity):
            ex, ey = p.x + h.velocity[0] * end_t, p.y + h.velocity[1] * end_t
            out.append(f'<line class="track" x1="{fr.x(p.x)}" y1="{fr.y(p.y)}" '
                       f'x2="{fr.x(ex)}" y2="{fr.y(ey)}"/>')
        out.append(f'<circle class="proxemic" cx="{fr.x(p.x)}" cy="{fr.y(p.y)}" '
                   f'r="{fr.d(zones.personal)}"/>')
        out.append(f'<circle class="human" cx="{fr.x(p.x)}" cy="{fr.y(p.y)}" r="{fr.d(0.2)}"/>')
        hx, hy = p.x + 0.35 * math.cos(p.theta), p.y + 0.35 * math.sin(p.theta)
        out.append(f'<line class="heading" x1="{fr.x(p.x)}" y1="{fr.y(p.y)}" '
                   f'x2="{fr.x(hx)}" y2="{fr.y(hy)}"/>')

    for log in logs:
        if len(log.records) < 2:
            continue
        pts = " ".join(f"{fr.x(r.pose[0])},{fr.y(r.pose[1])}" for r in log.records)
        out.append(f'<polyline class="traj-{log.mode}" points="{pts}"/>')

    s = config.robot_start
    out.append(f'<circle class="start" cx="{fr.x(s.x)}" cy="{fr.y(s.y)}" r="5.00"/>')
    out.append(_star(fr, config.goal.x, config.goal.y, 9.0, "goal"))
    if social_goal is not None:
        out.append(_star(fr, social_goal.pose.x, social_goal.pose.y, 9.0, "social-goal"))

    legend = " / ".join(f"{log.mode}: {log.status}" for log in logs)
    out.append(f'<text class="label" x="{MARGIN}" y="14">{config.name} | {legend}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
