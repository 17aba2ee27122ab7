"""Learning curves: first-attempt error rates per skill opportunity.

Only the first transaction on each (student, skill, opportunity) counts.
Two hint policies: under policy "a" (the default) a hint as first event is an
error; under policy "b" hint events are ignored when locating the first
attempt. The aggregate curve averages the per-skill error rates unweighted
at each opportunity (a weighted variant is available).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .core import Outcome, TransactionLog
from .errors import NoOverlap

HINT_POLICIES = ("a", "b")


@dataclass(frozen=True)
class CurvePoint:
    opportunity: int
    error_rate: float
    n: int


@dataclass(frozen=True)
class LearningCurve:
    key: str
    points: tuple[CurvePoint, ...]

    def rate_at(self, opportunity: int) -> float | None:
        for p in self.points:
            if p.opportunity == opportunity:
                return p.error_rate
        return None

    @property
    def opportunities(self) -> list[int]:
        return [p.opportunity for p in self.points]


def _first_attempts(log: TransactionLog, skill_map, policy: str):
    """Yield (skill, opportunity, is_error) for each first attempt.

    With a skill_map (widget -> skill relabeling) opportunities are
    recomputed: each distinct (problem, step) a student touches becomes the
    next opportunity of the mapped skill. Without one, the logged
    opportunity counters are used as-is.
    """
    if policy not in HINT_POLICIES:
        raise ValueError(f"unknown hint policy {policy!r}")
    seen: set[tuple] = set()
    assigned: dict[tuple, dict] = {}
    for t in log:
        if skill_map is not None:
            skill = skill_map.get(t.step_name, t.skill)
            steps = assigned.setdefault((t.student_id, skill), {})
            step_key = (t.problem_name, t.step_name)
            opportunity = steps.setdefault(step_key, len(steps) + 1)
        else:
            skill = t.skill
            opportunity = t.opportunity
        key = (t.student_id, skill, opportunity)
        if key in seen:
            continue
        if t.outcome == Outcome.HINT and policy == "b":
            continue  # policy b: hints never count as the first attempt
        seen.add(key)
        yield skill, opportunity, t.outcome != Outcome.CORRECT


def per_skill_curves(
    log: TransactionLog, skill_map=None, policy: str = "a"
) -> dict[str, LearningCurve]:
    """First-attempt error curve for every skill in the log."""
    cells: dict[str, dict[int, list[int]]] = {}
    for skill, opp, is_error in _first_attempts(log, skill_map, policy):
        bucket = cells.setdefault(skill, {}).setdefault(opp, [0, 0])
        bucket[0] += int(is_error)
        bucket[1] += 1
    curves = {}
    for skill, by_opp in sorted(cells.items()):
        points = tuple(
            CurvePoint(opp, errors / n, n)
            for opp, (errors, n) in sorted(by_opp.items())
        )
        curves[skill] = LearningCurve(skill, points)
    return curves


def first_attempt_curve(
    log: TransactionLog,
    skill_map=None,
    policy: str = "a",
    weighted: bool = False,
) -> LearningCurve:
    """Aggregate curve over all skills.

    Unweighted (default): the mean of per-skill error rates at each
    opportunity. Weighted: pooled over observations instead.
    """
    curves = per_skill_curves(log, skill_map, policy)
    by_opp: dict[int, list[CurvePoint]] = {}
    for curve in curves.values():
        for p in curve.points:
            by_opp.setdefault(p.opportunity, []).append(p)
    points = []
    for opp, cell in sorted(by_opp.items()):
        n = sum(p.n for p in cell)
        if weighted:
            rate = sum(p.error_rate * p.n for p in cell) / n
        else:
            rate = sum(p.error_rate for p in cell) / len(cell)
        points.append(CurvePoint(opp, rate, n))
    return LearningCurve("all_skills", tuple(points))


def curve_distance(a: LearningCurve, b: LearningCurve) -> float:
    """Root-mean-square gap over the shared opportunity range."""
    shared = sorted(set(a.opportunities) & set(b.opportunities))
    if not shared:
        raise NoOverlap(f"curves {a.key!r} and {b.key!r} share no opportunities")
    total = 0.0
    for opp in shared:
        gap = a.rate_at(opp) - b.rate_at(opp)
        total += gap * gap
    return (total / len(shared)) ** 0.5


# ---------------------------------------------------------------------------
# Export


def export_curves(curves, sink) -> None:
    """CSV with columns grouping, opportunity, error_rate, n.

    Accepts one curve, a list, or a dict of curves; rows are sorted by
    (grouping, opportunity) so re-exports are byte-identical.
    """
    rows = []
    for curve in _as_curve_list(curves):
        for p in curve.points:
            rows.append((curve.key, p.opportunity, repr(p.error_rate), p.n))
    rows.sort(key=lambda r: (r[0], r[1]))
    owns = isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__")
    handle = open(sink, "w", encoding="utf-8", newline="") if owns else sink
    try:
        writer = csv.writer(handle)
        writer.writerow(["grouping", "opportunity", "error_rate", "n"])
        writer.writerows(rows)
    finally:
        if owns:
            handle.close()


def parse_curves(source) -> dict[str, LearningCurve]:
    owns = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
    handle = open(source, "r", encoding="utf-8", newline="") if owns else source
    try:
        reader = csv.reader(handle)
        header = next(reader)
        assert header == ["grouping", "opportunity", "error_rate", "n"]
        cells: dict[str, list[CurvePoint]] = {}
        for grouping, opp, rate, n in reader:
            cells.setdefault(grouping, []).append(
                CurvePoint(int(opp), float(rate), int(n))
            )
    finally:
        if owns:
            handle.close()
    return {
        key: LearningCurve(key, tuple(sorted(points, key=lambda p: p.opportunity)))
        for key, points in cells.items()
    }


def _as_curve_list(curves) -> list[LearningCurve]:
    if isinstance(curves, LearningCurve):
        return [curves]
    if isinstance(curves, dict):
        return [curves[k] for k in sorted(curves)]
    return list(curves)


def render_curves_svg(curves, width: int = 640, height: int = 400) -> str:
    """Minimal standalone SVG render of one or more curves."""
    curve_list = _as_curve_list(curves)
    pad = 40
    max_opp = max((p.opportunity for c in curve_list for p in c.points), default=1)
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]

    def x_of(opp):
        span = max(max_opp - 1, 1)
        return pad + (opp - 1) / span * (width - 2 * pad)

    def y_of(rate):
        return pad + (1.0 - rate) * (height - 2 * pad)

    for i, curve in enumerate(curve_list):
        color = palette[i % len(palette)]
        coords = " ".join(
            f"{x_of(p.opportunity):.1f},{y_of(p.error_rate):.1f}" for p in curve.points
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{width - pad + 4}" y="{pad + 14 * i}" font-size="10" '
            f'fill="{color}">{curve.key}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
