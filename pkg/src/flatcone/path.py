"""Polyline paths in the finite plane."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ClearanceError, ValidationError


def point_segment_distance(p: complex, a: complex, b: complex) -> float:
    d = b - a
    L2 = d.real * d.real + d.imag * d.imag
    if L2 == 0.0:
        return abs(p - a)
    t = ((p - a) * d.conjugate()).real / L2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


def point_ray_distance(p: complex, a: complex, direction: complex) -> float:
    u = direction / abs(direction)
    t = max(0.0, ((p - a) * u.conjugate()).real)
    return abs(p - (a + t * u))


def default_clearance(positions: Sequence[complex]) -> float:
    if len(positions) == 0:
        return 1e-6
    pts = np.asarray(positions, dtype=complex)
    diam = float(np.max(np.abs(pts[:, None] - pts[None, :]))) if len(pts) > 1 else 0.0
    return 1e-6 * (diam + 1.0)


@dataclass(frozen=True)
class Path:
    """Polyline through ``waypoints``; a loop when first == last."""

    waypoints: tuple[complex, ...]
    clearance: float | None = None

    def __post_init__(self):
        wps = tuple(complex(w) for w in self.waypoints)
        if len(wps) < 2:
            raise ValidationError("a path needs at least 2 waypoints")
        for w in wps:
            if not (math.isfinite(w.real) and math.isfinite(w.imag)):
                raise ValidationError(f"non-finite waypoint {w}")
        if self.clearance is not None and not self.clearance > 0:
            raise ValidationError("clearance must be positive")
        object.__setattr__(self, "waypoints", wps)

    @property
    def start(self) -> complex:
        return self.waypoints[0]

    @property
    def end(self) -> complex:
        return self.waypoints[-1]

    @property
    def closed(self) -> bool:
        return self.waypoints[0] == self.waypoints[-1]

    def segments(self) -> list[tuple[complex, complex]]:
        w = self.waypoints
        return [(w[i], w[i + 1]) for i in range(len(w) - 1) if w[i] != w[i + 1]]

    @property
    def length(self) -> float:
        return math.fsum(abs(b - a) for a, b in self.segments())

    def signed_area(self) -> float:
        w = self.waypoints
        return 0.5 * math.fsum(
            (w[i].conjugate() * w[i + 1]).imag for i in range(len(w) - 1)
        )

    def reversed(self) -> "Path":
        return Path(self.waypoints[::-1], self.clearance)

    def then(self, other: "Path") -> "Path":
        """Concatenation; ``other`` must start where ``self`` ends."""
        if other.start != self.end:
            raise ValidationError("paths do not join")
        clr = min((c for c in (self.clearance, other.clearance) if c is not None), default=None)
        return Path(self.waypoints + other.waypoints[1:], clr)

    def split(self, fractions: Iterable[float]) -> list[complex]:
        """Points at the given arc-length fractions (each in [0, 1])."""
        segs = self.segments()
        lens = [abs(b - a) for a, b in segs]
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        total = cum[-1]
        out = []
        for f in fractions:
            if f <= 0:
                out.append(self.start)
                continue
            if f >= 1:
                out.append(self.end)
                continue
            s = f * total
            i = int(np.searchsorted(cum, s, side="right") - 1)
            i = min(i, len(segs) - 1)
            a, b = segs[i]
            t = (s - cum[i]) / lens[i]
            out.append(a + t * (b - a))
        return out

    def pieces_between(self, fractions: Sequence[float]) -> list["Path"]:
        """Sub-paths between consecutive arc-length fractions, keeping corners."""
        segs = self.segments()
        lens = [abs(b - a) for a, b in segs]
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        total = cum[-1]
        pts = self.split(fractions)
        out = []
        for k in range(len(fractions) - 1):
            s0, s1 = fractions[k] * total, fractions[k + 1] * total
            corners = [self.waypoints_at(i) for i in range(1, len(cum) - 1) if s0 < cum[i] < s1]
            wps = [pts[k], *corners, pts[k + 1]]
            out.append(Path(tuple(wps), self.clearance))
        return out

    def waypoints_at(self, i: int) -> complex:
        # i-th distinct segment start
        return self.segments()[i][0]

    def check_clearance(
        self,
        positions: Sequence[complex],
        clearance: float,
        exempt_start: int | None = None,
        exempt_end: int | None = None,
    ) -> None:
        """Raise ClearanceError if any segment comes within ``clearance`` of a point.

        ``exempt_start`` / ``exempt_end`` name a cone point index allowed to sit
        on the first / last waypoint (only that segment is exempt).
        """
        segs = self.segments()
        for si, (a, b) in enumerate(segs):
            for k, p in enumerate(positions):
                if si == 0 and k == exempt_start:
                    continue
                if si == len(segs) - 1 and k == exempt_end:
                    continue
                dist = point_segment_distance(p, a, b)
                if dist < clearance:
                    raise ClearanceError(
                        f"segment {a} -> {b} passes within {dist:.3g} of cone point {p} "
                        f"(clearance {clearance:.3g})"
                    )


def path_from_json(obj: dict) -> Path:
    try:
        wps = tuple(complex(float(w["re"]), float(w.get("im", 0.0))) for w in obj["waypoints"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad path JSON: {exc}") from exc
    clr = obj.get("clearance")
    return Path(wps, None if clr is None else float(clr))


def path_to_json(path: Path) -> dict:
    return {
        "waypoints": [{"re": w.real, "im": w.imag} for w in path.waypoints],
        "clearance": path.clearance,
    }
