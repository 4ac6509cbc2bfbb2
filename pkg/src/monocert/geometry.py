"""Complex-plane path geometry and small dense matrix helpers.

Paths in the complex time plane are chains of segments, each parametrized by
a real ``s`` in [0, 1]: straight lines and circular arcs. Loops around a
single point expand to one canonical line-circle-line shape so that every
monodromy computation shares the same geometry; homotopy invariance is then
a checkable property instead of a configuration surface.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import GeometryError

#: maximum endpoint gap tolerated between consecutive path segments
ENDPOINT_TOL = 1e-12

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Line:
    """Straight segment from ``start`` to ``end``."""

    start: complex
    end: complex

    def __post_init__(self):
        if self.start == self.end:
            raise GeometryError("line segment has zero length")

    def point(self, s: float) -> complex:
        # convex combination: exact endpoints at s = 0 and s = 1
        return (1.0 - s) * self.start + s * self.end

    def velocity(self, s: float) -> complex:
        return self.end - self.start

    @property
    def start_point(self) -> complex:
        return self.start

    @property
    def end_point(self) -> complex:
        return self.end

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def reversed(self) -> "Line":
        return Line(self.end, self.start)


@dataclass(frozen=True)
class Arc:
    """Circular arc around ``center``; signed ``sweep`` sets orientation.

    The point at parameter ``s`` is ``center + radius * exp(i*(start_angle +
    s*sweep))``, so a positive sweep runs counterclockwise.
    """

    center: complex
    radius: float
    start_angle: float
    sweep: float

    def __post_init__(self):
        if not (self.radius > 0.0):
            raise GeometryError("arc radius must be positive")
        if self.sweep == 0.0:
            raise GeometryError("arc sweep must be nonzero")

    def point(self, s: float) -> complex:
        return self.center + self.radius * cmath.exp(
            1j * (self.start_angle + s * self.sweep)
        )

    def velocity(self, s: float) -> complex:
        return 1j * self.sweep * (self.point(s) - self.center)

    @property
    def start_point(self) -> complex:
        return self.point(0.0)

    @property
    def end_point(self) -> complex:
        return self.point(1.0)

    @property
    def length(self) -> float:
        return abs(self.sweep) * self.radius

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.start_angle + self.sweep, -self.sweep)


PathSegment = Union[Line, Arc]


@dataclass(frozen=True)
class PathSpec:
    """Ordered, endpoint-continuous chain of segments.

    An empty chain is the zero-length path (transporting along it is the
    identity).
    """

    segments: tuple[PathSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        for i in range(len(self.segments) - 1):
            gap = abs(self.segments[i].end_point - self.segments[i + 1].start_point)
            if gap > ENDPOINT_TOL:
                raise GeometryError(
                    f"segments {i} and {i + 1} are not endpoint-continuous "
                    f"(gap {gap:.3e})"
                )

    @property
    def start_point(self) -> complex:
        if not self.segments:
            raise GeometryError("zero-length path has no endpoints")
        return self.segments[0].start_point

    @property
    def end_point(self) -> complex:
        if not self.segments:
            raise GeometryError("zero-length path has no endpoints")
        return self.segments[-1].end_point

    @property
    def length(self) -> float:
        return sum(seg.length for seg in self.segments)

    def reversed(self) -> "PathSpec":
        return PathSpec(tuple(seg.reversed() for seg in reversed(self.segments)))

    def sample(self, per_segment: int = 256) -> np.ndarray:
        """Polyline of complex points along the path (for plots and winding)."""
        pts: list[complex] = []
        for seg in self.segments:
            n = per_segment
            if isinstance(seg, Arc):
                # keep the angular step small even for multi-turn arcs
                n = max(per_segment, int(abs(seg.sweep) / 0.02) + 2)
            ss = np.linspace(0.0, 1.0, n)
            pts.extend(seg.point(s) for s in ss[:-1])
        if self.segments:
            pts.append(self.segments[-1].end_point)
        return np.asarray(pts, dtype=complex)


@dataclass(frozen=True)
class LoopSpec:
    """Loop around ``center``: approach line, ``windings`` circles, return.

    The base point must lie strictly outside the circle so the approach
    segment has positive length.
    """

    base_point: complex
    center: complex
    radius: float
    windings: int = 1
    orientation: str = "ccw"

    def __post_init__(self):
        if not (self.radius > 0.0):
            raise GeometryError("loop radius must be positive")
        if not (isinstance(self.windings, int) and self.windings >= 1):
            raise GeometryError("windings must be a positive integer")
        if self.orientation not in ("ccw", "cw"):
            raise GeometryError(f"orientation must be 'ccw' or 'cw', got {self.orientation!r}")
        if abs(self.center - self.base_point) <= self.radius:
            raise GeometryError(
                "base point must lie strictly outside the loop circle "
                f"(|center - base| = {abs(self.center - self.base_point):.6g}, "
                f"radius = {self.radius:.6g})"
            )

    @property
    def signed_windings(self) -> int:
        return self.windings if self.orientation == "ccw" else -self.windings

    def expand(self, avoid: Sequence[complex] = ()) -> PathSpec:
        """Expand to the canonical PathSpec.

        ``avoid`` is an optional list of other singularities; the expanded
        path is rejected if it winds around (or passes too close to) any of
        them, which would silently change the homotopy class.
        """
        towards = self.center - self.base_point
        unit = towards / abs(towards)
        entry = self.center - self.radius * unit
        start_angle = cmath.phase(entry - self.center)
        sweep = TWO_PI * self.signed_windings
        path = PathSpec(
            (
                Line(self.base_point, entry),
                Arc(self.center, self.radius, start_angle, sweep),
                Line(entry, self.base_point),
            )
        )
        for z in avoid:
            if abs(z - self.center) <= self.radius + ENDPOINT_TOL:
                raise GeometryError(
                    f"declared singularity {z} lies inside the loop circle "
                    f"around {self.center}"
                )
            w = winding_number(path, z)
            if w != 0:
                raise GeometryError(
                    f"loop around {self.center} winds {w} times around the "
                    f"declared singularity {z}; shrink the radius or move the base"
                )
        return path


def expand_loop(loop: LoopSpec, avoid: Sequence[complex] = ()) -> PathSpec:
    """Functional alias for :meth:`LoopSpec.expand`."""
    return loop.expand(avoid)


def winding_number(path: PathSpec, z: complex) -> int:
    """Winding number of a closed path around ``z`` by sampled angle summation."""
    pts = path.sample()
    if abs(path.start_point - path.end_point) > 1e-9:
        raise GeometryError("winding number requested for a non-closed path")
    rel = pts - z
    dist = np.abs(rel)
    # sampling is dense enough only when the point keeps its distance
    spacing = np.max(np.abs(np.diff(pts))) if len(pts) > 1 else 0.0
    if np.min(dist) < max(1e-9, 2.0 * spacing):
        raise GeometryError(
            f"point {z} is too close to the path to certify its winding number"
        )
    increments = np.angle(rel[1:] / rel[:-1])
    total = float(np.sum(increments)) / TWO_PI
    w = round(total)
    if abs(total - w) > 0.25:
        raise GeometryError("winding number did not converge to an integer")
    return int(w)


def frobenius_norm(m: np.ndarray) -> float:
    """Square root of the sum of squared entry moduli."""
    return float(np.linalg.norm(np.asarray(m)))


def eigenvalues(m: np.ndarray) -> np.ndarray:
    """Eigenvalues (with multiplicity) of a square complex matrix."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"eigenvalues need a square matrix, got shape {m.shape}")
    return np.linalg.eigvals(m)


def require_finite(values: np.ndarray, what: str) -> np.ndarray:
    """Validate that an array of numbers has no NaN/Inf entries."""
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite entries")
    return arr
