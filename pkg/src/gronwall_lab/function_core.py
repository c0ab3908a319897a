"""Piecewise C^1 functions of one variable built from typed segments.

A :class:`PiecewiseC1Function` holds knots, one segment per knot pair and an
overall amplitude ``scale``. Two segment kinds exist:

* :class:`ExpBranch` - ``e^(tau/2) - e^(n/2) + 1/(n+1)``
* :class:`SplinePiece` - a concave-then-convex quadratic bridge, see
  :class:`SplineSegment`.

Evaluation is right-continuous at interior knots and left-continuous at the
domain end. Derivatives are analytic on each segment.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np


class DomainError(ValueError):
    """Argument outside the domain of a function or formula."""


def xi(n: int) -> float:
    """Length of the bridge interval after branch ``n``: ``2^(-n-1)``."""
    return math.ldexp(1.0, -n - 1)


def branch_value(n: int, tau: float) -> float:
    return math.exp(0.5 * tau) - math.exp(0.5 * n) + 1.0 / (n + 1)


def branch_slope(tau: float) -> float:
    return 0.5 * math.exp(0.5 * tau)


@dataclass(frozen=True)
class ExpBranch:
    """Exponential branch ``n`` living on ``[left, right)``."""

    n: int
    left: float
    right: float

    def value(self, tau: float) -> float:
        return branch_value(self.n, tau)

    def slope(self, tau: float) -> float:
        return branch_slope(tau)

    def curvature(self, tau: float) -> float:
        return 0.25 * math.exp(0.5 * tau)

    def min_value(self) -> float:
        # increasing, so the minimum sits at the left end
        return self.value(self.left)


@dataclass(frozen=True)
class SplineSegment:
    """Quadratic C^1 bridge with curvature ``-a`` then ``+b``.

    On the left half ``[left, mid)`` the piece is expanded around the left end
    using ``(v_left, s_left)``; on ``[mid, right)`` around the right end using
    ``(v_right, s_right)``. When ``a`` and ``b`` come from
    :func:`gronwall_lab.oscillator.solve_spline` both expansions meet with equal
    value and slope at ``mid``.
    """

    n: int
    left: float
    right: float
    v_left: float
    s_left: float
    v_right: float
    s_right: float
    a: float
    b: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.left + self.right)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.right - self.left)

    def value(self, tau: float) -> float:
        if tau < self.mid:
            d = tau - self.left
            return self.v_left + self.s_left * d - 0.5 * self.a * d * d
        e = self.right - tau
        return self.v_right - self.s_right * e + 0.5 * self.b * e * e

    def slope(self, tau: float) -> float:
        if tau < self.mid:
            return self.s_left - self.a * (tau - self.left)
        return self.s_right - self.b * (self.right - tau)

    def curvature(self, tau: float) -> float:
        return -self.a if tau < self.mid else self.b

    def min_value(self) -> float:
        """Exact minimum over the closed interval.

        The concave half attains its minimum at an end; the convex half at its
        vertex when that falls inside, otherwise at an end.
        """
        h = self.half_width
        candidates = [self.v_left, self.value(self.mid), self.v_right]
        if self.b > 0.0:
            e_star = self.s_right / self.b
            if 0.0 < e_star < h:
                candidates.append(self.v_right - 0.5 * self.s_right ** 2 / self.b)
        return min(candidates)


@dataclass(frozen=True)
class SplinePiece:
    """Segment wrapper around a :class:`SplineSegment`."""

    spline: SplineSegment

    @property
    def left(self) -> float:
        return self.spline.left

    @property
    def right(self) -> float:
        return self.spline.right

    def value(self, tau: float) -> float:
        return self.spline.value(tau)

    def slope(self, tau: float) -> float:
        return self.spline.slope(tau)

    def curvature(self, tau: float) -> float:
        return self.spline.curvature(tau)

    def min_value(self) -> float:
        return self.spline.min_value()


Segment = Union[ExpBranch, SplinePiece]


@dataclass(frozen=True, eq=False)
class PiecewiseC1Function:
    """``scale`` times a piecewise function on ``[knots[0], domain_end]``.

    Instances are immutable; identity hashing lets callers cache derived
    tables per function.
    """

    knots: tuple[float, ...]
    segments: tuple[Segment, ...]
    scale: float = 1.0
    domain_end: float = field(default=math.nan)

    def __post_init__(self):
        if len(self.segments) != len(self.knots) - 1:
            raise ValueError(
                f"need len(knots) - 1 segments, got {len(self.segments)} for {len(self.knots)} knots"
            )
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise ValueError("knots must be strictly increasing")
        if not self.scale > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if math.isnan(self.domain_end):
            object.__setattr__(self, "domain_end", self.knots[-1])

    @property
    def domain_start(self) -> float:
        return self.knots[0]

    def segment_index(self, tau: float) -> int:
        """Index of the segment that owns ``tau`` under the knot convention."""
        if not (self.domain_start <= tau <= self.domain_end):
            raise DomainError(
                f"tau={tau!r} outside [{self.domain_start}, {self.domain_end}]"
            )
        if tau >= self.knots[-1]:
            return len(self.segments) - 1
        return bisect.bisect_right(self.knots, tau) - 1

    def segment_at(self, tau: float) -> Segment:
        return self.segments[self.segment_index(tau)]

    def __call__(self, tau: float) -> float:
        return self.scale * self.segment_at(tau).value(tau)

    def derivative(self, tau: float) -> float:
        return self.scale * self.segment_at(tau).slope(tau)

    def left_limit(self, tau: float) -> tuple[float, float]:
        """Value and slope of the segment ending at ``tau`` (a knot)."""
        k = bisect.bisect_left(self.knots, tau)
        if k == 0 or k >= len(self.knots) or self.knots[k] != tau:
            raise DomainError(f"{tau!r} is not an interior or end knot")
        seg = self.segments[k - 1]
        return self.scale * seg.value(tau), self.scale * seg.slope(tau)

    def with_segment(self, index: int, segment: Segment) -> "PiecewiseC1Function":
        """Copy with one segment swapped (used to inject defects in tests)."""
        segs = list(self.segments)
        segs[index] = segment
        return replace(self, segments=tuple(segs))

    def values(self, taus) -> np.ndarray:
        return np.array([self(float(t)) for t in taus])

    def derivatives(self, taus) -> np.ndarray:
        return np.array([self.derivative(float(t)) for t in taus])


def eval(f: PiecewiseC1Function, tau: float) -> float:  # noqa: A001 - public name
    """Value of ``f`` at ``tau``.

    Raises:
        DomainError: ``tau`` outside ``[knots[0], domain_end]``.
    """
    return f(tau)


def eval_derivative(f: PiecewiseC1Function, tau: float) -> float:
    """Analytic first derivative of ``f``'s active segment at ``tau``."""
    return f.derivative(tau)


@dataclass(frozen=True)
class KnotGap:
    knot: float
    value_gap: float
    slope_gap: float


def continuity_audit(f: PiecewiseC1Function, tol: float) -> list[KnotGap]:
    """Interior knots where the value or slope jumps by more than ``tol``.

    An empty list certifies C^1 continuity at the knots within ``tol``.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    bad = []
    for k in range(1, len(f.knots) - 1):
        tau = f.knots[k]
        left, right = f.segments[k - 1], f.segments[k]
        dv = abs(f.scale * (left.value(tau) - right.value(tau)))
        ds = abs(f.scale * (left.slope(tau) - right.slope(tau)))
        if dv > tol or ds > tol:
            bad.append(KnotGap(tau, dv, ds))
    return bad


@dataclass
class GridFunction:
    """Sampled trajectory.

    ``values`` hold the quantity itself unless ``log_scale`` is set, in which
    case they hold its natural log. ``derivatives`` are with respect to the
    abscissa. ``accumulation`` carries the running integral of the quantity
    when a caller needs it (the tau(t) channel of a pushforward).
    """

    abscissae: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray | None = None
    accumulation: np.ndarray | None = None
    log_scale: bool = False

    def __post_init__(self):
        self.abscissae = np.asarray(self.abscissae, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.abscissae.ndim != 1 or self.abscissae.shape != self.values.shape:
            raise ValueError("abscissae and values must be 1-d arrays of equal length")
        if self.abscissae.size > 1 and np.any(np.diff(self.abscissae) <= 0):
            raise ValueError("abscissae must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        for name in ("derivatives", "accumulation"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                if arr.shape != self.values.shape:
                    raise ValueError(f"{name} must match values in shape")
                setattr(self, name, arr)

    def __len__(self) -> int:
        return self.abscissae.size

    def linear_values(self) -> np.ndarray:
        return np.exp(self.values) if self.log_scale else self.values


def segment_aligned_grid(f: PiecewiseC1Function, density: int, start: float | None = None,
                         end: float | None = None) -> np.ndarray:
    """Grid with about ``density`` points per unit that includes every knot.

    Each segment gets its own uniform sub-grid, so no panel straddles a knot.
    The final point is the domain end.
    """
    if density < 1:
        raise ValueError("density must be >= 1")
    lo = f.domain_start if start is None else start
    hi = f.domain_end if end is None else end
    edges = [lo] + [k for k in f.knots if lo < k < hi] + [hi]
    pieces = []
    for a, b in zip(edges, edges[1:]):
        m = max(2, int(math.ceil((b - a) * density)))
        pieces.append(np.linspace(a, b, m + 1)[:-1])
    pieces.append(np.array([hi]))
    return np.concatenate(pieces)
