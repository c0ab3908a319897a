"""The oscillating profile X = M * Y.

Y follows ``e^(tau/2) - e^(n/2) + 1/(n+1)`` on ``[n, n+1-xi_n)`` and is bridged
to the next branch on ``[n+1-xi_n, n+1)`` by a quadratic piece whose second
derivative is ``-a`` on the first half and ``+b`` on the second. The four
Hermite conditions fix ``(a, b)`` in closed form.

The last branch (``n = N_max``) is continued through ``N_max + 1`` so the
domain is ``[0, N_max + 1]`` with ``2 N_max + 1`` segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .function_core import (
    ExpBranch,
    PiecewiseC1Function,
    SplinePiece,
    SplineSegment,
    branch_slope,
    branch_value,
    xi,
)

__all__ = [
    "ConstructionError",
    "OscillatorConfig",
    "SplineSegment",
    "build_oscillator",
    "hermite_data",
    "peak_value",
    "solve_spline",
]


class ConstructionError(ArithmeticError):
    """The quadratic bridge violates the required curvature signs."""


@dataclass(frozen=True)
class OscillatorConfig:
    M: float = 1.0
    N_max: int = 8
    certify_grid_density: int = 512

    def __post_init__(self):
        if not (isinstance(self.M, (int, float)) and math.isfinite(self.M) and self.M > 0):
            raise ValueError(f"M must be a positive finite number, got {self.M!r}")
        if int(self.N_max) != self.N_max or self.N_max < 1:
            raise ValueError(f"N_max must be an integer >= 1, got {self.N_max!r}")
        if self.certify_grid_density < 1:
            raise ValueError("certify_grid_density must be >= 1")


def hermite_data(n: int) -> tuple[float, float, float, float]:
    """End data ``(v_L, s_L, v_R, s_R)`` of bridge ``n``.

    Left data is branch ``n`` at ``n+1-xi_n``; right data is branch ``n+1`` at
    ``n+1`` (value ``1/(n+2)``).
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    tau_l = n + 1 - xi(n)
    v_l = branch_value(n, tau_l)
    s_l = branch_slope(tau_l)
    v_r = 1.0 / (n + 2)
    s_r = branch_slope(n + 1.0)
    return v_l, s_l, v_r, s_r


def solve_spline(n: int) -> SplineSegment:
    """Constant-curvature bridge for index ``n``.

    With ``h = xi_n / 2``, matching value and slope at the midpoint gives::

        a = (v_L - v_R + (3 s_L + s_R) h / 2) / h^2
        b = a + (s_R - s_L) / h

    Raises:
        ConstructionError: ``a <= 0`` or ``b < 0``.
    """
    v_l, s_l, v_r, s_r = hermite_data(n)
    width = xi(n)
    h = 0.5 * width
    a = (v_l - v_r + 0.5 * (3.0 * s_l + s_r) * h) / (h * h)
    b = a + (s_r - s_l) / h
    if not a > 0.0 or not b >= 0.0:
        raise ConstructionError(f"bridge {n}: curvature pair a={a}, b={b} has the wrong signs")
    return SplineSegment(
        n=n,
        left=n + 1 - width,
        right=float(n + 1),
        v_left=v_l,
        s_left=s_l,
        v_right=v_r,
        s_right=s_r,
        a=a,
        b=b,
    )


def build_oscillator(cfg: OscillatorConfig) -> PiecewiseC1Function:
    """Assemble ``X = M * Y`` on ``[0, N_max + 1]``."""
    knots = [0.0]
    segments = []
    for n in range(cfg.N_max):
        spline = solve_spline(n)
        segments.append(ExpBranch(n, float(n), spline.left))
        knots.append(spline.left)
        segments.append(SplinePiece(spline))
        knots.append(float(n + 1))
    last = cfg.N_max
    segments.append(ExpBranch(last, float(last), float(last + 1)))
    knots.append(float(last + 1))
    return PiecewiseC1Function(tuple(knots), tuple(segments), scale=float(cfg.M),
                               domain_end=float(last + 1))


def peak_value(n: int, M: float = 1.0) -> float:
    """Left limit of ``X`` at the start of bridge ``n`` (the local peak)."""
    return M * branch_value(n, n + 1 - xi(n))
