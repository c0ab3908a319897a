"""Pointwise residual certificates for the two forms of the inequality.

transformed form:  X'(tau) <= 1 + X(tau) e^tau
original form:     x'(t)   <= x + x^2 exp(int_0^t x)

A report passes when the largest residual ``lhs - rhs`` is at most ``slack``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .function_core import GridFunction, PiecewiseC1Function, segment_aligned_grid, xi
from .oscillator import peak_value
from .reparam import (
    ReparamResult,
    interval_majorant,
    inverse_time_map,
    pushforward_from_tau,
    time_map,
)

__all__ = [
    "Certificate",
    "PropertyCheck",
    "ResidualReport",
    "oscillation_certificate",
    "residual_original",
    "residual_transformed",
    "with_bump",
]


@dataclass
class ResidualReport:
    grid: np.ndarray
    residuals: np.ndarray
    max_residual: float
    argmax: float
    slack: float
    passed: bool
    values: np.ndarray | None = None
    derivatives: np.ndarray | None = None
    rhs: np.ndarray | None = None

    @classmethod
    def build(cls, grid, lhs, rhs, slack, values=None) -> "ResidualReport":
        grid = np.asarray(grid, dtype=float)
        residuals = np.asarray(lhs, dtype=float) - np.asarray(rhs, dtype=float)
        i = int(np.argmax(residuals))
        max_res = float(residuals[i])
        return cls(grid, residuals, max_res, float(grid[i]), slack, bool(max_res <= slack),
                   values=values, derivatives=np.asarray(lhs, dtype=float),
                   rhs=np.asarray(rhs, dtype=float))

    def summary(self) -> dict:
        return {
            "pass": self.passed,
            "max_residual": self.max_residual,
            "argmax": self.argmax,
            "slack": self.slack,
            "n_points": int(self.grid.size),
        }


def residual_transformed(X, tau_grid=None, slack: float = 0.0, density: int = 512) -> ResidualReport:
    """Residual ``X' - 1 - X e^tau`` on a grid.

    Args:
        X: a :class:`PiecewiseC1Function` (analytic derivative) or a
            :class:`GridFunction` carrying ``derivatives``.
        tau_grid: evaluation points; defaults to a segment-aligned grid with
            ``density`` points per unit for piecewise input, or the grid's own
            abscissae.
        slack: admissible positive residual.
    """
    if slack < 0:
        raise ValueError("slack must be >= 0")
    if isinstance(X, GridFunction):
        if X.derivatives is None:
            raise ValueError("grid input needs derivatives")
        if tau_grid is not None:
            raise ValueError("grid input is evaluated on its own abscissae")
        taus = X.abscissae
        vals = X.linear_values()
        ders = X.derivatives
    else:
        taus = segment_aligned_grid(X, density) if tau_grid is None else np.asarray(tau_grid, dtype=float)
        vals = X.values(taus)
        ders = X.derivatives(taus)
    rhs = 1.0 + vals * np.exp(taus)
    return ResidualReport.build(taus, ders, rhs, slack, values=vals)


def residual_original(x: GridFunction, slack: float = 0.0) -> ResidualReport:
    """Residual ``x' - x - x^2 exp(tau(t))`` for a trajectory with accumulation.

    Raises:
        ValueError: ``x`` lacks the derivative or accumulation channel.
    """
    if slack < 0:
        raise ValueError("slack must be >= 0")
    if x.derivatives is None or x.accumulation is None:
        raise ValueError("residual_original needs derivatives and accumulation (tau(t)) channels")
    vals = x.linear_values()
    rhs = vals + vals * vals * np.exp(x.accumulation)
    return ResidualReport.build(x.abscissae, x.derivatives, rhs, slack, values=vals)


def with_bump(g: GridFunction, center: float, amplitude: float, width: float) -> GridFunction:
    """Add a Gaussian bump (and its derivative) to a sampled trajectory."""
    s = (g.abscissae - center) / width
    bump = amplitude * np.exp(-s * s)
    dbump = -2.0 * s / width * bump
    ders = None if g.derivatives is None else g.derivatives + dbump
    return GridFunction(g.abscissae, g.linear_values() + bump, derivatives=ders,
                        accumulation=g.accumulation)


@dataclass
class PropertyCheck:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    location: float | None = None


@dataclass
class Certificate:
    M: float
    N: int
    checks: list[PropertyCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[PropertyCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "N": self.N,
            "pass": self.passed,
            "properties": {
                c.name: {"pass": c.passed, "location": c.location, **c.detail} for c in self.checks
            },
        }


def oscillation_certificate(X: PiecewiseC1Function, r: ReparamResult, M: float, N: int,
                            density: int = 512, slack: float = 1e-6,
                            value_rtol: float = 1e-10) -> Certificate:
    """Check the four properties of the pushforward ``x = X(tau(t))``.

    (i) ``x(0) = M``; (ii) the original-form residual passes on a
    segment-aligned grid; (iii) the bridge peaks dominate the unbounded
    increasing witness ``M (e^(1/4) - 1) e^(n/2)`` and grow from ``n = 1`` on;
    (iv) ``x(t_n) = M/(n+1)`` at ``t_n = t(n)``, with ``t_n`` increasing and
    ``T_star - t_n`` shrinking under the explicit majorant.
    """
    if N > r.N_max or N < 1:
        raise ValueError(f"N must lie in [1, {r.N_max}], got {N}")
    checks = []

    tau0 = inverse_time_map(r, X, 0.0)
    x0 = X(tau0)
    checks.append(PropertyCheck(
        "i", x0 == M or abs(x0 - M) <= 1e-14 * M, {"x0": x0, "expected": M}, 0.0))

    grid = segment_aligned_grid(X, density)
    pushed = pushforward_from_tau(X, grid)
    rep = residual_original(pushed, slack)
    checks.append(PropertyCheck("ii", rep.passed, rep.summary(), rep.argmax))

    peaks = []
    for n in range(N + 1):
        tau_peak = n + 1 - xi(n)
        # left limit: evaluate on the branch just before the bridge
        k = X.segment_index(tau_peak)
        seg = X.segments[k - 1] if X.knots[k] == tau_peak else X.segments[k]
        peaks.append(X.scale * seg.value(tau_peak))
    witness = [M * (math.exp(0.25) - 1.0) * math.exp(0.5 * n) for n in range(N + 1)]
    formula = [peak_value(n, M) for n in range(N + 1)]
    # peak_0 = e^(1/4) exceeds peak_1, so growth is only required from n = 1 on
    increasing = all(b > a for a, b in zip(peaks[1:], peaks[2:]))
    dominated = all(p >= w for p, w in zip(peaks, witness))
    consistent = all(abs(p - f) <= 1e-12 * f for p, f in zip(peaks, formula))
    bad = next((n for n, (p, w) in enumerate(zip(peaks, witness)) if p < w), None)
    checks.append(PropertyCheck(
        "iii", increasing and dominated and consistent,
        {"peaks": peaks, "witness": witness, "increasing_from_n1": increasing,
         "dominates_witness": dominated, "matches_formula": consistent},
        None if bad is None else float(bad + 1 - xi(bad)),
    ))

    t_n, x_n, errors = [], [], []
    for n in range(N + 1):
        tn = time_map(X, float(n))
        tau_n = inverse_time_map(r, X, tn)
        xn = X(tau_n)
        t_n.append(tn)
        x_n.append(xn)
        errors.append(abs(xn - M / (n + 1)) / (M / (n + 1)))
    gaps = [r.T_star - tn for tn in t_n]
    # T_star - t_n <= sum_{m >= n} majorant(m) / M (tail beyond N_max included)
    bounds = []
    for n in range(N + 1):
        inside = sum(interval_majorant(m) for m in range(n, r.N_max + 1)) / M
        bounds.append(inside + r.tail_bound + r.T_star_error_bound)
    values_ok = all(e <= value_rtol for e in errors)
    increasing_t = all(b > a for a, b in zip(t_n, t_n[1:]))
    gaps_ok = all(-r.T_star_error_bound <= g <= b for g, b in zip(gaps, bounds))
    shrinking = all(b < a for a, b in zip(bounds, bounds[1:]))
    worst = int(np.argmax(errors))
    delta = 0.5 * (t_n[-1] - t_n[-2])
    tau_lo = inverse_time_map(r, X, t_n[-1] - delta)
    window = np.linspace(tau_lo, float(N), 2001)
    liminf = float(np.min(X.values(window)))
    checks.append(PropertyCheck(
        "iv", values_ok and increasing_t and gaps_ok and shrinking,
        {"t_n": t_n, "x_n": x_n, "max_rel_error": max(errors), "t_n_increasing": increasing_t,
         "gap_to_T_star": gaps, "gap_bounds": bounds, "gaps_within_bounds": gaps_ok,
         "liminf_window_min": liminf, "liminf_target": M / (N + 1)},
        t_n[worst] if not values_ok else None,
    ))
    return Certificate(M, N, checks)
