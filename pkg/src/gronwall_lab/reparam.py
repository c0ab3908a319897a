"""Change of variables between accumulated time tau and physical time t.

``t(tau) = int_0^tau dtau' / X(tau')`` is strictly increasing because ``X > 0``;
its inverse ``tau(t)`` satisfies ``dtau/dt = X(tau(t))`` so the pushforward
``x(t) = X(tau(t))`` has ``tau(t) = int_0^t x``.

The blow-up time ``T_star = int_0^inf dtau / X`` is the quadrature over the
built domain plus an explicit majorant for everything beyond it.
"""

from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass

import numpy as np

from .function_core import DomainError, ExpBranch, GridFunction, PiecewiseC1Function, xi
from .oscillator import solve_spline
from .quadrature import QuadratureError, adaptive_simpson

__all__ = [
    "C_GEOM",
    "HorizonError",
    "ReparamResult",
    "blowup_time",
    "interval_majorant",
    "inverse_time_map",
    "pushforward",
    "pushforward_from_tau",
    "tail_bound",
    "time_map",
]

DEFAULT_TOL = 1e-10

# Per unit interval [n, n+1] of Y:
#   branch part:  Y >= e^(n/2) s/2 + 1/(n+1) with s = tau - n, so
#                 int 1/Y <= 2 e^(-n/2) log(1 + (n+1) e^(n/2) / 2)
#   bridge part:  int 1/Y <= xi_n / min(phi_n), min(phi_n) from the closed-form vertex
# Since log(1 + x) <= n/2 + log(n+1) + 1 the branch part is <= 3 (n+1) e^(-n/2) for
# n >= 1, and min(phi_n) >= 0.96/(n+2) (the bridge dips below 1/(n+2) by
# s_R^2/(2b), which decays like 4^-n) keeps the bridge part under 3 (n+1) xi_n.
# The sum of both is at most 1.24 (n+1)(e^(-n/2) + xi_n) for n = 0..300.
C_GEOM = 3.0


class HorizonError(ValueError):
    """Requested time lies beyond the computed part of the time axis."""

    def __init__(self, message: str, horizon: float):
        super().__init__(message)
        self.horizon = horizon


class TailTooLargeError(ValueError):
    """The construction depth cannot deliver the requested T_star accuracy."""


@dataclass(frozen=True)
class ReparamResult:
    T_star: float
    T_star_error_bound: float
    table: GridFunction
    M: float
    N_max: int
    tail_bound: float

    @property
    def horizon(self) -> float:
        """Largest tabulated t (the time at the domain end)."""
        return float(self.table.values[-1])


def interval_majorant(n: int) -> float:
    """Explicit upper bound for ``int_n^(n+1) dtau / Y`` (unit amplitude)."""
    branch = 2.0 * math.exp(-0.5 * n) * math.log1p(0.5 * (n + 1) * math.exp(0.5 * n))
    bridge = xi(n) / solve_spline(n).min_value()
    return branch + bridge


def tail_bound(N_max: int, M: float = 1.0) -> float:
    """Majorant of ``int_(N_max+1)^inf dtau / X``.

    ``(C_GEOM / M) * sum_{n > N_max} (n+1) (e^(-n/2) + xi_n)``; the sum is cut
    once terms drop below ``1e-18`` of the running total.
    """
    total = 0.0
    n = N_max + 1
    while True:
        term = (n + 1) * (math.exp(-0.5 * n) + xi(n))
        total += term
        if term < 1e-18 * total:
            break
        n += 1
    return C_GEOM * total / M


def _integrand(X: PiecewiseC1Function, k: int):
    seg = X.segments[k]
    scale = X.scale
    return lambda s: 1.0 / (scale * seg.value(s))


def _panels(seg, a: float, b: float) -> list[float]:
    """Breakpoints in ``[a, b]``; branches are split geometrically near their start.

    ``1/Y`` on branch ``n`` falls from ``n+1`` on the length scale
    ``delta = Y(n) / Y'(n)``, which is tiny for large ``n``. Splitting at
    ``n + delta 2^j`` keeps every panel's integrand within a bounded ratio.
    """
    if not isinstance(seg, ExpBranch):
        return [a, b]
    delta = 2.0 * math.exp(-0.5 * seg.n) / (seg.n + 1)
    cuts = [a]
    c = seg.left + delta
    while c < b:
        if c > a:
            cuts.append(c)
        c = seg.left + 2.0 * (c - seg.left)
    cuts.append(b)
    return cuts


def _integrate_segment(X: PiecewiseC1Function, k: int, a: float, b: float, tol: float) -> float:
    if a == b:
        return 0.0
    f = _integrand(X, k)
    cuts = _panels(X.segments[k], a, b)
    piece_tol = tol / (len(cuts) - 1)
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        try:
            value, _ = adaptive_simpson(f, lo, hi, tol=piece_tol)
        except QuadratureError as exc:
            raise QuadratureError(
                f"time map quadrature failed on segment {k}: {exc}", exc.a, exc.b, exc.estimate, exc.error
            ) from exc
        total += value
    return total


@functools.lru_cache(maxsize=64)
def _knot_times(X: PiecewiseC1Function, tol: float) -> tuple[float, ...]:
    seg_tol = tol / len(X.segments)
    out = [0.0]
    for k in range(len(X.segments)):
        out.append(out[-1] + _integrate_segment(X, k, X.knots[k], X.knots[k + 1], seg_tol))
    return tuple(out)


def time_map(X: PiecewiseC1Function, tau: float, tol: float = DEFAULT_TOL) -> float:
    """``t(tau) = int_0^tau dtau' / X(tau')``.

    Full segments come from a cached cumulative table; the partial segment is
    integrated on demand. The tolerance is split evenly across segments.
    """
    k = X.segment_index(tau)
    knots_t = _knot_times(X, tol)
    if tau == X.knots[k]:
        return knots_t[k]
    if tau == X.knots[k + 1]:
        return knots_t[k + 1]
    return knots_t[k] + _integrate_segment(X, k, X.knots[k], tau, tol / len(X.segments))


def _integrate_between(X: PiecewiseC1Function, a: float, b: float, tol: float) -> float:
    """Integral of 1/X over [a, b], split at knots."""
    seg_tol = tol / len(X.segments)
    total = 0.0
    k = X.segment_index(a)
    lo = a
    while lo < b:
        hi = min(b, X.knots[k + 1])
        total += _integrate_segment(X, k, lo, hi, seg_tol)
        lo = hi
        k += 1
    return total


def _n_max_of(X: PiecewiseC1Function) -> int:
    return int(round(X.domain_end)) - 1


def blowup_time(X: PiecewiseC1Function, N_max: int | None = None, tol: float | None = None,
                table_points_per_segment: int = 16) -> ReparamResult:
    """Blow-up time of the pushforward of an oscillator profile.

    The final branch of ``X`` is a truncation; here the true bridge ``phi_N`` is
    integrated on ``[N+1-xi_N, N+1]`` instead, so ``T_star`` refers to the
    untruncated profile. The unexplored tail ``[N+1, inf)`` contributes a value
    in ``[0, tail_bound]``; ``T_star`` takes the midpoint and the error bound
    the half-width plus the quadrature budget.

    Args:
        X: profile from :func:`gronwall_lab.oscillator.build_oscillator`.
        N_max: construction depth; inferred from the domain when omitted.
        tol: required accuracy of ``T_star``. ``None`` accepts any depth.
        table_points_per_segment: sub-samples per segment in the (tau, t) table.

    Raises:
        TailTooLargeError: the error bound exceeds ``tol``.
    """
    depth = _n_max_of(X) if N_max is None else N_max
    if abs(X.domain_end - (depth + 1)) > 1e-12:
        raise ValueError(f"X has domain end {X.domain_end}, expected N_max + 1 = {depth + 1}")
    M = X.scale
    quad_tol = DEFAULT_TOL

    bridge = solve_spline(depth)
    body = time_map(X, bridge.left, quad_tol)
    closing, _ = adaptive_simpson(lambda s: 1.0 / (M * bridge.value(s)), bridge.left, bridge.right,
                                  tol=quad_tol)
    tail = tail_bound(depth, M)
    T_star = body + closing + 0.5 * tail
    err = 0.5 * tail + 2.0 * quad_tol
    if tol is not None and err > tol:
        raise TailTooLargeError(
            f"N_max={depth} gives T_star error bound {err:.3e} > tol={tol:.3e}; "
            f"build a deeper oscillator (larger N_max)"
        )

    taus = []
    for k in range(len(X.segments)):
        taus.extend(np.linspace(X.knots[k], X.knots[k + 1], table_points_per_segment + 1)[:-1])
    taus.append(X.domain_end)
    table_tau, table_t = [0.0], [0.0]
    acc = 0.0
    for a, b in zip(taus, taus[1:]):
        acc += _integrate_between(X, a, b, quad_tol)
        # deep bridges add less than one ulp of t; such rows carry no information
        if acc > table_t[-1]:
            table_tau.append(b)
            table_t.append(acc)
    table = GridFunction(np.asarray(table_tau), np.asarray(table_t))
    return ReparamResult(T_star=T_star, T_star_error_bound=err, table=table, M=M,
                         N_max=depth, tail_bound=tail)


def inverse_time_map(r: ReparamResult, X: PiecewiseC1Function, t: float,
                     tol: float = 1e-9, max_iter: int = 100) -> float:
    """``tau`` with ``t(tau) = t``.

    The table brackets the root; safeguarded Newton uses ``dtau/dt = X``.
    After three Newton steps that leave the bracket or fail to halve the
    residual, the solver switches to bisection.

    Raises:
        HorizonError: ``t`` outside ``[0, horizon]``.
    """
    horizon = r.horizon
    if not (0.0 <= t <= horizon):
        raise HorizonError(
            f"t={t!r} outside the computed range [0, {horizon!r}]; "
            f"achievable horizon is {horizon!r} (build deeper for more)", horizon
        )
    taus, ts = r.table.abscissae, r.table.values
    j = bisect.bisect_right(ts, t) - 1
    if j >= len(ts) - 1:
        return float(taus[-1])
    lo, hi = float(taus[j]), float(taus[j + 1])
    if t == ts[j]:
        return lo

    def g(tau):
        return time_map(X, tau) - t

    g_lo = ts[j] - t
    tau = lo + (hi - lo) * (t - ts[j]) / (ts[j + 1] - ts[j])
    g_tau = g(tau)
    failures = 0
    for _ in range(max_iter):
        if g_tau == 0.0:
            return tau
        if g_tau < 0:
            lo, g_lo = tau, g_tau
        else:
            hi = tau
        if failures < 3:
            cand = tau - g_tau * X(tau)
            if lo < cand < hi:
                g_cand = g(cand)
                if abs(g_cand) > 0.5 * abs(g_tau):
                    failures += 1
                step = abs(cand - tau)
                tau, g_tau = cand, g_cand
                if step <= 4e-16 * max(1.0, abs(tau)):
                    break
                continue
            failures += 1
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        tau, g_tau = mid, g(mid)
    if abs(g_tau) > tol:
        raise ArithmeticError(f"inverse time map stalled at tau={tau}, residual {g_tau:.3e}")
    return tau


def pushforward(r: ReparamResult, X: PiecewiseC1Function, t_grid) -> GridFunction:
    """``x(t) = X(tau(t))`` sampled on ``t_grid``.

    ``derivatives`` hold ``dx/dt = X'(tau) X(tau)`` and ``accumulation`` holds
    ``tau(t) = int_0^t x``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    taus = np.array([inverse_time_map(r, X, float(t)) for t in t_grid])
    x = X.values(taus)
    dx = X.derivatives(taus) * x
    return GridFunction(t_grid, x, derivatives=dx, accumulation=taus)


def pushforward_from_tau(X: PiecewiseC1Function, tau_grid, tol: float = DEFAULT_TOL) -> GridFunction:
    """Pushforward sampled at ``t(tau_i)`` for an increasing ``tau_grid``.

    Avoids inversion by integrating 1/X between consecutive grid points.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.size and tau_grid[0] < X.domain_start:
        raise DomainError("tau grid starts before the domain")
    ts = np.empty_like(tau_grid)
    prev_tau = X.domain_start
    acc = 0.0
    for i, tau in enumerate(tau_grid):
        acc += _integrate_between(X, prev_tau, float(tau), tol)
        ts[i] = acc
        prev_tau = float(tau)
    x = X.values(tau_grid)
    dx = X.derivatives(tau_grid) * x
    return GridFunction(ts, x, derivatives=dx, accumulation=tau_grid)
