"""Equality case ``dX/dtau = 1 + X e^tau`` of the transformed inequality.

With the integrating factor ``exp(-e^tau)``::

    X(tau) = e^(e^tau) * (M / e + int_0^tau exp(-e^s) ds)

so ``log X = e^tau + log K(tau)``. X leaves double range near tau = 6.5;
everything here stays in log space.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .function_core import GridFunction
from .quadrature import adaptive_simpson

__all__ = [
    "LogTrajectory",
    "blowup_ratio",
    "closed_form_gridfunction",
    "closed_form_logX",
    "integrate_transformed",
    "log_time_to_blowup",
    "scaled_exp1",
]

# exp(-e^s) < 1e-170 past s = 6
_INNER_CUTOFF = 6.0


def _inner_integrand(s: float) -> float:
    return math.exp(-math.exp(s))


@functools.lru_cache(maxsize=None)
def inner_integral_limit() -> float:
    """``int_0^inf exp(-e^s) ds`` (= E1(1) ~ 0.21938), to 1e-12."""
    value, _ = adaptive_simpson(_inner_integrand, 0.0, _INNER_CUTOFF, tol=1e-14)
    return value


def inner_integral(tau: float) -> float:
    """``int_0^tau exp(-e^s) ds``."""
    if tau >= _INNER_CUTOFF:
        return inner_integral_limit()
    value, _ = adaptive_simpson(_inner_integrand, 0.0, tau, tol=1e-14)
    return value


def _log_K(M: float, tau: float) -> float:
    return math.log(M / math.e + inner_integral(tau))


def closed_form_logX(M: float, tau: float) -> float:
    """``log X(tau)`` for the equality solution with ``X(0) = M``."""
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    return math.exp(tau) + _log_K(M, tau)


@dataclass(frozen=True)
class LogTrajectory:
    taus: np.ndarray
    logX: np.ndarray
    provenance: str  # "closed_form" or "integrated"

    def as_grid(self) -> GridFunction:
        return GridFunction(self.taus, self.logX, log_scale=True)


def _rhs(tau: float, y: float) -> float:
    # d(log X)/dtau = 1/X + e^tau
    return math.exp(-y) + math.exp(tau)


def integrate_transformed(M: float, tau_max: float, steps: int) -> LogTrajectory:
    """Classical RK4 for ``d(log X)/dtau = e^(-log X) + e^tau`` on ``[0, tau_max]``.

    Raises:
        ValueError: invalid arguments.
        ArithmeticError: the step size underflows.
    """
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    if not 0 < tau_max <= 15:
        raise ValueError(f"tau_max must lie in (0, 15], got {tau_max}")
    if steps < 100:
        raise ValueError(f"steps must be >= 100, got {steps}")
    h = tau_max / steps
    if h <= 0 or h < 1e-14 * tau_max:
        raise ArithmeticError(f"step size {h} underflows")
    taus = np.empty(steps + 1)
    ys = np.empty(steps + 1)
    tau, y = 0.0, math.log(M)
    taus[0], ys[0] = tau, y
    for i in range(1, steps + 1):
        k1 = _rhs(tau, y)
        k2 = _rhs(tau + 0.5 * h, y + 0.5 * h * k1)
        k3 = _rhs(tau + 0.5 * h, y + 0.5 * h * k2)
        k4 = _rhs(tau + h, y + h * k3)
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        tau = i * h
        taus[i], ys[i] = tau, y
    return LogTrajectory(taus, ys, "integrated")


def closed_form_trajectory(M: float, taus) -> LogTrajectory:
    taus = np.asarray(taus, dtype=float)
    return LogTrajectory(taus, np.array([closed_form_logX(M, float(t)) for t in taus]), "closed_form")


def closed_form_gridfunction(M: float, taus) -> GridFunction:
    """Equality solution in linear scale with its analytic derivative.

    ``X' = e^tau e^(e^tau) K(tau) + e^(e^tau) K'(tau)`` with ``K' = exp(-e^tau)``.
    Only usable while X fits in a double (tau below about 6.5).
    """
    taus = np.asarray(taus, dtype=float)
    x = np.empty_like(taus)
    dx = np.empty_like(taus)
    for i, tau in enumerate(taus):
        et = math.exp(tau)
        K = M / math.e + inner_integral(tau)
        x[i] = math.exp(et) * K
        dx[i] = et * x[i] + math.exp(et) * math.exp(-et)
    return GridFunction(taus, x, derivatives=dx)


def scaled_exp1(z: float) -> float:
    """``e^z E1(z)`` for ``z > 0`` without overflow.

    For ``z >= 1000`` the asymptotic series ``sum_{k<4} (-1)^k k! / z^(k+1)`` is
    used; the alternating remainder is below ``24/z^5`` (relative ``< 3e-11``).
    Smaller ``z`` use ``int_0^inf e^(-s)/(z+s) ds`` by quadrature.
    """
    if not z > 0:
        raise ValueError("z must be positive")
    if z >= 1000.0:
        iz = 1.0 / z
        return iz * (1.0 - iz * (1.0 - iz * (2.0 - 6.0 * iz)))
    # e^-s below 1e-17 past s = 40
    value, _ = adaptive_simpson(lambda s: math.exp(-s) / (z + s), 0.0, 40.0, tol=1e-15 / (1.0 + z))
    return value


def log_time_to_blowup(M: float, tau: float) -> float:
    """``log(T_star - t(tau))`` along the equality solution.

    ``T_star - t(tau) = int_tau^inf e^(-e^s) / K(s) ds`` with
    ``K(s) = K_inf - E1(e^s)``. For ``e^tau >= 1000`` the factor K differs
    from ``K_inf`` by less than ``e^-1000`` past tau, so it is frozen and the
    integral is ``E1(e^tau) / K_inf`` after ``u = e^s``. Below that the
    integral is taken directly, scaled by ``e^(e^tau)``.
    """
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    z = math.exp(tau)
    K_inf = M / math.e + inner_integral_limit()
    if z >= 1000.0:
        return -z + math.log(scaled_exp1(z)) - math.log(K_inf)

    def scaled(v: float) -> float:
        w = z * math.exp(v)
        return math.exp(z - w) / (K_inf - float(special.exp1(w)))

    # integrand below e^-40 once z (e^v - 1) > 40
    v_max = math.log1p(40.0 / z)
    value, _ = adaptive_simpson(scaled, 0.0, v_max, tol=1e-15)
    return -z + math.log(value)


def blowup_ratio(M: float, tau: float) -> float:
    """``(T_star - t) log(1/(T_star - t)) x(t)`` at ``t = t(tau)``.

    Tends to 1 as ``tau`` grows; small ``tau`` gives the honest non-asymptotic
    value (or a non-positive log factor when ``T_star - t >= 1``).
    """
    log_gap = log_time_to_blowup(M, tau)
    logx = closed_form_logX(M, tau)
    # gap * log(1/gap) * x = exp(log_gap + logx) * (-log_gap)
    return math.exp(log_gap + logx) * (-log_gap)
