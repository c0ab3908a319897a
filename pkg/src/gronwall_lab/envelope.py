"""Pointwise lower-bound envelopes near the blow-up time and their exponents.

All envelopes are evaluated in log space; the ``*_gap`` variants take
``T_star - t`` (or its log) directly, since gaps like ``e^-100`` cannot be
formed as a difference of two doubles near ``T_star``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize

from .function_core import DomainError

__all__ = [
    "ChainExponents",
    "EnvelopeParams",
    "ExponentParams",
    "RHO_DEFAULT",
    "chain_identity",
    "envelope_first",
    "envelope_higher",
    "exponents",
    "log_envelope_first_gap",
    "log_envelope_higher_gap",
    "numeric_argmax_p",
    "objective_F",
    "optimal_p",
    "raw_lower_bound",
    "raw_lower_bound_gap",
]

RHO_DEFAULT = Fraction(24, 5)
P_CLAMP_EPS = 1e-6


@dataclass(frozen=True)
class ExponentParams:
    p: float
    alpha: float
    gamma: float
    theta1: float
    theta2: float


def exponents(p):
    """Gagliardo-Nirenberg exponents for ``p > 4``.

    ``alpha = 5/(7 - 6/p)``, ``gamma = (7p-3)/(2p+3)``,
    ``theta1 = (6-3p)/(6-7p)``, ``theta2 = (6-5p)/(6-7p)``. Rational input
    (``int`` or ``Fraction``) gives exact ``Fraction`` fields.

    Raises:
        DomainError: ``p <= 4``.
    """
    if not p > 4:
        raise DomainError(f"exponents need p > 4, got {p}")
    if isinstance(p, (int, Fraction)):
        p = Fraction(p)
        one = Fraction(1)
    else:
        p = float(p)
        one = 1.0
    alpha = 5 * one / (7 - 6 * one / p)
    gamma = (7 * p - 3) / (2 * p + 3)
    theta1 = (6 - 3 * p) / (6 - 7 * p)
    theta2 = (6 - 5 * p) / (6 - 7 * p)
    return ExponentParams(p, alpha, gamma, theta1, theta2)


@dataclass(frozen=True)
class ChainExponents:
    """Integrability exponents ``p_j = 2(k+1)/(k-j)``; ``p_k`` is infinite."""

    k: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")

    @property
    def exponents(self) -> list:
        return [Fraction(2 * (self.k + 1), self.k - j) for j in range(self.k)] + [math.inf]


def chain_alpha(k: int) -> Fraction:
    """``alpha = 5/(2k+3 - 6/p)`` at ``p = 2(k+1)``."""
    p = Fraction(2 * (k + 1))
    return Fraction(5) / (2 * k + 3 - 6 / p)


def chain_identity(k: int) -> Fraction:
    """``((k+1)/k) / alpha_k``, checked against ``2k/5 + 1`` exactly."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    value = Fraction(k + 1, k) / chain_alpha(k)
    expected = Fraction(2 * k, 5) + 1
    if value != expected:
        raise ArithmeticError(f"chain identity fails at k={k}: {value} != {expected}")
    return value


def objective_F(p: float, L: float) -> float:
    """``log F(p) = -(24/5) log p - 6 L / (5 p)``."""
    if not p > 4:
        raise DomainError(f"p must exceed 4, got {p}")
    if not L > 0:
        raise DomainError(f"L must be positive, got {L}")
    return -4.8 * math.log(p) - 1.2 * L / p


def optimal_p(L: float) -> float:
    """Maximiser of ``F(., L)`` over ``p > 4``: ``max(L/4, 4 + 1e-6)``."""
    if not L > 0:
        raise DomainError(f"L must be positive, got {L}")
    return max(L / 4.0, 4.0 + P_CLAMP_EPS)


def numeric_argmax_p(L: float, p_max: float = 1e8, xtol: float = 1e-10) -> float:
    """Golden-section maximiser of ``objective_F(., L)``, independent of the closed form.

    A log-spaced scan picks a bracket, then golden section refines it.
    """
    lo = 4.0 + P_CLAMP_EPS
    grid = np.geomspace(lo, p_max, 400)
    vals = np.array([objective_F(p, L) for p in grid])
    i = int(np.argmax(vals))
    if i == 0:
        return float(grid[0])
    if i == len(grid) - 1:
        raise ArithmeticError("maximiser beyond p_max")
    res = optimize.minimize_scalar(
        lambda p: -objective_F(p, L),
        bracket=(grid[i - 1], grid[i], grid[i + 1]),
        method="golden",
        tol=xtol,
    )
    return float(res.x)


@dataclass(frozen=True)
class EnvelopeParams:
    T_star: float
    C: float = 1.0
    rho: float = float(RHO_DEFAULT)
    k: int = 1

    def __post_init__(self):
        if not self.T_star > 0:
            raise ValueError(f"T_star must be positive, got {self.T_star}")
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


def _check_window(gap: float, C: float) -> None:
    if not (0.0 < gap < 1.0 / C):
        raise DomainError(f"T_star - t = {gap!r} outside the validity window (0, 1/C) = (0, {1.0 / C!r})")


def _check_log_window(log_gap: float, C: float) -> None:
    if not (math.isfinite(log_gap) and log_gap < -math.log(C)):
        raise DomainError(
            f"log(T_star - t) = {log_gap!r} outside the validity window T_star - t < 1/C = {1.0 / C!r}"
        )


def log_envelope_first_gap(log_gap: float, C: float = 1.0, rho: float = float(RHO_DEFAULT)) -> float:
    """``log`` of ``1 / (C gap^(7/5) log^rho(1/gap))`` given ``log(gap)``."""
    _check_log_window(log_gap, C)
    L = -log_gap
    if rho != 0 and not L > 0:
        raise DomainError(f"log(1/(T_star - t)) = {L} must be positive when rho != 0")
    log_corr = rho * math.log(L) if rho != 0 else 0.0
    return -math.log(C) + 1.4 * L - log_corr


def log_envelope_higher_gap(log_gap: float, k: int, C: float = 1.0) -> float:
    """``log`` of ``1 / (C gap^(2k/5 + 1))`` given ``log(gap)``."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    _check_log_window(log_gap, C)
    return -math.log(C) - (0.4 * k + 1.0) * log_gap


def envelope_first(t: float, ep: EnvelopeParams) -> float:
    """First-derivative envelope ``1/(C (T*-t)^(7/5) log^rho(1/(T*-t)))``.

    Raises:
        DomainError: ``T_star - t`` outside ``(0, 1/C)``.
    """
    gap = ep.T_star - t
    _check_window(gap, ep.C)
    return math.exp(log_envelope_first_gap(math.log(gap), ep.C, ep.rho))


def envelope_higher(t: float, ep: EnvelopeParams) -> float:
    """Envelope ``1/(C (T*-t)^(2k/5+1))`` for derivative order ``ep.k >= 2``."""
    gap = ep.T_star - t
    _check_window(gap, ep.C)
    return math.exp(log_envelope_higher_gap(math.log(gap), ep.k, ep.C))


def raw_lower_bound(t: float, p: float, T_star: float, C: float) -> float:
    """Bound before optimising in ``p``.

    ``(1 / (C p^(2(1+alpha)) (T*-t)))^(1/alpha) - p^(2(gamma-1))``; the first
    term is formed in log space.
    """
    gap = T_star - t
    if not gap > 0:
        raise DomainError(f"need t < T_star, got T_star - t = {gap}")
    return raw_lower_bound_gap(math.log(gap), p, C)


def raw_lower_bound_gap(log_gap: float, p: float, C: float = 1.0) -> float:
    ex = exponents(float(p))
    log_first = (-math.log(C) - 2.0 * (1.0 + ex.alpha) * math.log(p) - log_gap) / ex.alpha
    if log_first > 709.0:
        # first term outside double range; the bound is effectively unbounded
        return math.inf
    return math.exp(log_first) - p ** (2.0 * (ex.gamma - 1.0))
