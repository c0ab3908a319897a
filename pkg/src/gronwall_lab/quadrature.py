"""Adaptive Simpson quadrature with Richardson correction.

Used for the time map t(tau) = int dtau / X and for the inner integral of the
extremal closed form. Integrands here are smooth on each call's interval (the
callers split at knots), so plain Simpson with local error control converges
quickly.
"""

from __future__ import annotations

import math
from collections.abc import Callable


_EPS = 2.220446049250313e-16


class QuadratureError(ArithmeticError):
    """Raised when the adaptive rule cannot meet its tolerance."""

    def __init__(self, message: str, a: float, b: float, estimate: float, error: float):
        super().__init__(message)
        self.a = a
        self.b = b
        self.estimate = estimate
        self.error = error

    def diagnostics(self) -> dict:
        return {"a": self.a, "b": self.b, "estimate": self.estimate, "error": self.error}


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    max_depth: int = 48,
    min_depth: int = 3,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Panels are refined until ``|S2 - S1| / 15`` falls under the panel's share of
    the tolerance; the accepted value carries the Richardson term. The first
    ``min_depth`` levels are always split so a lucky coarse estimate cannot
    terminate early.

    Args:
        f: Integrand, evaluated at scalar points.
        a: Lower limit.
        b: Upper limit.
        tol: Absolute error target for the whole interval.
        max_depth: Bisection depth after which a panel counts as failed.
        min_depth: Depth before which no panel is accepted.

    Returns:
        ``(value, error_estimate)``.

    Raises:
        QuadratureError: a panel hit ``max_depth`` without converging, or the
            integrand produced a non-finite value.
    """
    if a == b:
        return 0.0, 0.0
    if b < a:
        value, err = adaptive_simpson(f, b, a, tol, max_depth, min_depth)
        return -value, err

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    err_total = 0.0
    failed = False
    # Explicit stack, left-first so the summation order is fixed.
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = f(lm)
        frm = f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s
        if not math.isfinite(delta):
            raise QuadratureError("non-finite integrand value", a, b, total, math.inf)
        # rounding floor: refinement cannot beat a few ulps of the panel value
        floor = 64.0 * _EPS * (abs(left) + abs(right))
        if depth >= min_depth and abs(delta) <= max(15.0 * eps, floor):
            total += left + right + delta / 15.0
            err_total += abs(delta) / 15.0
            continue
        if depth >= max_depth:
            failed = True
            total += left + right + delta / 15.0
            err_total += abs(delta) / 15.0
            continue
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))

    if failed and err_total > tol:
        raise QuadratureError(
            f"adaptive Simpson did not converge on [{a}, {b}] (error {err_total:.3e} > {tol:.3e})",
            a, b, total, err_total,
        )
    return total, err_total
