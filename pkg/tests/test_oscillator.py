import math

import numpy as np
import pytest

from gronwall_lab.function_core import SplinePiece, continuity_audit, xi
from gronwall_lab.oscillator import (
    OscillatorConfig,
    build_oscillator,
    hermite_data,
    peak_value,
    solve_spline,
)
from gronwall_lab.verifier import residual_transformed


def test_hermite_data_n0():
    v_l, s_l, v_r, s_r = hermite_data(0)
    assert v_l == pytest.approx(1.2840254, abs=1e-7)
    assert s_l == pytest.approx(0.6420127, abs=1e-7)
    assert v_r == 0.5
    assert s_r == pytest.approx(0.8243606, abs=1e-7)


@pytest.mark.parametrize("n", range(0, 9))
def test_hermite_orderings(n):
    v_l, s_l, v_r, s_r = hermite_data(n)
    assert v_l > v_r
    assert s_r > s_l


def test_hermite_rejects_negative():
    with pytest.raises(ValueError):
        hermite_data(-1)


def test_solve_spline_reference_values():
    # oracle: 30-digit closed-form solve (18.0452041877672163, 18.7745958957919897)
    sp = solve_spline(0)
    assert sp.a == pytest.approx(18.045204187767216, rel=1e-13)
    assert sp.b == pytest.approx(18.774595895791990, rel=1e-13)
    assert sp.a == pytest.approx(18.044, rel=1e-3)
    assert sp.b == pytest.approx(18.773, rel=1e-3)


@pytest.mark.parametrize("n", range(0, 12))
def test_spline_meets_hermite_conditions(n):
    sp = solve_spline(n)
    v_l, s_l, v_r, s_r = hermite_data(n)
    h = 0.5 * xi(n)
    # evaluate both halves directly from the quadratic ansatz
    left = lambda d: v_l + s_l * d - 0.5 * sp.a * d * d
    right = lambda e: v_r - s_r * e + 0.5 * sp.b * e * e
    assert sp.value(sp.left) == pytest.approx(v_l, rel=1e-12)
    assert sp.slope(sp.left) == pytest.approx(s_l, rel=1e-12)
    assert sp.value(sp.right) == pytest.approx(1.0 / (n + 2), rel=1e-12)
    assert sp.slope(sp.right) == pytest.approx(s_r, rel=1e-12)
    # midpoint joins with equal value and slope
    scale = max(abs(v_l), abs(sp.a) * h * h)
    assert abs(left(h) - right(h)) <= 1e-12 * scale
    assert abs((s_l - sp.a * h) - (s_r - sp.b * h)) <= 1e-12 * abs(sp.a) * h
    assert sp.curvature(sp.mid - 1e-3 * h) == -sp.a < 0
    assert sp.curvature(sp.mid + 1e-3 * h) == sp.b > 0


@pytest.mark.parametrize("n", range(0, 9))
def test_spline_positive(n):
    sp = solve_spline(n)
    # the convex vertex sits within s_R / b of the right end, so sample densely there
    grid = np.concatenate([np.linspace(sp.left, sp.right, 2001),
                           sp.right - np.linspace(0.0, 4.0 * sp.s_right / sp.b, 2001)])
    sampled = min(sp.value(t) for t in grid)
    assert sampled > 0
    assert sp.min_value() <= sampled + 1e-15
    assert sp.min_value() == pytest.approx(sampled, rel=1e-9)


@pytest.mark.parametrize("M, N", [(1.0, 8), (3.0, 4), (0.5, 2)])
def test_build_structure(M, N):
    X = build_oscillator(OscillatorConfig(M, N))
    assert len(X.segments) == 2 * N + 1
    assert X.domain_end == N + 1
    assert X(0.0) == M
    kinds = [isinstance(s, SplinePiece) for s in X.segments]
    assert kinds == [i % 2 == 1 for i in range(2 * N + 1)]
    assert continuity_audit(X, 1e-10) == []


def test_build_values():
    X = build_oscillator(OscillatorConfig(1.0, 8))
    assert X(5.0) == pytest.approx(1 / 6, rel=1e-15)
    assert build_oscillator(OscillatorConfig(3.0, 4))(0.0) == 3.0


def test_scaling_is_pointwise():
    X1 = build_oscillator(OscillatorConfig(1.0, 6))
    X7 = build_oscillator(OscillatorConfig(7.25, 6))
    for tau in np.linspace(0, 7, 701):
        assert X7(tau) == pytest.approx(7.25 * X1(tau), rel=1e-14)


def test_peaks_grow_from_n1_and_exceed_thresholds():
    peaks = [peak_value(n) for n in range(20)]
    # peak_0 = e^(1/4) sits above peak_1; growth starts at n = 1
    assert peaks[0] > peaks[1]
    assert all(b > a for a, b in zip(peaks[1:], peaks[2:]))
    assert peaks[-1] > 1e3


@pytest.mark.parametrize("M", [0.5, 1.0, 10.0, 1e3])
def test_residual_certificate_for_many_amplitudes(M):
    X = build_oscillator(OscillatorConfig(M, 8))
    assert residual_transformed(X, density=512).passed


def test_config_validation():
    for bad in (dict(M=0.0), dict(M=-1.0), dict(M=math.inf), dict(N_max=0), dict(N_max=1.5)):
        with pytest.raises(ValueError):
            OscillatorConfig(**bad)
