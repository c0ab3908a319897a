import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gronwall_lab.envelope import (
    ChainExponents,
    EnvelopeParams,
    chain_alpha,
    chain_identity,
    envelope_first,
    envelope_higher,
    exponents,
    log_envelope_first_gap,
    log_envelope_higher_gap,
    numeric_argmax_p,
    objective_F,
    optimal_p,
    raw_lower_bound,
    raw_lower_bound_gap,
)
from gronwall_lab.function_core import DomainError


def test_exponents_exact():
    e = exponents(6)
    assert e.alpha == Fraction(5, 6)
    assert exponents(12).gamma == 3
    assert isinstance(exponents(Fraction(9, 2)).theta1, Fraction)


def test_exponent_limits():
    e = exponents(1e4)
    assert abs(e.alpha - 5 / 7) < 1e-3
    assert abs(e.gamma - 3.5) < 1e-3
    assert abs(e.theta1 - 3 / 7) < 1e-3
    assert abs(e.theta2 - 5 / 7) < 1e-3


def test_gamma_limit_rate():
    # 2(gamma - 1) - 5 = -27/(2p + 3) exactly, so 1e-3 needs p above 13498
    for p in (10**4, 10**5):
        assert 2 * (exponents(p).gamma - 1) - 5 == Fraction(-27, 2 * p + 3)
    assert abs(2 * (exponents(1e5).gamma - 1) - 5) < 1e-3


@pytest.mark.parametrize("p", [4, 3.5, 0, -1])
def test_exponents_need_p_above_4(p):
    with pytest.raises(DomainError):
        exponents(p)


@pytest.mark.parametrize("k", range(2, 51))
def test_chain_identity(k):
    assert chain_identity(k) == Fraction(2 * k, 5) + 1


def test_chain_identity_examples():
    assert chain_identity(2) == Fraction(9, 5)
    assert chain_identity(5) == 3
    assert chain_identity(10) == 5
    with pytest.raises(ValueError):
        chain_identity(1)


def test_chain_exponents():
    ex = ChainExponents(3).exponents
    assert ex[:3] == [Fraction(8, 3), 4, 8]
    assert math.isinf(ex[-1])
    assert chain_alpha(3) == Fraction(5) / (9 - Fraction(6, 8))
    with pytest.raises(ValueError):
        ChainExponents(1)


@pytest.mark.parametrize("L", [20.0, 100.0, 1000.0, 10000.0])
def test_golden_section_agrees_with_closed_form(L):
    assert numeric_argmax_p(L) == pytest.approx(optimal_p(L), rel=1e-6)


def test_objective_stationary_at_L_over_4():
    L, p, h = 100.0, 25.0, 1e-4
    d = (objective_F(p + h, L) - objective_F(p - h, L)) / (2 * h)
    assert abs(d) < 1e-7
    assert objective_F(p, L) > objective_F(20.0, L)
    assert objective_F(p, L) > objective_F(30.0, L)


def test_optimal_p_clamp():
    assert optimal_p(1000.0) == 250.0
    assert optimal_p(8.0) == pytest.approx(4.0 + 1e-6)
    with pytest.raises(DomainError):
        optimal_p(0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=17.0, max_value=1e5))
def test_optimal_p_beats_dense_grid(L):
    best = objective_F(optimal_p(L), L)
    grid = np.geomspace(4.0 + 1e-6, 4 * L, 200)
    assert all(best >= objective_F(float(p), L) - 1e-12 for p in grid)


def test_envelope_first_value():
    # gap e^-10, C = 1: e^14 / 10^4.8
    log_env = log_envelope_first_gap(-10.0)
    assert log_env == pytest.approx(14.0 - 4.8 * math.log(10.0), abs=1e-12)
    ep = EnvelopeParams(T_star=1.0)
    assert envelope_first(1.0 - math.exp(-10.0), ep) == pytest.approx(math.exp(14.0) * 10 ** -4.8, rel=1e-9)


def test_envelope_first_without_log_is_power_law():
    ep = EnvelopeParams(T_star=2.0, rho=0.0)
    for gap in (0.5, 1e-3):
        assert envelope_first(2.0 - gap, ep) == pytest.approx(gap ** -1.4, rel=1e-9)


@pytest.mark.parametrize("gap", [0.0, -0.1, 1.0, 2.0])
def test_envelope_window(gap):
    ep = EnvelopeParams(T_star=3.0)
    with pytest.raises(DomainError):
        envelope_first(3.0 - gap, ep)


def test_envelope_window_scales_with_C():
    with pytest.raises(DomainError):
        log_envelope_first_gap(math.log(0.6), C=2.0)
    assert math.isfinite(log_envelope_first_gap(math.log(0.4), C=2.0))


def test_envelope_first_increases_toward_T_star():
    ep = EnvelopeParams(T_star=1.0)
    # increasing once log(1/gap) > rho / 1.4, i.e. gap below about 0.032
    ts = 1.0 - np.geomspace(0.03, 1e-12, 40)
    vals = [envelope_first(float(t), ep) for t in ts]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_envelope_higher():
    ep = EnvelopeParams(T_star=1.0, k=5)
    assert envelope_higher(1.0 - 0.01, ep) == pytest.approx(0.01 ** -3.0, rel=1e-9)
    logs = [log_envelope_higher_gap(-20.0, k) for k in range(2, 10)]
    assert all(b > a for a, b in zip(logs, logs[1:]))
    with pytest.raises(ValueError):
        log_envelope_higher_gap(-1.0, 1)


def test_envelope_params_validation():
    with pytest.raises(ValueError):
        EnvelopeParams(T_star=0.0)
    with pytest.raises(ValueError):
        EnvelopeParams(T_star=1.0, C=0.0)


def test_raw_bound_interior_maximum_near_L_over_4():
    L = 100.0
    ps = np.linspace(4.5, 200.0, 4000)
    vals = np.array([raw_lower_bound_gap(-L, float(p)) for p in ps])
    p_best = ps[int(np.argmax(vals))]
    # the subtracted p^(2(gamma-1)) term shifts the maximiser a little below L/4
    assert abs(p_best - optimal_p(L)) / optimal_p(L) < 0.1
    assert raw_lower_bound_gap(-L, 1e8) < 0


def test_raw_bound_smoke():
    v = raw_lower_bound(1.0 - 1 / math.e, 8.0, 1.0, 1.0)
    assert math.isfinite(v)
    assert v == pytest.approx(raw_lower_bound_gap(-1.0, 8.0), rel=1e-12)
    with pytest.raises(DomainError):
        raw_lower_bound(1.0, 8.0, 1.0, 1.0)
