import math

import numpy as np
import pytest

from gronwall_lab.function_core import GridFunction, segment_aligned_grid
from gronwall_lab.oscillator import OscillatorConfig, build_oscillator
from gronwall_lab.reparam import blowup_time, pushforward_from_tau
from gronwall_lab.verifier import (
    oscillation_certificate,
    residual_original,
    residual_transformed,
    with_bump,
)


@pytest.fixture(scope="module")
def certificate(Y, reparam_Y):
    return oscillation_certificate(Y, reparam_Y, 1.0, 8)


def test_constant_residual():
    taus = np.linspace(0.0, 2.0, 101)
    g = GridFunction(taus, np.full_like(taus, 3.0), derivatives=np.zeros_like(taus))
    rep = residual_transformed(g)
    assert rep.passed
    assert rep.residuals == pytest.approx(-1.0 - 3.0 * np.exp(taus))
    assert rep.max_residual == pytest.approx(-4.0)
    assert rep.argmax == 0.0


@pytest.mark.parametrize("M", [0.5, 1.0, 10.0])
def test_oscillator_passes_with_zero_slack(M):
    X = build_oscillator(OscillatorConfig(M=M, N_max=8))
    rep = residual_transformed(X, density=512, slack=0.0)
    assert rep.passed and rep.max_residual <= 0.0
    assert rep.grid[0] == 0.0 and rep.grid[-1] == pytest.approx(9.0)


def test_grid_stability(Y):
    r512 = residual_transformed(Y, density=512).max_residual
    r1024 = residual_transformed(Y, density=1024).max_residual
    assert abs(r1024 - r512) < 0.1 * abs(r512)


def test_pushforward_passes_original_form(Y):
    pushed = pushforward_from_tau(Y, segment_aligned_grid(Y, 256))
    rep = residual_original(pushed, slack=1e-6)
    assert rep.passed


def test_sign_consistency_between_forms(Y):
    taus = segment_aligned_grid(Y, 128)
    trans = residual_transformed(Y, tau_grid=taus)
    orig = residual_original(pushforward_from_tau(Y, taus))
    # chain rule: original residual = X * transformed residual
    assert orig.residuals == pytest.approx(Y.values(taus) * trans.residuals, rel=1e-9, abs=1e-9)
    assert np.all(np.sign(orig.residuals) == np.sign(trans.residuals))


def test_missing_channels_raise():
    g = GridFunction(np.linspace(0, 1, 5), np.ones(5))
    with pytest.raises(ValueError):
        residual_original(g)
    with pytest.raises(ValueError):
        residual_transformed(g)
    with pytest.raises(ValueError):
        residual_transformed(g, slack=-1.0)


def test_defect_is_flagged_at_bump(Y):
    taus = segment_aligned_grid(Y, 512)
    g = GridFunction(taus, Y.values(taus), derivatives=Y.derivatives(taus))
    rep = residual_transformed(with_bump(g, center=0.3, amplitude=1.0, width=0.01))
    assert not rep.passed
    assert abs(rep.argmax - 0.3) < 0.02


def test_certificate_passes(certificate):
    assert certificate.passed
    assert [c.name for c in certificate.checks] == ["i", "ii", "iii", "iv"]


def test_certificate_values(certificate):
    iv = certificate["iv"]
    assert iv.detail["x_n"][3] == pytest.approx(0.25, abs=1e-10)
    assert certificate["i"].detail["x0"] == 1.0
    assert iv.detail["max_rel_error"] <= 1e-10


def test_certificate_liminf_window(certificate):
    iv = certificate["iv"].detail
    assert iv["liminf_window_min"] == pytest.approx(iv["liminf_target"], rel=1e-6)


def test_certificate_peaks(certificate):
    peaks = certificate["iii"].detail["peaks"]
    assert peaks[0] == pytest.approx(math.exp(0.25))
    assert peaks[0] > peaks[1]  # growth only starts at n = 1
    assert all(b > a for a, b in zip(peaks[1:], peaks[2:]))


def test_certificate_deterministic(Y, reparam_Y, certificate):
    again = oscillation_certificate(Y, reparam_Y, 1.0, 8)
    assert again.to_dict() == certificate.to_dict()


def test_certificate_rejects_bad_N(Y, reparam_Y):
    with pytest.raises(ValueError):
        oscillation_certificate(Y, reparam_Y, 1.0, 9)


def test_certificate_scales_with_M():
    X = build_oscillator(OscillatorConfig(M=10.0, N_max=6))
    cert = oscillation_certificate(X, blowup_time(X), 10.0, 6)
    assert cert.passed
    assert cert["iv"].detail["x_n"][4] == pytest.approx(2.0, rel=1e-10)
