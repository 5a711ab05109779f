import math

import numpy as np
import scipy.integrate
import pytest
from hypothesis import given, settings, strategies as st

from nsswipt.beamformers import BeamformingSolution
from nsswipt.energy_harvest import (EHParams, WaveformKind, draw_symbols, eh_transfer,
                                    harvested_dc_power, received_rf_power, rf_dc_efficiency,
                                    small_signal_efficiency)
from nsswipt.errors import ConfigurationError, DomainError
from nsswipt.system_model import ChannelSet

P = EHParams()


def logistic_reference(p, prm=P):
    # textbook form: Ms / (X (1 + exp(-a(p-b)))) - Y
    return prm.Ms / (prm.X * (1 + math.exp(-prm.a * (p - prm.b)))) - prm.Y


def test_zero_and_saturation():
    assert eh_transfer(0.0, P) == 0.0
    assert abs(eh_transfer(1.0, P) - 0.024) <= 1e-6 * 0.024


@pytest.mark.parametrize("p", [1e-4, 0.005, 0.024, 0.05, 0.2])
def test_matches_textbook_form(p):
    assert eh_transfer(p, P) == pytest.approx(logistic_reference(p), rel=1e-9, abs=1e-15)


def test_value_at_turn_on():
    # published constants: f(b) = Ms (1 - e^{-ab}) / 2
    assert eh_transfer(0.024, P) == pytest.approx(0.024 * (1 - math.exp(-3.6)) / 2, rel=1e-12)


def test_array_input_and_negative_rejected():
    out = eh_transfer(np.array([0.0, 0.01, 0.1]), P)
    assert out.shape == (3,)
    with pytest.raises(DomainError):
        eh_transfer(-1e-3, P)
    with pytest.raises(DomainError):
        rf_dc_efficiency(0.0, P)
    with pytest.raises(ConfigurationError):
        EHParams(a=-1)


def test_small_signal_efficiency_finite_difference():
    h = 1e-8
    fd = eh_transfer(h, P) / h
    assert small_signal_efficiency(P) == pytest.approx(fd, rel=1e-5)


def test_efficiency_unimodal_on_grid():
    grid = np.linspace(1e-4, 1.0, 4000)
    eff = rf_dc_efficiency(grid, P)
    k = int(np.argmax(eff))
    assert 0 < k < grid.size - 1
    assert np.all(np.diff(eff[: k + 1]) >= -1e-15)
    assert np.all(np.diff(eff[k:]) <= 1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 10), st.floats(0, 10))
def test_monotone_and_bounded(p1, p2):
    lo, hi = sorted((p1, p2))
    f_lo, f_hi = eh_transfer(lo, P), eh_transfer(hi, P)
    assert 0.0 <= f_lo <= f_hi + 1e-18
    assert f_hi <= P.Ms


def _single_user(g_I, g_E, rho=1.0):
    # one EU whose channel is e_1, beams chosen so |h^H w|^2 = g
    M = 2
    ch = ChannelSet(np.zeros((1, M), complex), np.array([[1.0, 0.0]], complex),
                    np.array([1.0]), np.array([rho]), np.zeros(1), np.zeros(1))
    W = np.array([[math.sqrt(g_I)], [0.0]], complex)
    V = np.array([[math.sqrt(g_E)], [0.0]], complex)
    return ch, BeamformingSolution(W, V, "test", "OPTIMAL", {})


def test_received_power_average_and_samples():
    ch, sol = _single_user(0.002, 0.003, rho=0.5)
    assert received_rf_power(ch, sol, 0) == pytest.approx(0.5 * 0.005)
    sym = draw_symbols(1, 1, WaveformKind.GAUSSIAN, 50_000, np.random.default_rng(1))
    samples = received_rf_power(ch, sol, 0, symbols=sym)
    assert samples.mean() == pytest.approx(0.0025, rel=0.02)


def test_dsw_symbols_unit_modulus():
    sym = draw_symbols(2, 3, "dsw", 100, np.random.default_rng(0))
    assert np.allclose(np.abs(sym.s_E), 1.0)


def test_dsw_energy_only_is_deterministic():
    # no information beam: every DSW symbol gives the same input power
    ch, sol = _single_user(0.0, 0.02)
    dc = harvested_dc_power(ch, sol, 0, "dsw", P, n_symbols=100)
    assert dc == pytest.approx(eh_transfer(0.02, P), rel=1e-12)


def test_gaussian_exponential_oracle():
    # Gaussian energy-only input is exponential with mean p; E f = integral f(x) e^{-x/p}/p dx
    p = 0.02
    ch, sol = _single_user(0.0, p)
    mc, se = harvested_dc_power(ch, sol, 0, "gaussian", P, n_symbols=200_000, seed=3,
                                return_stderr=True)
    x = np.linspace(0, 40 * p, 400_001)
    ref = scipy.integrate.trapezoid(eh_transfer(x, P) * np.exp(-x / p) / p, x)
    assert abs(mc - ref) < 4 * se


def test_gaussian_beats_dsw_in_convex_region():
    # Jensen: f convex well below b, so spreading the input helps
    ch, sol = _single_user(0.0, P.b / 4)
    g = harvested_dc_power(ch, sol, 0, "gaussian", P, n_symbols=100_000, seed=0)
    d = harvested_dc_power(ch, sol, 0, "dsw", P, n_symbols=100_000, seed=0)
    assert g > d


def test_dc_reproducible_by_seed():
    ch, sol = _single_user(0.01, 0.01)
    a = harvested_dc_power(ch, sol, 0, "gaussian", P, n_symbols=1000, seed=5)
    b = harvested_dc_power(ch, sol, 0, "gaussian", P, n_symbols=1000, seed=5)
    assert a == b
