"""
Nonlinear (sigmoid) energy-harvesting model and received-power evaluators.

The RF-to-DC curve is the logistic model with the offset chosen so that the
harvester outputs nothing at zero input and saturates at ``Ms``::

    f(P) = Ms / (X * (1 + exp(-a (P - b)))) - Y
    X = exp(ab) / (1 + exp(ab)),  Y = Ms / exp(ab)

Internally the algebraically equivalent form
``Ms * (1 - exp(-aP)) / (1 + exp(-a (P - b)))`` is used, which makes
``f(0) == 0`` hold exactly in floating point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigurationError, DomainError, ShapeError

if TYPE_CHECKING:
    from .beamformers import BeamformingSolution
    from .system_model import ChannelSet


@dataclass(frozen=True)
class EHParams:
    """Sigmoid harvester constants.

    Parameters
    ----------
    a : float
        Circuit steepness (1/W).
    b : float
        Turn-on level (W).
    Ms : float
        Saturation output (W).
    p0 : float
        Additive Taylor constant. Carried for reporting only; it never
        changes an optimizer's argmax.
    """

    a: float = 150.0
    b: float = 0.024
    Ms: float = 0.024
    p0: float = 0.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.Ms > 0):
            raise ConfigurationError(
                f"EH parameters must be positive, got a={self.a}, b={self.b}, Ms={self.Ms}")

    @property
    def X(self) -> float:
        e = np.exp(self.a * self.b)
        return float(e / (1.0 + e))

    @property
    def Y(self) -> float:
        return float(self.Ms / np.exp(self.a * self.b))


class WaveformKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    DETERMINISTIC_SINUSOID = "dsw"


def eh_transfer(P, params: EHParams):
    """Harvested DC power for input RF power ``P`` (scalar or array, watts)."""
    P_arr = np.asarray(P, dtype=float)
    if np.any(P_arr < 0) or np.any(np.isnan(P_arr)):
        raise DomainError("input RF power must be nonnegative")
    a, b = params.a, params.b
    with np.errstate(over="ignore"):
        out = params.Ms * (-np.expm1(-a * P_arr)) / (1.0 + np.exp(-a * (P_arr - b)))
    if np.ndim(P) == 0:
        return float(out)
    return out


def rf_dc_efficiency(P, params: EHParams):
    """Conversion efficiency f(P)/P for P > 0."""
    P_arr = np.asarray(P, dtype=float)
    if np.any(P_arr <= 0):
        raise DomainError("efficiency is defined for strictly positive input power")
    out = np.asarray(eh_transfer(P_arr, params)) / P_arr
    if np.ndim(P) == 0:
        return float(out)
    return out


def small_signal_efficiency(params: EHParams) -> float:
    """Limit of the efficiency as P -> 0+, i.e. f'(0)."""
    e = np.exp(params.a * params.b)
    return float(params.Ms * params.a * e / (params.X * (1.0 + e) ** 2))


@dataclass
class SymbolDraw:
    """Per-symbol transmit samples, shape ``(n, K_I)`` and ``(n, n_EB)``."""

    s_I: np.ndarray
    s_E: np.ndarray

    @property
    def n(self) -> int:
        return self.s_I.shape[0]


def draw_symbols(n_ib: int, n_eb: int, wf: WaveformKind, n: int,
                 rng: np.random.Generator) -> SymbolDraw:
    """Draw ``n`` symbol vectors.

    Information symbols are always unit-variance CSCG. Energy symbols are
    CSCG for the Gaussian waveform and unit-modulus for the sinusoid.
    """
    def cscg(shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    s_I = cscg((n, n_ib))
    if WaveformKind(wf) is WaveformKind.GAUSSIAN:
        s_E = cscg((n, n_eb))
    else:
        s_E = np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=(n, n_eb)))
    return SymbolDraw(s_I, s_E)


def _beam_gains(ch: "ChannelSet", sol: "BeamformingSolution", l: int):
    M = ch.H_E.shape[1]
    if not 0 <= l < ch.H_E.shape[0]:
        raise ShapeError(f"EU index {l} out of range")
    W = sol.W
    V = sol.V
    if W.shape[0] != M or V.shape[0] != M:
        raise ShapeError("beam length does not match antenna count")
    hH = ch.H_E[l].conj()
    g_I = np.abs(hH @ W) ** 2
    g_E = np.abs(hH @ V) ** 2
    return g_I, g_E


def received_rf_power(ch: "ChannelSet", sol: "BeamformingSolution", l: int,
                      wf: WaveformKind = WaveformKind.GAUSSIAN,
                      symbols: SymbolDraw | None = None):
    """Received RF power at EU ``l``.

    Without ``symbols`` the symbol-averaged value is returned, which is the
    same for both waveforms. With a draw, an array of per-symbol powers is
    returned.
    """
    g_I, g_E = _beam_gains(ch, sol, l)
    rho = ch.rho_H2E[l]
    if symbols is None:
        return float(rho * (g_I.sum() + g_E.sum()))
    if symbols.s_I.shape[1] != g_I.size or symbols.s_E.shape[1] != g_E.size:
        raise ShapeError("symbol draw does not match beam counts")
    return rho * (np.abs(symbols.s_I) ** 2 @ g_I + np.abs(symbols.s_E) ** 2 @ g_E)


def harvested_dc_power(ch: "ChannelSet", sol: "BeamformingSolution", l: int,
                       wf: WaveformKind, params: EHParams, n_symbols: int = 10_000,
                       seed: int | np.random.SeedSequence = 0, *,
                       return_stderr: bool = False):
    """Monte Carlo DC output at EU ``l`` through the nonlinear harvester.

    For the sinusoid the energy-beam power is constant per symbol, so only
    the information-beam contribution fluctuates.
    """
    if n_symbols < 1:
        raise ConfigurationError("n_symbols must be >= 1")
    wf = WaveformKind(wf)
    g_I, g_E = _beam_gains(ch, sol, l)
    rho = ch.rho_H2E[l]
    rng = np.random.default_rng(seed)
    sym = draw_symbols(g_I.size, g_E.size, wf, n_symbols, rng)
    if wf is WaveformKind.DETERMINISTIC_SINUSOID:
        p = rho * (np.abs(sym.s_I) ** 2 @ g_I + g_E.sum())
    else:
        p = rho * (np.abs(sym.s_I) ** 2 @ g_I + np.abs(sym.s_E) ** 2 @ g_E)
    dc = np.asarray(eh_transfer(p, params))
    mean = float(dc.mean())
    if return_stderr:
        se = float(dc.std(ddof=1) / np.sqrt(n_symbols)) if n_symbols > 1 else float("nan")
        return mean, se
    return mean
