"""
Scenario configuration, Rician ULA channel generation and the imperfect-CSI
corruption model.

Channel rows hold the channel vectors ``h`` themselves (not ``h^H``); the
received amplitude of a beam ``w`` at a user is ``h.conj() @ w``. Path-loss
gains are kept apart from the normalized channel matrices and applied only
where received power or noise is computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .energy_harvest import EHParams
from .errors import ConfigurationError

INF = math.inf


def noise_power_from_dBm(x_dBm: float) -> float:
    """Convert dBm to watts."""
    return 10.0 ** ((x_dBm - 30.0) / 10.0)


def path_loss_gain(d: float, alpha: float, L_ref_dB: float) -> float:
    """Linear large-scale gain ``10^(-L_ref/10) * d^-alpha``."""
    return 10.0 ** (-L_ref_dB / 10.0) * d ** (-alpha)


def _per_user(value, n: int, name: str) -> tuple:
    if np.ndim(value) == 0:
        return (float(value),) * n
    vals = tuple(float(v) for v in value)
    if len(vals) != n:
        raise ConfigurationError(f"{name} needs {n} entries, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class SystemConfig:
    """All scenario parameters.

    Per-user fields (``kappa_*``, ``d_*``, ``aod_*``) accept a scalar, which
    is broadcast to every user, or a sequence of per-user values. Rician
    factors may be ``math.inf`` for a pure line-of-sight channel. ``aod_*``
    of ``None`` means angles are drawn uniformly on (-pi/2, pi/2).
    ``r_I``/``r_E`` of ``None`` select the minimal annihilating ranks
    ``K_I - 1`` and ``K_I``.
    """

    M: int = 16
    K_I: int = 2
    K_E: int = 2
    P_max: float = 2.0
    C_thre: float = 8.0
    kappa_I: float | Sequence[float] = 0.0
    kappa_E: float | Sequence[float] = 0.0
    d_I: float | Sequence[float] = 50.0
    d_E: float | Sequence[float] = 5.0
    alpha_I: float = 3.2
    alpha_E: float = 2.2
    L_ref_dB: float = 30.0
    sigma0_sq: float = field(default_factory=lambda: noise_power_from_dBm(-84.0))
    eh: EHParams = field(default_factory=EHParams)
    rng_seed: int = 0
    aod_I: float | Sequence[float] | None = None
    aod_E: float | Sequence[float] | None = None
    r_I: int | None = None
    r_E: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if int(self.M) != self.M or self.M < 1:
            raise ConfigurationError("M must be a positive integer")
        if self.K_I < 1 or self.K_E < 0:
            raise ConfigurationError("need K_I >= 1 and K_E >= 0")
        if self.M < self.K_I + self.K_E:
            raise ConfigurationError(
                f"M={self.M} must be at least K_I + K_E = {self.K_I + self.K_E}")
        for name in ("P_max", "alpha_I", "alpha_E", "sigma0_sq"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be strictly positive")
        if self.C_thre < 0:
            raise ConfigurationError("C_thre must be nonnegative")
        for name, n in (("d_I", self.K_I), ("d_E", self.K_E)):
            if any(d <= 0 for d in _per_user(getattr(self, name), n, name)):
                raise ConfigurationError(f"{name} must be strictly positive")
        for name, n in (("kappa_I", self.K_I), ("kappa_E", self.K_E)):
            if any(not k >= 0 for k in _per_user(getattr(self, name), n, name)):
                raise ConfigurationError(f"{name} must be >= 0")
        for name, n in (("aod_I", self.K_I), ("aod_E", self.K_E)):
            if getattr(self, name) is not None:
                _per_user(getattr(self, name), n, name)
        if self.r_I is not None and not 0 <= self.r_I <= self.M - 1:
            raise ConfigurationError("r_I must lie in [0, M-1]")
        if self.r_E is not None and not 1 <= self.r_E <= self.M - 1:
            raise ConfigurationError("r_E must lie in [1, M-1]")

    @property
    def ranks(self) -> tuple[int, int]:
        r_I = self.K_I - 1 if self.r_I is None else self.r_I
        r_E = self.K_I if self.r_E is None else self.r_E
        return r_I, r_E

    @property
    def qos_snr(self) -> float:
        """SNR target ``2^C_thre - 1``."""
        return 2.0 ** self.C_thre - 1.0

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


@dataclass
class ChannelSet:
    """Normalized small-scale channels plus per-user large-scale gains."""

    H_I: np.ndarray
    H_E: np.ndarray
    rho_H2I: np.ndarray
    rho_H2E: np.ndarray
    aod_I: np.ndarray
    aod_E: np.ndarray

    @property
    def M(self) -> int:
        return self.H_I.shape[1]

    @property
    def K_I(self) -> int:
        return self.H_I.shape[0]

    @property
    def K_E(self) -> int:
        return self.H_E.shape[0]


@dataclass(frozen=True)
class CsiErrorSpec:
    rho: float = 0.0
    sigma_H_sq: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigurationError(f"CSI error level must lie in [0, 1], got {self.rho}")
        if self.sigma_H_sq < 0:
            raise ConfigurationError("sigma_H_sq must be nonnegative")


def child_seed(seed, *keys) -> np.random.SeedSequence:
    """Independent stream derived from ``seed`` by counter keys, without mutation."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + keys)
    return np.random.SeedSequence(seed, spawn_key=keys)


def ula_los(M: int, aod: float) -> np.ndarray:
    """Half-wavelength ULA steering vector with unit norm."""
    m = np.arange(M)
    return np.exp(1j * m * np.pi * np.sin(aod)) / np.sqrt(M)


def _rician_rows(M, kappas, aods, rng):
    rows = np.empty((len(kappas), M), dtype=complex)
    for k, (kappa, aod) in enumerate(zip(kappas, aods)):
        nlos = (rng.standard_normal(M) + 1j * rng.standard_normal(M)) / np.sqrt(2.0)
        if math.isinf(kappa):
            rows[k] = ula_los(M, aod)
        else:
            rows[k] = (np.sqrt(kappa / (1 + kappa)) * ula_los(M, aod)
                       + np.sqrt(1 / (1 + kappa)) * nlos)
    return rows


def generate_channels(cfg: SystemConfig, seed=None) -> ChannelSet:
    """Draw one quasi-static channel realization.

    ``seed`` may be an int or a ``numpy.random.SeedSequence``; it defaults to
    ``cfg.rng_seed``. The NLoS draw is consumed even for pure-LoS users so
    the stream layout does not depend on the Rician factors.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.rng_seed if seed is None else seed)
    if cfg.aod_I is None:
        aod_I = rng.uniform(-np.pi / 2, np.pi / 2, cfg.K_I)
    else:
        aod_I = np.array(_per_user(cfg.aod_I, cfg.K_I, "aod_I"))
    if cfg.aod_E is None:
        aod_E = rng.uniform(-np.pi / 2, np.pi / 2, cfg.K_E)
    else:
        aod_E = np.array(_per_user(cfg.aod_E, cfg.K_E, "aod_E"))
    H_I = _rician_rows(cfg.M, _per_user(cfg.kappa_I, cfg.K_I, "kappa_I"), aod_I, rng)
    H_E = _rician_rows(cfg.M, _per_user(cfg.kappa_E, cfg.K_E, "kappa_E"), aod_E, rng)
    rho_I = np.array([path_loss_gain(d, cfg.alpha_I, cfg.L_ref_dB)
                      for d in _per_user(cfg.d_I, cfg.K_I, "d_I")])
    rho_E = np.array([path_loss_gain(d, cfg.alpha_E, cfg.L_ref_dB)
                      for d in _per_user(cfg.d_E, cfg.K_E, "d_E")])
    return ChannelSet(H_I, H_E.reshape(cfg.K_E, cfg.M), rho_I, rho_E, aod_I, aod_E)


def corrupt_csi(ch: ChannelSet, spec: CsiErrorSpec, seed=None) -> ChannelSet:
    """Return ``sqrt(1-rho^2) H + rho H_n`` for both channel matrices."""
    if not 0.0 <= spec.rho <= 1.0:
        raise ConfigurationError("CSI error level must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(spec.sigma_H_sq / 2.0)

    def noise(shape):
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    n_I = noise(ch.H_I.shape)
    n_E = noise(ch.H_E.shape)
    if spec.rho == 0.0:
        return replace(ch, H_I=ch.H_I.copy(), H_E=ch.H_E.copy())
    c = np.sqrt(1.0 - spec.rho ** 2)
    return replace(ch, H_I=c * ch.H_I + spec.rho * n_I, H_E=c * ch.H_E + spec.rho * n_E)
