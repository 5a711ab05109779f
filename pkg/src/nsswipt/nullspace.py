"""
SVD-based null spaces for interference suppression and the equivalent
channels seen through them.

With channel rows ``h`` stored as in :class:`~nsswipt.system_model.ChannelSet`,
the matrix mapping a beam to received amplitudes is ``H.conj()``. The
information null space of IU ``i`` annihilates every *other* IU; the energy
null space annihilates all IUs and is shared by every EU.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, ShapeError
from .system_model import ChannelSet


class RankDeficiencyWarning(RuntimeWarning):
    """IU channel matrix is rank deficient; annihilation may be partial."""


@dataclass
class NullSpaceBasis:
    N_I: list  # per-IU (M, M - r_I) arrays
    N_E: np.ndarray  # (M, M - r_E)
    r_I: int
    r_E: int


@dataclass
class EquivalentChannels:
    h_EI: np.ndarray  # (K_E, K_I, M - r_I): N_I[i]^H h_E^k
    h_EE: np.ndarray  # (K_E, M - r_E)
    h_II: np.ndarray  # (K_I, M - r_I): N_I[k]^H h_I^k
    S_Ei: np.ndarray  # (K_I, M - r_I, M - r_I)
    S_E: np.ndarray
    S: np.ndarray  # (M, M), sum_j h_E^j h_E^j^H
    G: np.ndarray  # alias of S kept under its proof name


def null_space_of(A: np.ndarray, r: int) -> np.ndarray:
    """Last ``M - r`` right-singular vectors of ``A`` (rows x M).

    Singular values are sorted descending, so these span the null space
    whenever ``r >= rank(A)``. An ``A`` with no rows yields the identity
    (``r`` must then be 0).
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    M = A.shape[1]
    if A.shape[0] == 0:
        if r != 0:
            raise ConfigurationError("empty matrix only admits r = 0")
        return np.eye(M, dtype=complex)
    if not 1 <= r <= M - 1:
        raise ConfigurationError(f"retained rank r={r} must lie in [1, M-1] with M={M}")
    _, _, Vh = np.linalg.svd(A, full_matrices=True)
    return Vh[r:].conj().T


def _check_rank(H: np.ndarray, expected: int):
    if H.shape[0] == 0:
        return
    s = np.linalg.svd(H, compute_uv=False)
    tol = max(H.shape) * np.finfo(float).eps * s[0]
    rank = int(np.sum(s > tol))
    if rank < expected:
        warnings.warn(f"IU channel matrix has rank {rank} < {expected}; "
                      "null-space beams will not fully suppress interference",
                      RankDeficiencyWarning, stacklevel=3)


def build_bases(ch: ChannelSet, r_I: int | None = None, r_E: int | None = None) -> NullSpaceBasis:
    """Information and energy null spaces; defaults are ``K_I - 1`` and ``K_I``."""
    K_I, M = ch.H_I.shape
    r_I = K_I - 1 if r_I is None else r_I
    r_E = K_I if r_E is None else r_E
    if r_I >= M or r_E >= M:
        raise ConfigurationError(f"ranks (r_I={r_I}, r_E={r_E}) must be below M={M}")
    A = ch.H_I.conj()
    _check_rank(A, K_I)
    N_I = []
    for i in range(K_I):
        others = np.delete(A, i, axis=0)
        if others.shape[0] == 0 and r_I > 0:
            # no interferers: any r_I-dimensional removal is arbitrary, keep the leading basis
            N_I.append(np.eye(M, dtype=complex)[:, : M - r_I])
        elif others.shape[0] > 0 and r_I == 0:
            raise ConfigurationError("r_I = 0 is only valid for a single IU")
        else:
            N_I.append(null_space_of(others, r_I))
    N_E = null_space_of(A, r_E)
    return NullSpaceBasis(N_I, N_E, r_I, r_E)


def nested_bases(ch: ChannelSet, i: int, r_I: int | None = None, r_E: int | None = None):
    """Rotated IU basis whose leading columns are the energy null space.

    Returns ``(N_Ii, N_E)`` with ``N_E == N_Ii @ [I; 0]``. Only meaningful
    when the energy null space lies inside IU ``i``'s null space (i.e. with
    annihilating ranks).
    """
    basis = build_bases(ch, r_I, r_E)
    N_Ii, N_E = basis.N_I[i], basis.N_E
    # orthogonal complement of span(N_E) inside span(N_Ii)
    resid = N_Ii - N_E @ (N_E.conj().T @ N_Ii)
    U, s, _ = np.linalg.svd(resid, full_matrices=False)
    extra = U[:, : N_Ii.shape[1] - N_E.shape[1]]
    return np.hstack([N_E, extra]), N_E


def build_equivalents(ch: ChannelSet, basis: NullSpaceBasis) -> EquivalentChannels:
    M = ch.M
    if basis.N_E.shape[0] != M or any(N.shape[0] != M for N in basis.N_I):
        raise ShapeError("basis does not match channel dimension")
    if len(basis.N_I) != ch.K_I:
        raise ShapeError("basis has the wrong number of IU null spaces")
    NI = np.stack(basis.N_I)  # (K_I, M, nI)
    h_EI = np.einsum("imn,km->kin", NI.conj(), ch.H_E)
    h_EE = ch.H_E @ basis.N_E.conj()
    h_II = np.einsum("kmn,km->kn", NI.conj(), ch.H_I)
    S_Ei = np.einsum("kin,kip->inp", h_EI, h_EI.conj())
    S_E = h_EE.T @ h_EE.conj()
    S = ch.H_E.T @ ch.H_E.conj()
    return EquivalentChannels(h_EI, h_EE, h_II, S_Ei, S_E, S, S)


@dataclass
class InterlacingResult:
    ok: bool
    eig_Ei: np.ndarray  # ascending
    eig_E: np.ndarray  # ascending
    violations: list  # 0-based indices j where the bound fails

    def __bool__(self):
        return self.ok


def interlacing_check(S_Ei: np.ndarray, S_E: np.ndarray, r_I: int, r_E: int,
                      slack: float = 1e-9) -> InterlacingResult:
    """Check ``xi_Ei[j] <= xi_E[j] <= xi_Ei[j + r_E - r_I]`` (ascending order)."""
    for name, S in (("S_Ei", S_Ei), ("S_E", S_E)):
        if not np.allclose(S, S.conj().T, atol=1e-12 * max(1.0, np.abs(S).max())):
            raise DomainError(f"{name} is not Hermitian")
    lo = np.linalg.eigvalsh(S_Ei)
    mid = np.linalg.eigvalsh(S_E)
    shift = r_E - r_I
    if lo.size - mid.size != shift:
        raise ShapeError("matrix sizes inconsistent with the retained ranks")
    bad = [j for j in range(mid.size)
           if not (lo[j] - slack <= mid[j] <= lo[j + shift] + slack)]
    return InterlacingResult(not bad, lo, mid, bad)
