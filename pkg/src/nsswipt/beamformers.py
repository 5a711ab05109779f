"""
Beamforming strategies for the null-space SWIPT downlink and the common
link-level evaluator.

* :func:`solve_alg1` - SDR over the information null spaces, no energy beams.
* :func:`solve_p24` - same program plus a rewarded dedicated energy-beam block
  (``eta = 1`` gives the unrewarded joint program, method ``p22``).
* :func:`solve_alg2` - closed form: MRT information beams at minimum power,
  leftover power on the dominant eigenvector of the energy null space.
* :func:`solve_benchmark` - direct SDR over full-size covariance matrices.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .energy_harvest import (EHParams, WaveformKind, harvested_dc_power,
                             received_rf_power)
from .errors import ConfigurationError, ShapeError
from .nullspace import EquivalentChannels, NullSpaceBasis, build_bases, build_equivalents
from .system_model import ChannelSet, SystemConfig, child_seed

QOS_MARGIN = 1e-6
RANK_WARN = 1e-4
EB_SPLIT_REL = 1e-8
SDR_TOL = 1e-9


class Method(str, enum.Enum):
    ALG1 = "alg1"
    P24 = "p24"
    P22 = "p22"  # P2.4 with eta = 1, used by the rank sweep
    ALG2 = "alg2"
    BENCHMARK = "benchmark"
    BENCHMARK_NO_V = "benchmark_no_v"


class RankResidualWarning(RuntimeWarning):
    pass


@dataclass
class EtaPolicy:
    """Reward on dedicated energy-beam power: ``eta = max_i xi(S_Ei)/xi(S_E) + delta``."""

    delta: float = 10.0
    explicit_eta: float | None = None

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigurationError("delta must be positive")

    def eta(self, eq: EquivalentChannels) -> float:
        if self.explicit_eta is not None:
            return float(self.explicit_eta)
        xi_Ei = max(np.linalg.eigvalsh(S)[-1] for S in eq.S_Ei)
        xi_E = np.linalg.eigvalsh(eq.S_E)[-1]
        return float(xi_Ei / xi_E + self.delta)


@dataclass
class BeamformingSolution:
    """Beams stored column-wise: ``W`` is (M, K_I), ``V`` is (M, n_EB)."""

    W: np.ndarray
    V: np.ndarray
    method: str
    status: str = "OPTIMAL"
    diagnostics: dict = field(default_factory=dict)

    @property
    def w(self):
        return [self.W[:, i] for i in range(self.W.shape[1])]

    @property
    def v(self):
        return [self.V[:, j] for j in range(self.V.shape[1])]

    @property
    def P_I(self) -> np.ndarray:
        return np.sum(np.abs(self.W) ** 2, axis=0)

    @property
    def P_E(self) -> np.ndarray:
        return np.sum(np.abs(self.V) ** 2, axis=0)

    @property
    def total_power(self) -> float:
        return float(self.P_I.sum() + self.P_E.sum())

    @property
    def feasible(self) -> bool:
        return self.status == "OPTIMAL"

    def to_dict(self) -> dict:
        def enc(A):
            return [[[float(z.real), float(z.imag)] for z in col] for col in A.T]
        return {"method": self.method, "status": self.status,
                "M": int(self.W.shape[0]), "w": enc(self.W), "v": enc(self.V),
                "P_I": self.P_I.tolist(), "P_E": self.P_E.tolist(),
                "diagnostics": _plain(self.diagnostics)}

    @classmethod
    def from_dict(cls, d: dict) -> "BeamformingSolution":
        def dec(cols):
            if not cols:
                return np.zeros((d["M"], 0), complex)
            return np.column_stack([[complex(re, im) for re, im in col] for col in cols])
        return cls(dec(d["w"]), dec(d["v"]), d["method"], d["status"], dict(d["diagnostics"]))

    def to_record(self) -> str:
        """Line-oriented text record (method, status, powers, beams, diagnostics)."""
        lines = [f"method {self.method}", f"status {self.status}",
                 f"M {self.W.shape[0]}",
                 "P_I " + " ".join(repr(float(p)) for p in self.P_I),
                 "P_E " + " ".join(repr(float(p)) for p in self.P_E)]
        for tag, A in (("w", self.W), ("v", self.V)):
            for j in range(A.shape[1]):
                lines.append(f"{tag} {j} " + " ".join(
                    f"{float(z.real)!r} {float(z.imag)!r}" for z in A[:, j]))
        for key, val in sorted(_plain(self.diagnostics).items()):
            if isinstance(val, list):
                val = " ".join(repr(v) for v in val)
            lines.append(f"diag {key} {val}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "BeamformingSolution":
        fields, w, v, diag = {}, [], [], {}
        for line in text.splitlines():
            tag, _, rest = line.partition(" ")
            if tag in ("w", "v"):
                nums = [float(t) for t in rest.split()[1:]]
                col = np.array(nums[0::2]) + 1j * np.array(nums[1::2])
                (w if tag == "w" else v).append(col)
            elif tag == "diag":
                key, _, val = rest.partition(" ")
                diag[key] = val
            else:
                fields[tag] = rest
        M = int(fields["M"])
        W = np.column_stack(w) if w else np.zeros((M, 0), complex)
        V = np.column_stack(v) if v else np.zeros((M, 0), complex)
        return cls(W, V, fields["method"], fields["status"], diag)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def _fix_phase(u: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude entry is real positive."""
    if not np.any(u):
        return u
    k = int(np.argmax(np.abs(u)))
    return u * np.exp(-1j * np.angle(u[k]))


def _qos_rhs(ch: ChannelSet, cfg: SystemConfig) -> np.ndarray:
    """Minimum received signal power per IU, ``(2^C - 1) sigma^2 / rho_k``."""
    return cfg.qos_snr * cfg.sigma0_sq / ch.rho_H2I


def _infeasible(ch: ChannelSet, method: str, reason: str, n_eb: int = 0, **diag):
    return BeamformingSolution(np.zeros((ch.M, ch.K_I), complex),
                               np.zeros((ch.M, n_eb), complex), method, "INFEASIBLE",
                               {"reason": reason, **diag})


def _prepare(ch, basis, eq, cfg):
    if basis is None:
        basis = build_bases(ch, *cfg.ranks)
    if eq is None:
        eq = build_equivalents(ch, basis)
    return basis, eq


def _split_psd(D: np.ndarray, rel: float = EB_SPLIT_REL):
    """Eigen-split ``D`` into vectors ``sqrt(xi) u`` for every significant eigenpair."""
    D = 0.5 * (D + D.conj().T)
    w, U = np.linalg.eigh(D)
    tr = max(float(np.trace(D).real), 0.0)
    keep = [j for j in range(len(w) - 1, -1, -1) if tr > 0 and w[j] > rel * tr]
    return [np.sqrt(w[j]) * U[:, j] for j in keep]


def _rank1_blocks(X_blocks, bases, method, diag):
    ratios, beams = [], []
    for X, N in zip(X_blocks, bases):
        b, ratio = sdp.extract_rank1(X)
        ratios.append(ratio)
        beams.append(_fix_phase(N @ b))
    diag["rank_ratio"] = ratios
    if max(ratios) > RANK_WARN:
        diag.setdefault("warnings", []).append("rank residual above 1e-4")
        warnings.warn(f"{method}: rank-1 residual ratio {max(ratios):.2e}", RankResidualWarning,
                      stacklevel=3)
    return np.column_stack(beams)


def _sdr_problem(eq: EquivalentChannels, rhs, P_max, eta=None) -> sdp.SdpProblem:
    K_I, n_I = eq.h_II.shape
    blocks = [n_I] * K_I
    objective = list(eq.S_Ei)
    cons = [sdp.Constraint({k: np.outer(eq.h_II[k], eq.h_II[k].conj())}, sdp.GE,
                           rhs[k] * (1 + QOS_MARGIN)) for k in range(K_I)]
    budget = {k: np.eye(n_I) for k in range(K_I)}
    if eta is not None:
        n_E = eq.S_E.shape[0]
        blocks.append(n_E)
        objective.append(eta * eq.S_E)
        budget[K_I] = np.eye(n_E)
    cons.append(sdp.Constraint(budget, sdp.LE, P_max))
    return sdp.SdpProblem(blocks, objective, cons)


def _sdp_diag(sol: sdp.SdpSolution) -> dict:
    return {"objective": sol.objective_value, "duality_gap": sol.duality_gap,
            "iterations": sol.iterations, "solver_status": sol.status.value}


def solve_alg1(ch: ChannelSet, basis: NullSpaceBasis | None = None,
               eq: EquivalentChannels | None = None, cfg: SystemConfig | None = None,
               tol: float = SDR_TOL) -> BeamformingSolution:
    """Null-space SDR without dedicated energy beams (Gaussian signaling)."""
    cfg = cfg or SystemConfig(M=ch.M, K_I=ch.K_I, K_E=ch.K_E)
    basis, eq = _prepare(ch, basis, eq, cfg)
    prob = _sdr_problem(eq, _qos_rhs(ch, cfg), cfg.P_max)
    sol = sdp.solve(prob, tol=tol)
    diag = _sdp_diag(sol)
    if sol.status not in sdp.SOLVED:
        return _infeasible(ch, Method.ALG1.value, "solver " + sol.status.value, **diag)
    W = _rank1_blocks(sol.X, basis.N_I, "alg1", diag)
    return BeamformingSolution(W, np.zeros((ch.M, 0), complex), Method.ALG1.value, "OPTIMAL",
                               diag)


def solve_p24(ch: ChannelSet, basis: NullSpaceBasis | None = None,
              eq: EquivalentChannels | None = None, cfg: SystemConfig | None = None,
              pol: EtaPolicy | None = None, tol: float = SDR_TOL) -> BeamformingSolution:
    """Null-space SDR with a reward ``eta`` on dedicated energy-beam power."""
    cfg = cfg or SystemConfig(M=ch.M, K_I=ch.K_I, K_E=ch.K_E)
    pol = pol or EtaPolicy()
    basis, eq = _prepare(ch, basis, eq, cfg)
    eta = pol.eta(eq)
    prob = _sdr_problem(eq, _qos_rhs(ch, cfg), cfg.P_max, eta=eta)
    sol = sdp.solve(prob, tol=tol)
    diag = _sdp_diag(sol)
    diag["eta"] = eta
    if sol.status not in sdp.SOLVED:
        return _infeasible(ch, Method.P24.value, "solver " + sol.status.value, **diag)
    W = _rank1_blocks(sol.X[:-1], basis.N_I, "p24", diag)
    D = sol.X[-1]
    diag["trace_D"] = float(np.trace(D).real)
    eb = [_fix_phase(basis.N_E @ d) for d in _split_psd(D)]
    V = np.column_stack(eb) if eb else np.zeros((ch.M, 0), complex)
    return BeamformingSolution(W, V, Method.P24.value, "OPTIMAL", diag)


def alg2_beta(h: np.ndarray, N: np.ndarray) -> float:
    """Effective gain of the projected MRT beam, evaluated by its trace formula."""
    Hk = np.outer(h, h.conj())
    Pn = N @ N.conj().T
    proj = N.conj().T @ h
    return float(np.real(np.trace(Hk @ Pn @ Hk @ Pn)) / np.real(np.vdot(proj, proj)))


def solve_alg2(ch: ChannelSet, basis: NullSpaceBasis | None = None,
               eq: EquivalentChannels | None = None,
               cfg: SystemConfig | None = None) -> BeamformingSolution:
    """Closed-form low-complexity design with one dedicated energy beam."""
    cfg = cfg or SystemConfig(M=ch.M, K_I=ch.K_I, K_E=ch.K_E)
    basis, eq = _prepare(ch, basis, eq, cfg)
    rhs = _qos_rhs(ch, cfg)
    W = np.empty((ch.M, ch.K_I), complex)
    betas, P_I = [], []
    for i, N in enumerate(basis.N_I):
        h = ch.H_I[i]
        proj = N.conj().T @ h
        w_bar = N @ proj / np.linalg.norm(proj)
        beta = alg2_beta(h, N)
        p = rhs[i] / beta
        betas.append(beta)
        P_I.append(p)
        W[:, i] = _fix_phase(np.sqrt(p) * w_bar)
    P_E = cfg.P_max - sum(P_I)
    diag = {"beta": betas, "P_I": P_I, "P_E": P_E}
    if P_E < 0:
        return _infeasible(ch, Method.ALG2.value, "power shortfall", n_eb=1, **diag)
    _, U = np.linalg.eigh(eq.S_E)
    d = U[:, -1]
    v = _fix_phase(np.sqrt(P_E) * (basis.N_E @ d))
    return BeamformingSolution(W, v[:, None], Method.ALG2.value, "OPTIMAL", diag)


def solve_benchmark(ch: ChannelSet, cfg: SystemConfig | None = None, with_V: bool = True,
                    tol: float = SDR_TOL) -> BeamformingSolution:
    """Direct SDR over (M x M) covariances with explicit interference terms."""
    cfg = cfg or SystemConfig(M=ch.M, K_I=ch.K_I, K_E=ch.K_E)
    M, K_I = ch.M, ch.K_I
    S = ch.H_E.T @ ch.H_E.conj()
    Hk = [np.outer(ch.H_I[k], ch.H_I[k].conj()) for k in range(K_I)]
    noise = cfg.sigma0_sq / ch.rho_H2I
    nblk = K_I + (1 if with_V else 0)
    cons = []
    for i in range(K_I):
        coeffs = {l: -Hk[i] for l in range(nblk)}
        coeffs[i] = Hk[i] / cfg.qos_snr
        cons.append(sdp.Constraint(coeffs, sdp.GE, noise[i] * (1 + QOS_MARGIN)))
    cons.append(sdp.Constraint({l: np.eye(M) for l in range(nblk)}, sdp.LE, cfg.P_max))
    prob = sdp.SdpProblem([M] * nblk, [S] * nblk, cons)
    sol = sdp.solve(prob, tol=tol)
    diag = _sdp_diag(sol)
    method = (Method.BENCHMARK if with_V else Method.BENCHMARK_NO_V).value
    if sol.status not in sdp.SOLVED:
        return _infeasible(ch, method, "solver " + sol.status.value, **diag)
    eye = [np.eye(M)] * K_I
    W = _rank1_blocks(sol.X[:K_I], eye, method, diag)
    V = np.zeros((M, 0), complex)
    if with_V:
        diag["trace_V"] = float(np.trace(sol.X[-1]).real)
        eb = [_fix_phase(v) for v in _split_psd(sol.X[-1])]
        if eb and diag["trace_V"] > 1e-6 * cfg.P_max:
            V = np.column_stack(eb)
    return BeamformingSolution(W, V, method, "OPTIMAL", diag)


def solve(method: Method | str, ch: ChannelSet, cfg: SystemConfig,
          pol: EtaPolicy | None = None, tol: float = SDR_TOL) -> BeamformingSolution:
    """Dispatch by method name; ``tol`` applies to the SDP-based methods."""
    method = Method(method)
    if method is Method.BENCHMARK:
        return solve_benchmark(ch, cfg, with_V=True, tol=tol)
    if method is Method.BENCHMARK_NO_V:
        return solve_benchmark(ch, cfg, with_V=False, tol=tol)
    basis = build_bases(ch, *cfg.ranks)
    eq = build_equivalents(ch, basis)
    if method is Method.ALG1:
        return solve_alg1(ch, basis, eq, cfg, tol=tol)
    if method is Method.P24:
        return solve_p24(ch, basis, eq, cfg, pol, tol=tol)
    if method is Method.P22:
        sol = solve_p24(ch, basis, eq, cfg, EtaPolicy(explicit_eta=1.0), tol=tol)
        sol.method = Method.P22.value
        return sol
    return solve_alg2(ch, basis, eq, cfg)


@dataclass
class EvalReport:
    sinr: np.ndarray
    capacity: np.ndarray
    rf_power: np.ndarray
    dc_power: np.ndarray | None = None
    waveform: str | None = None

    @property
    def worst_capacity(self) -> float:
        return float(self.capacity.min())

    @property
    def total_rf_power(self) -> float:
        return float(self.rf_power.sum())

    @property
    def total_dc_power(self) -> float | None:
        return None if self.dc_power is None else float(self.dc_power.sum())

    def to_dict(self) -> dict:
        return {"sinr": self.sinr.tolist(), "capacity": self.capacity.tolist(),
                "worst_capacity": self.worst_capacity, "rf_power": self.rf_power.tolist(),
                "total_rf_power": self.total_rf_power,
                "dc_power": None if self.dc_power is None else self.dc_power.tolist(),
                "total_dc_power": self.total_dc_power, "waveform": self.waveform}


def evaluate(ch: ChannelSet, sol: BeamformingSolution, cfg: SystemConfig, *,
             waveform: WaveformKind | str | None = None, n_symbols: int = 10_000,
             seed=0) -> EvalReport:
    """SINR and capacity per IU, symbol-averaged RF power per EU.

    All interference terms are kept, so the same evaluator covers
    null-space beams, the benchmark, and mismatched (corrupted) channels.
    With ``waveform`` set, DC power through the nonlinear harvester is
    estimated with ``n_symbols`` Monte Carlo symbols per EU.
    """
    if sol.W.shape != (ch.M, ch.K_I) or sol.V.shape[0] != ch.M:
        raise ShapeError("solution does not match channel dimensions")
    amp_W = np.abs(ch.H_I.conj() @ sol.W) ** 2  # [k, i] = |h_k^H w_i|^2
    amp_V = np.abs(ch.H_I.conj() @ sol.V) ** 2
    sig = np.diag(amp_W)
    interf = amp_W.sum(axis=1) - sig + amp_V.sum(axis=1)
    sinr = sig / (interf + cfg.sigma0_sq / ch.rho_H2I)
    capacity = np.log2(1.0 + sinr)
    rf = np.array([received_rf_power(ch, sol, l) for l in range(ch.K_E)])
    dc = None
    if waveform is not None:
        wf = WaveformKind(waveform)
        dc = np.array([harvested_dc_power(ch, sol, l, wf, cfg.eh, n_symbols, child_seed(seed, l))
                       for l in range(ch.K_E)])
        waveform = wf.value
    return EvalReport(sinr, capacity, rf, dc, waveform)
