"""
Closed-form operation counts for the beamforming methods and the relative
savings of the closed-form design.

Big-O constants are taken as 1, so counts are comparable only as ratios.
``x ** 3.5`` is evaluated as ``x**3 * sqrt(x)`` in real arithmetic.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import time
from dataclasses import asdict, dataclass

from .errors import ConfigurationError


class ComplexityMethod(str, enum.Enum):
    ALG1 = "alg1"
    P24 = "p24"
    ALG2 = "alg2"
    BENCHMARK = "benchmark"
    BENCHMARK_NO_V = "benchmark_no_v"


@dataclass(frozen=True)
class ComplexityInputs:
    M: int
    K_I: int
    K_E: int
    r_I: int | None = None
    r_E: int | None = None

    def __post_init__(self):
        for name in ("M", "K_I", "K_E"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigurationError(f"{name} must be a positive integer")
        if self.M < self.K_I + self.K_E:
            raise ConfigurationError("M must be at least K_I + K_E")
        # minimal annihilating ranks unless given
        if self.r_I is None:
            object.__setattr__(self, "r_I", self.K_I - 1)
        if self.r_E is None:
            object.__setattr__(self, "r_E", self.K_I)
        if not (0 <= self.r_I < self.M and 0 <= self.r_E < self.M):
            raise ConfigurationError("ranks must lie in [0, M-1]")


def _p35(x: float) -> float:
    return x ** 3 * math.sqrt(x)


def complexity_of(method: ComplexityMethod | str, inp: ComplexityInputs) -> float:
    """Operation count of ``method`` for the given dimensions."""
    method = ComplexityMethod(method)
    M, K, KE, rI, rE = inp.M, inp.K_I, inp.K_E, inp.r_I, inp.r_E
    nI, nE = M - rI, M - rE
    svd = K * M * (K - 1) ** 2  # K_I SVDs for the information null spaces
    eq = K * KE * M ** 3 - K * KE * M ** 2 * rI  # equivalent channels, S_Ei dominated
    if method is ComplexityMethod.ALG1:
        return _p35(K * nI) + K * nI ** 3 + eq + svd
    if method is ComplexityMethod.P24:
        return (_p35(K * nI) + _p35(nE) + K * nI ** 3 + nE ** 3
                + eq + svd + M * K ** 2)
    if method is ComplexityMethod.ALG2:
        return nE ** 3 + K * M ** 2 * nI + svd + M * K ** 2
    if method is ComplexityMethod.BENCHMARK:
        return (_p35(K) + 1) * _p35(M) + (K + 1) * M ** 3
    return _p35(K) * _p35(M) + K * M ** 3


def reduction_ratio(method_a, method_b, inp: ComplexityInputs) -> float:
    """Percentage saving of ``method_a`` relative to ``method_b``."""
    cb = complexity_of(method_b, inp)
    if not cb > 0:
        raise ConfigurationError("reference complexity must be positive")
    return 100.0 * (1.0 - complexity_of(method_a, inp) / cb)


def complexity_table(inp: ComplexityInputs, reference=ComplexityMethod.ALG2) -> list[dict]:
    """One row per method with its count and the saving of ``reference`` over it."""
    rows = []
    for m in ComplexityMethod:
        row = {"method": m.value, **asdict(inp), "complexity": complexity_of(m, inp)}
        row["reduction_vs_" + ComplexityMethod(reference).value] = (
            None if m is ComplexityMethod(reference) else reduction_ratio(reference, m, inp))
        rows.append(row)
    return rows


def table_to_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    header = list(rows[0].keys()) if rows else []
    w.writerow(header)
    for r in rows:
        w.writerow(["" if r[k] is None else (f"{r[k]:.6f}" if isinstance(r[k], float) else r[k])
                    for k in header])
    return out.getvalue()


def empirical_runtime(method: str, cfg=None, n_draws: int = 5, seed: int = 0) -> float:
    """Median wall time in seconds of one solve, for a sanity check on scaling.

    This is the counter hook: wall time stands in for a flop count, which
    NumPy/LAPACK do not expose.
    """
    from .beamformers import solve
    from .system_model import SystemConfig, child_seed, generate_channels

    cfg = cfg or SystemConfig()
    times = []
    for t in range(n_draws):
        ch = generate_channels(cfg, child_seed(seed, t))
        t0 = time.perf_counter()
        solve(method, ch, cfg)
        times.append(time.perf_counter() - t0)
    times.sort()
    return times[len(times) // 2]
