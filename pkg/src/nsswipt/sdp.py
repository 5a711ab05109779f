"""
Dense primal-dual interior-point solver for small multi-block complex
Hermitian SDPs of the form::

    maximize    sum_b Re tr(C_b X_b)
    subject to  sum_b Re tr(A_cb X_b)  (<= | >=)  bound_c,   c = 1..m
                X_b Hermitian PSD

Inequalities are turned into equalities with nonnegative slacks and the
resulting standard-form pair is solved with the HKM search direction and a
Mehrotra predictor-corrector. The iteration starts from an infeasible
interior point, so no phase-one is needed to solve; :func:`feasibility_probe`
answers the strict-feasibility question separately.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, ShapeError

LE = "<="
GE = ">="


class SdpStatus(str, enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    MAX_ITER = "MAX_ITER"
    INACCURATE = "INACCURATE"  # stalled, but residuals below LOW_ACCURACY


SOLVED = (SdpStatus.OPTIMAL, SdpStatus.INACCURATE)
LOW_ACCURACY = 1e-6
STALL_ITERS = 6


@dataclass
class Constraint:
    """``sum_b Re tr(coeffs[b] X_b) sense bound``; missing blocks are zero."""

    coeffs: dict
    sense: str
    bound: float

    def __post_init__(self):
        if self.sense not in (LE, GE):
            raise ValueError(f"constraint sense must be '<=' or '>=', got {self.sense!r}")


@dataclass
class SdpProblem:
    blocks: list
    objective: list  # one Hermitian matrix (or None for zero) per block
    constraints: list = field(default_factory=list)

    def __post_init__(self):
        self.blocks = [int(n) for n in self.blocks]
        if len(self.objective) != len(self.blocks):
            raise ShapeError("one objective matrix per block is required")
        self.objective = [np.zeros((n, n), complex) if C is None else np.asarray(C, complex)
                          for n, C in zip(self.blocks, self.objective)]
        for n, C in zip(self.blocks, self.objective):
            _check_herm(C, n, "objective")
        for con in self.constraints:
            for b, A in con.coeffs.items():
                if not 0 <= b < len(self.blocks):
                    raise ShapeError(f"constraint refers to unknown block {b}")
                con.coeffs[b] = np.asarray(A, complex)
                _check_herm(con.coeffs[b], self.blocks[b], "constraint")


def _check_herm(A, n, what):
    if A.shape != (n, n):
        raise ShapeError(f"{what} matrix has shape {A.shape}, expected {(n, n)}")
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if not np.allclose(A, A.conj().T, atol=1e-10 * scale, rtol=0):
        raise DomainError(f"{what} matrix is not Hermitian")


@dataclass
class SdpSolution:
    X: list
    objective_value: float
    dual_objective: float
    dual_values: np.ndarray
    slacks: np.ndarray
    duality_gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    status: SdpStatus


def _ip(A, B):
    return float(np.real(np.vdot(A, B)))


def _herm(A):
    return 0.5 * (A + A.conj().T)


def _max_step(X, dX):
    """Largest alpha with X + alpha dX PSD (inf if unbounded)."""
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return 0.0
    T = scipy.linalg.solve_triangular(L, dX, lower=True)
    T = scipy.linalg.solve_triangular(L, T.conj().T, lower=True)
    lam = np.linalg.eigvalsh(_herm(T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


class _Standard:
    """Row-normalized equality form with LP slacks, minimizing <-C, X>."""

    def __init__(self, prob: SdpProblem):
        self.blocks = prob.blocks
        m = len(prob.constraints)
        self.m = m
        self.sign = np.array([1.0 if c.sense == LE else -1.0 for c in prob.constraints])
        rows = []
        b = np.empty(m)
        self.row_scale = np.ones(m)
        for c, con in enumerate(prob.constraints):
            norm = np.sqrt(sum(np.linalg.norm(A) ** 2 for A in con.coeffs.values()) + 1.0)
            self.row_scale[c] = norm
            rows.append({k: A / norm for k, A in con.coeffs.items() if np.any(A)})
            b[c] = con.bound / norm
        self.A = rows
        self.b = b
        cnorm = max(1.0, max((np.linalg.norm(C) for C in prob.objective), default=1.0))
        self.obj_scale = cnorm
        self.Cm = [-C / cnorm for C in prob.objective]
        self.n = sum(self.blocks) + m

    def A_op(self, X):
        return np.array([sum(_ip(A, X[k]) for k, A in row.items()) for row in self.A])

    def AT_op(self, y):
        out = [np.zeros((n, n), complex) for n in self.blocks]
        for c, row in enumerate(self.A):
            for k, A in row.items():
                out[k] += y[c] * A
        return out


def _ipm(prob: SdpProblem, tol: float, max_iter: int) -> SdpSolution:
    st = _Standard(prob)
    nb = len(st.blocks)
    m = st.m

    # SDPT3-like starting point
    X, Z = [], []
    for k, n in enumerate(st.blocks):
        a_norms = [np.linalg.norm(row[k]) for row in st.A if k in row]
        xi = max(10.0, np.sqrt(n), n * max(((1 + abs(st.b[c])) / (1 + np.linalg.norm(row[k]))
                                            for c, row in enumerate(st.A) if k in row),
                                           default=1.0))
        eta = max(10.0, np.sqrt(n), max([np.linalg.norm(st.Cm[k])] + a_norms))
        X.append(xi * np.eye(n, dtype=complex))
        Z.append(eta * np.eye(n, dtype=complex))
    x = np.maximum(10.0, 1.0 + np.abs(st.b)) if m else np.zeros(0)
    z = 10.0 * np.ones(m)
    y = np.zeros(m)

    bnorm = 1.0 + np.linalg.norm(st.b)
    cnorm = 1.0 + np.sqrt(sum(np.linalg.norm(C) ** 2 for C in st.Cm))
    status = SdpStatus.MAX_ITER
    it = 0
    pinf = dinf = gap = np.inf
    best = None  # (merit, it, state) of the best iterate seen
    for it in range(max_iter + 1):
        AX = st.A_op(X) if m else np.zeros(0)
        rp = st.b - AX - st.sign * x
        ATy = st.AT_op(y)
        Rd = [st.Cm[k] - Z[k] - ATy[k] for k in range(nb)]
        rd = -z - st.sign * y
        pobj = sum(_ip(st.Cm[k], X[k]) for k in range(nb))
        dobj = float(st.b @ y)
        compl = sum(_ip(X[k], Z[k]) for k in range(nb)) + float(x @ z)
        mu = compl / st.n
        pinf = np.linalg.norm(rp) / bnorm
        dinf = np.sqrt(sum(np.linalg.norm(R) ** 2 for R in Rd) + rd @ rd) / cnorm
        gap = abs(pobj - dobj) * st.obj_scale
        obj = abs(pobj) * st.obj_scale
        merit = max(pinf, dinf, gap / (1 + obj), abs(compl) * st.obj_scale / (1 + obj))
        if merit <= tol:
            status = SdpStatus.OPTIMAL
            break
        if best is None or merit < best[0]:
            best = (merit, it, (X, x, y, Z, z, pobj, dobj, pinf, dinf, gap))
        elif it - best[1] >= STALL_ITERS:
            break
        if it == max_iter:
            break
        if not np.isfinite(mu) or max(np.abs(X[k]).max() for k in range(nb)) > 1e14 \
                or (m and np.abs(y).max() > 1e14):
            break

        Zinv = [np.linalg.inv(Z[k]) for k in range(nb)]
        # Schur complement
        G = [[None] * nb for _ in range(m)]
        Msch = np.zeros((m, m))
        for c, row in enumerate(st.A):
            for k, A in row.items():
                G[c][k] = X[k] @ A @ Zinv[k]
        for i, row in enumerate(st.A):
            for j in range(i, m):
                v = sum(_ip(A, G[j][k]) for k, A in row.items() if G[j][k] is not None)
                Msch[i, j] = Msch[j, i] = v
        Msch[np.diag_indices(m)] += x / z
        try:
            cho = scipy.linalg.cho_factor(Msch)
            solve_schur = lambda r: scipy.linalg.cho_solve(cho, r)  # noqa: E731
        except np.linalg.LinAlgError:
            solve_schur = lambda r: np.linalg.lstsq(Msch, r, rcond=None)[0]  # noqa: E731
        XRdZ = [X[k] @ Rd[k] @ Zinv[k] for k in range(nb)]

        def direction(sigma, corr_blocks, corr_lp):
            R = [sigma * mu * np.eye(n) - X[k] @ Z[k] - (corr_blocks[k] if corr_blocks else 0)
                 for k, n in enumerate(st.blocks)]
            r = sigma * mu - x * z - (corr_lp if corr_lp is not None else 0)
            RZ = [R[k] @ Zinv[k] for k in range(nb)]
            h = rp.copy()
            for c, row in enumerate(st.A):
                h[c] -= sum(_ip(A, RZ[k] - XRdZ[k]) for k, A in row.items())
            h -= st.sign * (r - x * rd) / z
            dy = solve_schur(h) if m else np.zeros(0)
            ATdy = st.AT_op(dy)
            dZ = [Rd[k] - ATdy[k] for k in range(nb)]
            dX = [_herm(RZ[k] - X[k] @ dZ[k] @ Zinv[k]) for k in range(nb)]
            dz = rd - st.sign * dy
            dx = (r - x * dz) / z if m else np.zeros(0)
            return dX, dy, dZ, dx, dz

        def steps(dX, dZ, dx, dz):
            ap = min([_max_step(X[k], dX[k]) for k in range(nb)] + [_max_step_lp(x, dx)])
            ad = min([_max_step(Z[k], dZ[k]) for k in range(nb)] + [_max_step_lp(z, dz)])
            return ap, ad

        dX, dy, dZ, dx, dz = direction(0.0, None, None)
        ap, ad = steps(dX, dZ, dx, dz)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = (sum(_ip(X[k] + ap * dX[k], Z[k] + ad * dZ[k]) for k in range(nb))
                  + float((x + ap * dx) @ (z + ad * dz))) / st.n
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
        corr = [dX[k] @ dZ[k] for k in range(nb)]
        dX, dy, dZ, dx, dz = direction(sigma, corr, dx * dz)
        ap, ad = steps(dX, dZ, dx, dz)
        gamma = 0.9 + 0.09 * min(1.0, ap, ad)
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
        X = [_herm(X[k] + ap * dX[k]) for k in range(nb)]
        x = x + ap * dx
        y = y + ad * dy
        Z = [_herm(Z[k] + ad * dZ[k]) for k in range(nb)]
        z = z + ad * dz

    if status is not SdpStatus.OPTIMAL and best is not None:
        # stagnation near the optimum: fall back to the best iterate
        X, x, y, Z, z, pobj, dobj, pinf, dinf, gap = best[2]
        if best[0] <= max(tol, LOW_ACCURACY):
            status = SdpStatus.INACCURATE

    # back to the caller's maximization and constraint scaling
    pobj_max = -pobj * st.obj_scale
    dobj_max = -dobj * st.obj_scale
    duals = z * st.obj_scale / st.row_scale
    slacks = x * st.row_scale
    return SdpSolution(X=X, objective_value=float(pobj_max), dual_objective=float(dobj_max),
                       dual_values=duals, slacks=slacks, duality_gap=float(gap),
                       primal_infeasibility=float(pinf), dual_infeasibility=float(dinf),
                       iterations=it, status=status)


def solve(prob: SdpProblem, tol: float = 1e-7, max_iter: int = 100) -> SdpSolution:
    """Solve ``prob``; on non-convergence, a phase-one probe decides INFEASIBLE."""
    sol = _ipm(prob, tol, max_iter)
    if sol.status not in SOLVED and not feasibility_probe(prob):
        sol.status = SdpStatus.INFEASIBLE
    return sol


def constraint_violation(prob: SdpProblem, X: Sequence[np.ndarray]) -> np.ndarray:
    """Per-constraint violation relative to ``1 + |bound|`` (0 when satisfied)."""
    out = np.zeros(len(prob.constraints))
    for c, con in enumerate(prob.constraints):
        lhs = sum(_ip(A, X[k]) for k, A in con.coeffs.items())
        v = lhs - con.bound if con.sense == LE else con.bound - lhs
        out[c] = max(0.0, v) / (1.0 + abs(con.bound))
    return out


def feasibility_probe(prob: SdpProblem, tol: float = 1e-7, margin: float = 1e-6) -> bool:
    """True iff the constraint set has a strictly feasible point.

    Solves ``max t`` over ``X_b >= t I`` with every inequality tightened by
    ``t (1 + |bound|)`` and ``t <= 1``; strict feasibility holds iff the
    optimum is positive. ``X_b = Y_b + (tau - 1) I`` with ``tau = t + 1 >= 0``
    keeps the auxiliary program in the solver's own format. A large trace
    cap keeps it bounded.
    """
    nb = len(prob.blocks)
    tau = nb  # index of the scalar block
    blocks = list(prob.blocks) + [1]
    objective = [None] * nb + [np.ones((1, 1))]
    cons = []
    scale = 1.0
    for con in prob.constraints:
        trA = float(sum(np.real(np.trace(A)) for A in con.coeffs.values()))
        w = 1.0 + abs(con.bound)
        scale = max(scale, abs(con.bound))
        if con.sense == LE:
            coef, rhs = trA + w, con.bound + trA + w
        else:
            coef, rhs = trA - w, con.bound + trA - w
        coeffs = dict(con.coeffs)
        coeffs[tau] = np.array([[coef]])
        cons.append(Constraint(coeffs, con.sense, rhs))
    cons.append(Constraint({tau: np.ones((1, 1))}, LE, 2.0))
    cons.append(Constraint({k: np.eye(n) for k, n in enumerate(prob.blocks)}, LE,
                           1e6 * scale * max(1, sum(prob.blocks))))
    aux = SdpProblem(blocks, objective, cons)
    sol = _ipm(aux, tol, 200)
    if sol.status not in SOLVED:
        return False
    return sol.objective_value - 1.0 > margin


def extract_rank1(X: np.ndarray, rel_tol: float | None = None):
    """Dominant rank-1 factor of a PSD matrix.

    Returns ``(sqrt(xi_max) u_max, xi_2 / xi_max)``. Ties in the top
    eigenvalue are broken towards the eigenvector with the largest leading
    magnitudes, and the phase is fixed so its first nonzero entry is real
    positive. ``rel_tol`` is accepted for the caller's bookkeeping only.
    """
    X = _herm(np.asarray(X, complex))
    n = X.shape[0]
    w, U = np.linalg.eigh(X)
    top = w[-1]
    if top <= 0:
        return np.zeros(n, complex), 0.0
    second = w[-2] if n > 1 else 0.0
    ratio = max(second, 0.0) / top
    tied = np.flatnonzero(w >= top - 1e-12 * abs(top))
    cands = [U[:, j] for j in tied]
    u = max(cands, key=lambda v: tuple(np.round(np.abs(v), 12)))
    nz = np.flatnonzero(np.abs(u) > 1e-12)
    if nz.size:
        u = u * np.exp(-1j * np.angle(u[nz[0]]))
    return np.sqrt(top) * u, float(ratio)


def dump_problem(prob: SdpProblem, fh=None) -> str:
    """Plain-text dump: dimension header, then row-major ``re im`` pairs."""
    out = io.StringIO()
    out.write("sdp-problem 1\n")
    out.write("blocks " + " ".join(str(n) for n in prob.blocks) + "\n")

    def mat(A):
        for r in A:
            out.write(" ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in r) + "\n")

    for k, C in enumerate(prob.objective):
        out.write(f"objective {k}\n")
        mat(C)
    out.write(f"constraints {len(prob.constraints)}\n")
    for c, con in enumerate(prob.constraints):
        out.write(f"constraint {c} {con.sense} {float(con.bound)!r} {len(con.coeffs)}\n")
        for k in sorted(con.coeffs):
            out.write(f"block {k}\n")
            mat(con.coeffs[k])
    text = out.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def load_problem(text: str) -> SdpProblem:
    lines = iter(text.splitlines())
    if next(lines).split()[0] != "sdp-problem":
        raise ValueError("not an sdp problem dump")
    blocks = [int(t) for t in next(lines).split()[1:]]

    def mat(n):
        rows = []
        for _ in range(n):
            vals = [float(t) for t in next(lines).split()]
            rows.append([complex(vals[2 * i], vals[2 * i + 1]) for i in range(n)])
        return np.array(rows, dtype=complex).reshape(n, n)

    objective = []
    for k, n in enumerate(blocks):
        next(lines)
        objective.append(mat(n))
    m = int(next(lines).split()[1])
    cons = []
    for _ in range(m):
        _, _, sense, bound, nblk = next(lines).split()
        coeffs = {}
        for _ in range(int(nblk)):
            k = int(next(lines).split()[1])
            coeffs[k] = mat(blocks[k])
        cons.append(Constraint(coeffs, sense, float(bound)))
    return SdpProblem(blocks, objective, cons)
