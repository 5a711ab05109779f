import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsswipt import sdp
from nsswipt.errors import DomainError, ShapeError
from nsswipt.sdp import GE, LE, Constraint, SdpProblem, SdpStatus

from conftest import crandn, rand_herm


def budget_problem(C, p):
    n = C.shape[0]
    return SdpProblem([n], [C], [Constraint({0: np.eye(n)}, LE, p)])


def assert_certified(prob, sol, tol=1e-7):
    assert sol.status is SdpStatus.OPTIMAL
    assert sol.duality_gap <= tol * (1 + abs(sol.objective_value))
    assert sdp.constraint_violation(prob, sol.X).max() <= tol
    for X in sol.X:
        assert np.linalg.eigvalsh(X).min() >= -1e-9 * max(1.0, np.trace(X).real)


def test_diagonal_example():
    prob = budget_problem(np.diag([2.0, 1.0]).astype(complex), 1.0)
    sol = sdp.solve(prob)
    assert_certified(prob, sol)
    assert sol.objective_value == pytest.approx(2.0, rel=1e-7)
    assert np.allclose(sol.X[0], np.diag([1.0, 0.0]), atol=1e-6)


def closed_form_errors(tol, n_draws=100, seed=11):
    """Relative errors against p * max(xi_max(C), 0), normwise and pointwise."""
    rng = np.random.default_rng(seed)
    normwise, pointwise = [], []
    for _ in range(n_draws):
        n = int(rng.integers(2, 9))
        C = rand_herm(rng, n)
        p = float(rng.uniform(0.1, 10))
        sol = sdp.solve(budget_problem(C, p), tol=tol)
        xi = np.linalg.eigvalsh(C)
        ref = p * max(xi[-1], 0.0)
        err = abs(sol.objective_value - ref)
        normwise.append(err / max(abs(ref), p * np.abs(xi).max()))
        if ref > 0.1:
            pointwise.append(err / ref)
    return np.array(normwise), np.array(pointwise)


def test_eigenvalue_closed_form_100_draws():
    normwise, pointwise = closed_form_errors(tol=1e-7)
    assert normwise.max() <= 1e-6
    assert pointwise.max() <= 1e-6


def test_eigenvalue_closed_form_tight_tolerance():
    normwise, pointwise = closed_form_errors(tol=1e-10)
    assert normwise.max() <= 1e-9


def test_two_block_grid_oracle():
    # max tr(C1 X1) + tr(C2 X2)  s.t. tr X1 + tr X2 <= 1,  tr(A X1) >= 0.3
    C1 = np.array([[1.0, 0.3 - 0.2j], [0.3 + 0.2j, 0.2]])
    C2 = np.array([[0.6, 0.1j], [-0.1j, 0.4]])
    A = np.array([[0.1, 0.0], [0.0, 1.0]], complex)
    prob = SdpProblem([2, 2], [C1, C2], [
        Constraint({0: np.eye(2), 1: np.eye(2)}, LE, 1.0),
        Constraint({0: A}, GE, 0.3)])
    sol = sdp.solve(prob)
    assert_certified(prob, sol)
    # rank-1 candidates: X1 = p u u^H; the value is linear in p, so only the endpoints matter
    th, ph = np.meshgrid(np.linspace(0, np.pi / 2, 1501), np.linspace(0, 2 * np.pi, 1501))
    u = np.stack([np.cos(th), np.sin(th) * np.exp(1j * ph)], axis=-1)
    quad = lambda M: np.real(np.einsum("...i,ij,...j->...", u.conj(), M, u))  # noqa: E731
    c, a = quad(C1), quad(A)
    xi2 = max(np.linalg.eigvalsh(C2)[-1], 0)
    best = -np.inf
    for p1 in (0.3 / np.maximum(a, 1e-12), np.ones_like(a)):
        ok = (p1 <= 1) & (p1 * a >= 0.3 - 1e-12)
        best = max(best, np.max(np.where(ok, p1 * c + (1 - p1) * xi2, -np.inf)))
    assert sol.objective_value == pytest.approx(best, abs=1e-4)
    assert sol.objective_value >= best - 1e-7  # the grid never beats the optimum


def test_duality_and_complementary_slackness():
    rng = np.random.default_rng(3)
    h = crandn(rng, 4)
    C = rand_herm(rng, 4) + 2 * np.eye(4)
    prob = SdpProblem([4], [C], [Constraint({0: np.eye(4)}, LE, 2.0),
                                 Constraint({0: np.outer(h, h.conj())}, GE, 0.5)])
    sol = sdp.solve(prob)
    assert_certified(prob, sol)
    assert sol.dual_objective >= sol.objective_value - sol.duality_gap - 1e-12
    assert np.all(sol.dual_values >= -1e-12)
    assert np.all(np.abs(sol.dual_values * sol.slacks) <= 1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100))
def test_scaling_covariance(seed, s):
    rng = np.random.default_rng(seed)
    C = rand_herm(rng, 3)
    h = crandn(rng, 3)
    cons = [Constraint({0: np.eye(3)}, LE, 1.0),
            Constraint({0: np.outer(h, h.conj())}, GE, 0.1 * np.linalg.norm(h) ** 2)]
    a = sdp.solve(SdpProblem([3], [C], cons), tol=1e-10)
    b = sdp.solve(SdpProblem([3], [s * C], cons), tol=1e-10)
    assert b.objective_value == pytest.approx(s * a.objective_value, rel=1e-6, abs=1e-8)
    if a.objective_value > 1e-3:
        assert np.allclose(a.X[0], b.X[0], atol=1e-4)


def test_infeasible_and_probe_examples():
    h = np.array([1.0, 1j, 0.5])
    H = np.outer(h, h.conj())
    nh2 = np.linalg.norm(h) ** 2
    short = SdpProblem([3], [np.eye(3)], [Constraint({0: np.eye(3)}, LE, 1.0),
                                          Constraint({0: H}, GE, 2 * nh2)])
    ok = SdpProblem([3], [np.eye(3)], [Constraint({0: np.eye(3)}, LE, 1.0),
                                       Constraint({0: H}, GE, 0.5 * nh2)])
    assert not sdp.feasibility_probe(short)
    assert sdp.feasibility_probe(ok)
    assert sdp.feasibility_probe(SdpProblem([2], [None], []))
    assert sdp.solve(short).status is SdpStatus.INFEASIBLE


def test_extract_rank1_examples():
    u = np.array([1, 1j, -1]) / np.sqrt(3)
    v, r = sdp.extract_rank1(4 * np.outer(u, u.conj()))
    assert r == pytest.approx(0, abs=1e-12)
    assert np.allclose(np.outer(v, v.conj()), 4 * np.outer(u, u.conj()))
    assert v[0].imag == 0 and v[0].real > 0
    v, r = sdp.extract_rank1(np.diag([4, 4e-9]))
    assert r == pytest.approx(1e-9) and np.allclose(v, [2, 0])
    v, r = sdp.extract_rank1(np.zeros((3, 3)))
    assert r == 0 and not v.any()


def test_extract_rank1_tie_is_deterministic():
    X = np.eye(3)
    a, _ = sdp.extract_rank1(X)
    b, _ = sdp.extract_rank1(X.copy())
    assert np.array_equal(a, b)
    assert np.linalg.norm(a) == pytest.approx(1.0)


def test_validation_errors():
    with pytest.raises(DomainError):
        SdpProblem([2], [np.array([[0, 1], [0, 0]])], [])
    with pytest.raises(ShapeError):
        SdpProblem([2], [np.eye(3)], [])
    with pytest.raises(ShapeError):
        SdpProblem([2], [np.eye(2)], [Constraint({1: np.eye(2)}, LE, 1)])


def test_dump_round_trip():
    rng = np.random.default_rng(0)
    prob = SdpProblem([2, 3], [rand_herm(rng, 2), rand_herm(rng, 3)],
                      [Constraint({0: np.eye(2), 1: np.eye(3)}, LE, 1.5),
                       Constraint({1: rand_herm(rng, 3)}, GE, -0.25)])
    text = sdp.dump_problem(prob)
    back = sdp.load_problem(text)
    assert back.blocks == prob.blocks
    for A, B in zip(back.objective, prob.objective):
        assert np.array_equal(A, B)
    assert sdp.dump_problem(back) == text
    assert sdp.solve(back).objective_value == pytest.approx(sdp.solve(prob).objective_value)
