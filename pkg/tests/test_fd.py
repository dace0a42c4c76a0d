import math

import numpy as np
import pytest

from largesol import (
    DomainError,
    NonConvergence,
    NonlinearitySpec,
    PhiSpec,
    SolverDefect,
    fd_comparison_check,
    fd_solve,
    solve_ball_dirichlet,
)

POWER2, CUBIC = PhiSpec.power(2.0), NonlinearitySpec.power(3.0)
EXPONENTIAL = NonlinearitySpec.exponential()


def manufactured_weight(r):
    return 12.0 / (1.0 + r * r)


def test_zero_boundary_value():
    solution = fd_solve(POWER2, CUBIC, 1.0, 2, 1.0, 0.0, M=64)
    assert np.all(solution.v == 0.0)
    assert solution.sweeps == (1, 1)


def test_cosh(unit_phi):
    solution = fd_solve(
        unit_phi, NonlinearitySpec.power(1.0), 1.0, 1, 1.0, math.cosh(1.0), M=1024
    )
    assert solution.M == 1024
    assert solution.grid[-1] == 1.0
    assert solution.v[-1] == math.cosh(1.0)
    assert np.max(np.abs(solution.v - np.cosh(solution.grid))) <= 1e-5
    gap = np.max(np.abs(solution.upper - solution.lower))
    assert gap <= 10 * solution.tol * math.cosh(1.0)


def cosh_weight(r):
    # u = cosh r solves (1/r²)(r² · 2u')' = ρ u for this ρ
    r = np.asarray(r, dtype=float)
    safe = np.where(r > 0.0, r, 1.0)
    return 2.0 + 4.0 * np.where(r > 0.0, np.tanh(safe) / safe, 1.0)


def test_quadratic_is_reproduced():
    phi, nl = PhiSpec.power(2.0), NonlinearitySpec.power(1.0)
    for M in (64, 128):
        solution = fd_solve(phi, nl, manufactured_weight, 3, 1.0, 2.0, M=M)
        error = np.max(np.abs(solution.v - (1.0 + solution.grid**2)))
        assert error <= 1e-7


def test_second_order_convergence():
    phi, nl = PhiSpec.power(2.0), NonlinearitySpec.power(1.0)
    errors = []
    for M in (64, 128):
        solution = fd_solve(phi, nl, cosh_weight, 3, 1.0, math.cosh(1.0), M=M)
        errors.append(np.max(np.abs(solution.v - np.cosh(solution.grid))))
    assert errors[1] > 1e-8
    order = math.log2(errors[0] / errors[1])
    assert order >= 1.8


def test_ladders_are_recorded():
    solution = fd_solve(POWER2, CUBIC, 1.0, 2, 1.0, 10.0, M=256)
    lower, upper = solution.sweeps
    assert lower == len(solution.history["lower"]) and lower >= 1
    assert upper == len(solution.history["upper"]) and upper >= 1
    assert np.all(solution.lower <= solution.upper + 1e-9)
    profile = solution.profile(PhiSpec.power(2.0))
    assert profile.source == "fd"
    assert profile.params["M"] == 256
    assert profile.alpha == solution.v[0]


SOURCES = {"cubic": (NonlinearitySpec.power(3.0), 10.0), "exp": (EXPONENTIAL, 4.0)}


@pytest.mark.parametrize("N", [1, 3])
@pytest.mark.parametrize("source", sorted(SOURCES))
@pytest.mark.parametrize(
    "phi",
    [PhiSpec.power(2.0), PhiSpec.p_and_q(2.0, 4.0), PhiSpec.elasticity(2.0)],
    ids=lambda phi: phi.family,
)
def test_agrees_with_shooting(phi, source, N):
    nl, k = SOURCES[source]
    solution = fd_solve(phi, nl, 1.0, N, 1.0, k, M=1024, tol=1e-9)
    shooting = solve_ball_dirichlet(phi, nl, 1.0, N, 1.0, k, r_eval=solution.grid)
    assert np.max(np.abs(shooting.u - solution.v)) <= 1e-3 * max(1.0, k)


def test_comparison():
    phi, nl = PhiSpec.power(2.0), NonlinearitySpec.power(3.0)
    base = fd_solve(phi, nl, 1.0, 2, 1.0, 5.0, M=128)
    higher = fd_solve(phi, nl, 1.0, 2, 1.0, 6.0, M=128)
    heavier = fd_solve(phi, nl, 2.0, 2, 1.0, 5.0, M=128)

    same = fd_comparison_check(base, base)
    assert same.ordered and same.equal

    report = fd_comparison_check(base, higher)
    assert report.ordered and not report.equal
    assert report.worst_margin > 0.0

    assert fd_comparison_check(heavier, base).ordered

    with pytest.raises(SolverDefect):
        fd_comparison_check(higher, base)
    assert not fd_comparison_check(higher, base, strict=False).ordered


def test_comparison_needs_a_shared_grid():
    phi, nl = PhiSpec.power(2.0), NonlinearitySpec.power(3.0)
    coarse = fd_solve(phi, nl, 1.0, 2, 1.0, 5.0, M=64)
    fine = fd_solve(phi, nl, 1.0, 2, 1.0, 5.0, M=128)
    with pytest.raises(DomainError):
        fd_comparison_check(coarse, fine)


def test_invalid_arguments():
    phi, nl = PhiSpec.power(2.0), NonlinearitySpec.power(3.0)
    with pytest.raises(DomainError):
        fd_solve(phi, nl, 1.0, 2, 1.0, 5.0, M=32)
    with pytest.raises(DomainError):
        fd_solve(phi, nl, 1.0, 2, 1.0, -5.0, M=64)
    with pytest.raises(DomainError):
        fd_solve(phi, nl, 1.0, 0, 1.0, 5.0, M=64)
    with pytest.raises(DomainError):
        fd_solve(phi, nl, lambda r: r - 0.5, 2, 1.0, 5.0, M=64)


def test_sweep_budget():
    with pytest.raises(NonConvergence) as info:
        fd_solve(POWER2, CUBIC, 1.0, 2, 1.0, 10.0, M=64, max_sweeps=1)
    assert len(info.value.history) == 1
