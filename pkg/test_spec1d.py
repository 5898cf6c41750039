import math

import numpy as np
import pytest
import sympy

from scipy.linalg import eigh, eigh_tridiagonal

from wedgespectra import ConfigError, TruncationError
from wedgespectra.numerics import richardson_limit
from wedgespectra.spec1d import (Grid1D, Weight, Profile1D, degennes_mu, halfline_zeta,
                                 theta0, xi0, tau0_profile, moments, gaussian_profile,
                                 halfline_form, form_coefficients, pencil, sturm_count)


def fd_eigenvalue(tau, h, t_max, weighted):
    """lowest eigenvalue by cell-centered finite differences

    Natural condition at 0, Dirichlet at `t_max` (ghost reflection). The
    weighted problem `-(r u')'/r + (r - tau)^2 u` is symmetrized with the
    cell weights `r_i`.
    """
    n = int(round(t_max / h))
    t = (np.arange(n) + 0.5) * h
    faces = np.arange(1, n + 1) * h if weighted else np.ones(n)
    w = t if weighted else np.ones(n)
    diag = np.zeros(n)
    diag[:-1] += faces[:-1]
    diag[1:] += faces[:-1]
    diag[-1] += 2 * faces[-1]
    diag = diag / h ** 2 + w * (t - tau) ** 2
    off = -faces[:-1] / h ** 2
    scale = 1 / np.sqrt(w)
    d = diag * scale * scale
    e = off * scale[:-1] * scale[1:]
    return float(eigh_tridiagonal(d, e, eigvals_only=True,
                                  select="i", select_range=(0, 0))[0])


def fd_oracle(tau, weighted, h=0.004, t_max=12.0):
    values = [fd_eigenvalue(tau, h, t_max, weighted),
              fd_eigenvalue(tau, h / 2, t_max, weighted)]
    return richardson_limit(2, values)


def test_exact_values():
    assert abs(degennes_mu(0.0) - 1) < 1e-6
    assert abs(halfline_zeta(0.0)[0] - 2) < 1e-6


def test_mu_against_finite_differences():
    assert abs(degennes_mu(-2.0) - fd_oracle(-2.0, False)) < 1e-6
    assert abs(degennes_mu(0.7) - fd_oracle(0.7, False)) < 1e-6


def test_zeta_against_finite_differences():
    assert abs(halfline_zeta(1.0)[0] - fd_oracle(1.0, True)) < 1e-5


def test_theta0():
    r = theta0()
    assert 0.589 <= r.value <= 0.591
    assert abs(r.arg ** 2 - r.value) <= 1e-5
    assert r.bracket[0] <= r.arg <= r.bracket[1]
    assert theta0() is r


def test_xi0():
    r = xi0()
    assert 0.861 <= r.value <= 0.865
    assert theta0().value < r.value <= math.sqrt(4 - math.pi)
    tau0, z = tau0_profile()
    assert tau0 == r.arg and z.weight is Weight.RADIAL
    # the ground state at tau0 realizes Xi0 as a Rayleigh quotient
    assert abs(halfline_form(tau0, z) - r.value) < 1e-4


def test_lower_bounds_on_samples():
    t0, x0 = theta0().value, xi0().value
    for tau in np.linspace(-1.0, 3.0, 9):
        assert degennes_mu(tau) >= t0 - 1e-6
        assert halfline_zeta(tau)[0] >= x0 - 1e-6


def test_continuity():
    for tau in (-0.5, 0.77, 2.0):
        assert abs(degennes_mu(tau + 1e-3) - degennes_mu(tau)) < 1e-2
        assert abs(halfline_zeta(tau + 1e-3)[0] - halfline_zeta(tau)[0]) < 1e-2


def test_refinement_monotonicity():
    coarse = Grid1D(12.0, 1201)
    for tau in (0.0, 0.8):
        for fun in (degennes_mu, lambda t, g, e: halfline_zeta(t, g, e)[0]):
            raw = fun(tau, coarse, False)
            fine = fun(tau, coarse.refined(), False)
            assert fine <= raw + 1e-11


def test_truncation_monotonicity():
    # same spacing 0.01, longer interval
    short, long = Grid1D(12.0, 1201), Grid1D(14.0, 1401)
    for tau in (0.0, 1.5):
        assert degennes_mu(tau, long, False) <= degennes_mu(tau, short, False) + 1e-11
        assert (halfline_zeta(tau, long, False)[0]
                <= halfline_zeta(tau, short, False)[0] + 1e-11)


def test_ground_state_sign():
    for tau in (-1.0, 0.5, 2.5):
        _, p = halfline_zeta(tau)
        assert p.values.min() >= -1e-12
        assert abs(p.norm - 1) < 1e-12


def test_truncation_error():
    with pytest.raises(TruncationError):
        degennes_mu(20.0, Grid1D(12.0, 2001))


def test_grid_validation():
    with pytest.raises(ConfigError):
        Grid1D(12.0, 8)
    with pytest.raises(ConfigError):
        Grid1D(-1.0)
    assert Grid1D(12.0, 101).refined().n == 201


def test_sturm_count_matches_dense():
    grid = Grid1D(6.0, 24)
    ad, ao, md, mo = pencil(grid, 0.4, Weight.RADIAL)
    A = np.diag(ad) + np.diag(ao, 1) + np.diag(ao, -1)
    M = np.diag(md) + np.diag(mo, 1) + np.diag(mo, -1)
    values = eigh(A, M, eigvals_only=True)
    for lam in (0.5, 3.0, 11.0, 40.0):
        assert sturm_count(ad, ao, md, mo, lam) == int(np.sum(values < lam))


def test_gaussian_moments_closed_form():
    r = sympy.symbols("r", positive=True)
    g = sympy.exp(-r ** 2)
    norm = sympy.integrate(g * r, (r, 0, sympy.oo))
    r2 = sympy.integrate(r ** 2 * g * r, (r, 0, sympy.oo)) / norm
    sqrt_r = sympy.integrate(r * g * r, (r, 0, sympy.oo)) / norm
    assert sympy.simplify(r2 - 1) == 0
    assert sympy.simplify(sqrt_r - sympy.sqrt(sympy.pi) / 2) == 0
    m2, m1 = moments(gaussian_profile(1.0, Grid1D(12.0, 4001)))
    assert abs(m2 - float(r2)) < 1e-5
    assert abs(m1 - float(sqrt_r)) < 1e-5


def test_moments_scaling():
    grid = Grid1D(12.0, 4001)
    a, _ = moments(gaussian_profile(1.0, grid))
    b, _ = moments(gaussian_profile(2.5, grid))
    assert abs(a / b - 2.5) < 1e-5


def test_moments_need_radial_profile():
    grid = Grid1D(12.0, 401)
    p = Profile1D.from_values(grid, np.exp(-grid.nodes ** 2 / 2), Weight.LEBESGUE)
    with pytest.raises(ConfigError):
        moments(p)


def test_form_coefficients_gaussian():
    # q_tau(exp(-r^2/2)) = 2 - sqrt(pi) tau + tau^2 in L^2(r dr)
    p = gaussian_profile(1.0, Grid1D(12.0, 4001))
    q0, c, m = form_coefficients(p)
    assert abs(q0 / m - 2) < 5e-5
    assert abs(c / m - math.sqrt(math.pi) / 2) < 5e-5
    for tau in (-1.0, 0.5, 2.0):
        expected = 2 - math.sqrt(math.pi) * tau + tau * tau
        assert abs(halfline_form(tau, p) - expected) < 1e-4
