import os
import csv
import math

import numpy as np
import pytest

from wedgespectra import GeometryError
from wedgespectra.geometry import MagneticField, from_spherical, face_angles
from wedgespectra.spec1d import (Grid1D, Weight, Profile1D, theta0, xi0, tau0_profile,
                                 gaussian_profile)
from wedgespectra.bounds import (quasimode_energy, small_angle_constant,
                                 small_angle_upper_bound, gaussian_upper_bound,
                                 gaussian_closed_form, sigma_lower_bound, limit_lower_bound,
                                 strictness_threshold, polar_form_energy, bound_table,
                                 write_bound_csv, BOUND_COLUMNS)
from wedgespectra.band import scan_to_minimum
from wedgespectra.config import SolverConfig

NORMAL = from_spherical(math.pi / 2, 0)
TILTED = MagneticField.from_components(0.6, 0.48, 0.64)
GRID = Grid1D(12.0, 2001)

slow = pytest.mark.skipif(os.environ.get("WEDGE_SPECTRA_SLOW") != "1",
                          reason="set WEDGE_SPECTRA_SLOW=1")


def test_gaussian_bound_matches_closed_form():
    for alpha in (0.1 * math.pi, 0.3 * math.pi, 0.41 * math.pi):
        bound, rho = gaussian_upper_bound(NORMAL, alpha)
        assert abs(bound.bound - gaussian_closed_form(alpha)) < 1e-4
        assert rho > 0 and bound.profile_id


def test_closed_form_limit():
    assert abs(gaussian_closed_form(1e-6) - math.sqrt(4 - math.pi)) < 1e-9
    values = [gaussian_closed_form(a) for a in np.linspace(0.05, 0.9, 12) * math.pi]
    assert all(v < math.sqrt(4 - math.pi) for v in values)


def test_strictness_threshold():
    assert strictness_threshold(NORMAL) == pytest.approx(0.41 * math.pi, abs=1e-12)


def test_strictness_just_below_and_above():
    for k, strict in ((36, True), (41, True), (42, False)):
        alpha = k * 0.01 * math.pi
        upper = gaussian_upper_bound(NORMAL, alpha)[0].bound
        lower = sigma_lower_bound(face_angles(NORMAL, alpha).theta0)
        assert (upper < lower) is strict


def test_quasimode_against_polar_form():
    _, z = tau0_profile()
    for profile in (gaussian_profile(1.0, GRID), z):
        q = quasimode_energy(TILTED, 0.3 * math.pi, 0.7, profile)
        assert abs(q.bound - polar_form_energy(TILTED, 0.3 * math.pi, 0.7, profile)) < 1e-4
        assert q.tau_used == pytest.approx(0.7 * math.sqrt(TILTED.b2))
        assert q.bound == pytest.approx(sum(q.breakdown))


def test_small_angle_bound_dominates_the_quasimode():
    tau0, z = tau0_profile()
    for field in (NORMAL, TILTED, from_spherical(1.0, 0.4)):
        for alpha in (0.05, 0.4, 1.2):
            q = quasimode_energy(field, alpha, tau0, z)
            assert small_angle_upper_bound(field, alpha) + 2e-4 >= q.bound
            assert q.breakdown[0] >= field.b2 * xi0().value - 2e-4
    assert small_angle_constant(NORMAL) > 0


def test_first_term_above_b2_xi0():
    for rho in (0.5, 1.0, 2.0):
        profile = gaussian_profile(rho, Grid1D(14.0, 2001))
        for tau in (-0.5, 0.8, 1.5):
            q = quasimode_energy(TILTED, 0.5, tau, profile)
            assert q.breakdown[0] >= TILTED.b2 * xi0().value - 1e-4


def test_rejected_inputs():
    for field in (from_spherical(math.pi / 2, math.pi / 2), from_spherical(0, 0)):
        with pytest.raises(GeometryError):
            gaussian_upper_bound(field, 0.5)
        with pytest.raises(GeometryError):
            strictness_threshold(field)
    with pytest.raises(GeometryError):
        small_angle_upper_bound(NORMAL, math.pi)
    flat = Profile1D.from_values(GRID, np.exp(-GRID.nodes ** 2 / 2), Weight.LEBESGUE)
    with pytest.raises(GeometryError):
        quasimode_energy(NORMAL, 0.5, 0.0, flat)


def test_lower_bounds():
    t0 = theta0().value
    values = [sigma_lower_bound(t) for t in np.linspace(0, math.pi / 2, 11)]
    assert values == sorted(values)
    assert values[0] == t0 and values[-1] == pytest.approx(1.0)
    for field in (NORMAL, TILTED, from_spherical(0.3, 1.0)):
        assert limit_lower_bound(field) > field.b2 * xi0().value
        assert t0 <= limit_lower_bound(field) <= 1 + 1e-12


def test_bound_table(tmp_path):
    alphas = [0.1 * math.pi, 0.3 * math.pi]
    rows = bound_table(NORMAL, alphas, {alphas[0]: 0.9})
    assert [r.alpha for r in rows] == alphas
    assert rows[0].E_fem == 0.9 and rows[1].E_fem is None
    assert all(r.strict_certified for r in rows)
    path = tmp_path / "bounds.csv"
    write_bound_csv(rows, path)
    with open(path) as infile:
        table = list(csv.reader(infile))
    assert tuple(table[0]) == BOUND_COLUMNS
    assert table[2][4] == "" and table[1][4] == "9.00000000000e-01"
    assert table[1][5] == "true"


@slow
def test_bounds_stay_above_computed_energy():
    cfg = SolverConfig(L=16.0, n=64)
    tau0, z = tau0_profile()
    fields = (NORMAL, from_spherical(math.pi / 2, math.pi / 4), TILTED)
    for field in fields:
        for alpha in (0.15 * math.pi, 0.3 * math.pi):
            energy = scan_to_minimum(field, alpha, None, cfg).min_value
            assert quasimode_energy(field, alpha, tau0, z).bound >= energy - 1e-3
            assert gaussian_upper_bound(field, alpha)[0].bound >= energy - 1e-3
