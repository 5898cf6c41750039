import os
import json
import math
import pickle
import dataclasses

from types import SimpleNamespace

import numpy as np
import pytest

import wedgespectra.band

from wedgespectra import ConfigError, GeometryError, GeometryClass, SolverError
from wedgespectra.geometry import from_spherical, face_angles
from wedgespectra.config import SolverConfig, SigmaConfig
from wedgespectra.spec1d import theta0, xi0, degennes_mu
from wedgespectra.band import (CACHE, BandCache, band_point, band_value, band_scan,
                               scan_to_minimum, fiber_pairs, default_tau_grid, sigma,
                               e_star, ess_spectrum_bottom, tail_limits, s_infinity,
                               ground_energy, extrude_generalized, continuity_gap,
                               fmt, jsonable, write_band_csv, write_report_json,
                               truncation_floor, BAND_COLUMNS)
from wedgespectra.bounds import sigma_lower_bound
from wedgespectra.fem2d import decay_rate, artificial_boundary_ratio

FIG_FIELD = from_spherical(math.pi / 2, math.pi / 4)
EDGE_FIELD = from_spherical(0, 0)
SMALL = SolverConfig(L=6.0, n=8)
SMALL_SIGMA = SigmaConfig(L=8.0, n=16)

slow = pytest.mark.skipif(os.environ.get("WEDGE_SPECTRA_SLOW") != "1",
                          reason="set WEDGE_SPECTRA_SLOW=1")


##
## band points and scans
##


def test_edge_field_band_is_a_parabola():
    # B = (0, 0, 1): the potential is tau^2 everywhere
    s0 = band_value(EDGE_FIELD, math.pi / 3, 0.0, SMALL)
    for tau in (-1.0, 0.4, 1.5):
        assert abs(band_value(EDGE_FIELD, math.pi / 3, tau, SMALL) - s0 - tau * tau) < 1e-7


def test_band_cache():
    cache = BandCache()
    assert cache.put("k", (1.0, 0.0)) == (1.0, 0.0)
    assert cache.put("k", (2.0, 0.0)) == (1.0, 0.0)
    assert len(cache) == 1 and cache.get("other") is None
    cache.clear()
    assert len(cache) == 0
    CACHE.clear()
    first = band_point(FIG_FIELD, math.pi / 2, 0.3, SMALL)
    assert len(CACHE) == 1
    assert band_point(FIG_FIELD, math.pi / 2, 0.3, SMALL) is first
    band_point(FIG_FIELD, math.pi / 2, 0.3, SMALL(n=10))
    assert len(CACHE) == 2


def test_band_cache_is_bounded():
    cache = BandCache(maxsize=2)
    cache.put("a", (1.0, 0.0))
    cache.put("b", (2.0, 0.0))
    assert cache.get("a") == (1.0, 0.0)
    cache.put("c", (3.0, 0.0))
    assert len(cache) == 2
    assert cache.get("b") is None and cache.get("a") == (1.0, 0.0)
    with pytest.raises(ConfigError):
        BandCache(maxsize=0)


def test_worker_processes_match_serial_scan():
    grid = [-0.5, 0.0, 0.5, 1.0]
    CACHE.clear()
    serial = band_scan(FIG_FIELD, 4 * math.pi / 5, grid, SMALL, threads=1)
    CACHE.clear()
    pooled = band_scan(FIG_FIELD, 4 * math.pi / 5, grid, SMALL, threads=3)
    assert np.array_equal(serial.values, pooled.values)
    assert np.array_equal(serial.residuals, pooled.residuals)
    assert len(CACHE) >= len(grid)


def test_errors_survive_pickling():
    err = SolverError("no convergence", "lowest_eigenpairs", best_residual=1e-3, k=1)
    back = pickle.loads(pickle.dumps(err))
    assert type(back) is SolverError
    assert str(back) == str(err)
    assert back.best_residual == 1e-3 and back.context == err.context


def test_fiber_pairs_are_sorted():
    pairs = fiber_pairs(FIG_FIELD, 4 * math.pi / 5, 0.5, SMALL(k=3))
    values = [p.value for p in pairs]
    assert len(pairs) == 3 and values == sorted(values)
    assert values[0] == pytest.approx(band_value(FIG_FIELD, 4 * math.pi / 5, 0.5, SMALL),
                                      abs=1e-8)
    with pytest.raises(GeometryError):
        fiber_pairs(FIG_FIELD, math.pi, 0.0, SMALL)


def test_band_scan():
    band = band_scan(FIG_FIELD, 4 * math.pi / 5, [0.5, -0.5, 0.0, 0.5], SMALL, threads=2)
    assert band.taus.tolist() == [-0.5, 0.0, 0.5]
    assert len(band.values) == len(band.residuals) == 3
    assert (band.residuals <= SMALL.tol).all()
    assert band.min_value <= band.values.min()
    assert band.taus[0] <= band.argmin_tau <= band.taus[-1]
    assert band.solver_meta is SMALL
    with pytest.raises(ConfigError):
        band_scan(FIG_FIELD, 4 * math.pi / 5, [], SMALL)


def test_scan_extends_past_the_grid_end():
    band = scan_to_minimum(EDGE_FIELD, math.pi / 3, [0.5, 0.6, 0.7], SMALL, threads=2)
    assert band.taus[0] < 0 < band.taus[-1]
    assert abs(band.argmin_tau) < 1e-3
    assert band.min_value == pytest.approx(band_value(EDGE_FIELD, math.pi / 3, 0.0, SMALL),
                                           abs=1e-6)


def test_default_tau_grid():
    grid = default_tau_grid()
    assert len(grid) == 71 and grid[0] == -3.0 and grid[-1] == 4.0
    assert 0.0 in grid


##
## half-space energies and reference values
##


def test_sigma_exact_ends():
    assert sigma(0.0) == theta0().value
    assert sigma(math.pi / 2) == 1.0
    assert sigma(0.01) == theta0().value
    with pytest.raises(GeometryError):
        sigma(2.0)


def test_sigma_quarter_angle():
    value = sigma(math.pi / 4, SigmaConfig(L=10.0, n=30))
    assert theta0().value - 1e-3 < value < 1
    assert value >= sigma_lower_bound(math.pi / 4) - 1e-6


def test_sigma_is_capped_at_one(monkeypatch):
    def overshoot(*args, **kwargs):
        return [SimpleNamespace(value=1.02)]

    monkeypatch.setattr(wedgespectra.band, "lowest_eigenpairs", overshoot)
    cfg = SigmaConfig(L=8.0, n=12)
    try:
        assert sigma(1.3, cfg) == 1.0
    finally:
        sigma.cache_clear()


def test_e_star_never_above_one():
    # theta0 = 80 degrees, where the truncated half-plane value overshoots
    geom = face_angles(from_spherical(math.pi / 2, 0), math.pi / 9)
    assert e_star(geom, SMALL_SIGMA) <= 1.0
    assert sigma(4 * math.pi / 9, SMALL_SIGMA) <= sigma(math.pi / 2, SMALL_SIGMA)


def test_e_star_and_essential_spectrum():
    tangent = face_angles(FIG_FIELD, math.pi / 2)
    assert e_star(tangent) == theta0().value
    assert ess_spectrum_bottom(tangent, 0.3) == pytest.approx(degennes_mu(0.3))
    assert ess_spectrum_bottom(face_angles(FIG_FIELD, math.pi / 3), 0.0) == math.inf
    assert ess_spectrum_bottom(face_angles(FIG_FIELD, 4 * math.pi / 5), 0.0) == 1.0


def test_ess_spectrum_bottom_tilted_tangent():
    # a tangent field off the edge plane: the infimum over xi is below both branches
    field = from_spherical(math.pi / 3, math.pi / 6)
    alpha = 2 * math.pi / 3
    geom = face_angles(field, alpha)
    assert geom.klass is GeometryClass.TANGENT
    bottom = ess_spectrum_bottom(geom, 0.5)
    c, s = math.cos(field.gamma), math.sin(field.gamma)
    samples = [degennes_mu(xi * c + 0.5 * s) + (xi * s - 0.5 * c) ** 2
               for xi in np.linspace(-3, 3, 13)]
    assert theta0().value - 1e-6 <= bottom <= min(samples) + 1e-6


def test_tail_limits():
    assert tail_limits(face_angles(EDGE_FIELD, 1.0)) == (math.inf, math.inf)
    assert s_infinity(face_angles(EDGE_FIELD, 1.0)) == math.inf
    geom = face_angles(FIG_FIELD, 4 * math.pi / 5)
    lo, hi = tail_limits(geom, SMALL_SIGMA)
    assert lo == sigma(geom.theta_plus, SMALL_SIGMA)
    assert hi == sigma(geom.theta_minus, SMALL_SIGMA)
    assert s_infinity(geom, SMALL_SIGMA) == min(lo, hi)


##
## reports and files
##


def test_ground_energy_report(tmp_path):
    alpha = math.pi / 3
    report = ground_energy(FIG_FIELD, alpha, SMALL, SMALL_SIGMA, [-0.5, 0.0, 0.5, 1.0],
                           threads=2)
    geom = face_angles(FIG_FIELD, alpha)
    assert report.klass is GeometryClass.OUTGOING
    assert report.E == report.band.min_value
    assert report.E_star == sigma(geom.theta0, SMALL_SIGMA)
    assert report.s_ess_inf == math.inf
    assert report.strict == (report.E < report.E_star - report.margin)
    assert report.margin == SMALL.margin
    path = tmp_path / "report.json"
    write_report_json(report, path)
    data = json.loads(path.read_text())
    assert data["s_ess_inf"] == "inf"
    assert data["klass"] == "outgoing"
    assert data["E"] == report.E
    assert data["solver"]["n"] == SMALL.n
    assert data["tau_c"] == report.band.argmin_tau


def test_tangent_report():
    report = ground_energy(FIG_FIELD, math.pi / 2, SMALL, SMALL_SIGMA,
                           [-1.0, -0.5, 0.0, 0.5, 1.0], threads=2)
    assert report.klass is GeometryClass.TANGENT
    assert report.E_star == theta0().value
    assert report.s_ess_inf == pytest.approx(degennes_mu(report.band.argmin_tau))
    assert 1.0 in report.s_inf_limits
    assert report.truncation_floor == (math.pi / (2 * SMALL.L)) ** 2
    assert report.asdict()["truncation_floor"] == report.truncation_floor
    tolerance = report.E_star + report.margin
    inside = dataclasses.replace(report, E=tolerance + report.truncation_floor / 2)
    assert not inside.anomalous
    assert dataclasses.replace(inside, truncation_floor=0.0).anomalous


def test_truncation_floor_only_for_tangent_fields():
    cfg = SolverConfig(L=20.0)
    assert truncation_floor(face_angles(FIG_FIELD, math.pi / 2), cfg) == (math.pi / 40) ** 2
    assert truncation_floor(face_angles(FIG_FIELD, math.pi / 3), cfg) == 0.0
    assert truncation_floor(face_angles(FIG_FIELD, 4 * math.pi / 5), cfg) == 0.0


def test_band_csv_is_deterministic(tmp_path):
    grid = [-0.5, 0.0, 0.5]
    CACHE.clear()
    write_band_csv(band_scan(FIG_FIELD, 4 * math.pi / 5, grid, SMALL, 2), tmp_path / "a.csv")
    CACHE.clear()
    write_band_csv(band_scan(FIG_FIELD, 4 * math.pi / 5, grid, SMALL, 1), tmp_path / "b.csv")
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0] == ",".join(BAND_COLUMNS)
    assert len(lines) == 4
    assert lines[1].split(",")[2:5] == ["6.00000000000e+00", "8", "2"]


def test_fmt_and_jsonable():
    assert fmt(True) == "true" and fmt(-math.inf) == "-inf" and fmt(math.nan) == "nan"
    assert fmt(np.int64(3)) == "3" and fmt(0.5) == "5.00000000000e-01"
    assert jsonable({"a": (1.0, math.inf), "b": np.float64(2.0), "c": np.bool_(True)}) \
        == {"a": [1.0, "inf"], "b": 2.0, "c": True}


def test_extrude_generalized():
    pair = fiber_pairs(FIG_FIELD, 4 * math.pi / 5, 0.25, SMALL)[0]
    g = extrude_generalized(pair, 0.25, "phi.txt")
    assert g.energy == pair.value and g.profile == "phi.txt"
    assert not g.invariant_along_edge
    assert g.formula.startswith("exp(i*0.25*x3)")


##
## expensive checks
##


@slow
def test_strict_inequality_for_ingoing_field():
    cfg, sig = SolverConfig(L=12.0, n=48), SigmaConfig(L=16.0, n=64)
    report = ground_energy(FIG_FIELD, 4 * math.pi / 5, cfg, sig)
    assert report.klass is GeometryClass.INGOING
    assert report.strict
    assert report.E < report.s_ess_inf


@slow
def test_tangent_energy_near_theta0():
    report = ground_energy(FIG_FIELD, math.pi / 2)
    assert abs(report.E - theta0().value) <= 1e-2
    assert not report.anomalous


@slow
def test_continuity_in_alpha():
    cfg = SolverConfig(L=12.0, n=48)
    assert continuity_gap(FIG_FIELD, 0.3 * math.pi, 0.01, cfg) < 5e-2


@slow
def test_sigma_table_is_monotone():
    thetas = np.linspace(0.0, math.pi / 2, 10)
    values = [sigma(float(t)) for t in thetas]
    assert values[0] == theta0().value and values[-1] == 1.0
    assert all(b >= a - 1e-3 for a, b in zip(values[:-1], values[1:]))
    for t, value in zip(thetas, values):
        assert value >= sigma_lower_bound(float(t)) - 1e-3
        assert value <= 1.0


@slow
def test_ingoing_band_tails():
    alpha = 4 * math.pi / 5
    geom = face_angles(FIG_FIELD, alpha)
    assert geom.theta_plus == pytest.approx(3 * math.pi / 20, abs=1e-12)
    assert geom.theta_minus == pytest.approx(7 * math.pi / 20, abs=1e-12)
    report = ground_energy(FIG_FIELD, alpha)
    band = report.band
    lo, hi = sigma(geom.theta_plus), sigma(geom.theta_minus)
    assert abs(band.values[0] - lo) < 0.05 and band.taus[0] == -3.0
    assert abs(band.values[-1] - hi) < 0.05 and band.taus[-1] == 4.0
    assert band.taus[0] < band.argmin_tau < band.taus[-1]
    assert report.E < lo - 5e-3
    assert report.strict


@slow
def test_energy_decreases_to_the_thin_wedge_limit():
    cfg = SolverConfig(L=20.0, n=80)
    reports = [ground_energy(FIG_FIELD, k * math.pi / 10, cfg) for k in (1, 2, 3)]
    energies = [r.E for r in reports]
    assert energies == sorted(energies)
    assert abs(energies[0] - FIG_FIELD.b2 * xi0().value) < 0.05
    assert not any(r.anomalous for r in reports)


@slow
def test_confined_states_decay():
    cfg = SolverConfig(L=20.0, n=80)
    checked = 0
    for alpha in (0.1 * math.pi, 0.3 * math.pi):
        report = ground_energy(FIG_FIELD, alpha, cfg)
        if report.E >= report.E_star - 0.05:
            continue
        pair = fiber_pairs(FIG_FIELD, alpha, report.band.argmin_tau, cfg)[0]
        assert decay_rate(pair, pair.space.mesh) > 0
        assert artificial_boundary_ratio(pair) < 1e-5
        checked += 1
    assert checked >= 1
