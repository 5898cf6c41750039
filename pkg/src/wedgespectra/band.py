"""Band functions of the wedge and the reference energies

`s(tau)` is the lowest eigenvalue of the fiber operator on the sector at
Fourier parameter `tau`, the ground energy of the wedge is its infimum.
It is compared with `E* = sigma(theta0)` where `sigma` is the half-space
ground energy as a function of the angle between field and boundary.
"""

import csv
import json
import math
import logging
import threading
import functools

from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np

from . import BandScanError, ConfigError, GeometryError
from .config import SolverConfig, SigmaConfig, default_threads
from .geometry import (MagneticField, SectorGeometry, GeometryClass,
                       face_angles, tail_directions, TANGENT_TOL)
from .numerics import golden_section, scan_then_golden
from .spec1d import degennes_mu, theta0
from .fem2d import (build_rhombus_mesh, build_halfplane_mesh, assemble,
                    lowest_eigenpairs, EigenPair)

logger = logging.getLogger(__name__)

SMALL_THETA = 0.05
REFINE_TOL = 1e-4
MAX_EXTENSIONS = 5


@functools.lru_cache(maxsize=32)
def rhombus(alpha: float, L: float, n: int):
    return build_rhombus_mesh(alpha, L, n)


@functools.lru_cache(maxsize=8)
def halfplane(L: float, n: int):
    return build_halfplane_mesh(L, n)


class BandCache:
    """thread-safe map `(field, alpha, tau, cfg) -> (value, residual)`

    At most `maxsize` entries are kept, the least recently used go first.
    """

    def __init__(self, maxsize: int = 20_000):
        if maxsize < 1:
            raise ConfigError("cache size must be positive", "BandCache", maxsize=maxsize)
        self.maxsize = maxsize
        self._data = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            if key not in self._data:
                return None
            self._data.move_to_end(key)
            return self._data[key]

    def put(self, key, value):
        with self._lock:
            self._data.setdefault(key, value)
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)
            return self._data[key]

    def clear(self):
        with self._lock:
            self._data.clear()

    def __len__(self):
        with self._lock:
            return len(self._data)


CACHE = BandCache()


def fiber_pairs(field: MagneticField, alpha: float, tau: float,
                cfg: SolverConfig = SolverConfig()) -> list[EigenPair]:
    """lowest `cfg.k` eigenpairs of the fiber operator at `tau` on `R(alpha, L)`"""
    face_angles(field, alpha)
    mesh = rhombus(float(alpha), cfg.L, cfg.n)
    A, M = assemble(mesh, field, tau, cfg.order)
    return lowest_eigenpairs(A, M, cfg.k, cfg.tol)


def _solve_point(field: MagneticField, alpha: float, tau: float,
                 cfg: SolverConfig) -> tuple[float, float]:
    pair = fiber_pairs(field, alpha, tau, cfg(k=1))[0]
    logger.debug("s(%s, alpha=%g, tau=%g) = %.12g", field, alpha, tau, pair.value)
    return pair.value, pair.residual


def _key(field, alpha, tau, cfg):
    return (field, float(alpha), float(tau), cfg)


def band_point(field: MagneticField, alpha: float, tau: float,
               cfg: SolverConfig = SolverConfig()) -> tuple[float, float]:
    "cached `(s(tau), residual)`"
    key = _key(field, alpha, tau, cfg)
    hit = CACHE.get(key)
    if hit is not None:
        return hit
    return CACHE.put(key, _solve_point(field, alpha, tau, cfg))


def band_value(field: MagneticField, alpha: float, tau: float,
               cfg: SolverConfig = SolverConfig()) -> float:
    """lowest eigenvalue `s(B, S_alpha; tau)` on the truncated rhombus"""
    return band_point(field, alpha, tau, cfg)[0]


@dataclass(frozen=True, eq=False)
class BandFunction:
    """sampled band with its refined minimum"""

    taus: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    argmin_tau: float
    min_value: float
    solver_meta: SolverConfig

    def rows(self):
        cfg = self.solver_meta
        for tau, value, res in zip(self.taus, self.values, self.residuals):
            yield float(tau), float(value), cfg.L, cfg.n, cfg.order, float(res)


def _band(taus, values, residuals, cfg, argmin=None, minimum=None) -> BandFunction:
    order = np.argsort(taus)
    taus = np.asarray(taus, float)[order]
    values = np.asarray(values, float)[order]
    residuals = np.asarray(residuals, float)[order]
    if argmin is None and len(values):
        i = int(np.argmin(values))
        argmin, minimum = float(taus[i]), float(values[i])
    return BandFunction(taus, values, residuals,
                        math.nan if argmin is None else argmin,
                        math.nan if minimum is None else minimum, cfg)


def _evaluate(field, alpha, taus, cfg, threads):
    # ARPACK holds a global lock, so points are spread over processes
    done, failed = {}, {}
    todo = []
    for tau in taus:
        hit = CACHE.get(_key(field, alpha, tau, cfg))
        if hit is None:
            todo.append(tau)
        else:
            done[tau] = hit
    if threads <= 1 or len(todo) <= 1:
        for tau in todo:
            try:
                done[tau] = band_point(field, alpha, tau, cfg)
            except Exception as err:
                failed[tau] = err
        return done, failed
    with ProcessPoolExecutor(max_workers=min(threads, len(todo))) as pool:
        jobs = {pool.submit(_solve_point, field, alpha, t, cfg): t for t in todo}
        for job in as_completed(jobs):
            tau = jobs[job]
            try:
                done[tau] = CACHE.put(_key(field, alpha, tau, cfg), job.result())
            except Exception as err:
                failed[tau] = err
    return done, failed


def band_scan(field: MagneticField, alpha: float, tau_grid,
              cfg: SolverConfig = SolverConfig(), threads: int | None = None,
              refine_tol: float = REFINE_TOL) -> BandFunction:
    """evaluate the band on `tau_grid` in parallel, then refine its minimum

    Refinement is a golden-section search between the neighbours of the
    discrete argmin; the scanned minimum is kept if refinement is worse.
    """
    taus = sorted({float(t) for t in tau_grid})
    if not taus:
        raise ConfigError("empty tau grid", "band_scan")
    threads = threads or default_threads()
    logger.info("band scan alpha=%g, %d points, %d processes", alpha, len(taus), threads)
    done, failed = _evaluate(field, alpha, taus, cfg, threads)
    if failed:
        partial = _band(list(done), [v for v, _ in done.values()],
                        [r for _, r in done.values()], cfg)
        tau, err = min(failed.items())
        raise BandScanError(f"band point failed ({err})", "band_scan",
                            partial=partial, tau=tau, failed=len(failed),
                            best_residual=getattr(err, "best_residual", None))
    values = [done[t][0] for t in taus]
    residuals = [done[t][1] for t in taus]
    i = int(np.argmin(values))
    argmin, minimum = taus[i], values[i]
    if len(taus) > 1:
        lo, hi = taus[max(i - 1, 0)], taus[min(i + 1, len(taus) - 1)]
        x, fx, _ = golden_section(lambda t: band_value(field, alpha, t, cfg),
                                  lo, hi, refine_tol)
        if fx < minimum:
            argmin, minimum = x, fx
    return _band(taus, values, residuals, cfg, argmin, minimum)


def default_tau_grid() -> np.ndarray:
    "`k / 10` for `-30 <= k <= 40`"
    return np.arange(-30, 41) / 10


def scan_to_minimum(field: MagneticField, alpha: float, tau_grid=None,
                    cfg: SolverConfig = SolverConfig(),
                    threads: int | None = None) -> BandFunction:
    """band scan, extended while the minimum sits at an end of the grid"""
    taus = np.asarray(default_tau_grid() if tau_grid is None else tau_grid, float)
    band = band_scan(field, alpha, taus, cfg, threads)
    step = float(np.min(np.diff(np.unique(taus)))) if len(np.unique(taus)) > 1 else 0.1
    for _ in range(MAX_EXTENSIONS):
        lo, hi = float(band.taus[0]), float(band.taus[-1])
        i = int(np.argmin(band.values))
        if len(band.taus) == 1 or 0 < i < len(band.taus) - 1:
            break
        if i == 0:
            extra = lo - step * np.arange(1, 21)
        else:
            extra = hi + step * np.arange(1, 21)
        logger.warning("band minimum at grid end tau=%g, extending the scan",
                       band.argmin_tau)
        taus = np.concatenate([band.taus, np.round(extra, 12)])
        band = band_scan(field, alpha, taus, cfg, threads)
    return band


@functools.lru_cache(maxsize=256)
def sigma(theta: float, cfg: SigmaConfig = SigmaConfig()) -> float:
    """ground energy of the half-space with the field at angle `theta` to the boundary

    The two ends are exact branches:

    >>> sigma(0.0) == theta0().value, sigma(math.pi / 2)
    (True, 1.0)

    In between the truncated half-plane value is capped at `1`, the energy
    of the full space; near `pi/2` the weakly bound state overshoots it.
    """
    if not (-TANGENT_TOL <= theta <= math.pi / 2 + TANGENT_TOL):
        raise GeometryError("angle must lie in [0, pi/2]", "sigma", theta=theta)
    if abs(theta - math.pi / 2) <= TANGENT_TOL:
        return 1.0
    if theta < SMALL_THETA:
        if theta > 0:
            logger.warning("sigma(%g): angle below %g, using Theta0", theta, SMALL_THETA)
        return theta0().value
    hp_field = MagneticField.from_components(math.sin(theta), math.cos(theta), 0.0)
    mesh = halfplane(cfg.L, cfg.n)
    A, M = assemble(mesh, hp_field, 0.0, cfg.order)
    value = lowest_eigenpairs(A, M, 1, cfg.tol)[0].value
    if value > 1.0:
        logger.debug("sigma(%.6f): truncated value %.10f capped at 1", theta, value)
        value = 1.0
    logger.info("sigma(%.6f) = %.10f", theta, value)
    return value


def e_star(geom: SectorGeometry, cfg: SigmaConfig = SigmaConfig()) -> float:
    """`E* = sigma(theta0)`, the lowest energy of the faces and of the full space"""
    return min(sigma(geom.theta0, cfg), 1.0)


def ess_spectrum_bottom(geom: SectorGeometry, tau: float) -> float:
    """bottom of the essential spectrum of the fiber operator at `tau`

    Outgoing fields give a compact resolvent (`+inf`), ingoing ones `1`.
    For a tangent field the bottom is the infimum over `xi` of
    `mu(xi cos g + tau sin g) + (xi sin g - tau cos g)^2`.
    """
    if geom.klass is GeometryClass.OUTGOING:
        return math.inf
    if geom.klass is GeometryClass.INGOING:
        return 1.0
    c, s = math.cos(geom.field.gamma), math.sin(geom.field.gamma)
    if c < 1e-12:
        return degennes_mu(tau)

    def fiber(xi):
        return degennes_mu(xi * c + tau * s) + (xi * s - tau * c) ** 2

    centers = [(theta0().arg - tau * s) / c]
    if s > 1e-12:
        centers.append(tau * c / s)
    lo = min(centers) - 4.0
    hi = min(max(centers) + 4.0, lo + 40.0)
    return scan_then_golden(fiber, np.linspace(lo, hi, 41), 1e-6).value


def tail_limits(geom: SectorGeometry, cfg: SigmaConfig = SigmaConfig()) -> tuple[float, float]:
    """predicted limits of the band as `tau -> -inf` and `tau -> +inf`

    In each direction, the smallest `sigma` of the faces reached there;
    without any face, `1` for an ingoing field and `+inf` otherwise.
    """
    if geom.field.gamma <= TANGENT_TOL:
        return (math.inf, math.inf)
    dirs = tail_directions(geom)
    angles = (geom.theta_plus, geom.theta_minus)
    out = []
    for side in (-1, 1):
        reached = [sigma(a, cfg) for a, d in zip(angles, dirs) if d == side]
        if reached:
            out.append(min(reached))
        elif geom.klass is GeometryClass.INGOING:
            out.append(1.0)
        else:
            out.append(math.inf)
    return out[0], out[1]


def s_infinity(geom: SectorGeometry, cfg: SigmaConfig = SigmaConfig()) -> float:
    """`liminf` of the band at infinity

    `sigma(max(theta+, theta-))` for a tangent field, `E*` otherwise
    (`+inf` for a field along the edge).
    """
    return min(tail_limits(geom, cfg))


def truncation_floor(geom: SectorGeometry, cfg: SolverConfig) -> float:
    "Dirichlet cost `(pi / 2L)^2` of a state spread along a tangent face"
    if geom.klass is not GeometryClass.TANGENT:
        return 0.0
    return (math.pi / (2 * cfg.L)) ** 2


@dataclass(frozen=True, eq=False)
class EnergyReport:
    """ground energy of the wedge and everything it is compared with"""

    E: float
    E_star: float
    s_ess_inf: float
    s_inf_limits: tuple[float, float]
    klass: GeometryClass
    strict: bool
    margin: float
    geometry: SectorGeometry = field(repr=False)
    band: BandFunction = field(repr=False)
    bounds: dict = field(default_factory=dict, repr=False)
    truncation_floor: float = 0.0

    @property
    def anomalous(self) -> bool:
        """`E` above `E*` beyond the margin, which the theory excludes

        The Dirichlet cost `truncation_floor` of the truncated domain is
        tolerated on top of the margin.
        """
        return self.E > self.E_star + self.margin + self.truncation_floor

    def asdict(self) -> dict:
        geom = self.geometry
        out = {
            "field": list(geom.field.components),
            "alpha": geom.alpha,
            "theta_plus": geom.theta_plus,
            "theta_minus": geom.theta_minus,
            "klass": str(self.klass),
            "E": self.E,
            "tau_c": self.band.argmin_tau,
            "E_star": self.E_star,
            "s_ess_inf": self.s_ess_inf,
            "s_inf_minus": self.s_inf_limits[0],
            "s_inf_plus": self.s_inf_limits[1],
            "strict": self.strict,
            "margin": self.margin,
            "anomalous": self.anomalous,
            "truncation_floor": self.truncation_floor,
            "solver": self.band.solver_meta.asdict(),
        }
        out.update(self.bounds)
        return out


def ground_energy(field: MagneticField, alpha: float,
                  cfg: SolverConfig = SolverConfig(),
                  sigma_cfg: SigmaConfig = SigmaConfig(),
                  tau_grid=None, threads: int | None = None) -> EnergyReport:
    """`E(B, W_alpha)` as the minimum of the band, with its comparison data"""
    geom = face_angles(field, alpha)
    band = scan_to_minimum(field, alpha, tau_grid, cfg, threads)
    energy = band.min_value
    estar = e_star(geom, sigma_cfg)
    margin = cfg.margin
    report = EnergyReport(
        E=energy,
        E_star=estar,
        s_ess_inf=ess_spectrum_bottom(geom, band.argmin_tau),
        s_inf_limits=tail_limits(geom, sigma_cfg),
        klass=geom.klass,
        strict=energy < estar - margin,
        margin=margin,
        geometry=geom,
        band=band,
        truncation_floor=truncation_floor(geom, cfg),
    )
    if report.anomalous:
        logger.warning("E=%.6f above E*=%.6f + %.3g for %s alpha=%g",
                       energy, estar, margin, field, alpha)
    logger.info("E(%s, alpha=%g) = %.8f at tau=%.5f, E*=%.8f",
                field, alpha, energy, band.argmin_tau, estar)
    return report


@dataclass(frozen=True)
class GeneralizedEigenfunction:
    """descriptor of `psi(x1, x2, x3) = exp(i tau_c x3) Phi(x1, x2)`"""

    tau_c: float
    energy: float
    profile: str | None = None

    @property
    def formula(self) -> str:
        return f"exp(i*{self.tau_c:.12g}*x3) * Phi(x1, x2)"

    @property
    def invariant_along_edge(self) -> bool:
        return self.tau_c == 0


def extrude_generalized(pair: EigenPair, tau_c: float, profile=None) -> GeneralizedEigenfunction:
    """generalized eigenfunction of the wedge built on the fiber ground state

    `profile` is where `Phi` was exported, if it was.

    >>> g = GeneralizedEigenfunction(0.0, 0.59)
    >>> g.invariant_along_edge, g.formula
    (True, 'exp(i*0*x3) * Phi(x1, x2)')
    """
    return GeneralizedEigenfunction(float(tau_c), pair.value,
                                    None if profile is None else str(profile))


def continuity_gap(field: MagneticField, alpha: float, delta: float = 0.01,
                     cfg: SolverConfig = SolverConfig(), tau_grid=None,
                     threads: int | None = None) -> float:
    """`|E(alpha) - E(alpha + delta)|` from two band scans"""
    one = scan_to_minimum(field, alpha, tau_grid, cfg, threads).min_value
    two = scan_to_minimum(field, alpha + delta, tau_grid, cfg, threads).min_value
    return abs(one - two)


def fmt(x) -> str:
    """fixed 12 significant digits

    >>> fmt(1 / 3), fmt(math.inf), fmt(2)
    ('3.33333333333e-01', 'inf', '2')
    """
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.11e}"


BAND_COLUMNS = ("tau", "s_value", "L", "n", "order", "residual")


def write_band_csv(band: BandFunction, path) -> None:
    with open(path, "w", newline="") as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(BAND_COLUMNS)
        for row in band.rows():
            writer.writerow(fmt(x) for x in row)


def jsonable(value):
    "floats as numbers, infinities as strings, tuples as lists"
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return fmt(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_report_json(report: EnergyReport, path) -> None:
    with open(path, "w") as out:
        json.dump(jsonable(report.asdict()), out, indent=2, sort_keys=True)
        out.write("\n")
