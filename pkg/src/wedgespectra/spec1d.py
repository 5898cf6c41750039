"""Half-line model operators

Two Sturm-Liouville problems on `(0, t_max)`, both discretized with P1
finite elements, natural condition at `0` and Dirichlet at `t_max`:

 - de Gennes: `-u'' + (t - tau)^2 u`, lowest eigenvalue `mu(tau)`,
   minimum `Theta0` reached at `xi0 = sqrt(Theta0)`
 - weighted: the form `int (|u'|^2 + (r - tau)^2 |u|^2) r dr`, lowest
   eigenvalue `zeta(tau)`, minimum `Xi0` reached at `tau0`

Eigenvalues are located by bisection on Sturm counts (inertia of the
tridiagonal pencil `A - lambda M`), which is exact up to rounding and does
not depend on an iterative solver.
"""

import enum
import math
import logging
import functools

from dataclasses import dataclass, field

import numpy as np

from scipy.integrate import trapezoid
from scipy.linalg import eigh_tridiagonal, solve_banded

from . import ConfigError, TruncationError, SolverError
from .numerics import MinimizerResult, scan_then_golden

logger = logging.getLogger(__name__)

# 3-point Gauss-Legendre is exact up to degree 5, enough for weight * potential * phi^2
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(3)

BISECTION_TOL = 1e-12
DECAY_TOL = 1e-6
DECAY_WINDOW = 0.6  # length of the tail checked by the truncation test


class Weight(enum.Enum):
    LEBESGUE = "dt"
    RADIAL = "r dr"


@dataclass(frozen=True)
class Grid1D:
    """uniform grid of `n` nodes on `[0, t_max]`"""

    t_max: float
    n: int = 2001

    def __post_init__(self):
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ConfigError("truncation length must be positive", "Grid1D",
                              t_max=self.t_max)
        if self.n < 16:
            raise ConfigError("at least 16 nodes required", "Grid1D", n=self.n)

    @classmethod
    def default(cls, tau: float = 0.0) -> "Grid1D":
        """grid adapted to a ground state localized around `tau`

        >>> Grid1D.default(0.5), Grid1D.default(4.0).t_max
        (Grid1D(t_max=12.0, n=2001), 14.0)
        """
        return cls(float(max(12.0, tau + 10.0)), 2001)

    @property
    def spacing(self) -> float:
        return self.t_max / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n)

    def refined(self) -> "Grid1D":
        "nested grid with half the spacing"
        return Grid1D(self.t_max, 2 * self.n - 1)


@dataclass(frozen=True, eq=False)
class Profile1D:
    """nodal function on a `Grid1D` with its weighted moments

    `norm` is `int u^2 w`, `moment_r2` is `int r^2 u^2 w` and
    `moment_sqrt_r` is `int r u^2 w` (`w` is `1` or `r`), all computed with
    the trapezoidal rule on the grid.
    """

    grid: Grid1D
    values: np.ndarray = field(repr=False)
    weight: Weight
    norm: float
    moment_r2: float
    moment_sqrt_r: float
    label: str = ""

    @classmethod
    def from_values(cls, grid: Grid1D, values, weight: Weight,
                    label: str = "") -> "Profile1D":
        """normalize `values` and compute the moments

        >>> g = Grid1D(12.0, 4001)
        >>> p = Profile1D.from_values(g, np.exp(-g.nodes ** 2 / 2), Weight.RADIAL)
        >>> round(p.norm, 12), round(p.moment_r2, 5), round(p.moment_sqrt_r, 5)
        (1.0, 1.0, 0.88623)
        """
        u = np.asarray(values, dtype=float)
        if u.shape != (grid.n,):
            raise ConfigError("values do not match the grid", "Profile1D",
                              expected=grid.n, got=u.shape)
        t = grid.nodes
        w = t if weight is Weight.RADIAL else np.ones_like(t)
        norm = trapezoid(u * u * w, t)
        if not norm > 0:
            raise ConfigError("zero profile", "Profile1D")
        u = u / math.sqrt(norm)
        if u[np.argmax(np.abs(u))] < 0:
            u = -u
        u.setflags(write=False)
        return cls(grid, u, weight,
                   float(trapezoid(u * u * w, t)),
                   float(trapezoid(t * t * u * u * w, t)),
                   float(trapezoid(t * u * u * w, t)),
                   label)


def element_quadrature(grid: Grid1D):
    "element ends, lengths, Gauss points `(E, 3)` and weights `(E, 3)`"
    t = grid.nodes
    a, b = t[:-1], t[1:]
    h = b - a
    x = ((a + b) / 2)[:, None] + (h / 2)[:, None] * _GAUSS_X[None, :]
    wq = (h / 2)[:, None] * _GAUSS_W[None, :]
    return a, b, h, x, wq


def _weight_at(x, weight: Weight):
    return x if weight is Weight.RADIAL else np.ones_like(x)


def stiffness(grid: Grid1D, weight: Weight) -> tuple[np.ndarray, np.ndarray]:
    "diagonal and off-diagonal of `int w u' v'` on every node"
    _, _, h, x, wq = element_quadrature(grid)
    k = (wq * _weight_at(x, weight)).sum(axis=1) / h ** 2
    diag = np.zeros(grid.n)
    diag[:-1] += k
    diag[1:] += k
    return diag, -k


def mass(grid: Grid1D, weight: Weight, coef=None) -> tuple[np.ndarray, np.ndarray]:
    "diagonal and off-diagonal of `int w c u v` on every node"
    a, b, h, x, wq = element_quadrature(grid)
    w = wq * _weight_at(x, weight)
    if coef is not None:
        w = w * coef(x)
    p0 = (b[:, None] - x) / h[:, None]
    p1 = (x - a[:, None]) / h[:, None]
    diag = np.zeros(grid.n)
    diag[:-1] += (w * p0 * p0).sum(axis=1)
    diag[1:] += (w * p1 * p1).sum(axis=1)
    return diag, (w * p0 * p1).sum(axis=1)


def pencil(grid: Grid1D, tau: float, weight: Weight):
    """tridiagonal `(A, M)` with the Dirichlet node at `t_max` removed

    Returns `(a_diag, a_off, m_diag, m_off)`.
    """
    kd, ko = stiffness(grid, weight)
    pd, po = mass(grid, weight, lambda x: (x - tau) ** 2)
    md, mo = mass(grid, weight)
    return (kd + pd)[:-1], (ko + po)[:-1], md[:-1], mo[:-1]


def sturm_count(a_diag, a_off, m_diag, m_off, lam: float) -> int:
    """number of eigenvalues of the pencil strictly below `lam`

    Counts the negative pivots of the `LDL^T` factorization of `A - lam M`.

    >>> sturm_count([2.0, 2.0], [-1.0], [1.0, 1.0], [0.0], 2.0)
    1
    """
    count = 0
    pivot = 1.0
    first = True
    for i, (ad, md) in enumerate(zip(a_diag, m_diag)):
        d = ad - lam * md
        if not first:
            e = a_off[i - 1] - lam * m_off[i - 1]
            d -= e * e / pivot
        first = False
        if d == 0.0:
            d = -1e-300
        if d < 0:
            count += 1
        pivot = d
    return count


def _lumped_estimate(a_diag, a_off, m_diag, m_off) -> float:
    lumped = np.array(m_diag, dtype=float)
    lumped[:-1] += m_off
    lumped[1:] += m_off
    d = np.asarray(a_diag) / lumped
    e = np.asarray(a_off) / np.sqrt(lumped[:-1] * lumped[1:])
    return float(eigh_tridiagonal(d, e, eigvals_only=True,
                                  select="i", select_range=(0, 0))[0])


def lowest_eigenvalue(a_diag, a_off, m_diag, m_off, tol: float = BISECTION_TOL) -> float:
    """lowest eigenvalue of a tridiagonal pencil by Sturm bisection

    >>> n = 200
    >>> h = 1 / (n + 1)
    >>> lam = lowest_eigenvalue([2 / h] * n, [-1 / h] * (n - 1),
    ...                         [4 * h / 6] * n, [h / 6] * (n - 1))
    >>> abs(lam - math.pi ** 2) < 1e-3
    True
    """
    ad, ao = [float(x) for x in a_diag], [float(x) for x in a_off]
    md, mo = [float(x) for x in m_diag], [float(x) for x in m_off]
    est = _lumped_estimate(ad, ao, md, mo)
    width = 1e-3 * max(1.0, abs(est))
    lo, hi = est - width, est + width
    for _ in range(64):
        if sturm_count(ad, ao, md, mo, lo) == 0:
            break
        lo -= width
        width *= 2
    else:
        raise SolverError("cannot bracket lowest eigenvalue from below",
                          "lowest_eigenvalue", estimate=est)
    width = 1e-3 * max(1.0, abs(est))
    for _ in range(64):
        if sturm_count(ad, ao, md, mo, hi) >= 1:
            break
        hi += width
        width *= 2
    else:
        raise SolverError("cannot bracket lowest eigenvalue from above",
                          "lowest_eigenvalue", estimate=est)
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = (lo + hi) / 2
        if mid <= lo or mid >= hi:
            break
        if sturm_count(ad, ao, md, mo, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def _inverse_iteration(a_diag, a_off, m_diag, m_off, lam: float, steps: int = 3):
    n = len(a_diag)
    shift = lam - 1e-9 * max(1.0, abs(lam))
    band = np.zeros((3, n))
    band[0, 1:] = np.asarray(a_off) - shift * np.asarray(m_off)
    band[1, :] = np.asarray(a_diag) - shift * np.asarray(m_diag)
    band[2, :-1] = band[0, 1:]
    mband = np.zeros((3, n))
    mband[0, 1:] = m_off
    mband[1, :] = m_diag
    mband[2, :-1] = m_off
    x = np.ones(n)
    for _ in range(steps):
        mx = mband[1] * x
        mx[:-1] += mband[0, 1:] * x[1:]
        mx[1:] += mband[2, :-1] * x[:-1]
        x = solve_banded((1, 1), band, mx)
        x /= np.max(np.abs(x))
    return x


def _check_decay(values: np.ndarray, t: np.ndarray, where: str, **context):
    tail = values[t >= t[-1] - DECAY_WINDOW]
    peak = float(np.max(np.abs(values)))
    if float(np.max(np.abs(tail))) > DECAY_TOL * peak:
        raise TruncationError("ground state has not decayed at t_max", where,
                              **context)


@functools.lru_cache(maxsize=4096)
def _ground_state(tau: float, grid: Grid1D, weight: Weight):
    a_diag, a_off, m_diag, m_off = pencil(grid, tau, weight)
    lam = lowest_eigenvalue(a_diag, a_off, m_diag, m_off)
    vec = np.append(_inverse_iteration(a_diag, a_off, m_diag, m_off, lam), 0.0)
    _check_decay(vec, grid.nodes, "ground_state", tau=tau, t_max=grid.t_max,
                 weight=weight.value)
    vec.setflags(write=False)
    logger.debug("ground state %s tau=%g n=%d -> %.12g",
                 weight.value, tau, grid.n, lam)
    return lam, vec


def _eigenvalue(tau: float, grid: Grid1D | None, weight: Weight, extrapolate: bool):
    tau = float(tau)
    if grid is None:
        grid = Grid1D.default(tau)
    elif grid.t_max < tau + 10:
        logger.warning("truncation t_max=%g is short for tau=%g", grid.t_max, tau)
    lam, vec = _ground_state(tau, grid, weight)
    if extrapolate:
        fine, _ = _ground_state(tau, grid.refined(), weight)
        lam = (4 * fine - lam) / 3
    return lam, vec, grid


def degennes_mu(tau: float, grid: Grid1D | None = None, extrapolate: bool = True) -> float:
    """lowest eigenvalue `mu(tau)` of the de Gennes operator

    >>> round(degennes_mu(0.0), 6)
    1.0
    >>> degennes_mu(-2.0) > degennes_mu(0.0) > degennes_mu(0.75)
    True
    """
    return _eigenvalue(tau, grid, Weight.LEBESGUE, extrapolate)[0]


def halfline_zeta(tau: float, grid: Grid1D | None = None,
                  extrapolate: bool = True) -> tuple[float, Profile1D]:
    """lowest eigenvalue `zeta(tau)` of the weighted operator and its ground state

    The profile is normalized in `L^2(r dr)` and carries its moments.

    >>> z, p = halfline_zeta(0.0)
    >>> round(z, 6), round(p.norm, 9), round(p.moment_r2, 4)
    (2.0, 1.0, 1.0)
    """
    lam, vec, grid = _eigenvalue(tau, grid, Weight.RADIAL, extrapolate)
    return lam, Profile1D.from_values(grid, vec, Weight.RADIAL, f"z[{tau:g}]")


def _check_tol(tol, where):
    if not tol >= 1e-8:
        raise ConfigError("tolerance must be at least 1e-8", where, tol=tol)


@functools.lru_cache(maxsize=16)
def theta0(tol: float = 1e-7) -> MinimizerResult:
    """`(xi0, Theta0)`, the minimum of `mu`

    >>> r = theta0()
    >>> 0.589 <= r.value <= 0.591, abs(r.arg ** 2 - r.value) <= 1e-5
    (True, True)
    """
    _check_tol(tol, "theta0")
    res = scan_then_golden(degennes_mu, np.arange(0.0, 2.0 + 1e-9, 0.05), tol)
    gap = abs(res.arg ** 2 - res.value)
    if gap > 1e-5:
        logger.warning("xi0^2 - Theta0 = %.3g exceeds 1e-5", gap)
    logger.info("Theta0 = %.10f at xi0 = %.8f", res.value, res.arg)
    return res


@functools.lru_cache(maxsize=16)
def xi0(tol: float = 1e-7) -> MinimizerResult:
    """`(tau0, Xi0)`, the minimum of `zeta`

    >>> r = xi0()
    >>> 0.861 <= r.value <= 0.865
    True
    """
    _check_tol(tol, "xi0")
    res = scan_then_golden(lambda t: halfline_zeta(t)[0],
                           np.arange(0.0, 4.0 + 1e-9, 0.05), tol)
    logger.info("Xi0 = %.10f at tau0 = %.8f", res.value, res.arg)
    return res


def tau0_profile(tol: float = 1e-7) -> tuple[float, Profile1D]:
    "`tau0` and the normalized ground state `z_tau0`"
    res = xi0(tol)
    return res.arg, halfline_zeta(res.arg)[1]


def moments(p: Profile1D) -> tuple[float, float]:
    """`(||r u||^2, ||sqrt(r) u||^2)` in `L^2(r dr)`

    Scaling `u(r) -> sqrt(c) u(sqrt(c) r)` divides the first moment by `c`:

    >>> g = Grid1D(12.0, 4001)
    >>> m1, _ = moments(gaussian_profile(1.0, g))
    >>> m4, _ = moments(gaussian_profile(4.0, g))
    >>> round(m1 / m4, 5)
    4.0
    """
    if p.weight is not Weight.RADIAL:
        raise ConfigError("moments need a profile in L^2(r dr)", "moments",
                          weight=p.weight.value)
    return p.moment_r2, p.moment_sqrt_r


def gaussian_profile(rho: float, grid: Grid1D | None = None) -> Profile1D:
    """trial function `exp(-rho r^2 / 2)` normalized in `L^2(r dr)`

    Exact moments are `1 / rho` and `sqrt(pi / rho) / 2`.
    """
    if not rho > 0:
        raise ConfigError("Gaussian parameter must be positive", "gaussian_profile",
                          rho=rho)
    if grid is None:
        grid = Grid1D(max(12.0, math.sqrt(60.0 / rho)), 2001)
    values = np.exp(-rho * grid.nodes ** 2 / 2)
    _check_decay(values, grid.nodes, "gaussian_profile", rho=rho, t_max=grid.t_max)
    return Profile1D.from_values(grid, values, Weight.RADIAL, f"gauss[{rho:g}]")


def form_coefficients(profile: Profile1D) -> tuple[float, float, float]:
    """`(q_0, c, m)` such that `q_tau(u) = q_0 - 2 tau c + tau^2 m`

    Computed with the exact P1 matrices of the profile's grid, the
    Dirichlet node included.
    """
    grid, u = profile.grid, profile.values
    kd, ko = stiffness(grid, profile.weight)
    pd, po = mass(grid, profile.weight, lambda x: x * x)
    cd, co = mass(grid, profile.weight, lambda x: x)
    md, mo = mass(grid, profile.weight)

    def quad(d, o):
        return float(d @ (u * u) + 2 * o @ (u[:-1] * u[1:]))

    return quad(kd + pd, ko + po), quad(cd, co), quad(md, mo)


def halfline_form(tau: float, profile: Profile1D) -> float:
    """Rayleigh quotient `q_tau(u) / ||u||^2` of a profile

    >>> g = Grid1D(12.0, 4001)
    >>> round(halfline_form(0.0, gaussian_profile(1.0, g)), 4)
    2.0
    """
    q0, c, m = form_coefficients(profile)
    return (q0 - 2 * tau * c + tau * tau * m) / m
