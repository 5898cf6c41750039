"""Quasimode upper bounds for thin wedges

A radial trial function `u` (with its rescaling `u_sc(r) = sqrt(b2) u(sqrt(b2) r)`)
placed in the fiber at `tau sqrt(b2)` has the energy

    b2 q_tau(u) + (alpha^2 / 12) ||r u||^2 b3^2 / b2
      + (1 - sinc alpha) / 2 ||r u||^2 (b1^2 - b2^2) / b2
      + 2 tau b2 (1 - sinc(alpha / 2)) ||sqrt(r) u||^2

which bounds the ground energy of the wedge from above. Comparing it
with the lower bound `sqrt(Theta0^2 cos^2 t + sin^2 t)` of `sigma`
certifies `E < E*` on a range of openings.
"""

import csv
import math
import logging

from dataclasses import dataclass

import numpy as np

from . import GeometryError
from .band import fmt
from .geometry import MagneticField, face_angles
from .numerics import sinc, one_minus_sinc, scan_then_golden
from .spec1d import (Profile1D, Weight, Grid1D, theta0, xi0, tau0_profile,
                     gaussian_profile, halfline_form, form_coefficients,
                     stiffness, mass, element_quadrature)

logger = logging.getLogger(__name__)

ALPHA_STEP = 0.01 * math.pi


@dataclass(frozen=True)
class QuasimodeBound:
    """energy of a radial quasimode, term by term

    `breakdown` holds the `b2 q_tau`, `b3^2`, `b1^2 - b2^2` and
    `sinc(alpha/2)` terms, in that order.
    """

    alpha: float
    tau_used: float
    bound: float
    breakdown: tuple[float, float, float, float]
    profile_id: str


def _transverse(field: MagneticField, where: str) -> tuple[float, float, float]:
    b1, b2, b3 = field.components
    if not b2 > 1e-12:
        raise GeometryError("b2 = 0 is not covered by the radial quasimodes",
                            where, b=field.components)
    return b1, b2, b3


def quasimode_energy(field: MagneticField, alpha: float, tau: float,
                     profile: Profile1D) -> QuasimodeBound:
    """energy of the rescaled profile in the fiber `tau sqrt(b2)`

    For small openings the bound tends to its first term:

    >>> from .geometry import from_spherical
    >>> g = Grid1D(12.0, 2001)
    >>> q = quasimode_energy(from_spherical(math.pi / 2, 0), 1e-6, 0.0, gaussian_profile(1.0, g))
    >>> abs(q.bound - q.breakdown[0]) < 1e-12
    True
    """
    b1, b2, b3 = _transverse(field, "quasimode_energy")
    if profile.weight is not Weight.RADIAL:
        raise GeometryError("profile must live in L^2(r dr)", "quasimode_energy",
                            weight=profile.weight.value)
    r2, sqrt_r = profile.moment_r2, profile.moment_sqrt_r
    terms = (
        b2 * halfline_form(tau, profile),
        alpha ** 2 / 12 * r2 * b3 ** 2 / b2,
        0.5 * one_minus_sinc(alpha) * r2 * (b1 ** 2 - b2 ** 2) / b2,
        2 * tau * b2 * one_minus_sinc(alpha / 2) * sqrt_r,
    )
    return QuasimodeBound(float(alpha), tau * math.sqrt(b2), float(sum(terms)),
                          terms, profile.label)


def small_angle_constant(field: MagneticField) -> float:
    """`C(B)` such that `E <= b2 Xi0 + C(B) alpha^2`"""
    b1, b2, b3 = _transverse(field, "small_angle_constant")
    tau0, z = tau0_profile()
    return ((b3 ** 2 + abs(b1 ** 2 - b2 ** 2)) / b2 * z.moment_r2
            + tau0 * b2 * z.moment_sqrt_r) / 12


def small_angle_upper_bound(field: MagneticField, alpha: float) -> float:
    """`b2 Xi0 + C(B) alpha^2`, from the bound of `1 - sinc` by its square term"""
    _transverse(field, "small_angle_upper_bound")
    if not 0 < alpha < math.pi:
        raise GeometryError("opening must lie in (0, pi)", "small_angle_upper_bound",
                            alpha=alpha)
    return field.b2 * xi0().value + small_angle_constant(field) * alpha ** 2


def _gaussian_grid(rho: float) -> Grid1D:
    return Grid1D(max(12.0, math.sqrt(60.0 / rho)), 2001)


def gaussian_upper_bound(field: MagneticField, alpha: float) -> tuple[QuasimodeBound, float]:
    """best bound over Gaussian profiles `exp(-rho r^2 / 2)` and over `tau`

    The energy is a quadratic function of `tau`, whose vertex is taken
    exactly; `log(rho)` is optimized by scan then golden-section.
    Returns the bound and the optimal `rho`.
    """
    b1, b2, b3 = _transverse(field, "gaussian_upper_bound")
    s2 = one_minus_sinc(alpha / 2)

    def best_tau(profile):
        _, c, m = form_coefficients(profile)
        return c / m - s2 * profile.moment_sqrt_r

    def energy(log_rho):
        profile = gaussian_profile(math.exp(log_rho), _gaussian_grid(math.exp(log_rho)))
        return quasimode_energy(field, alpha, best_tau(profile), profile).bound

    res = scan_then_golden(energy, np.linspace(-4.0, 4.0, 33), 1e-6)
    rho = math.exp(res.arg)
    profile = gaussian_profile(rho, _gaussian_grid(rho))
    bound = quasimode_energy(field, alpha, best_tau(profile), profile)
    logger.debug("gaussian bound alpha=%g: %.10f (rho=%.6f)", alpha, bound.bound, rho)
    return bound, rho


def gaussian_closed_form(alpha: float) -> float:
    """optimal Gaussian bound for `B = (0, 1, 0)`, in closed form

    `2 sqrt((1 + sinc alpha) / 2 - pi sinc(alpha/2)^2 / 4)`, equal to
    `sqrt(4 - pi)` when `alpha -> 0`.

    >>> round(gaussian_closed_form(1e-9) ** 2, 12) == round(4 - math.pi, 12)
    True
    """
    k = (1 + sinc(alpha)) / 2
    return 2 * math.sqrt(k - math.pi * sinc(alpha / 2) ** 2 / 4)


def sigma_lower_bound(theta: float) -> float:
    """`sqrt(Theta0^2 cos^2 theta + sin^2 theta) <= sigma(theta)`

    >>> sigma_lower_bound(0.0) == theta0().value, sigma_lower_bound(math.pi / 2)
    (True, 1.0)
    """
    t0 = theta0().value
    if theta == 0:
        return t0
    return math.sqrt(t0 ** 2 * math.cos(theta) ** 2 + math.sin(theta) ** 2)


def limit_lower_bound(field: MagneticField) -> float:
    """`sqrt((1 - Theta0^2) b2^2 + Theta0^2)`, the limit of `E*` for thin wedges

    `b2 Xi0` is always below it, which makes `E < E*` for small openings.
    """
    t0 = theta0().value
    return math.sqrt((1 - t0 ** 2) * field.b2 ** 2 + t0 ** 2)


def strictness_threshold(field: MagneticField, step: float = ALPHA_STEP) -> float:
    """largest sampled opening below which the Gaussian bound beats `sigma`'s lower bound

    Openings `k step` are scanned upward and the scan stops at the first
    failure. Returns `0` if the first sample already fails.
    """
    _transverse(field, "strictness_threshold")
    last = 0.0
    k = 1
    while k * step < math.pi - 1e-12:
        alpha = k * step
        geom = face_angles(field, alpha)
        upper = gaussian_upper_bound(field, alpha)[0].bound
        lower = sigma_lower_bound(geom.theta0)
        if not upper < lower:
            logger.info("strictness lost at alpha=%.4f pi (%.6f >= %.6f)",
                        alpha / math.pi, upper, lower)
            break
        last = alpha
        k += 1
    return last


def polar_form_energy(field: MagneticField, alpha: float, tau: float,
                      profile: Profile1D, n_phi: int = 16) -> float:
    """Rayleigh quotient of the angle-independent quasimode in polar coordinates

    Integrates `|d_r u|^2 + (alpha r phi b3)^2 |u|^2 + V(r, phi) |u|^2` over
    `r > 0`, `|phi| < 1/2` (weight `r`) with
    `V = (r cos(alpha phi) b2 - r sin(alpha phi) b1 - tau sqrt(b2))^2`, for
    the rescaled profile. Nothing of the closed-form evaluation is used,
    so it cross-checks `quasimode_energy`.
    """
    b1, b2, b3 = _transverse(field, "polar_form_energy")
    grid, u = profile.grid, profile.values
    kd, ko = stiffness(grid, Weight.RADIAL)
    md, mo = mass(grid, Weight.RADIAL)

    def quad(d, o):
        return float(d @ (u * u) + 2 * o @ (u[:-1] * u[1:]))

    a, b, h, s, wq = element_quadrature(grid)
    us = (u[:-1, None] * (b[:, None] - s) + u[1:, None] * (s - a[:, None])) / h[:, None]
    xg, wg = np.polynomial.legendre.leggauss(n_phi)
    phi, wphi = xg / 2, wg / 2
    r = s[..., None] / math.sqrt(b2)
    ang = alpha * phi[None, None, :]
    pot = ((r * (np.cos(ang) * b2 - np.sin(ang) * b1) - tau * math.sqrt(b2)) ** 2
           + (ang * b3 * r) ** 2)
    potential = float(np.sum(wq * s * us * us * (pot @ wphi)))
    return (b2 * quad(kd, ko) + potential) / quad(md, mo)


@dataclass(frozen=True)
class BoundRow:
    alpha: float
    bound_z: float
    bound_gauss: float
    sigma_lower: float
    E_fem: float | None
    strict_certified: bool

    def cells(self):
        yield from (self.alpha, self.bound_z, self.bound_gauss, self.sigma_lower)
        yield "" if self.E_fem is None else self.E_fem
        yield self.strict_certified


BOUND_COLUMNS = ("alpha", "bound_z", "bound_gauss", "sigma_lower", "E_fem",
                 "strict_certified")


def bound_table(field: MagneticField, alphas, fem=None) -> list[BoundRow]:
    """bounds on a list of openings; `fem` maps an opening to a computed `E`"""
    tau0, z = tau0_profile()
    fem = fem or {}
    rows = []
    for alpha in alphas:
        geom = face_angles(field, alpha)
        bz = quasimode_energy(field, alpha, tau0, z).bound
        bg = gaussian_upper_bound(field, alpha)[0].bound
        lower = sigma_lower_bound(geom.theta0)
        rows.append(BoundRow(float(alpha), bz, bg, lower, fem.get(alpha),
                             min(bz, bg) < lower))
    return rows


def write_bound_csv(rows, path) -> None:
    with open(path, "w", newline="") as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(BOUND_COLUMNS)
        for row in rows:
            writer.writerow("" if c == "" else fmt(c) for c in row.cells())
