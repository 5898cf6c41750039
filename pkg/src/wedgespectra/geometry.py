"""Magnetic field, wedge opening and their classification

Fields are unit vectors `B = (b1, b2, b3)` where `x3` is the edge of the
wedge and `x2 = 0` its symmetry plane. The sector `S_alpha` of opening
`alpha` is `|x2| <= x1 tan(alpha/2)` for a convex wedge, its faces are the
upper (`+`) and lower (`-`) half-lines.
"""

import math
import enum

from dataclasses import dataclass

import numpy as np

from . import GeometryError

TANGENT_TOL = 1e-10
UNIT_TOL = 1e-12


class GeometryClass(enum.Enum):
    OUTGOING = "outgoing"
    TANGENT = "tangent"
    INGOING = "ingoing"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class MagneticField:
    """canonical unit field with nonnegative components

    `gamma` is the angle to the edge and `theta` the angle between
    `(b1, b2)` and the `x2`-axis, both in `[0, pi/2]`.
    Build instances with `from_spherical` or `canonicalize`.
    """

    b1: float
    b2: float
    b3: float
    gamma: float
    theta: float

    def __post_init__(self):
        if abs(self.b1 ** 2 + self.b2 ** 2 + self.b3 ** 2 - 1) > UNIT_TOL:
            raise GeometryError("not a unit vector", "MagneticField",
                                b=self.components)
        if min(self.components) < 0:
            raise GeometryError("not canonical (negative component)",
                                "MagneticField", b=self.components)

    @classmethod
    def from_components(cls, b1: float, b2: float, b3: float) -> "MagneticField":
        """build from nonnegative unit components

        >>> MagneticField.from_components(0.0, 1.0, 0.0).gamma == math.pi / 2
        True
        """
        gamma = math.atan2(math.hypot(b1, b2), b3)
        theta = math.atan2(b1, b2) if gamma > 0 else 0.0
        return cls(float(b1), float(b2), float(b3), gamma, theta)

    @property
    def components(self) -> tuple[float, float, float]:
        return (self.b1, self.b2, self.b3)

    def __str__(self):
        return f"B=({self.b1:.6g},{self.b2:.6g},{self.b3:.6g})"


@dataclass(frozen=True)
class SignFlips:
    "signs removed from a raw field by `canonicalize`"

    s1: int = 1
    s2: int = 1
    s3: int = 1

    def apply(self, field: MagneticField) -> tuple[float, float, float]:
        """put the signs back

        >>> f, s = canonicalize((0.6, 0.0, -0.8))
        >>> s.apply(f)
        (0.6, 0.0, -0.8)
        """
        return (self.s1 * field.b1, self.s2 * field.b2, self.s3 * field.b3)

    def __str__(self):
        return "(" + ",".join("+" if s > 0 else "-" for s in (self.s1, self.s2, self.s3)) + ")"


@dataclass(frozen=True)
class SectorGeometry:
    """a field and an opening angle, with derived face angles

    `theta_plus` / `theta_minus` are the unoriented angles between the field
    and the upper / lower faces, `theta0` the smallest of the two.
    """

    field: MagneticField
    alpha: float
    theta_plus: float
    theta_minus: float
    theta0: float
    klass: GeometryClass

    @property
    def convex(self) -> bool:
        return self.alpha < math.pi


def from_spherical(gamma: float, theta: float) -> MagneticField:
    """field `(sin g sin t, sin g cos t, cos g)` from its spherical angles

    >>> [round(b, 12) for b in from_spherical(math.pi / 2, math.pi / 4).components]
    [0.707106781187, 0.707106781187, 0.0]
    >>> from_spherical(0, 0).components
    (0.0, 0.0, 1.0)
    >>> from_spherical(-0.1, 0)
    Traceback (most recent call last):
      ...
    wedgespectra.GeometryError: In 'from_spherical' (gamma=-0.1, theta=0)
    -> angles must lie in [0, pi/2]
    """
    half = math.pi / 2
    if not (-UNIT_TOL <= gamma <= half + UNIT_TOL and -UNIT_TOL <= theta <= half + UNIT_TOL):
        raise GeometryError("angles must lie in [0, pi/2]", "from_spherical",
                            gamma=gamma, theta=theta)
    gamma = min(max(gamma, 0.0), half)
    theta = min(max(theta, 0.0), half)
    b1 = abs(math.sin(gamma) * math.sin(theta))
    b2 = 0.0 if theta == half else abs(math.sin(gamma) * math.cos(theta))
    b3 = 0.0 if gamma == half else abs(math.cos(gamma))
    if gamma == 0:
        theta = 0.0
    return MagneticField(b1, b2, b3, gamma, theta)


def canonicalize(b) -> tuple[MagneticField, SignFlips]:
    """normalize a raw vector and move its signs into `SignFlips`

    The spectrum is invariant under the flips, so every computation works
    with the canonical field.

    >>> f, s = canonicalize((0, -1, 0))
    >>> f.components, str(s)
    ((0.0, 1.0, 0.0), '(+,-,+)')
    >>> f, s = canonicalize((-3, 0, 4))
    >>> [round(x, 12) for x in f.components], str(s)
    ([0.6, 0.0, 0.8], '(-,+,+)')
    >>> canonicalize((0, 0, 0))
    Traceback (most recent call last):
      ...
    wedgespectra.GeometryError: In 'canonicalize' (b=(0, 0, 0))
    -> zero vector
    """
    raw = tuple(float(x) for x in b)
    if len(raw) != 3 or not all(math.isfinite(x) for x in raw):
        raise GeometryError("expected three finite components", "canonicalize", b=b)
    norm = math.sqrt(sum(x * x for x in raw))
    if norm == 0:
        raise GeometryError("zero vector", "canonicalize", b=b)
    if abs(norm - 1) > 1e-14:
        raw = tuple(x / norm for x in raw)
    flips = SignFlips(*(-1 if x < 0 else 1 for x in raw))
    b1, b2, b3 = (abs(x) for x in raw)
    return MagneticField.from_components(b1, b2, b3), flips


def face_normals(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """unit normals `n+ = (-sin a/2, cos a/2, 0)` and `n- = (sin a/2, cos a/2, 0)`"""
    s, c = math.sin(alpha / 2), math.cos(alpha / 2)
    return np.array([-s, c, 0.0]), np.array([s, c, 0.0])


def raw_face_angles(b, alpha: float) -> tuple[float, float]:
    """face angles of any (not necessarily canonical) unit vector

    >>> tp, tm = raw_face_angles((-2 ** -0.5, 2 ** -0.5, 0), 4 * math.pi / 5)
    >>> round(tp / math.pi, 12), round(tm / math.pi, 12)
    (0.35, 0.15)
    """
    vec = np.asarray(b, dtype=float)
    n_plus, n_minus = face_normals(alpha)
    return (math.asin(min(1.0, abs(float(vec @ n_plus)))),
            math.asin(min(1.0, abs(float(vec @ n_minus)))))


def classify(field: MagneticField, alpha: float) -> GeometryClass:
    "outgoing / tangent / ingoing rule"
    if field.gamma <= TANGENT_TOL:
        return GeometryClass.TANGENT
    if abs(field.theta - abs(math.pi - alpha) / 2) < TANGENT_TOL:
        return GeometryClass.TANGENT
    if alpha < math.pi and field.theta < (math.pi - alpha) / 2:
        return GeometryClass.OUTGOING
    return GeometryClass.INGOING


def check_alpha(alpha: float, where: str):
    if not (0 < alpha < 2 * math.pi) or not math.isfinite(alpha):
        raise GeometryError("opening must lie in (0, 2 pi)", where, alpha=alpha)
    if abs(alpha - math.pi) < TANGENT_TOL:
        raise GeometryError("alpha = pi is the half-space, use band.sigma",
                            where, alpha=alpha)


def face_angles(field: MagneticField, alpha: float) -> SectorGeometry:
    """face angles `arcsin |sin g cos(t +- a/2)|` and classification

    >>> g = face_angles(from_spherical(math.pi / 2, math.pi / 4), 4 * math.pi / 5)
    >>> round(g.theta_plus / math.pi, 12), round(g.theta_minus / math.pi, 12), str(g.klass)
    (0.15, 0.35, 'ingoing')
    >>> str(face_angles(from_spherical(math.pi / 2, math.pi / 4), math.pi / 2).klass)
    'tangent'
    >>> str(face_angles(from_spherical(math.pi / 2, math.pi / 4), math.pi / 4).klass)
    'outgoing'
    """
    check_alpha(alpha, "face_angles")
    sg = math.sin(field.gamma)
    tp = math.asin(min(1.0, abs(sg * math.cos(field.theta + alpha / 2))))
    tm = math.asin(min(1.0, abs(sg * math.cos(field.theta - alpha / 2))))
    klass = classify(field, alpha)
    if klass is GeometryClass.TANGENT:
        # the classification rule is the reference, snap the tangent face
        if field.gamma <= TANGENT_TOL:
            tp = tm = 0.0
        elif tp <= tm:
            tp = 0.0
        else:
            tm = 0.0
    return SectorGeometry(field, float(alpha), tp, tm, min(tp, tm), klass)


def tail_directions(geom: SectorGeometry) -> tuple[int, int]:
    """directions of `tau` in which each face is reached at infinity

    Returns `(d_plus, d_minus)`: the half-plane ground state of the face
    `+-` translated along that face has Fourier parameter going to
    `d * infinity`; `0` marks a face that is not reached (tangent face, or
    no transverse field).

    >>> g = face_angles(from_spherical(math.pi / 2, math.pi / 4), 4 * math.pi / 5)
    >>> tail_directions(g)
    (-1, 1)
    """
    field, alpha = geom.field, geom.alpha
    if field.gamma <= TANGENT_TOL:
        return (0, 0)
    out = []
    for face, angle in ((1, geom.theta_plus), (-1, geom.theta_minus)):
        c = math.sin(field.gamma) * math.cos(field.theta + face * alpha / 2)
        if angle == 0.0 or abs(c) < TANGENT_TOL:
            out.append(0)
        else:
            out.append(1 if c > 0 else -1)
    return out[0], out[1]


def zero_line(field: MagneticField, tau: float) -> tuple[np.ndarray, float]:
    """normal `m` and offset of the line where `V^tau` vanishes: `m . x = tau`

    `V^tau(x) = (m . x - tau)^2` with `m = (b2, -b1)`.
    """
    return np.array([field.b2, -field.b1]), float(tau)


def distance_to_zero_line(points, field: MagneticField, tau: float) -> np.ndarray:
    """Euclidean distance of `points` (shape `(n, 2)`) to the zero line

    Infinite when the transverse field vanishes (no zero line).

    >>> f = from_spherical(math.pi / 2, 0)
    >>> distance_to_zero_line([[3.0, 1.0], [1.0, 0.0]], f, 1.0).tolist()
    [2.0, 0.0]
    """
    m, off = zero_line(field, tau)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    norm = float(np.hypot(*m))
    if norm == 0:
        return np.full(len(pts), np.inf)
    return np.abs(pts @ m - off) / norm
