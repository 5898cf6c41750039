"""Scalar minimization, extrapolation and small special functions"""

import math
import logging

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


@dataclass(frozen=True)
class MinimizerResult:
    """location and value of a minimum

    `bracket` contains `arg`, `tol` is the width of the final golden-section
    interval (0 when the coarse scan point was kept).
    """

    arg: float
    value: float
    bracket: tuple[float, float]
    tol: float


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-7) -> tuple[float, float, float]:
    """golden-section search of a unimodal `f` on `[a, b]`

    Returns `(x, f(x), width)` for the best point evaluated, where `width` is
    the length of the last bracket.

    >>> x, fx, w = golden_section(lambda x: (x - 1.25) ** 2, 0.0, 3.0, 1e-9)
    >>> abs(x - 1.25) < 1e-8, w <= 1e-9
    (True, True)
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = (a + b) / 2
        return x, f(x), h
    # steps needed to shrink the bracket below tol
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
    if yc < yd:
        return c, yc, d - a
    else:
        return d, yd, b - c


def scan_then_golden(f: Callable[[float], float], grid: Sequence[float],
                     tol: float = 1e-7) -> MinimizerResult:
    """coarse scan of `f` on `grid` then golden-section around the argmin

    The bracket is made of the two grid neighbours of the discrete argmin.
    If refinement does not improve on the scanned minimum, the scanned
    point is kept.

    >>> r = scan_then_golden(lambda x: math.cosh(x - 0.3), np.linspace(-2, 2, 41))
    >>> round(r.arg, 6), round(r.value, 12)
    (0.3, 1.0)
    """
    xs = np.asarray(grid, dtype=float)
    if xs.size == 0:
        raise ValueError("empty scan grid")
    ys = np.array([f(float(x)) for x in xs])
    i = int(np.argmin(ys))
    lo = float(xs[max(i - 1, 0)])
    hi = float(xs[min(i + 1, xs.size - 1)])
    if xs.size == 1 or hi <= lo:
        return MinimizerResult(float(xs[i]), float(ys[i]), (lo, hi), 0.0)
    x, fx, width = golden_section(f, lo, hi, tol)
    if fx > ys[i]:
        logger.debug("golden refinement worse than scan at %g, keeping scan", xs[i])
        return MinimizerResult(float(xs[i]), float(ys[i]), (lo, hi), 0.0)
    return MinimizerResult(float(x), float(fx), (lo, hi), float(width))


def richardson_limit(step_ratio: float, values: Sequence[float], order: int = 2) -> float:
    """Richardson extrapolation of `values` computed with steps `h, h/r, h/r^2...`

    The error is assumed to expand in powers `h^order, h^(2 order), ...`.

    >>> h = [0.1, 0.05, 0.025]
    >>> round(richardson_limit(2, [1 + 3 * x ** 2 - x ** 4 for x in h]), 12)
    1.0
    """
    last = [float(v) for v in values]
    if not last:
        raise ValueError("no values to extrapolate")
    for m in range(1, len(last)):
        mult = step_ratio ** (order * m)
        last = [(mult * high - low) / (mult - 1.0)
                for low, high in zip(last, last[1:])]
    return last[0]


def sinc(x: float) -> float:
    """`sin(x) / x` with `sinc(0) = 1`

    >>> sinc(0.0), round(sinc(math.pi / 2), 12)
    (1.0, 0.636619772368)
    """
    if abs(x) < 1e-4:
        return 1.0 - one_minus_sinc(x)
    return math.sin(x) / x


def one_minus_sinc(x: float) -> float:
    """`1 - sinc(x)` without cancellation for small `x`

    >>> abs(one_minus_sinc(1e-5) / (1e-10 / 6) - 1) < 1e-9
    True
    >>> 0 <= one_minus_sinc(1.0) <= 1 / 6
    True
    """
    if abs(x) < 1e-4:
        x2 = x * x
        # alternating series sum_k (-1)^(k+1) x^(2k) / (2k+1)!
        return x2 / 6 - x2 * x2 / 120 + x2 * x2 * x2 / 5040
    return 1.0 - math.sin(x) / x
