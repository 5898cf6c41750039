"""Ground energy of the magnetic Laplacian on infinite wedges

The package computes band functions of the fibered operator on a sector,
the ground energy `E(B, W_alpha)` of the wedge, the half-space curve
`sigma(theta)`, the comparison energy `E*` and quasimode upper bounds.
"""

import functools


class WedgeError(Exception):
    """base class of every error raised by `wedgespectra`

    The message embeds the operation and the offending parameters:

    >>> raise WedgeError("zero vector", "canonicalize", b=(0, 0, 0))
    Traceback (most recent call last):
      ...
    wedgespectra.WedgeError: In 'canonicalize' (b=(0, 0, 0))
    -> zero vector
    """

    def __init__(self, msg, where="", **context):
        self.msg = msg
        self.where = where
        self.context = context
        if where or context:
            ctx = ", ".join(f"{k}={v!r}" for k, v in context.items())
            head = f"In '{where}'" if where else "In"
            head = f"{head} ({ctx})" if ctx else head
            super().__init__(f"{head}\n-> {msg}")
        else:
            super().__init__(msg)

    def __reduce__(self):
        # rebuilt from its parts when sent back by a worker process
        return functools.partial(type(self), self.msg, self.where, **self.context), ()


class GeometryError(WedgeError, ValueError):
    "invalid field or opening angle"


class ConfigError(WedgeError, ValueError):
    "invalid run configuration or command-line input"


class MeshError(WedgeError, ValueError):
    "mesh cannot be built or is inconsistent"


class AssemblyError(WedgeError):
    "non-finite values met during assembly"


class TruncationError(WedgeError):
    "a ground state has not decayed at the truncation point"


class SolverError(WedgeError):
    """an eigenvalue computation failed

    `best_residual` is the smallest residual reached, when known.
    """

    def __init__(self, msg, where="", best_residual=None, **context):
        self.best_residual = best_residual
        if best_residual is not None:
            context["best_residual"] = best_residual
        super().__init__(msg, where, **context)


class BandScanError(SolverError):
    "a band scan point failed, `partial` holds what was computed"

    def __init__(self, msg, where="", partial=None, **context):
        self.partial = partial
        super().__init__(msg, where, **context)


from .geometry import MagneticField, SectorGeometry, SignFlips, GeometryClass  # noqa: E402
from .geometry import from_spherical, canonicalize, face_angles  # noqa: E402

__all__ = [
    "WedgeError",
    "GeometryError",
    "ConfigError",
    "MeshError",
    "AssemblyError",
    "TruncationError",
    "SolverError",
    "BandScanError",
    "MagneticField",
    "SectorGeometry",
    "SignFlips",
    "GeometryClass",
    "from_spherical",
    "canonicalize",
    "face_angles",
]
