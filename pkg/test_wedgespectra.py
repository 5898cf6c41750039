import doctest

import wedgespectra
import wedgespectra.numerics
import wedgespectra.expr
import wedgespectra.geometry
import wedgespectra.spec1d
import wedgespectra.config
import wedgespectra.fem2d.mesh
import wedgespectra.fem2d.space
import wedgespectra.fem2d.assembly
import wedgespectra.fem2d.eigen
import wedgespectra.fem2d.diagnostics
import wedgespectra.band
import wedgespectra.bounds
import wedgespectra.svg
import wedgespectra.cli

MODULES = (
    wedgespectra,
    wedgespectra.numerics,
    wedgespectra.expr,
    wedgespectra.geometry,
    wedgespectra.spec1d,
    wedgespectra.config,
    wedgespectra.fem2d.mesh,
    wedgespectra.fem2d.space,
    wedgespectra.fem2d.assembly,
    wedgespectra.fem2d.eigen,
    wedgespectra.fem2d.diagnostics,
    wedgespectra.band,
    wedgespectra.bounds,
    wedgespectra.svg,
    wedgespectra.cli,
)


def test_doctests():
    for mod in MODULES:
        failed, _ = doctest.testmod(mod)
        assert failed == 0, mod.__name__


if __name__ == "__main__":
    for mod in MODULES:
        print(f"testing '{mod.__name__}'")
        f, c = doctest.testmod(mod)
        print(f"> performed {c} tests, {f} failed")
