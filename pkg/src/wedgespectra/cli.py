"""Command-line front end

    wedgespectra constants
    wedgespectra band --field 1,1,0 --alpha 4*pi/5
    wedgespectra eigenfunctions --tau-list -3,-2,-1,0,1,2,3,4
    wedgespectra sweep-alpha --gamma pi/2 --theta pi/4 --alpha-list 0.1*pi,0.2*pi
    wedgespectra compare --field 0,1,0 --alpha pi/3 --format json
    wedgespectra sigma-table

Exit codes are `0` on success, `2` on a configuration error and `3` when
an eigenvalue computation fails.
"""

import sys
import json
import math
import logging
import argparse
import dataclasses

from dataclasses import dataclass

import numpy as np

from . import (ConfigError, SolverError, BandScanError, WedgeError,
               TruncationError, AssemblyError)
from .band import (band_scan, fiber_pairs, ground_energy, sigma, e_star,
                   write_band_csv, write_report_json, jsonable, fmt,
                   GeneralizedEigenfunction)
from .bounds import (small_angle_upper_bound, gaussian_upper_bound,
                     sigma_lower_bound, limit_lower_bound, strictness_threshold,
                     bound_table, write_bound_csv)
from .config import RunConfig, load_config
from .fem2d import export_eigenvector, localization, artificial_boundary_ratio
from .geometry import SignFlips, face_angles
from .spec1d import theta0, xi0, tau0_profile
from .svg import Plot

logger = logging.getLogger(__name__)

EXIT_CONFIG, EXIT_SOLVER = 2, 3
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"
SWEEP_RANGE = (0.02 * math.pi, 0.98 * math.pi)


@dataclass(frozen=True)
class ReportRow:
    """one opening of an `alpha` sweep"""

    alpha: float
    E: float
    E_star: float
    s_ess_inf: float
    klass: str
    strict: bool
    bound_small_angle: float
    anomalous: bool = False
    error: str = ""

    COLUMNS = ("alpha", "E", "E_star", "s_ess_inf", "klass", "strict",
               "bound_small_angle", "anomalous", "error")

    def cells(self):
        for name in self.COLUMNS:
            value = getattr(self, name)
            yield value if isinstance(value, str) else fmt(value)


def _write_rows(path, columns, rows):
    with open(path, "w") as out:
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join(row) + "\n")


def _field(cfg: RunConfig):
    field, flips = cfg.magnetic_field()
    if flips != SignFlips():
        logger.info("field signs %s removed, the spectrum does not depend on them", flips)
    return field


def cmd_constants(cfg: RunConfig) -> dict:
    """the universal constants of the half-space and half-line models"""
    t0, x0 = theta0(), xi0()
    tau0, _ = tau0_profile()
    gauss = math.sqrt(4 - math.pi)
    if not t0.value < x0.value <= gauss:
        raise SolverError("constants out of order", "cmd_constants",
                          Theta0=t0.value, Xi0=x0.value)
    report = {
        "Theta0": t0.value,
        "xi0": t0.arg,
        "Xi0": x0.value,
        "tau0": tau0,
        "sqrt(4-pi)": gauss,
        "tol": t0.tol,
        "bracket_Theta0": t0.bracket,
        "bracket_Xi0": x0.bracket,
    }
    for key, value in report.items():
        print(f"{key} = {value}")
    if "json" in cfg.formats:
        with open(cfg.outdir() / "constants.json", "w") as out:
            json.dump(jsonable(report), out, indent=2, sort_keys=True)
            out.write("\n")
    return report


def cmd_band(cfg: RunConfig) -> dict:
    """band function of one sector, with `sigma` of both faces"""
    field, alpha = _field(cfg), cfg.alphas()[0]
    geom = face_angles(field, alpha)
    outdir = cfg.outdir()
    try:
        band = band_scan(field, alpha, cfg.tau_grid(), cfg.solver(), cfg.workers())
    except BandScanError as err:
        if err.partial is not None and "csv" in cfg.formats:
            write_band_csv(err.partial, outdir / "band_partial.csv")
        raise
    sig = cfg.sigma_config()
    s_plus, s_minus = sigma(geom.theta_plus, sig), sigma(geom.theta_minus, sig)
    files = {}
    if "csv" in cfg.formats:
        files["band"] = outdir / "band.csv"
        write_band_csv(band, files["band"])
    if "svg" in cfg.formats:
        plot = Plot(f"s(tau), alpha = {alpha / math.pi:.4g} pi", "tau", "s")
        plot.curve("s", band.taus, band.values)
        plot.hline("sigma(theta+)", s_plus)
        plot.hline("sigma(theta-)", s_minus)
        files["plot"], _ = plot.write(outdir / "band_plot.svg")
    if "json" in cfg.formats:
        files["json"] = outdir / "band.json"
        with open(files["json"], "w") as out:
            json.dump(jsonable({"argmin_tau": band.argmin_tau,
                                "min_value": band.min_value,
                                "sigma_plus": s_plus, "sigma_minus": s_minus,
                                "solver": band.solver_meta.asdict()}),
                      out, indent=2, sort_keys=True)
            out.write("\n")
    print(f"min s = {band.min_value:.10f} at tau = {band.argmin_tau:.6f}")
    return files


def cmd_eigenfunctions(cfg: RunConfig) -> list[tuple]:
    """export the fiber ground states for every `tau` of `tau_list`"""
    field, alpha = _field(cfg), cfg.alphas()[0]
    if not cfg.tau_list:
        raise ConfigError("empty tau list", "cmd_eigenfunctions")
    outdir = cfg.outdir()
    rows = []
    for tau in cfg.tau_list:
        pair = fiber_pairs(field, alpha, tau, cfg.solver())[0]
        export_eigenvector(pair, outdir / f"eigenvector_tau{tau:+.2f}.txt")
        centroid, dist = localization(pair, field, tau)
        ratio = artificial_boundary_ratio(pair)
        logger.info("tau=%g: s=%.8f, centroid at %.3f from the zero line", tau,
                    pair.value, dist)
        rows.append((tau, pair.value, centroid[0], centroid[1], dist, ratio))
    _write_rows(outdir / "localization.csv",
                ("tau", "s_value", "centroid_x1", "centroid_x2", "distance",
                 "boundary_ratio"),
                ([fmt(x) for x in row] for row in rows))
    return rows


def _row(field, alpha, cfg: RunConfig) -> tuple[ReportRow, float | None]:
    geom = face_angles(field, alpha)
    bound = small_angle_upper_bound(field, alpha) if field.b2 > 1e-12 else math.nan
    estar = math.nan
    try:
        estar = e_star(geom, cfg.sigma_config())
        rep = ground_energy(field, alpha, cfg.solver(), cfg.sigma_config(),
                            cfg.tau_grid(), cfg.workers())
    except ConfigError:
        raise
    except WedgeError as err:
        logger.warning("alpha=%g failed, sweep continues: %s", alpha, err)
        return ReportRow(alpha, math.nan, estar, math.nan, str(geom.klass), False, bound,
                         error=type(err).__name__), None
    if rep.anomalous:
        logger.warning("anomalous row at alpha=%g", alpha)
    return ReportRow(alpha, rep.E, rep.E_star, rep.s_ess_inf, str(rep.klass),
                     rep.strict, bound, rep.anomalous), rep.E


def cmd_sweep_alpha(cfg: RunConfig) -> list[ReportRow]:
    """ground energy against the opening, compared with `E*`, `b2 Xi0` and `Theta0`"""
    field = _field(cfg)
    alphas = sorted(cfg.alphas())
    lo, hi = SWEEP_RANGE
    bad = [a for a in alphas if not lo < a < hi]
    if bad:
        raise ConfigError("openings must lie in (0.02 pi, 0.98 pi)", "cmd_sweep_alpha",
                          alpha=bad)
    rows, fem = [], {}
    for alpha in alphas:
        row, energy = _row(field, alpha, cfg)
        rows.append(row)
        if energy is not None:
            fem[alpha] = energy
    outdir = cfg.outdir()
    if "csv" in cfg.formats:
        _write_rows(outdir / "sweep.csv", ReportRow.COLUMNS, (r.cells() for r in rows))
        if field.b2 > 1e-12:
            write_bound_csv(bound_table(field, alphas, fem), outdir / "bounds.csv")
    if "svg" in cfg.formats:
        x = [r.alpha / math.pi for r in rows]
        plot = Plot("ground energy", "alpha / pi", "energy")
        plot.curve("E", x, [r.E for r in rows])
        plot.curve("E*", x, [r.E_star for r in rows])
        plot.hline("b2 Xi0", field.b2 * xi0().value)
        plot.hline("Theta0", theta0().value)
        plot.write(outdir / "sweep_plot.svg")
    if "json" in cfg.formats:
        with open(outdir / "sweep.json", "w") as out:
            json.dump(jsonable([dataclasses.asdict(r) for r in rows]), out,
                      indent=2, sort_keys=True)
            out.write("\n")
    return rows


def cmd_compare(cfg: RunConfig) -> dict:
    """full report of one wedge, with the quasimode bounds when they apply"""
    field, alpha = _field(cfg), cfg.alphas()[0]
    report = ground_energy(field, alpha, cfg.solver(), cfg.sigma_config(),
                           cfg.tau_grid(), cfg.workers())
    extra = {"generalized_eigenfunction":
             GeneralizedEigenfunction(report.band.argmin_tau, report.E).formula}
    if field.b2 > 1e-12 and alpha < math.pi:
        gauss, rho = gaussian_upper_bound(field, alpha)
        extra |= {
            "bound_small_angle": small_angle_upper_bound(field, alpha),
            "bound_gauss": gauss.bound,
            "bound_gauss_rho": rho,
            "sigma_lower": sigma_lower_bound(report.geometry.theta0),
            "limit_lower_bound": limit_lower_bound(field),
            "b2_Xi0": field.b2 * xi0().value,
            "alpha_strict_certified": strictness_threshold(field),
        }
    report = dataclasses.replace(report, bounds=extra)
    data = jsonable(report.asdict())
    for key in sorted(data):
        print(f"{key}: {data[key]}")
    write_report_json(report, cfg.outdir() / "compare.json")
    return data


def cmd_sigma_table(cfg: RunConfig) -> list[tuple]:
    """`sigma(theta)` and its lower bound on `theta_points` angles of `[0, pi/2]`"""
    sig = cfg.sigma_config()
    thetas = np.linspace(0.0, math.pi / 2, cfg.theta_points)
    rows = [(float(t), sigma(float(t), sig), sigma_lower_bound(float(t))) for t in thetas]
    outdir = cfg.outdir()
    if "csv" in cfg.formats:
        _write_rows(outdir / "sigma.csv", ("theta", "sigma", "sigma_lower"),
                    ([fmt(x) for x in row] for row in rows))
    if "svg" in cfg.formats:
        plot = Plot("half-space ground energy", "theta", "sigma")
        plot.curve("sigma", thetas, [r[1] for r in rows])
        plot.curve("lower bound", thetas, [r[2] for r in rows], dashed=True)
        plot.write(outdir / "sigma_plot.svg")
    return rows


COMMANDS = {
    "constants": cmd_constants,
    "band": cmd_band,
    "eigenfunctions": cmd_eigenfunctions,
    "sweep-alpha": cmd_sweep_alpha,
    "compare": cmd_compare,
    "sigma-table": cmd_sigma_table,
}

# command-line flag -> RunConfig field
FLAGS = {
    "field": "field",
    "gamma": "gamma",
    "theta": "theta",
    "alpha": "alpha",
    "alpha_list": "alpha_list",
    "tau_min": "tau_min",
    "tau_max": "tau_max",
    "tau_step": "tau_step",
    "tau_list": "tau_list",
    "L": "L",
    "n": "n",
    "order": "order",
    "tol": "tol",
    "k": "k",
    "out": "out",
    "format": "formats",
    "threads": "threads",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="JSON run configuration")
    common.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    common.add_argument("--field", metavar="X,Y,Z", help="field components")
    common.add_argument("--gamma", help="angle between field and edge")
    common.add_argument("--theta", help="azimuth of the field")
    common.add_argument("--alpha", help="opening of the sector")
    common.add_argument("--alpha-list", metavar="A,B,...", help="openings to sweep")
    common.add_argument("--tau-min")
    common.add_argument("--tau-max")
    common.add_argument("--tau-step")
    common.add_argument("--tau-list", metavar="T,U,...",
                        help="Fourier parameters of the exported eigenvectors")
    common.add_argument("--L", help="half-diagonal of the truncated sector")
    common.add_argument("--n", help="cells per side")
    common.add_argument("--order", help="finite element degree (1 or 2)")
    common.add_argument("--tol", help="eigensolver tolerance")
    common.add_argument("--k", help="number of eigenpairs")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", metavar="FMT,...", help="csv, json and/or svg")
    common.add_argument("--threads", help="worker count")
    parser = argparse.ArgumentParser(prog="wedgespectra", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, cmd in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=cmd.__doc__)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    overrides = {FLAGS[k]: v for k, v in vars(args).items() if k in FLAGS}
    try:
        cfg = load_config(args.config, **overrides)
        COMMANDS[args.command](cfg)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, TruncationError, AssemblyError) as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except WedgeError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
