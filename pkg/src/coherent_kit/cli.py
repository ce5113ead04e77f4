"""Command-line entry point: ``coherent-kit <command> [options]``.

Exit status: 0 success, 1 verification failure (report still written),
2 invalid arguments or configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import TRACE_COLUMNS, evolution_trace, write_trace_csv
from .errors import ConfigurationError, UsageError
from .fock import write_fock_csv
from .grid import Grid, PhysicalConstants, WaveFunction, make_grid, moments
from .io import write_json
from .phase_space import PhaseSpaceLattice, husimi, number_coefficients
from .states import CoherentLabel, coherent_closed_form, number_state
from .verify import emit_report, run_verification

log = logging.getLogger("coherent_kit")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
COMMANDS = ("coherent", "number", "evolve", "husimi", "expand", "verify")


@dataclass(frozen=True)
class RunConfig:
    command: str
    n_points: int = 1024
    x_min: float = -20.0
    x_max: float = 20.0
    hbar: float = 1.0
    mass: float = 1.0
    lam: float = 1.0
    x0: float | None = None
    p0: float | None = None
    alpha_re: float | None = None
    alpha_im: float | None = None
    n: int | None = None
    t: float = 1.0
    steps: int = 10
    dim: int = 32
    nodes: int = 128
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        for name in ("x_min", "x_max", "hbar", "mass", "lam", "t"):
            if not math.isfinite(getattr(self, name)):
                raise UsageError(f"--{name.replace('_', '-')} must be finite")
        for name in ("x0", "p0", "alpha_re", "alpha_im"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise UsageError(f"--{name.replace('_', '-')} must be finite")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.steps < 1:
            raise UsageError("--steps must be >= 1")
        if (self.alpha_re is not None or self.alpha_im is not None) and (
            self.x0 is not None or self.p0 is not None
        ):
            raise UsageError("give the state either as --x0/--p0 or as --alpha-re/--alpha-im, not both")

    @property
    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(self.hbar, self.mass, self.lam)

    def grid(self) -> Grid:
        return make_grid(self.n_points, self.x_min, self.x_max, self.hbar)

    def label(self) -> CoherentLabel:
        if self.alpha_re is not None or self.alpha_im is not None:
            return CoherentLabel(complex(self.alpha_re or 0.0, self.alpha_im or 0.0))
        return CoherentLabel.from_moments(self.x0 or 0.0, self.p0 or 0.0, self.constants)

    def stem(self) -> Path:
        return Path(self.out) if self.out else Path(self.command)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("grid and units")
    g.add_argument("--n-points", type=int, default=1024, help="grid points (power of two, >= 8)")
    g.add_argument("--x-min", type=float, default=-20.0)
    g.add_argument("--x-max", type=float, default=20.0)
    g.add_argument("--hbar", type=float, default=1.0)
    g.add_argument("--mass", type=float, default=1.0)
    g.add_argument("--lambda", dest="lam", type=float, default=1.0, help="length scale")
    s = common.add_argument_group("state")
    s.add_argument("--x0", type=float, help="centroid position")
    s.add_argument("--p0", type=float, help="centroid momentum")
    s.add_argument("--alpha-re", type=float)
    s.add_argument("--alpha-im", type=float)
    s.add_argument("--n", type=int, help="number-state index")
    s.add_argument("--t", type=float, default=1.0, help="final time for evolve")
    o = common.add_argument_group("output")
    o.add_argument("--out", help="output path stem (extensions are added)")
    o.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="format of the main table")
    o.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="coherent-kit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("coherent", parents=[common], help="coherent state samples and moments")
    sub.add_parser("number", parents=[common], help="number state samples and moments")
    ev = sub.add_parser("evolve", parents=[common], help="free evolution trace")
    ev.add_argument("--steps", type=int, default=10, help="trace rows after t=0")
    hu = sub.add_parser("husimi", parents=[common], help="Husimi map of a coherent or number state")
    hu.add_argument("--nodes", type=int, default=128, help="lattice nodes per axis")
    ex = sub.add_parser("expand", parents=[common], help="number-basis coefficients")
    ex.add_argument("--dim", type=int, default=32, help="number of coefficients")
    sub.add_parser("verify", parents=[common], help="run the identity-verification suite")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        n_points=ns.n_points,
        x_min=ns.x_min,
        x_max=ns.x_max,
        hbar=ns.hbar,
        mass=ns.mass,
        lam=ns.lam,
        x0=ns.x0,
        p0=ns.p0,
        alpha_re=ns.alpha_re,
        alpha_im=ns.alpha_im,
        n=ns.n,
        t=ns.t,
        steps=getattr(ns, "steps", 10),
        dim=getattr(ns, "dim", 32),
        nodes=getattr(ns, "nodes", 128),
        out=ns.out,
        format=ns.format,
    )


def _wavefunction_table(wf: WaveFunction, path: Path, fmt: str) -> Path:
    if fmt == "csv":
        return wf.to_csv(path.with_suffix(".csv"))
    rows = [{"x": float(x), "re": float(z.real), "im": float(z.imag)}
            for x, z in zip(wf.grid.x, wf.samples)]
    return write_json(rows, path.with_suffix(".table.json"))


def _moment_json(wf: WaveFunction, cfg: RunConfig, path: Path, extra: dict) -> Path:
    m = moments(wf, cfg.constants)
    payload = {**m.to_dict(), **wf.grid.metadata(), "mass": cfg.mass, "lambda": cfg.lam,
               "uncertainty_product": m.uncertainty_product, **extra}
    return write_json(payload, path.with_suffix(".json"))


def _state(cfg: RunConfig, grid: Grid) -> tuple[WaveFunction, dict]:
    if cfg.command == "number" or (cfg.command == "husimi" and cfg.n is not None):
        if cfg.n is None:
            raise UsageError("number requires --n")
        return number_state(grid, cfg.n, cfg.constants), {"n": cfg.n}
    label = cfg.label()
    return coherent_closed_form(grid, label, cfg.constants), {
        "alpha_re": label.alpha.real,
        "alpha_im": label.alpha.imag,
    }


def run(cfg: RunConfig) -> int:
    """Execute one command and write its outputs. Returns the exit status."""
    c = cfg.constants
    grid = cfg.grid()
    stem = cfg.stem()
    if stem.parent and not stem.parent.exists():
        stem.parent.mkdir(parents=True, exist_ok=True)

    if cfg.command in ("coherent", "number"):
        wf, extra = _state(cfg, grid)
        written = [_wavefunction_table(wf, stem, cfg.format), _moment_json(wf, cfg, stem, extra)]
    elif cfg.command == "evolve":
        wf = coherent_closed_form(grid, cfg.label(), c)
        times = np.linspace(0.0, cfg.t, cfg.steps + 1)
        rows = evolution_trace(wf, times, c)
        if cfg.format == "csv":
            written = [write_trace_csv(rows, stem.with_suffix(".csv"))]
        else:
            written = [write_json({"columns": list(TRACE_COLUMNS), "rows": rows}, stem.with_suffix(".json"))]
    elif cfg.command == "husimi":
        wf, _ = _state(cfg, grid)
        hmap = husimi(wf, PhaseSpaceLattice.around(wf, c, n_nodes=cfg.nodes))
        written = list(hmap.write(stem))
    elif cfg.command == "expand":
        wf = coherent_closed_form(grid, cfg.label(), c)
        coeffs = number_coefficients(wf, cfg.dim, c)
        if cfg.format == "csv":
            written = [write_fock_csv(coeffs, stem.with_suffix(".csv"))]
        else:
            rows = [{"n": n, "re": float(z.real), "im": float(z.imag)} for n, z in enumerate(coeffs)]
            written = [write_json(rows, stem.with_suffix(".json"))]
    else:
        report = run_verification(grid, c)
        meta = {**grid.metadata(), "mass": c.mass, "lambda": c.lam}
        written = [emit_report(report, stem.with_suffix(".json"), meta)]
        for r in report.records:
            log.info("%s %-36s %.3e (tol %.1e)", "PASS" if r.passed else "FAIL",
                     r.check_id, r.measured_residual, r.tolerance)
        s = report.summary()
        print(f"{s['passed']}/{s['total']} checks passed")
        for path in written:
            print(path)
        return EXIT_OK if report.passed else EXIT_FAILED

    for path in written:
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        return run(config_from_args(ns))
    except (ConfigurationError, UsageError) as exc:
        print(f"coherent-kit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"coherent-kit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
