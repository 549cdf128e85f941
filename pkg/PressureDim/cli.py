"""
Command line

    python manage.py simdim spec.json
    python manage.py barnsley-dim spec.json --n-max 8 --out artifacts/run1
    python manage.py pressure-curve spec.json --s-grid 0:2:0.05 --out artifacts/curve

Reports go to stdout, logs to stderr, CSV artifacts and report.json to --out.
Exit codes: 0 success, 2 invalid input, 3 numeric failure, 64 usage.
"""

from __future__ import annotations

import argparse
import logging
import logging.config
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from config import settings
from PressureDim import barnsley, estimators, selfaffine, selfsimilar, symbolic_core, thermo_pressure
from PressureDim.errors import DimensionError, NumericError, ValidationError
from PressureDim.reports import (
    DimensionReport,
    format_number,
    print_dimension_report,
    print_header,
    print_table,
    save_report_json,
    write_csv,
)
from PressureDim.specfile import SpecFile, load_spec, require_kind

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 64

DEFAULT_HESC_LEVEL = 8
DEFAULT_N_MAX = 8
DEFAULT_LYAPUNOV_STEPS = 1000
DEFAULT_LYAPUNOV_TRIALS = 50
DEFAULT_POINTS = 100_000
DEFAULT_REPELLER_DEPTH = 60
DEFAULT_CROSSCHECK_TOL = 0.05
DEFAULT_S_GRID = "0:2:0.05"


class UsageParser(argparse.ArgumentParser):
    """argparse with the usage exit code of this tool."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def parse_s_grid(text: str) -> np.ndarray:
    try:
        lo, hi, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise ValidationError(f"--s-grid must look like LO:HI:STEP, got {text!r}", field_path="s_grid") from None
    if step <= 0 or hi < lo:
        raise ValidationError("--s-grid needs LO <= HI and STEP > 0", field_path="s_grid")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


class Run:
    """Resolved options of one invocation: flags beat the spec's task block, which beats settings."""

    def __init__(self, args: argparse.Namespace, spec: SpecFile):
        self.args = args
        self.spec = spec
        task = spec.task
        self.seed = args.seed if args.seed is not None else (task.seed if task.seed is not None else settings.DEFAULT_SEED)
        self.workers = args.workers if args.workers is not None else settings.DEFAULT_WORKERS
        self.n = args.n if args.n is not None else task.n
        self.n_max = args.n_max if args.n_max is not None else (task.n_max or DEFAULT_N_MAX)
        self.points = args.points if args.points is not None else task.count
        self.tol = args.tol if args.tol is not None else task.tolerance
        self.out: Optional[Path] = Path(args.out) if args.out else None
        self.report: Dict[str, Any] = {"command": args.command, "kind": spec.kind, "seed": self.seed}

    def csv(self, frame: pd.DataFrame, name: str) -> None:
        if self.out is not None:
            write_csv(frame, self.out, name)

    def finish(self) -> None:
        if self.out is not None:
            path = save_report_json(self.report, self.out)
            print(f"\nArtifacts written to {self.out} ({path.name})")


def _points_frame(points: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame(points, columns=["x", "y", "z"][: points.shape[1]])


# ----------------------------
# Commands
# ----------------------------

def cmd_simdim(run: Run) -> int:
    require_kind(run.spec, ("similar",), "simdim")
    ifs = run.spec.system
    measure_p = run.spec.task.probabilities
    if measure_p is not None:
        value = selfsimilar.simdim_measure(selfsimilar.SelfSimilarMeasureSpec(ifs, measure_p))
        kind = "similarity (measure)"
    else:
        value = selfsimilar.similarity_dimension(ifs.ratio_array)
        kind = "similarity"
    report = DimensionReport(
        kind=kind,
        value=value,
        bracket=(value - settings.ROOT_TOL, value + settings.ROOT_TOL),
        ambient_dimension=ifs.d,
    )
    if ifs.d == 1:
        separation = selfsimilar.interval_separation(ifs)
        report.details["first_level_images"] = separation.verdict
        report.details["hull"] = list(separation.hull)
    print_dimension_report(report)
    run.report["result"] = report.to_dict()
    run.report["summary"] = report.to_compact_dict()

    if run.points:
        points = selfsimilar.attractor_points(ifs, run.points, run.seed)
        run.csv(_points_frame(points), "attractor.csv")
    return EXIT_OK


def cmd_affdim(run: Run) -> int:
    require_kind(run.spec, ("affine",), "affdim")
    ifs = run.spec.system
    report = thermo_pressure.affinity_dimension(ifs.matrices, tol=run.tol)
    if ifs.d == 2:
        report.details["planar_checks"] = selfaffine.bhr_conditions(ifs).to_dict()
    print_dimension_report(report)
    run.report["result"] = report.to_dict()
    run.report["summary"] = report.to_compact_dict()

    if run.points:
        points = selfaffine.affine_attractor_points(ifs, run.points, run.seed)
        run.csv(_points_frame(points), "attractor.csv")
    return EXIT_OK


def cmd_lyapdim(run: Run) -> int:
    require_kind(run.spec, ("affine",), "lyapdim")
    ifs = run.spec.system
    measure = run.spec.measure() or symbolic_core.ErgodicMeasureSpec.bernoulli(np.full(ifs.m, 1.0 / ifs.m))
    n = run.n or DEFAULT_LYAPUNOV_STEPS
    trials = run.spec.task.trials or DEFAULT_LYAPUNOV_TRIALS
    spectrum = selfaffine.lyapunov_exponents(
        ifs.matrices, measure, n, trials, run.seed, method=run.spec.task.method or "auto",
    )
    dimension = selfaffine.lyapunov_dimension(spectrum.entropy, spectrum.exponents)

    print_header("LYAPUNOV DIMENSION")
    print(f"  entropy h        = {format_number(spectrum.entropy)}")
    for k, (chi, err) in enumerate(zip(spectrum.exponents, spectrum.stderr), start=1):
        print(f"  chi_{k:<13d}= {format_number(float(chi))} +- {float(err):.2e}")
    print(f"  method           = {spectrum.method}")
    print(f"  D(mu)            = {format_number(dimension.value)}")
    print(f"  min(d, D(mu))    = {format_number(dimension.clamped)}")
    print("=" * 80)

    run.report["result"] = {
        "spectrum": spectrum.to_dict(),
        "dimension": dimension.value,
        "clamped": dimension.clamped,
        "k": dimension.k,
    }
    run.csv(spectrum.to_frame(), "lyapunov.csv")
    return EXIT_OK


def cmd_barnsley_dim(run: Run) -> int:
    require_kind(run.spec, ("barnsley",), "barnsley-dim")
    system = run.spec.system
    report = barnsley.barnsley_dimension(system, run.n_max)
    print_dimension_report(report)
    run.report["result"] = report.to_dict()
    run.report["summary"] = report.to_compact_dict()

    if run.points:
        depth = run.spec.task.depth or DEFAULT_REPELLER_DEPTH
        cloud = barnsley.repeller_points(system, run.points, depth, run.seed)
        print(f"\n  repeller sample: {run.points} points, depth {depth}, "
              f"tail bound {cloud.tail_bound:.3e}, resampled {cloud.resampled}")
        run.report["repeller"] = {"depth": depth, "tail_bound": cloud.tail_bound, "resampled": cloud.resampled}
        run.csv(cloud.to_frame(), "repeller.csv")
    return EXIT_OK


def _curve_evaluator(run: Run) -> Tuple[Callable[[float], Tuple[float, float]], Tuple[float, float], str]:
    spec = run.spec
    if spec.kind == "barnsley":
        envelope = barnsley.PressureEnvelope(spec.system, run.n_max)
        return envelope.bounds, (0.0, 2.0), "Hofbauer lower / upper envelopes"
    if spec.kind == "affine":
        table = thermo_pressure.SubadditivePressure(spec.system.matrices, run.n or 1)

        def affine_bounds(s):
            estimates = table.estimates(s)
            return float(estimates.min()), float(estimates[-1])

        return affine_bounds, (0.0, 2.0 * table.d), "min over levels / deepest level estimate"
    if spec.kind == "sft":
        sft = spec.system
        phi = spec.potential or thermo_pressure.DepthOnePotential.zero(sft.alphabet_size)

        def additive_bounds(s):
            value = thermo_pressure.spectral_pressure(sft, phi.scaled(s))
            return value, value

        return additive_bounds, None, "spectral pressure of s * phi"
    raise ValidationError(f"pressure-curve does not support {spec.kind} systems", field_path="kind")


def cmd_pressure_curve(run: Run) -> int:
    grid = parse_s_grid(run.args.s_grid or run.spec.task.s_grid or DEFAULT_S_GRID)
    evaluator, root_range, columns = _curve_evaluator(run)
    if root_range is not None:
        root_range = (max(root_range[0], float(grid[0])), min(root_range[1], float(grid[-1])))
    curve = thermo_pressure.pressure_curve(evaluator, grid, root_range=root_range)

    print_header("PRESSURE CURVE")
    print(f"  columns          = {columns}")
    print(f"  grid             = {grid[0]:g} .. {grid[-1]:g} ({grid.size} points)")
    if curve.bracket is not None:
        print(f"  zero bracket     = [{format_number(curve.bracket[0])}, {format_number(curve.bracket[1])}]")
    else:
        print("  zero bracket     = none on the grid")
    print_table("Samples", curve.to_frame())
    print("=" * 80)

    run.report["result"] = curve.to_dict()
    run.report["columns"] = columns
    run.csv(curve.to_frame(), "pressure_curve.csv")
    return EXIT_OK


def cmd_hesc(run: Run) -> int:
    require_kind(run.spec, ("similar",), "hesc")
    ifs = run.spec.system
    n = run.n or DEFAULT_HESC_LEVEL
    separation = selfsimilar.separation_delta(ifs, n)

    print_header("EXPONENTIAL SEPARATION")
    print(f"  levels           = 1..{n}")
    print(f"  Delta_n          = {separation.delta_n:.12g}")
    print(f"  exact overlap    = {separation.exact_overlap}")
    witness = next((lv.witness for lv in separation.levels if lv.witness), None)
    if witness:
        print(f"  witness          = {witness[0]} ~ {witness[1]}")
    print_table("Delta_k and -(1/k) log Delta_k", separation.to_frame())
    print("=" * 80)

    run.report["result"] = separation.to_dict()
    run.csv(separation.to_frame(), "separation.csv")
    return EXIT_OK


def cmd_entropy(run: Run) -> int:
    require_kind(run.spec, ("sft",), "entropy")
    sft = run.spec.system
    h_top = symbolic_core.topological_entropy(sft)
    parry = symbolic_core.parry_measure(sft)
    result: Dict[str, Any] = {
        "topological_entropy": h_top,
        "parry_p": parry.p.tolist(),
        "parry_P": parry.P.tolist(),
        "parry_entropy": symbolic_core.entropy(parry),
    }
    print_header("ENTROPY")
    print(f"  topological      = {format_number(h_top)}")
    print(f"  Parry entropy    = {format_number(result['parry_entropy'])}")
    print(f"  Parry p          = {np.array2string(parry.p, precision=6)}")

    if run.spec.potential is not None:
        gibbs = thermo_pressure.gibbs_markov_measure(sft, run.spec.potential)
        result["gibbs"] = {
            "pressure": gibbs.pressure, "c1": gibbs.c1, "c2": gibbs.c2, "level": gibbs.level,
            "p": gibbs.measure.p.tolist(),
        }
        print(f"  pressure P(phi)  = {format_number(gibbs.pressure)}")
        print(f"  Gibbs constants  = [{gibbs.c1:.6g}, {gibbs.c2:.6g}] to level {gibbs.level}")
    print("=" * 80)
    run.report["result"] = result
    return EXIT_OK


def _cloud_and_analytic(run: Run, count: int) -> Tuple[np.ndarray, Optional[float], int]:
    spec = run.spec
    if spec.kind == "similar":
        ifs = spec.system
        points = selfsimilar.attractor_points(ifs, count, run.seed)
        return points, selfsimilar.similarity_dimension(ifs.ratio_array), ifs.d
    if spec.kind == "affine":
        ifs = spec.system
        points = selfaffine.affine_attractor_points(ifs, count, run.seed)
        return points, thermo_pressure.affinity_dimension(ifs.matrices).value, ifs.d
    if spec.kind == "barnsley":
        depth = spec.task.depth or DEFAULT_REPELLER_DEPTH
        cloud = barnsley.repeller_points(spec.system, count, depth, run.seed)
        return cloud.points, barnsley.barnsley_dimension(spec.system, run.n_max).value, 2
    raise ValidationError("boxcount needs a similar, affine or barnsley system", field_path="kind")


def cmd_boxcount(run: Run) -> int:
    count = run.points or DEFAULT_POINTS
    points, analytic, d = _cloud_and_analytic(run, count)
    profile = estimators.box_count(points, run.spec.task.scales, workers=run.workers)
    verdict = estimators.dimension_crosscheck(analytic, profile, run.tol or DEFAULT_CROSSCHECK_TOL, ambient_dimension=d)

    print_header("BOX COUNTING")
    print(f"  points           = {count}")
    print(f"  slope            = {profile.slope:.6f}   (R^2 = {profile.r_squared:.6f})")
    print(f"  analytic         = {format_number(analytic)}   min(d, .) = {format_number(verdict.expected)}")
    print(f"  verdict          = {'PASS' if verdict.passed else 'FAIL'} at tolerance {verdict.tolerance:g}")
    for warning in verdict.warnings:
        print(f"\n  WARNING: {warning}")
    print_table("Occupied boxes", profile.to_frame()[["delta", "count"]])
    print("=" * 80)

    run.report["result"] = {"profile": profile.to_dict(), "verdict": verdict.to_dict()}
    run.csv(profile.to_frame()[["delta", "count"]], "boxcount.csv")
    run.csv(_points_frame(points), "points.csv")
    return EXIT_OK


def cmd_validate(run: Run) -> int:
    spec = run.spec
    print_header(f"VALIDATE {spec.kind.upper()} SYSTEM")
    if spec.kind == "barnsley":
        diagnostics = barnsley.validate(spec.system)
        result = diagnostics.to_dict()
        result["transitive_at_level"] = barnsley.transitivity_check(spec.system, settings.TRANSITIVITY_LEVEL)
        result["diagonality"] = barnsley.classify_diagonality(spec.system).to_dict()
    elif spec.kind == "similar":
        ifs = spec.system
        result = {"m": ifs.m, "d": ifs.d, "exact": ifs.is_exact}
        if ifs.d == 1:
            separation = selfsimilar.interval_separation(ifs)
            result["first_level_images"] = separation.verdict
            result["min_gap"] = separation.min_gap
    elif spec.kind == "affine":
        ifs = spec.system
        result = {"m": ifs.m, "d": ifs.d}
        if ifs.d == 2:
            result["planar_checks"] = selfaffine.bhr_conditions(ifs).to_dict()
    else:
        primitive, power = symbolic_core.is_primitive(spec.system)
        result = {"primitive": primitive, "primitivity_power": power}

    for key, value in result.items():
        print(f"  {key:30} = {value}")
    print("\n  valid")
    print("=" * 80)
    run.report["result"] = result
    return EXIT_OK


COMMANDS: Dict[str, Callable[[Run], int]] = {
    "simdim": cmd_simdim,
    "affdim": cmd_affdim,
    "lyapdim": cmd_lyapdim,
    "barnsley-dim": cmd_barnsley_dim,
    "pressure-curve": cmd_pressure_curve,
    "hesc": cmd_hesc,
    "entropy": cmd_entropy,
    "boxcount": cmd_boxcount,
    "validate": cmd_validate,
}


# ----------------------------
# CLI usage
# ----------------------------

def build_parser() -> UsageParser:
    parser = UsageParser(
        prog="pressuredim",
        description="Fractal dimensions as zeros of pressure functions.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("spec", help="JSON spec file with kind, system and task")
    parser.add_argument("--out", help="directory for CSV artifacts and report.json")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--n", type=int)
    parser.add_argument("--n-max", dest="n_max", type=int)
    parser.add_argument("--points", type=int)
    parser.add_argument("--s-grid", dest="s_grid")
    parser.add_argument("--tol", type=float)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Command-line interface for the dimension tools."""
    args = build_parser().parse_args(argv)
    logging.config.dictConfig(settings.LOGGING)

    try:
        spec = load_spec(args.spec)
        run = Run(args, spec)
        code = COMMANDS[args.command](run)
        run.finish()
        return code
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return exc.exit_code
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return exc.exit_code
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
