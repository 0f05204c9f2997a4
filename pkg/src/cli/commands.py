"""
Command-line frontend

Every command reads one polygon spec file, writes its tables (CSV) or documents
(JSON) to stdout or into --out DIR, and, with --out, a report.json recording
the input digest, flags, tolerances and verdicts.

Exit codes: 0 success, 2 invalid input, 3 indeterminate verdict, 4 numerical failure.
"""

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

from dotenv import load_dotenv

from src.cli.io_models import (
    CandidateSetModel,
    PolygonSpecFile,
    RunReport,
    TrigPolyModel,
    dump_json,
    load_spec,
)
from src.config.steklov_config import SteklovConfig, get_config
from src.fem.mesh import dump_mesh
from src.fem.solver import solve_levels
from src.geometry.polygon import BoundaryData, DihedralLabeling
from src.geometry.reconstruction import (
    EdgeSplitData,
    OneParamFamily,
    deformation_sweep,
    edge_split_solve,
    reconstruct_missing_angles,
)
from src.inverse.admissibility import admissibility, theorem_cap
from src.inverse.angles import classify_angles, invariant_vectors
from src.inverse.candidates import enumerate_admissible_candidates, enumerate_weak_candidates
from src.spectral.bounds import applicable_bounds, weinstock_bound
from src.spectral.char_poly import build_charpoly, charpoly_distance
from src.spectral.quasi_eigen import asymptotic_compare, find_roots, nu, quasi_spectrum_for
from src.utils.errors import NumericalError, PolygonDataError, SteklovError

load_dotenv()

logger = logging.getLogger(__name__)


# =============================================================================
# Command plumbing
# =============================================================================

@dataclass
class Artifact:
    name: str
    text: str


@dataclass
class CommandOutput:
    artifacts: list[Artifact]
    verdicts: dict[str, Any] = field(default_factory=dict)
    exit_code: int = 0
    extra_outputs: list[str] = field(default_factory=list)


@dataclass
class CommandContext:
    """Parsed flags, effective configuration and the loaded spec file."""
    args: argparse.Namespace
    config: SteklovConfig
    spec: PolygonSpecFile
    digest: str

    @property
    def tol(self) -> float:
        return self.config.tolerances.geometry_tol

    @property
    def exact(self) -> bool | None:
        # rational input switches to exact mode on its own; --exact makes it mandatory
        return True if self.args.exact else None

    def data(self) -> BoundaryData:
        return self.spec.to_boundary_data(self.tol)

    def k(self, default: int) -> int:
        return default if self.args.k is None else self.args.k

    def mesh_h(self, data: BoundaryData) -> float:
        relative = self.args.mesh_h if self.args.mesh_h is not None else self.config.fem.mesh_h
        if not relative > 0.0:
            raise PolygonDataError(f"--mesh-h must be positive, got {relative}")
        return relative * data.perimeter


def _status(mark: str, message: str) -> None:
    print(f"{mark} {message}", file=sys.stderr)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv(header: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def _fem_sigma(ctx: CommandContext, data: BoundaryData, k: int):
    results = solve_levels(data, h=ctx.mesh_h(data), k=k, config=ctx.config)
    _status("✅", f"FEM: {len(results.levels)} levels, finest h={results.finest.mesh_h:.4g}")
    return results


# =============================================================================
# Commands
# =============================================================================

def cmd_charpoly(ctx: CommandContext) -> CommandOutput:
    p = build_charpoly(ctx.data(), exact=ctx.exact, coef_tol=ctx.config.tolerances.coef_tol)
    return CommandOutput(
        [Artifact("charpoly.json", dump_json(TrigPolyModel.from_trigpoly(p)))],
        {"exact": p.is_exact, "terms": len(p.terms)},
    )


def cmd_roots(ctx: CommandContext) -> CommandOutput:
    data = ctx.data()
    p = build_charpoly(data, exact=ctx.exact, coef_tol=ctx.config.tolerances.coef_tol)
    t_max = ctx.args.tmax if ctx.args.tmax is not None else 20.0 * math.pi / data.perimeter
    spectrum = find_roots(p, t_max, ctx.config)

    rows = []
    for root in spectrum.roots:
        copies = root.multiplicity // 2 if root.value == 0.0 else root.multiplicity
        rows += [[len(rows) + i, root.value, root.multiplicity, root.source] for i in range(copies)]
    unresolved = sum(1 for root in spectrum.roots if root.source == "unresolved")
    if unresolved:
        _status("⚠️", f"{unresolved} roots with unresolved multiplicity")
    return CommandOutput(
        [Artifact("roots.csv", _csv(["index", "nu", "multiplicity", "multiplicity_source"], rows))],
        {"t_max": t_max, "count": len(rows), "unresolved": unresolved},
    )


def cmd_bounds(ctx: CommandContext) -> CommandOutput:
    data = ctx.data()
    k = ctx.k(1)
    results = applicable_bounds(data, k)

    sigma = ctx.args.sigma
    if ctx.args.fem:
        sigma = float(_fem_sigma(ctx, data, k).extrapolated[k])

    header = ["formula", "index", "value", "hypotheses_ok", "geometry", "report"]
    if sigma is not None:
        header += ["sigma", "dominates"]
    rows = []
    for result in results:
        row = [result.formula, result.index, result.value, result.hypotheses_ok, result.geometry,
               result.hypothesis_report]
        if sigma is not None:
            row += [sigma, None if result.value is None else result.value >= sigma]
        rows.append(row)
    if k == 1:
        row = ["weinstock: 2 pi / L", 1, weinstock_bound(data.perimeter), True, "perimeter", "ok"]
        if sigma is not None:
            row += [sigma, row[2] >= sigma]
        rows.append(row)

    verdicts: dict[str, Any] = {"bounds": len(rows), "applicable": sum(1 for r in rows if r[3])}
    if sigma is not None:
        violations = [r[0] for r in rows if r[3] and r[2] < sigma]
        verdicts.update(sigma=sigma, violations=violations)
        if violations:
            _status("⚠️", f"sigma_{k}={sigma:.6g} exceeds {len(violations)} bounds")
    return CommandOutput([Artifact("bounds.csv", _csv(header, rows))], verdicts)


def cmd_reconstruct(ctx: CommandContext) -> CommandOutput:
    partial = ctx.spec.to_partial()
    data = reconstruct_missing_angles(partial, ctx.tol)
    document = PolygonSpecFile.from_boundary_data(data, name=ctx.spec.name)
    return CommandOutput(
        [Artifact("reconstructed.json", dump_json(document.model_dump(mode="python", exclude_none=True)))],
        {"completed_vertices": list(partial.blank_indices)},
    )


def cmd_isospectral(ctx: CommandContext) -> CommandOutput:
    data = ctx.data()
    k = ctx.k(1)
    if ctx.args.mode == "admissible":
        result = enumerate_admissible_candidates(
            data, sigma_k=ctx.args.sigma_floor, k=k, exact=ctx.exact, config=ctx.config
        )
    else:
        sigma = ctx.args.sigma_floor
        if sigma is None:
            sigma = float(_fem_sigma(ctx, data, k).extrapolated[k])
        result = enumerate_weak_candidates(data, sigma, k, exact=ctx.exact, config=ctx.config)

    exit_code = 3 if result.verdict == "indeterminate" else 0
    mark = "⚠️" if exit_code else "✅"
    _status(mark, f"{result.verdict}: {len(result)} candidates (cap {result.cap})")
    return CommandOutput(
        [Artifact("candidates.json", dump_json(CandidateSetModel.from_candidate_set(result)))],
        {"verdict": result.verdict, "count": len(result), "cap": result.cap},
        exit_code=exit_code,
    )


def cmd_solve(ctx: CommandContext) -> CommandOutput:
    data = ctx.data()
    k = ctx.k(ctx.config.fem.eigen_count)
    results = _fem_sigma(ctx, data, k)

    rows = []
    for solution in results.levels:
        rows += [[j, float(s), solution.mesh_h, False] for j, s in enumerate(solution.sigmas)]
    for j, value in enumerate(results.extrapolated):
        if results.was_extrapolated[j]:
            rows.append([j, float(value), results.finest.mesh_h, True])

    extra = []
    if ctx.args.dump_mesh:
        extra.append(str(dump_mesh(results.meshes[-1], ctx.args.dump_mesh)))
    return CommandOutput(
        [Artifact("spectrum.csv", _csv(["index", "sigma", "mesh_h", "extrapolated"], rows))],
        {"rates": [None if math.isnan(r) else float(r) for r in results.rates]},
        extra_outputs=extra,
    )


def cmd_compare(ctx: CommandContext) -> CommandOutput:
    data = ctx.data()
    k = ctx.k(2 * ctx.config.roots.head_exclude)
    count = k + 1

    if ctx.args.tmax is not None:
        spectrum = find_roots(build_charpoly(data, exact=False), ctx.args.tmax, ctx.config)
        nu_values = [nu(spectrum, j) for j in range(count)]
    else:
        nu_values = quasi_spectrum_for(data, count, ctx.config)
    sigma = [float(s) for s in _fem_sigma(ctx, data, k).finest.sigmas]
    report = asymptotic_compare(sigma, data, nu=nu_values, config=ctx.config)

    rows = [[j, s, v, d] for j, (s, v, d) in enumerate(zip(report.sigma, report.nu, report.differences))]
    fit = {
        "epsilon_hat": report.epsilon_hat,
        "epsilon_ceiling": report.epsilon_ceiling,
        "fit_indices": list(report.fit_indices),
        "note": report.note,
    }
    if report.note:
        _status("⚠️", report.note)
    return CommandOutput(
        [Artifact("compare.csv", _csv(["index", "sigma", "nu", "diff"], rows)), Artifact("fit.json", dump_json(fit))],
        fit,
    )


def _split_for(data: BoundaryData, m: int | None, ctx: CommandContext) -> EdgeSplitData:
    if m is not None:
        return EdgeSplitData.from_boundary(data, m)
    odd = [j for j, c in enumerate(classify_angles(data, ctx.config.tolerances.classify_tol)) if c.is_odd]
    if len(odd) != 2:
        raise PolygonDataError(f"{len(odd)} odd vertices; pass --m to choose the split")
    first, second = odd
    return EdgeSplitData.from_boundary(DihedralLabeling(first).apply(data), (second - first) % data.n + 1)


def cmd_deform(ctx: CommandContext) -> CommandOutput:
    data = ctx.data()
    split = _split_for(data, ctx.args.m, ctx)
    solution = edge_split_solve(split, ctx.tol)

    n = data.n
    header = ["x"] + [f"l_{j}" for j in range(n)] + ["charpoly_drift"]
    if not isinstance(solution, OneParamFamily):
        rows = [[0.0] + list(solution.data.lengths) + [0.0]]
        _status("✅", "edge split is unique: no deformation")
        return CommandOutput([Artifact("deform.csv", _csv(header, rows))], {"family": False})

    base_poly = build_charpoly(solution.base, exact=False)
    rows = []
    for x, member in deformation_sweep(solution, ctx.args.points):
        drift = charpoly_distance(build_charpoly(member, exact=False), base_poly)
        rows.append([x] + list(member.lengths) + [drift])
    worst = max(r[-1] for r in rows)
    _status("✅", f"family on ({solution.x_lo:.6g}, {solution.x_hi:.6g}); max drift {worst:.3e}")
    return CommandOutput(
        [Artifact("deform.csv", _csv(header, rows))],
        {"family": True, "x_lo": solution.x_lo, "x_hi": solution.x_hi, "ratio": solution.ratio, "max_drift": worst},
    )


def cmd_classify(ctx: CommandContext) -> CommandOutput:
    data = ctx.data()
    tolerances = ctx.config.tolerances
    classes = classify_angles(data, tolerances.classify_tol, exact=ctx.exact and data.has_exact_angles)
    C = invariant_vectors(data).C
    rows = [
        [j, data.angles[j] / math.pi, cls.kind, cls.denominator, cls.parity, C[j]]
        for j, cls in enumerate(classes)
    ]
    report = admissibility(data, exact=ctx.exact, tol=tolerances.commensurability_tol)
    try:
        cap = theorem_cap(data, tolerances.classify_tol) if report.admissible else None
    except PolygonDataError:
        cap = None
    summary = {
        "verdict": report.verdict,
        "weak_verdict": report.weak_verdict,
        "exact": report.exact,
        "odd_vertices": list(report.odd_vertices),
        "reasons": list(report.reasons),
        "cap": cap,
    }
    _status("✅", f"admissibility: {report.verdict} (weak: {report.weak_verdict})")
    return CommandOutput(
        [
            Artifact("classify.csv", _csv(["vertex", "angle_pi", "kind", "denominator", "parity", "c"], rows)),
            Artifact("admissibility.json", dump_json(summary)),
        ],
        summary,
    )


COMMANDS: dict[str, tuple[Callable[[CommandContext], CommandOutput], str]] = {
    "charpoly": (cmd_charpoly, "characteristic polynomial as JSON"),
    "roots": (cmd_roots, "quasi-eigenvalues in [0, --tmax] as CSV"),
    "bounds": (cmd_bounds, "upper bounds on sigma_k supported by the polygon's geometry"),
    "reconstruct": (cmd_reconstruct, "complete up to three null angles"),
    "isospectral": (cmd_isospectral, "enumerate polygons sharing the characteristic polynomial"),
    "solve": (cmd_solve, "finite-element Steklov eigenvalues"),
    "compare": (cmd_compare, "eigenvalues against quasi-eigenvalues"),
    "deform": (cmd_deform, "sweep a one-parameter isospectral family"),
    "classify": (cmd_classify, "angle classes and the admissibility verdict"),
}


# =============================================================================
# Entry point
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="acceptance tolerance (default: preset, 1e-9)")
    common.add_argument("--exact", action="store_true", help="require exact rational arithmetic")
    common.add_argument("--tmax", type=float, default=None, help="right end of the root search interval")
    common.add_argument("--k", type=int, default=None, help="eigenvalue index")
    common.add_argument("--mesh-h", type=float, default=None, dest="mesh_h",
                        help="base mesh size relative to the perimeter (default: preset, 0.1)")
    common.add_argument("--out", type=Path, default=None, help="directory for outputs and report.json")
    common.add_argument("--preset", choices=["default", "fine", "quick"], default=None,
                        help="configuration preset (default: $STEKLOV_CONFIG or default)")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")

    parser = argparse.ArgumentParser(prog="steklov", description="Steklov spectra of convex polygons")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("file", type=Path, help="polygon spec file (JSON)")
        if name == "bounds":
            sub.add_argument("--sigma", type=float, default=None, help="sigma_k to compare against")
            sub.add_argument("--fem", action="store_true", help="compute sigma_k with the finite-element oracle")
        elif name == "isospectral":
            sub.add_argument("--mode", choices=["admissible", "weak"], default="admissible")
            sub.add_argument("--sigma-floor", type=float, default=None, dest="sigma_floor",
                             help="lower bound on sigma_k shared by the candidates")
        elif name == "solve":
            sub.add_argument("--dump-mesh", type=Path, default=None, dest="dump_mesh",
                             help="write the finest mesh as plain text")
        elif name == "deform":
            sub.add_argument("--m", type=int, default=None, help="split index; detected from the odd vertices")
            sub.add_argument("--points", type=int, default=21, help="family members to sample")
    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _flags(args: argparse.Namespace) -> dict[str, Any]:
    return {
        key: str(value) if isinstance(value, Path) else value
        for key, value in sorted(vars(args).items())
        if key not in {"file", "command"}
    }


def _emit(output: CommandOutput, out_dir: Path | None) -> list[str]:
    if out_dir is None:
        for artifact in output.artifacts:
            sys.stdout.write(artifact.text)
        return list(output.extra_outputs)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for artifact in output.artifacts:
        path = out_dir / artifact.name
        path.write_text(artifact.text, encoding="utf-8")
        written.append(str(path))
    return written + list(output.extra_outputs)


def run(args: argparse.Namespace) -> int:
    config = get_config(args.preset)
    if args.tol is not None:
        config = config.with_tolerance(args.tol)
    report = RunReport(
        command=args.command,
        input_file=str(args.file),
        flags=_flags(args),
        tolerances=asdict(config.tolerances),
    )

    try:
        spec, digest = load_spec(args.file)
        report.input_sha256 = digest
        handler, _ = COMMANDS[args.command]
        output = handler(CommandContext(args, config, spec, digest))
        report.outputs = _emit(output, args.out)
        report.verdicts = output.verdicts
        report.exit_code = output.exit_code
    except SteklovError as exc:
        _status("❌", str(exc))
        logger.debug("command failed", exc_info=True)
        report.verdicts = {"error": type(exc).__name__, "message": str(exc)}
        report.exit_code = exc.exit_code
    except Exception as exc:
        _status("❌", f"unexpected failure: {exc}")
        logger.exception("command %s failed unexpectedly", args.command)
        report.verdicts = {"error": type(exc).__name__, "message": str(exc)}
        report.exit_code = NumericalError.exit_code

    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "report.json").write_text(dump_json(report), encoding="utf-8")
    return report.exit_code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
