"""Command line interface: `symbreak simulate|measure|sweep|experiment|verify`.

Results go to stdout and to the files named by `--out`; log messages go to stderr.
Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 failed verification.
"""

import argparse
import logging
import math
import re
import sys
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from logging import Logger, getLogger
from pathlib import Path
from typing import Self

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .config import SymbreakConfig, load_config
from .constants import OperatorMode, SymmetryName
from .errors import DimensionMismatchError, SymbreakError
from .fileio import (
    format_float,
    read_operator,
    read_scene,
    write_coupling_table,
    write_json_report,
    write_operator,
    write_sweep,
)
from .grading import (
    CouplingTable,
    SymmetryGrading,
    TransformedSystem,
    coupling_from_intensities,
    coupling_strengths,
)
from .measures import (
    MeasureDiagnostics,
    MeasureReport,
    MeasureSample,
    build_measure_report,
    measure_direct,
    measure_sweep,
)
from .operator_core import (
    ComplexMatrix,
    change_basis,
    frobenius_norm_sq,
    identity,
    unitarity_residual,
)
from .scatter2d import (
    SimulatorSystem,
    assemble_with_diagnostics,
    check_truncation_convergence,
    mirror_eigenbasis,
    rotated_mirror_operator,
    rotation_grading,
)
from .verify import closed_grid, run_verification

default_logger = getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3
EXIT_VERIFICATION_FAILED = 4

CONVERGENCE_SAMPLES = 13
DEFAULT_THETA = math.pi

_PI_TERM = re.compile(r"^(?P<sign>[+-]?)(?P<factor>\d*\.?\d*)\*?pi(?:/(?P<divisor>\d*\.?\d+))?$")


def parse_angle(text: str) -> float:
    """Parse an angle in radians: a number, or a multiple of pi such as `-2pi/3` or `pi/2`."""
    cleaned = text.strip().replace(" ", "")
    match = _PI_TERM.match(cleaned)
    if match is None:
        try:
            value = float(cleaned)
        except ValueError:
            msg = f"Invalid angle {text!r}."
            raise argparse.ArgumentTypeError(msg) from None
        if not math.isfinite(value):
            msg = f"Angles must be finite, got {text!r}."
            raise argparse.ArgumentTypeError(msg)
        return value
    factor = float(match["factor"]) if match["factor"] else 1.0
    divisor = float(match["divisor"]) if match["divisor"] else 1.0
    sign = -1.0 if match["sign"] == "-" else 1.0
    return sign * factor * math.pi / divisor


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta_min: float
    theta_max: float
    samples: int = Field(ge=2)

    @model_validator(mode="after")
    def _check_interval(self) -> Self:
        if not self.theta_min < self.theta_max:
            msg = f"theta_min ({self.theta_min}) must be below theta_max ({self.theta_max})."
            raise ValueError(msg)
        return self

    def thetas(self) -> list[float]:
        """Closed grid including both end points."""
        return closed_grid(self.theta_min, self.theta_max, self.samples)


def parse_sweep_spec(text: str) -> SweepSpec:
    parts = text.split(":")
    if len(parts) != 3:  # noqa: PLR2004
        msg = f"Expected 'min:max:n', got {text!r}."
        raise argparse.ArgumentTypeError(msg)
    try:
        samples = int(parts[2])
    except ValueError:
        msg = f"The sample count must be an integer, got {parts[2]!r}."
        raise argparse.ArgumentTypeError(msg) from None
    try:
        return SweepSpec(
            theta_min=parse_angle(parts[0]),
            theta_max=parse_angle(parts[1]),
            samples=samples,
        )
    except ValidationError as error:
        msg = f"Invalid sweep {text!r}: {error.errors()[0]['msg']}"
        raise argparse.ArgumentTypeError(msg) from None


def _global_order(operator: ComplexMatrix) -> int:
    if not operator.is_square or operator.rows % 2 == 0:
        msg = (
            f"A multipole operator is square with an odd size, got "
            f"{operator.rows}x{operator.cols}."
        )
        raise DimensionMismatchError(msg)
    return (operator.rows - 1) // 2


def _generator_gradings(
    operator: ComplexMatrix,
    symmetry: SymmetryName,
) -> tuple[SymmetryGrading, SymmetryGrading]:
    if symmetry == "generator":
        return (
            SymmetryGrading.from_labels(operator.col_labels, "continuous"),
            SymmetryGrading.from_labels(operator.row_labels, "continuous"),
        )
    grading = rotation_grading(_global_order(operator))
    return grading, grading


def _mirror_table(operator: ComplexMatrix) -> CouplingTable:
    basis = mirror_eigenbasis(_global_order(operator))
    grading = SymmetryGrading.from_labels(basis.col_labels, "discrete")
    return coupling_strengths(change_basis(operator, basis, basis), grading, grading)


def _write_stdout(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


def _format_report(report: MeasureReport) -> str:
    lines = [f"symmetry: {report.symmetry} ({report.kind})"]
    lines.extend(
        f"M = {format_float(sample.measure)}"
        if sample.theta is None
        else f"M(theta={format_float(sample.theta)}) = {format_float(sample.measure)}"
        for sample in report.theta_samples
    )
    if report.b_gamma is not None:
        lines.append(f"B_Gamma = {format_float(report.b_gamma)}")
    if report.c_s_gamma is not None:
        lines.append(f"C_SGamma = {format_float(report.c_s_gamma)}")
    lines.append(f"sum X = {format_float(report.total_coupling)}")
    return "\n".join(lines) + "\n"


class SimulationDiagnostics(BaseModel):
    model_config = ConfigDict(frozen=True)

    operator_mode: OperatorMode
    global_order: int
    local_orders: tuple[int, ...]
    condition_estimate: float
    unitarity_residual: float
    truncation_change: float


def diagnostics_path(operator_path: Path) -> Path:
    """Sidecar written by `simulate` next to the operator file."""
    return operator_path.with_name(operator_path.name + ".diagnostics.json")


def full_s_unitarity(
    operator: ComplexMatrix,
    operator_mode: OperatorMode,
    tolerance: float,
    logger: Logger = default_logger,
) -> float:
    """Residual ||S†S - I||^2 of the full S implied by `operator`.

    A transition operator T stands for S = I + 2T. A residual above `tolerance` is logged as a
    warning since lossless scatterers give a unitary S.
    """
    if operator_mode == "full_s":
        full_s = operator
    else:
        full_s = ComplexMatrix.from_array(
            identity(operator.row_labels).entries + 2 * operator.entries,
        )
    residual = unitarity_residual(full_s)
    if residual > tolerance:
        logger.warning(
            "The full S is not unitary: ||S†S - I||^2 = %.3e exceeds %.1e",
            residual,
            tolerance,
        )
    return residual


def _operator_diagnostics(operator: ComplexMatrix, operator_path: Path) -> MeasureDiagnostics:
    global_order = None
    if operator.is_square and operator.rows % 2 == 1:
        global_order = (operator.rows - 1) // 2
    residual = unitarity_residual(operator) if operator.is_square else None
    diagnostics = MeasureDiagnostics(global_order=global_order, unitarity_residual=residual)

    sidecar = diagnostics_path(operator_path)
    if not sidecar.is_file():
        return diagnostics
    simulation = SimulationDiagnostics.model_validate_json(sidecar.read_text(encoding="utf-8"))
    default_logger.debug("Read solver diagnostics from %s", sidecar)
    return diagnostics.model_copy(
        update={
            "local_orders": simulation.local_orders,
            "condition_estimate": simulation.condition_estimate,
        },
    )


def cmd_simulate(args: argparse.Namespace, config: SymbreakConfig) -> int:
    scene_file = read_scene(args.scene)
    cfg = scene_file.sim_config(args.mode)
    assembly = assemble_with_diagnostics(
        scene_file.scene,
        cfg,
        workers=config.workers,
        condition_limit=config.condition_limit,
    )
    operator = assembly.operator
    residual = full_s_unitarity(operator, cfg.operator_mode, config.unitarity_tolerance)
    change = check_truncation_convergence(
        scene_file.scene,
        cfg,
        closed_grid(-math.pi, math.pi, CONVERGENCE_SAMPLES),
        tolerance=config.convergence_tolerance,
        workers=config.workers,
        condition_limit=config.condition_limit,
    )
    diagnostics = SimulationDiagnostics(
        operator_mode=cfg.operator_mode,
        global_order=cfg.global_order,
        local_orders=assembly.local_orders,
        condition_estimate=assembly.condition_estimate,
        unitarity_residual=residual,
        truncation_change=change,
    )
    write_operator(args.out, operator)
    sidecar = diagnostics_path(args.out)
    write_json_report(sidecar, diagnostics)
    default_logger.info("Wrote operator to %s and diagnostics to %s", args.out, sidecar)
    _write_stdout(f"{args.out}\n")
    return EXIT_OK


def cmd_measure(args: argparse.Namespace, config: SymbreakConfig) -> int:
    operator = read_operator(args.operator)
    diagnostics = _operator_diagnostics(operator, args.operator)

    if args.transform is not None:
        transform = read_operator(args.transform)
        measure = measure_direct(
            operator,
            transform,
            unitarity_tolerance=config.unitarity_tolerance,
        )
        report = MeasureReport(
            symmetry=f"transform:{args.transform.name}",
            kind="discrete",
            theta_samples=(MeasureSample(theta=None, measure=measure),),
            total_coupling=frobenius_norm_sq(operator),
            diagnostics=diagnostics,
        )
        table = None
    elif args.symmetry == "mirror":
        table = _mirror_table(operator)
        report = build_measure_report(table, "mirror", diagnostics=diagnostics)
    else:
        grading_in, grading_out = _generator_gradings(operator, args.symmetry)
        table = coupling_strengths(operator, grading_in, grading_out)
        report = build_measure_report(
            table,
            args.symmetry,
            args.theta or [DEFAULT_THETA],
            diagnostics=diagnostics,
            workers=config.workers,
            series_max_total_order=config.series_max_total_order if args.series else None,
            series_tolerance=config.series_tolerance,
        )

    if args.table is not None and table is not None:
        write_coupling_table(args.table, table)
    if args.out is not None:
        write_json_report(args.out, report)
    _write_stdout(_format_report(report))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, config: SymbreakConfig) -> int:
    operator = read_operator(args.operator)
    thetas = args.theta_range.thetas()
    if args.symmetry == "mirror":
        order = _global_order(operator)

        def mirror_measure(theta: float) -> float:
            return measure_direct(
                operator,
                rotated_mirror_operator(order, theta),
                unitarity_tolerance=config.unitarity_tolerance,
            )

        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            measures = list(executor.map(mirror_measure, thetas))
        samples = tuple(
            MeasureSample(theta=theta, measure=measure)
            for theta, measure in zip(thetas, measures, strict=True)
        )
    else:
        grading_in, grading_out = _generator_gradings(operator, args.symmetry)
        table = coupling_strengths(operator, grading_in, grading_out)
        samples = measure_sweep(table, thetas, workers=config.workers)

    write_sweep(args.out, samples)
    default_logger.info("Wrote %d samples to %s", len(samples), args.out)
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace, config: SymbreakConfig) -> int:
    scene_file = read_scene(args.scene)
    cfg = scene_file.sim_config(args.mode)
    system = SimulatorSystem(scene_file.scene, cfg, condition_limit=config.condition_limit)
    if args.symmetry == "mirror":
        basis = mirror_eigenbasis(cfg.global_order)
        grading = SymmetryGrading.from_labels(basis.col_labels, "discrete")
        probed = TransformedSystem(system, basis, basis)
        table = coupling_from_intensities(probed, grading, grading, workers=config.workers)
    elif args.symmetry == "rotation":
        grading = rotation_grading(cfg.global_order)
        table = coupling_from_intensities(system, grading, grading, workers=config.workers)
    else:
        msg = "Experiments on scenes support the rotation and mirror symmetries."
        raise DimensionMismatchError(msg)

    write_coupling_table(args.out, table)
    _write_stdout(f"sum X = {format_float(table.total)}\n")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: SymbreakConfig) -> int:
    report = run_verification(config)
    text = report.format()
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8", newline="\n")
    _write_stdout(text)
    return EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with tolerances and seed")
    common.add_argument("--seed", type=int, help="seed for the verification fuzzers")
    common.add_argument("--workers", type=int, help="threads for independent evaluations")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="symbreak",
        description="Symmetry breaking measures for scattering operators.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser(
        "simulate",
        parents=[common],
        help="assemble the scattering operator of a scene",
    )
    simulate.add_argument("--scene", type=Path, required=True)
    simulate.add_argument("--mode", choices=["transition", "full_s"])
    simulate.add_argument("--out", type=Path, required=True)
    simulate.set_defaults(handler=cmd_simulate)

    measure = commands.add_parser(
        "measure",
        parents=[common],
        help="measure the symmetry breaking of an operator",
    )
    measure.add_argument("--operator", type=Path, required=True)
    measure.add_argument(
        "--symmetry",
        choices=["rotation", "mirror", "generator"],
        default="rotation",
    )
    measure.add_argument(
        "--theta",
        type=parse_angle,
        action="append",
        help="angle at which M is reported, repeatable (default: pi)",
    )
    measure.add_argument(
        "--series",
        action="store_true",
        help="also evaluate the power series of M and record its diagnostics",
    )
    measure.add_argument("--transform", type=Path, help="operator file of a unitary T")
    measure.add_argument("--table", type=Path, help="where to write the coupling table")
    measure.add_argument("--out", type=Path, help="where to write the JSON report")
    measure.set_defaults(handler=cmd_measure)

    sweep = commands.add_parser(
        "sweep",
        parents=[common],
        help="write M(theta) over a closed grid as CSV",
    )
    sweep.add_argument("--operator", type=Path, required=True)
    sweep.add_argument(
        "--symmetry",
        choices=["rotation", "mirror", "generator"],
        default="rotation",
    )
    sweep.add_argument("--theta-range", type=parse_sweep_spec, required=True)
    sweep.add_argument("--out", type=Path, required=True)
    sweep.set_defaults(handler=cmd_sweep)

    experiment = commands.add_parser(
        "experiment",
        parents=[common],
        help="coupling table of a scene from intensities only",
    )
    experiment.add_argument("--scene", type=Path, required=True)
    experiment.add_argument("--symmetry", choices=["rotation", "mirror"], default="rotation")
    experiment.add_argument("--mode", choices=["transition", "full_s"])
    experiment.add_argument("--out", type=Path, required=True)
    experiment.set_defaults(handler=cmd_experiment)

    verify = commands.add_parser(
        "verify",
        parents=[common],
        help="run the invariant suite on built-in fixtures",
    )
    verify.add_argument("--out", type=Path, help="where to write the report")
    verify.set_defaults(handler=cmd_verify)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _resolve_config(args: argparse.Namespace) -> SymbreakConfig:
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        config = SymbreakConfig.model_validate(config.model_dump() | overrides)
    return config


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)

    try:
        config = _resolve_config(args)
        return args.handler(args, config)
    except ArithmeticError as error:
        default_logger.error("%s: %s", type(error).__name__, error)  # noqa: TRY400
        return EXIT_NUMERICAL_ERROR
    except (SymbreakError, ValidationError, FileNotFoundError) as error:
        default_logger.error("%s: %s", type(error).__name__, error)  # noqa: TRY400
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
