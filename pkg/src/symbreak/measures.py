"""Symmetry breaking measures.

The direct measure compares an operator S with its transformed version T S T^-1:

    M(S, T) = ||S - T S T^-1||_F^2 / (4 ||S||_F^2)  in [0, 1].

For a continuous symmetry T = exp(-i theta Gamma), and for a discrete symmetry T with
eigenvalues gamma, M depends on S only through the coupling table X. The closed form is
the production path; the literal power series is kept as a verification oracle.
"""

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from functools import reduce
from logging import Logger, getLogger
from typing import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .constants import (
    B_ZERO_TOLERANCE,
    M_ZERO_TOLERANCE,
    SERIES_MAX_TOTAL_ORDER,
    SERIES_TOLERANCE,
    UNIMODULAR_TOLERANCE,
    UNITARITY_TOLERANCE,
    ComplexArray,
    GradingKind,
    RealArray,
)
from .errors import (
    DimensionMismatchError,
    GradingKindError,
    NonConvergentSeriesError,
    NonUnimodularEigenvalueError,
    NonUnitaryTransformError,
    UndefinedMeasureError,
)
from .grading import CouplingTable, SymmetryGrading, coupling_strengths
from .operator_core import (
    ComplexMatrix,
    conjugate,
    eigenvalue_labels,
    frobenius_norm_sq,
    unitarity_residual,
)

default_logger = getLogger(__name__)

# Slack allowed above the upper bound 1 and below 0 for rounding.
RANGE_SLACK = 1e-12


class MeasureSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta: float | None
    measure: float


class MeasureDiagnostics(BaseModel):
    model_config = ConfigDict(frozen=True)

    global_order: int | None = None
    local_orders: tuple[int, ...] | None = None
    unitarity_residual: float | None = None
    condition_estimate: float | None = None
    series_max_total_order: int | None = None
    series_imaginary_residue: float | None = None
    series_shift: float | None = None


class MeasureReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    symmetry: str
    kind: GradingKind
    theta_samples: tuple[MeasureSample, ...]
    b_gamma: float | None = None
    c_s_gamma: float | None = None
    total_coupling: float
    diagnostics: MeasureDiagnostics = MeasureDiagnostics()

    @model_validator(mode="after")
    def _check_ranges(self) -> Self:
        for sample in self.theta_samples:
            if not -RANGE_SLACK <= sample.measure <= 1 + RANGE_SLACK:
                msg = f"Measure {sample.measure} at theta={sample.theta} is outside [0, 1]."
                raise ValueError(msg)
        if (self.b_gamma is None) != (self.c_s_gamma is None):
            msg = "b_gamma and c_s_gamma are reported together."
            raise ValueError(msg)
        if self.b_gamma is not None and self.c_s_gamma is not None:
            if self.b_gamma < 0 or self.c_s_gamma < 0:
                msg = "b_gamma and c_s_gamma must be nonnegative."
                raise ValueError(msg)
            expected = 4 * self.b_gamma * self.total_coupling
            if not math.isclose(self.c_s_gamma**2, expected, rel_tol=1e-10, abs_tol=1e-300):
                msg = "c_s_gamma^2 must equal 4 * b_gamma * total_coupling."
                raise ValueError(msg)
        return self


def _require_total(x: CouplingTable) -> float:
    total = x.total
    if total <= 0:
        msg = "The coupling table sums to zero, so the measure is 0/0."
        raise UndefinedMeasureError(msg)
    return total


def _require_kind(x: CouplingTable, kind: GradingKind) -> None:
    if x.kind != kind:
        msg = f"Expected a {kind} coupling table, got a {x.kind} one."
        raise GradingKindError(msg)


def _differences(x: CouplingTable) -> RealArray:
    """gamma_bar - gamma for every cell of a continuous table."""
    gammas_out = np.array([g.real for g in x.outgoing_gammas])
    gammas_in = np.array([g.real for g in x.incoming_gammas])
    return gammas_out[:, None] - gammas_in[None, :]


def measure_direct(
    s: ComplexMatrix,
    t: ComplexMatrix,
    *,
    unitarity_tolerance: float = UNITARITY_TOLERANCE,
) -> float:
    """Symmetry breaking of S under the unitary transformation T, from the operators.

    Raises:
        DimensionMismatchError: If S and T do not act on the same space.
        NonUnitaryTransformError: If T is not unitary within `unitarity_tolerance`.
        UndefinedMeasureError: If S vanishes.
    """
    if not (s.is_square and t.is_square and s.rows == t.rows):
        msg = (
            f"S ({s.rows}x{s.cols}) and T ({t.rows}x{t.cols}) must be square and act on "
            "the same space."
        )
        raise DimensionMismatchError(msg)
    residual = unitarity_residual(t)
    if residual > unitarity_tolerance:
        msg = f"T is not unitary: ||T†T - I||^2 = {residual:.3e}."
        raise NonUnitaryTransformError(msg)
    normalization = frobenius_norm_sq(s)
    if normalization == 0:
        msg = "S vanishes, so the measure is 0/0."
        raise UndefinedMeasureError(msg)

    transformed = conjugate(s, t)
    return frobenius_norm_sq(s.entries - transformed.entries) / (4 * normalization)


def build_continuous_transform(grading: SymmetryGrading, theta: float) -> ComplexMatrix:
    """T_theta = exp(-i theta Gamma) for a generator diagonal in the graded basis."""
    gammas = grading.real_eigenvalues()
    return ComplexMatrix(
        entries=np.diag(np.exp(-1j * theta * gammas)),
        row_labels=eigenvalue_labels(gammas.tolist()),
        col_labels=eigenvalue_labels(gammas.tolist()),
    )


def measure_continuous_closed(x: CouplingTable, theta: float) -> float:
    """M(theta) = sum (1 - cos((gamma_bar - gamma) theta)) X / (2 sum X).

    Evaluated as sum sin^2((gamma_bar - gamma) theta / 2) X / sum X, which avoids the
    cancellation of 1 - cos at small angles.
    """
    _require_kind(x, "continuous")
    total = _require_total(x)
    weights = np.sin(0.5 * theta * _differences(x)) ** 2
    return float(np.sum(weights * x.x) / total)


class SeriesEvaluation(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    imaginary_residue: float
    remainder_estimate: float
    max_total_order: int
    shift: float


def _series_tuples(order: int) -> list[tuple[int, int, int, int]]:
    """(p, q, n, m) with p+q+n+m = order, (p,q) != 0, (n,m) != 0, p-q+m-n even."""
    tuples: list[tuple[int, int, int, int]] = []
    for p in range(order + 1):
        for q in range(order + 1 - p):
            for n in range(order + 1 - p - q):
                m = order - p - q - n
                if (p, q) == (0, 0) or (n, m) == (0, 0):
                    continue
                if (p - q + m - n) % 2:
                    continue
                tuples.append((p, q, n, m))
    return tuples


_POWERS_OF_I = (1, 1j, -1, -1j)


def evaluate_continuous_series(
    x: CouplingTable,
    theta: float,
    max_total_order: int = SERIES_MAX_TOTAL_ORDER,
    *,
    tolerance: float = SERIES_TOLERANCE,
) -> SeriesEvaluation:
    """Partial sum of the power series of M(theta) in theta, with diagnostics.

    Terms are

        i^(p-q+m-n) theta^(p+q+n+m) / (p! q! n! m!) * sum gamma^(q+m) gamma_bar^(p+n) X

    over p+q+n+m <= `max_total_order`, excluding (p,q) = (0,0) and (n,m) = (0,0), keeping
    p-q+m-n even, accumulated by ascending total order. The eigenvalues are shifted by
    the midpoint of their range first; M is unchanged by Gamma -> Gamma + c.

    Raises:
        NonConvergentSeriesError: If truncation plus rounding error may exceed
            `tolerance`.
    """
    _require_kind(x, "continuous")
    total = _require_total(x)

    gammas_in = np.array([g.real for g in x.incoming_gammas])
    gammas_out = np.array([g.real for g in x.outgoing_gammas])
    alphabet = np.concatenate([gammas_in, gammas_out])
    shift = 0.5 * float(alphabet.max() + alphabet.min())
    gammas_in = gammas_in - shift
    gammas_out = gammas_out - shift

    coupled = x.x > 0
    largest_difference = float(np.abs(_differences(x))[coupled].max(initial=0.0))
    largest_gamma = float(np.abs(np.concatenate([gammas_in, gammas_out])).max())
    reach = abs(theta) * largest_difference
    remainder = reach ** (max_total_order + 2) / (2 * math.factorial(max_total_order + 2))
    rounding = np.finfo(np.float64).eps * math.exp(4 * abs(theta) * largest_gamma) / 4
    remainder_estimate = remainder + rounding
    if remainder_estimate > tolerance:
        msg = (
            f"Series truncated at order {max_total_order} is not converged for "
            f"theta={theta}: error estimate {remainder_estimate:.3e} > {tolerance:.1e}."
        )
        raise NonConvergentSeriesError(msg, remainder_estimate)

    # moments[b, a] = sum gamma_bar^b gamma^a X
    exponents = np.arange(max_total_order + 1)
    powers_out = gammas_out[None, :] ** exponents[:, None]
    powers_in = gammas_in[None, :] ** exponents[:, None]
    moments = powers_out @ x.x @ powers_in.T
    factorials = [math.factorial(k) for k in range(max_total_order + 1)]

    accumulated = 0j
    for order in range(2, max_total_order + 1, 2):
        order_sum = 0j
        for p, q, n, m in _series_tuples(order):
            weight = factorials[p] * factorials[q] * factorials[n] * factorials[m]
            order_sum += (
                _POWERS_OF_I[(p - q + m - n) % 4] * moments[p + n, q + m] / weight
            )
        accumulated += order_sum * theta**order

    normalization = 4 * total
    evaluation = SeriesEvaluation(
        value=accumulated.real / normalization,
        imaginary_residue=abs(accumulated.imag) / normalization,
        remainder_estimate=remainder_estimate,
        max_total_order=max_total_order,
        shift=shift,
    )
    if evaluation.imaginary_residue > tolerance:
        default_logger.warning(
            "Series imaginary residue %.3e exceeds %.1e",
            evaluation.imaginary_residue,
            tolerance,
        )
    return evaluation


def measure_continuous_series(
    x: CouplingTable,
    theta: float,
    max_total_order: int = SERIES_MAX_TOTAL_ORDER,
    *,
    tolerance: float = SERIES_TOLERANCE,
) -> float:
    return evaluate_continuous_series(
        x,
        theta,
        max_total_order,
        tolerance=tolerance,
    ).value


def measure_discrete(
    x: CouplingTable,
    *,
    unimodular_tolerance: float = UNIMODULAR_TOLERANCE,
) -> float:
    """M = sum (1 - Re{gamma gamma_bar*}) X / (2 sum X) for a discrete symmetry.

    For unit-modulus eigenvalues 1 - Re{gamma gamma_bar*} = |gamma - gamma_bar|^2 / 2,
    which is exactly zero on the diagonal.
    """
    _require_kind(x, "discrete")
    for gamma in x.incoming_gammas + x.outgoing_gammas:
        if abs(abs(gamma) - 1) > unimodular_tolerance:
            msg = f"Eigenvalue {gamma} of a unitary symmetry must have unit modulus."
            raise NonUnimodularEigenvalueError(msg)
    total = _require_total(x)

    gammas_out = np.array(x.outgoing_gammas, dtype=np.complex128)
    gammas_in = np.array(x.incoming_gammas, dtype=np.complex128)
    weights = np.abs(gammas_out[:, None] - gammas_in[None, :]) ** 2
    return float(np.sum(weights * x.x) / (4 * total))


def local_slope(x: CouplingTable) -> float:
    """B_Gamma = sum (gamma - gamma_bar)^2 X / (4 sum X), the theta^2 coefficient of M."""
    _require_kind(x, "continuous")
    total = _require_total(x)
    return float(np.sum(_differences(x) ** 2 * x.x) / (4 * total))


def local_slope_direct(
    s: ComplexMatrix,
    grading_in: SymmetryGrading,
    grading_out: SymmetryGrading,
) -> float:
    """B_Gamma = ||S Gamma_in - Gamma_out S||_F^2 / (4 ||S||_F^2) from the operator."""
    if s.cols != len(grading_in) or s.rows != len(grading_out):
        msg = "Operator dimensions do not match the gradings."
        raise DimensionMismatchError(msg)
    normalization = frobenius_norm_sq(s)
    if normalization == 0:
        msg = "S vanishes, so the slope is 0/0."
        raise UndefinedMeasureError(msg)
    gammas_in = grading_in.real_eigenvalues()
    gammas_out = grading_out.real_eigenvalues()
    commutator = s.entries * (gammas_in[None, :] - gammas_out[:, None])
    return frobenius_norm_sq(commutator) / (4 * normalization)


class ZeroSlopeCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    b_gamma: float
    precondition_met: bool
    passed: bool
    max_measure: float | None = None
    offending_theta: float | None = None


def check_b0_implies_m0(
    x: CouplingTable,
    theta_grid: Sequence[float],
    *,
    b_tolerance: float = B_ZERO_TOLERANCE,
    m_tolerance: float = M_ZERO_TOLERANCE,
) -> ZeroSlopeCheck:
    """Check that a vanishing local slope forces M(theta) = 0 on the whole grid.

    The check passes vacuously when B_Gamma is not zero.
    """
    b_gamma = local_slope(x)
    if b_gamma > b_tolerance:
        return ZeroSlopeCheck(b_gamma=b_gamma, precondition_met=False, passed=True)

    max_measure = 0.0
    for theta in theta_grid:
        measure = measure_continuous_closed(x, theta)
        max_measure = max(max_measure, measure)
        if measure > m_tolerance:
            return ZeroSlopeCheck(
                b_gamma=b_gamma,
                precondition_met=True,
                passed=False,
                max_measure=measure,
                offending_theta=float(theta),
            )
    return ZeroSlopeCheck(
        b_gamma=b_gamma,
        precondition_met=True,
        passed=True,
        max_measure=max_measure,
    )


def exchange_ability(x: CouplingTable) -> float:
    """C_SGamma = sqrt(sum (gamma - gamma_bar)^2 X).

    For a lossless system this bounds the change of the expectation value of Gamma
    that the system imparts on any normalized incoming state.
    """
    _require_kind(x, "continuous")
    _require_total(x)
    return float(np.sqrt(np.sum(_differences(x) ** 2 * x.x)))


def exchange_bound_violations(
    s: ComplexMatrix,
    grading: SymmetryGrading,
    samples: int,
    rng: np.random.Generator,
    *,
    slack: float = 1e-10,
) -> int:
    """Count random normalized inputs whose exchange of Gamma exceeds C_SGamma + slack."""
    if not s.is_square or s.rows != len(grading):
        msg = "The exchange bound needs a square operator matching the grading."
        raise DimensionMismatchError(msg)
    bound = exchange_ability(coupling_strengths(s, grading, grading))
    gammas = grading.real_eigenvalues()

    inputs: ComplexArray = rng.standard_normal((s.rows, samples)) + 1j * rng.standard_normal(
        (s.rows, samples),
    )
    inputs /= np.linalg.norm(inputs, axis=0)
    outputs = s.entries @ inputs
    exchanged = gammas @ np.abs(outputs) ** 2 - gammas @ np.abs(inputs) ** 2
    return int(np.count_nonzero(np.abs(exchanged) > bound + slack))


def _integer_differences(x: CouplingTable, tolerance: float) -> list[int]:
    _require_kind(x, "continuous")
    total = _require_total(x)
    differences = _differences(x)
    coupled = differences[x.x > tolerance * total]
    rounded = np.rint(coupled)
    if np.any(np.abs(coupled - rounded) > 1e-9):  # noqa: PLR2004
        msg = "Hidden rotation orders need an integer eigenvalue alphabet."
        raise GradingKindError(msg)
    return [abs(int(d)) for d in rounded]


def rotation_symmetry_order(
    x: CouplingTable,
    *,
    tolerance: float = M_ZERO_TOLERANCE,
) -> int:
    """Largest n such that rotating by 2 pi / n leaves the system invariant.

    Only cells with X above `tolerance * sum X` count as coupled. Returns 0 when no
    eigenvalue-changing coupling exists (invariant under every rotation) and 1 when no
    nontrivial rotation is a symmetry.
    """
    return reduce(math.gcd, _integer_differences(x, tolerance), 0)


def symmetry_angles(
    x: CouplingTable,
    *,
    tolerance: float = M_ZERO_TOLERANCE,
) -> tuple[float, ...]:
    """Angles in (0, 2 pi) at which M(theta) vanishes.

    Raises:
        GradingKindError: If the system is invariant under every rotation, where the
            zero set is the whole circle.
    """
    order = rotation_symmetry_order(x, tolerance=tolerance)
    if order == 0:
        msg = "The system is rotationally invariant: M vanishes for every angle."
        raise GradingKindError(msg)
    return tuple(2 * math.pi * j / order for j in range(1, order))


def measure_sweep(
    x: CouplingTable,
    thetas: Sequence[float],
    *,
    workers: int = 1,
) -> tuple[MeasureSample, ...]:
    """M(theta) for every angle; samples come back in input order."""
    _require_kind(x, "continuous")
    _require_total(x)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        measures = list(
            executor.map(lambda theta: measure_continuous_closed(x, theta), thetas),
        )
    return tuple(
        MeasureSample(theta=float(theta), measure=measure)
        for theta, measure in zip(thetas, measures, strict=True)
    )


def build_measure_report(
    x: CouplingTable,
    symmetry: str,
    thetas: Sequence[float] = (),
    *,
    diagnostics: MeasureDiagnostics | None = None,
    workers: int = 1,
    series_max_total_order: int | None = None,
    series_tolerance: float = SERIES_TOLERANCE,
    logger: Logger = default_logger,
) -> MeasureReport:
    """Collect every measure the coupling table determines.

    Continuous tables report M at each angle plus B_Gamma and C_SGamma; discrete tables
    report the single value of M. With `series_max_total_order` set, the power series is
    also evaluated at each angle and its largest imaginary residue and eigenvalue shift are
    recorded in the diagnostics.

    Raises:
        NonConvergentSeriesError: If the series is requested and does not converge at one
            of the angles.
    """
    diagnostics = diagnostics or MeasureDiagnostics()
    if x.kind == "discrete":
        measure = measure_discrete(x)
        logger.info("M[%s] = %.6e", symmetry, measure)
        return MeasureReport(
            symmetry=symmetry,
            kind="discrete",
            theta_samples=(MeasureSample(theta=None, measure=measure),),
            total_coupling=x.total,
            diagnostics=diagnostics,
        )

    samples = measure_sweep(x, thetas, workers=workers)
    b_gamma = local_slope(x)
    c_s_gamma = exchange_ability(x)
    logger.info("B_Gamma = %.6e, C_SGamma = %.6e", b_gamma, c_s_gamma)
    if series_max_total_order is not None and thetas:
        evaluations = [
            evaluate_continuous_series(
                x,
                theta,
                series_max_total_order,
                tolerance=series_tolerance,
            )
            for theta in thetas
        ]
        diagnostics = diagnostics.model_copy(
            update={
                "series_max_total_order": series_max_total_order,
                "series_imaginary_residue": max(e.imaginary_residue for e in evaluations),
                "series_shift": evaluations[0].shift,
            },
        )
        logger.debug("Series evaluated at %d angles", len(evaluations))
    return MeasureReport(
        symmetry=symmetry,
        kind="continuous",
        theta_samples=samples,
        b_gamma=b_gamma,
        c_s_gamma=c_s_gamma,
        total_coupling=x.total,
        diagnostics=diagnostics,
    )
