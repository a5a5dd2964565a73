"""Invariant suite run by `symbreak verify`.

Every check uses built-in fixtures or operators drawn from a generator seeded by the
configuration, so the pass list and the written report are identical between runs.
Timings are only logged.
"""

import math
import time
from collections.abc import Callable
from logging import Logger, getLogger

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import special

from .config import DEFAULT_CONFIG, SymbreakConfig
from .errors import NonUnitaryTransformError, SymbreakError
from .grading import (
    OperatorSystem,
    SymmetryGrading,
    coupling_from_intensities,
    coupling_strengths,
)
from .measures import (
    build_continuous_transform,
    check_b0_implies_m0,
    exchange_bound_violations,
    local_slope,
    measure_continuous_closed,
    measure_continuous_series,
    measure_direct,
    measure_discrete,
    rotation_symmetry_order,
)
from .operator_core import (
    ComplexMatrix,
    change_basis,
    conjugate,
    relative_error,
    unitarity_residual,
)
from .randomized import (
    random_coupling_table,
    random_diagonalizable_unitary,
    random_integer_grading,
    random_operator,
    random_unimodular_grading,
    random_unitary,
)
from .scatter2d import (
    SimConfig,
    SimulatorSystem,
    assemble_scattering_operator,
    check_truncation_convergence,
    default_sim_config,
    mirror_operator,
    rotation_grading,
)
from .scenes import BUILTIN_SCENES, stacked_scene
from .special import bessel_j, bessel_y

default_logger = getLogger(__name__)

SERIES_THETAS = (0.05, 0.2, 0.5)
SLOPE_THETA = 1e-3


class CheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    detail: str


class VerificationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def format(self) -> str:
        lines = [f"seed {self.seed}"]
        lines.extend(
            f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}"
            for check in self.checks
        )
        lines.append(f"{'PASSED' if self.passed else 'FAILED'} {len(self.checks)} checks")
        return "\n".join(lines) + "\n"


type Check = Callable[[SymbreakConfig, np.random.Generator], tuple[bool, str]]


def closed_grid(low: float, high: float, samples: int) -> list[float]:
    return np.linspace(low, high, samples).tolist()


def _check_special_functions(
    config: SymbreakConfig,  # noqa: ARG001
    rng: np.random.Generator,
) -> tuple[bool, str]:
    orders = rng.integers(0, 61, 500)
    arguments = rng.uniform(0.05, 50.0, 500)
    worst_j = 0.0
    worst_y = 0.0
    worst_wronskian = 0.0
    for order, x in zip(orders.tolist(), arguments.tolist(), strict=True):
        j = bessel_j(order, x)
        y = bessel_y(order, x)
        expected_y = float(special.yv(order, x))
        worst_j = max(worst_j, abs(j - float(special.jv(order, x))))
        worst_y = max(worst_y, abs(y - expected_y) / max(1.0, abs(expected_y)))
        wronskian = bessel_j(order + 1, x) * y - j * bessel_y(order + 1, x)
        expected = 2 / (math.pi * x)
        worst_wronskian = max(worst_wronskian, abs(wronskian - expected) / max(1.0, expected))
    passed = max(worst_j, worst_y, worst_wronskian) <= 1e-12  # noqa: PLR2004
    return passed, (
        f"max J error {worst_j:.2e}, max Y error {worst_y:.2e}, "
        f"max Wronskian error {worst_wronskian:.2e}"
    )


def _check_series_equivalence(
    config: SymbreakConfig,
    rng: np.random.Generator,
) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(50):
        size = int(rng.integers(6, 21))
        s = random_operator(rng, size)
        grading = random_integer_grading(rng, size)
        x = coupling_strengths(s, grading, grading)
        for theta in SERIES_THETAS:
            direct = measure_direct(s, build_continuous_transform(grading, theta))
            closed = measure_continuous_closed(x, theta)
            series = measure_continuous_series(
                x,
                theta,
                config.series_max_total_order,
                tolerance=config.series_tolerance,
            )
            for value in (closed, series):
                worst = max(worst, abs(value - direct) / max(direct, 1e-300))
    return worst <= config.comparison_tolerance, f"max relative difference {worst:.2e}"


def _check_discrete_equivalence(
    config: SymbreakConfig,  # noqa: ARG001
    rng: np.random.Generator,
) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(50):
        size = int(rng.integers(4, 17))
        s = random_operator(rng, size)
        grading = random_unimodular_grading(rng, size)
        transform, basis = random_diagonalizable_unitary(rng, grading)
        x = coupling_strengths(change_basis(s, basis, basis), grading, grading)
        worst = max(worst, abs(measure_discrete(x) - measure_direct(s, transform)))
    return worst <= 1e-12, f"max difference {worst:.2e}"  # noqa: PLR2004


def _check_range_and_bound(
    config: SymbreakConfig,  # noqa: ARG001
    rng: np.random.Generator,
) -> tuple[bool, str]:
    lowest, highest = math.inf, -math.inf
    for _ in range(100):
        size = int(rng.integers(2, 13))
        s = random_operator(rng, size)
        t = random_unitary(rng, size)
        value = measure_direct(s, t)
        lowest, highest = min(lowest, value), max(highest, value)
    flip = ComplexMatrix.from_array([[0, 1], [1, 0]])
    parity = ComplexMatrix.from_array([[1, 0], [0, -1]])
    anti_commuting = measure_direct(flip, parity)
    passed = lowest >= 0 and highest <= 1 + 1e-12 and anti_commuting == 1.0  # noqa: PLR2004
    return passed, (
        f"fuzzed M in [{lowest:.3e}, {highest:.3e}], anti-commuting M = {anti_commuting!r}"
    )


def _check_local_slope(
    config: SymbreakConfig,
    rng: np.random.Generator,
) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(50):
        x = random_coupling_table(rng, [-2.0, -1.0, 0.0, 1.0, 2.0])
        slope = local_slope(x)
        estimate = measure_continuous_closed(x, SLOPE_THETA) / SLOPE_THETA**2
        worst = max(worst, abs(estimate - slope) / slope)

    s = random_operator(rng, 6)
    blocks = np.kron(np.eye(3), np.ones((2, 2)))
    symmetric = ComplexMatrix.from_array(s.entries * blocks)
    grading = SymmetryGrading.continuous([-1, -1, 0, 0, 1, 1])
    zero_slope = check_b0_implies_m0(
        coupling_strengths(symmetric, grading, grading),
        closed_grid(-math.pi, math.pi, 100),
        b_tolerance=config.b_zero_tolerance,
        m_tolerance=config.m_zero_tolerance,
    )
    passed = worst <= 1e-4 and zero_slope.precondition_met and zero_slope.passed  # noqa: PLR2004
    return passed, (
        f"max finite difference error {worst:.2e}, B = 0 fixture max M "
        f"{zero_slope.max_measure or 0.0:.2e}"
    )


def _check_exchange_bound(
    config: SymbreakConfig,  # noqa: ARG001
    rng: np.random.Generator,
) -> tuple[bool, str]:
    violations = 0
    for _ in range(20):
        size = int(rng.integers(2, 17))
        s = random_unitary(rng, size)
        grading = random_integer_grading(rng, size)
        violations += exchange_bound_violations(s, grading, 1000, rng)
    return violations == 0, f"{violations} violations"


def _check_intensity_pathway(
    config: SymbreakConfig,
    rng: np.random.Generator,
) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(20):
        size = int(rng.integers(2, 13))
        s = random_operator(rng, size)
        grading = random_integer_grading(rng, size)
        measured = coupling_from_intensities(
            OperatorSystem(s),
            grading,
            grading,
            workers=config.workers,
        )
        expected = coupling_strengths(s, grading, grading)
        worst = max(worst, _table_difference(measured.x, expected.x))

    for make_scene in BUILTIN_SCENES.values():
        scene = make_scene()
        cfg = default_sim_config(scene)
        grading = rotation_grading(cfg.global_order)
        system = SimulatorSystem(scene, cfg, condition_limit=config.condition_limit)
        measured = coupling_from_intensities(system, grading, grading, workers=config.workers)
        operator = assemble_scattering_operator(
            scene,
            cfg,
            workers=config.workers,
            condition_limit=config.condition_limit,
        )
        expected = coupling_strengths(operator, grading, grading)
        worst = max(worst, _table_difference(measured.x, expected.x))
    return worst <= 1e-12, f"max relative difference {worst:.2e}"  # noqa: PLR2004


def _table_difference(measured: np.ndarray, expected: np.ndarray) -> float:
    scale = np.where(expected > 0, expected, 1.0)
    return float(np.max(np.abs(measured - expected) / scale))


def _check_scene_structure(
    config: SymbreakConfig,
    rng: np.random.Generator,  # noqa: ARG001
) -> tuple[bool, str]:
    thetas = closed_grid(-math.pi, math.pi, 721)
    tables = {}
    for name, make_scene in BUILTIN_SCENES.items():
        scene = make_scene()
        cfg = default_sim_config(scene)
        grading = rotation_grading(cfg.global_order)
        operator = assemble_scattering_operator(
            scene,
            cfg,
            workers=config.workers,
            condition_limit=config.condition_limit,
        )
        tables[name] = (operator, coupling_strengths(operator, grading, grading))

    centered_table = tables["centered_disc"][1]
    centered = max(measure_continuous_closed(centered_table, theta) for theta in thetas)
    c3_table = tables["c3"][1]
    c3_zeros = max(
        measure_continuous_closed(c3_table, sign * 2 * math.pi / 3) for sign in (1, -1)
    )
    c3_order = rotation_symmetry_order(c3_table)
    above = all(
        measure_continuous_closed(tables["stacked_3"][1], theta)
        >= measure_continuous_closed(tables["stacked_1"][1], theta)
        for theta in thetas
    )
    mirror_gap = 0.0
    for name in ("stacked_1", "stacked_3"):
        operator, table = tables[name]
        mirror = measure_direct(operator, mirror_operator((operator.rows - 1) // 2))
        mirror_gap = max(mirror_gap, abs(mirror - measure_continuous_closed(table, math.pi)))

    passed = (
        centered <= config.m_zero_tolerance
        and c3_zeros <= config.comparison_tolerance
        and c3_order == 3  # noqa: PLR2004
        and above
        and mirror_gap <= config.comparison_tolerance
    )
    return passed, (
        f"centered max M {centered:.2e}, C3 M(+-2pi/3) {c3_zeros:.2e}, C3 order {c3_order}, "
        f"three discs above one {above}, mirror vs rotation by pi {mirror_gap:.2e}"
    )


def _check_simulator_physics(
    config: SymbreakConfig,
    rng: np.random.Generator,  # noqa: ARG001
) -> tuple[bool, str]:
    scene = stacked_scene(1)
    cfg = default_sim_config(scene)
    full = assemble_scattering_operator(
        scene,
        SimConfig(global_order=cfg.global_order, operator_mode="full_s"),
        workers=config.workers,
        condition_limit=config.condition_limit,
    )
    residual = unitarity_residual(full)

    operator = assemble_scattering_operator(scene, cfg, workers=config.workers)
    grading = rotation_grading(cfg.global_order)
    alpha = 0.7

    rotated = assemble_scattering_operator(scene.rotated(alpha), cfg, workers=config.workers)
    rotation_error = relative_error(
        rotated,
        conjugate(operator, build_continuous_transform(grading, alpha)),
    )
    reflected = assemble_scattering_operator(
        scene.rotated(alpha).reflected(),
        cfg,
        workers=config.workers,
    )
    mirror_error = relative_error(
        reflected,
        conjugate(rotated, mirror_operator(cfg.global_order)),
    )
    change = check_truncation_convergence(
        scene,
        cfg,
        closed_grid(-math.pi, math.pi, 13),
        tolerance=config.convergence_tolerance,
        workers=config.workers,
        condition_limit=config.condition_limit,
    )
    passed = residual <= 1e-6 and rotation_error <= 1e-8 and mirror_error <= 1e-8  # noqa: PLR2004
    return passed, (
        f"full_s unitarity residual {residual:.2e}, rotation covariance {rotation_error:.2e}, "
        f"mirror covariance {mirror_error:.2e}, truncation change {change:.2e}"
    )


def _check_non_unitary_rejected(
    config: SymbreakConfig,
    rng: np.random.Generator,
) -> tuple[bool, str]:
    s = random_operator(rng, 4)
    t = ComplexMatrix.from_array(np.diag([1.0, 1.0, 1.0, 1.5]))
    try:
        measure_direct(s, t, unitarity_tolerance=config.unitarity_tolerance)
    except NonUnitaryTransformError:
        return True, "non-unitary T rejected"
    return False, "non-unitary T was accepted"


def _check_determinism(
    config: SymbreakConfig,
    rng: np.random.Generator,  # noqa: ARG001
) -> tuple[bool, str]:
    results = []
    for workers in (1, 3):
        fuzz = np.random.default_rng(config.seed)
        s = random_operator(fuzz, 12)
        grading = random_integer_grading(fuzz, 12)
        table = coupling_from_intensities(OperatorSystem(s), grading, grading, workers=workers)
        results.append(table.x.tobytes())
    return results[0] == results[1], "intensity tables identical for 1 and 3 workers"


CHECKS: tuple[tuple[str, Check], ...] = (
    ("special_functions", _check_special_functions),
    ("series_equivalence", _check_series_equivalence),
    ("discrete_equivalence", _check_discrete_equivalence),
    ("range_and_bound", _check_range_and_bound),
    ("local_slope", _check_local_slope),
    ("exchange_bound", _check_exchange_bound),
    ("intensity_pathway", _check_intensity_pathway),
    ("scene_structure", _check_scene_structure),
    ("simulator_physics", _check_simulator_physics),
    ("non_unitary_rejected", _check_non_unitary_rejected),
    ("determinism", _check_determinism),
)


def run_check(
    name: str,
    check: Check,
    config: SymbreakConfig,
    logger: Logger = default_logger,
) -> CheckResult:
    """Run one check with its own generator, turning symbreak errors into failures."""
    # Each check draws from its own stream, so adding checks does not change the others.
    rng = np.random.default_rng([config.seed, *name.encode()])
    start = time.perf_counter()
    try:
        passed, detail = check(config, rng)
    except SymbreakError as error:
        passed, detail = False, f"{type(error).__name__}: {error}"
    elapsed = time.perf_counter() - start
    logger.info("%s %s in %.2f s", "PASS" if passed else "FAIL", name, elapsed)
    return CheckResult(name=name, passed=passed, detail=detail)


def run_verification(
    config: SymbreakConfig = DEFAULT_CONFIG,
    checks: tuple[tuple[str, Check], ...] = CHECKS,
    logger: Logger = default_logger,
) -> VerificationReport:
    results = tuple(run_check(name, check, config, logger) for name, check in checks)
    return VerificationReport(seed=config.seed, checks=results)
