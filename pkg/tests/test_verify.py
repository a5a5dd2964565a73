import numpy as np
import pytest

from symbreak.config import DEFAULT_CONFIG, SymbreakConfig
from symbreak.errors import UndefinedMeasureError
from symbreak.verify import (
    CHECKS,
    CheckResult,
    VerificationReport,
    closed_grid,
    run_check,
    run_verification,
)

FAST_CHECKS = (
    "special_functions",
    "series_equivalence",
    "discrete_equivalence",
    "range_and_bound",
    "local_slope",
    "exchange_bound",
    "non_unitary_rejected",
    "determinism",
)
SIMULATOR_CHECKS = ("intensity_pathway", "scene_structure", "simulator_physics")


def passing(config: SymbreakConfig, rng: np.random.Generator) -> tuple[bool, str]:  # noqa: ARG001
    return True, "ok"


def failing(config: SymbreakConfig, rng: np.random.Generator) -> tuple[bool, str]:  # noqa: ARG001
    return False, "bad"


def undefined(config: SymbreakConfig, rng: np.random.Generator) -> tuple[bool, str]:  # noqa: ARG001
    msg = "The coupling table sums to zero."
    raise UndefinedMeasureError(msg)


def draw(config: SymbreakConfig, rng: np.random.Generator) -> tuple[bool, str]:  # noqa: ARG001
    return True, repr(rng.random())


class TestRunCheck:
    def test_passing_check(self) -> None:
        assert run_check("passing", passing, DEFAULT_CONFIG) == CheckResult(
            name="passing",
            passed=True,
            detail="ok",
        )

    def test_symbreak_errors_become_failures(self) -> None:
        result = run_check("undefined", undefined, DEFAULT_CONFIG)
        assert not result.passed
        assert result.detail.startswith("UndefinedMeasureError:")

    def test_other_errors_propagate(self) -> None:
        def broken(
            config: SymbreakConfig,  # noqa: ARG001
            rng: np.random.Generator,  # noqa: ARG001
        ) -> tuple[bool, str]:
            msg = "bug"
            raise RuntimeError(msg)

        with pytest.raises(RuntimeError, match="bug"):
            run_check("broken", broken, DEFAULT_CONFIG)

    def test_streams_depend_on_seed_and_name(self) -> None:
        first = run_check("draw", draw, DEFAULT_CONFIG).detail
        assert run_check("draw", draw, DEFAULT_CONFIG).detail == first
        assert run_check("other", draw, DEFAULT_CONFIG).detail != first
        reseeded = SymbreakConfig(seed=DEFAULT_CONFIG.seed + 1)
        assert run_check("draw", draw, reseeded).detail != first


class TestReport:
    def test_format(self) -> None:
        report = run_verification(
            SymbreakConfig(seed=7),
            (("first", passing), ("second", failing)),
        )
        assert not report.passed
        assert report.format() == "seed 7\nPASS first: ok\nFAIL second: bad\nFAILED 2 checks\n"

    def test_all_passed(self) -> None:
        report = VerificationReport(
            seed=1,
            checks=(CheckResult(name="only", passed=True, detail="fine"),),
        )
        assert report.passed
        assert report.format().splitlines()[-1] == "PASSED 1 checks"

    def test_check_names_are_unique(self) -> None:
        names = [name for name, _ in CHECKS]
        assert len(names) == len(set(names))
        assert set(names) == {*FAST_CHECKS, *SIMULATOR_CHECKS}


class TestChecks:
    @pytest.mark.parametrize("name", FAST_CHECKS)
    def test_fast_check_passes(self, name: str) -> None:
        result = run_check(name, dict(CHECKS)[name], DEFAULT_CONFIG)
        assert result.passed, result.detail

    def test_details_are_reproducible(self) -> None:
        checks = tuple((name, check) for name, check in CHECKS if name in FAST_CHECKS)
        first = run_verification(DEFAULT_CONFIG, checks)
        second = run_verification(DEFAULT_CONFIG, checks)
        assert first.format() == second.format()

    @pytest.mark.slow
    @pytest.mark.parametrize("name", SIMULATOR_CHECKS)
    def test_simulator_check_passes(self, name: str) -> None:
        result = run_check(name, dict(CHECKS)[name], DEFAULT_CONFIG)
        assert result.passed, result.detail


class TestClosedGrid:
    def test_includes_end_points(self) -> None:
        grid = closed_grid(-1.0, 1.0, 5)
        assert grid == [-1.0, -0.5, 0.0, 0.5, 1.0]
