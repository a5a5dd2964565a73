import cmath
import math

import numpy as np
import pytest
from pydantic import ValidationError

from symbreak.errors import (
    AmbiguousGroupingError,
    DimensionMismatchError,
    GradingKindError,
    UndefinedMeasureError,
    UnknownEigenvalueError,
)
from symbreak.grading import (
    BlackBoxSystem,
    CouplingTable,
    OperatorSystem,
    SymmetryGrading,
    TransformedSystem,
    align_gradings,
    coupling_from_intensities,
    coupling_strengths,
    group_indices,
    restrict_block,
)
from symbreak.operator_core import BasisLabel, ComplexMatrix, frobenius_norm_sq, index_labels
from symbreak.randomized import random_integer_grading, random_operator, random_unitary
from tests.constants import SEED


class PermutationSystem(BlackBoxSystem):
    """Stub system that moves intensity between coordinates without phases."""

    def __init__(self, permutation: list[int]) -> None:
        self.permutation = permutation
        self.labels = index_labels(len(permutation))

    @property
    def incoming_labels(self) -> tuple[BasisLabel, ...]:
        return self.labels

    @property
    def outgoing_labels(self) -> tuple[BasisLabel, ...]:
        return self.labels

    def evaluate(self, incoming: np.ndarray) -> np.ndarray:
        outgoing = np.zeros_like(incoming)
        outgoing[self.permutation] = incoming
        return outgoing


class TestSymmetryGrading:
    def test_continuous_eigenvalues_must_be_real(self) -> None:
        with pytest.raises(ValidationError):
            SymmetryGrading(kind="continuous", eigenvalues=(1j,))

    def test_discrete_eigenvalues_must_be_unimodular(self) -> None:
        with pytest.raises(ValidationError):
            SymmetryGrading.discrete([1.0, 0.5])

    def test_non_finite_eigenvalues_are_rejected(self) -> None:
        with pytest.raises(ValidationError):
            SymmetryGrading.continuous([0.0, math.inf])

    def test_from_labels(self) -> None:
        labels = (BasisLabel(gamma=-1), BasisLabel(gamma=1, eta=(1,)))
        grading = SymmetryGrading.from_labels(labels, "discrete")
        assert grading.eigenvalues == (-1 + 0j, 1 + 0j)

    def test_real_eigenvalues_of_discrete_grading(self) -> None:
        with pytest.raises(GradingKindError):
            SymmetryGrading.discrete([1, -1]).real_eigenvalues()


class TestGroupIndices:
    def test_groups_cover_the_basis(self) -> None:
        grading = SymmetryGrading.continuous([2, 0, 2, -1, 0])
        groups = group_indices(None, grading)
        assert [group.gamma for group in groups] == [-1, 0, 2]
        assert [group.indices for group in groups] == [(3,), (1, 4), (0, 2)]
        assert sorted(i for group in groups for i in group.indices) == list(range(5))

    def test_nearby_eigenvalues_are_merged(self) -> None:
        grading = SymmetryGrading.continuous([1.0, 1.0 + 1e-12, 2.0])
        groups = group_indices(None, grading)
        assert [group.dimension for group in groups] == [2, 1]

    def test_chained_eigenvalues_are_ambiguous(self) -> None:
        grading = SymmetryGrading.continuous([0.0, 0.6, 1.2], grouping_tolerance=0.7)
        with pytest.raises(AmbiguousGroupingError):
            group_indices(None, grading)

    def test_discrete_groups_sorted_by_phase(self) -> None:
        grading = SymmetryGrading.discrete([-1, 1j, 1, -1j])
        gammas = [group.gamma for group in group_indices(None, grading)]
        phases = [cmath.phase(gamma) for gamma in gammas]
        assert phases == sorted(phases)
        assert gammas[-1] == pytest.approx(-1)

    def test_label_count_must_match(self) -> None:
        with pytest.raises(DimensionMismatchError):
            group_indices(index_labels(3), SymmetryGrading.continuous([0, 1]))


class TestAlignGradings:
    def test_one_sided_eigenvalues_get_empty_groups(self) -> None:
        aligned = align_gradings(
            SymmetryGrading.continuous([0, 1]),
            SymmetryGrading.continuous([1, 2, 2]),
        )
        assert aligned.gammas == (0, 1, 2)
        assert aligned.incoming == ((0,), (1,), ())
        assert aligned.outgoing == ((), (0,), (1, 2))

    def test_kinds_must_agree(self) -> None:
        with pytest.raises(GradingKindError):
            align_gradings(SymmetryGrading.continuous([1]), SymmetryGrading.discrete([1]))


class TestRestrictBlock:
    def test_blocks_reassemble_operator(self) -> None:
        rng = np.random.default_rng(SEED)
        s = random_operator(rng, 6)
        grading = SymmetryGrading.continuous([0, 1, 0, 2, 1, 0])
        rebuilt = np.zeros((6, 6), dtype=np.complex128)
        for gamma_bar in (0, 1, 2):
            for gamma in (0, 1, 2):
                block = restrict_block(s, grading, grading, gamma, gamma_bar)
                rows = [label.eta[0] for label in block.row_labels]
                cols = [label.eta[0] for label in block.col_labels]
                rebuilt[np.ix_(rows, cols)] = block.entries
        assert np.array_equal(rebuilt, s.entries)

    def test_unknown_eigenvalue(self) -> None:
        s = ComplexMatrix.from_array(np.eye(2))
        grading = SymmetryGrading.continuous([0, 1])
        with pytest.raises(UnknownEigenvalueError):
            restrict_block(s, grading, grading, 5, 0)


class TestCouplingStrengths:
    def test_sum_rule(self) -> None:
        rng = np.random.default_rng(SEED)
        for _ in range(10):
            size = int(rng.integers(2, 12))
            s = random_operator(rng, size)
            grading = random_integer_grading(rng, size)
            table = coupling_strengths(s, grading, grading)
            assert table.total == pytest.approx(frobenius_norm_sq(s), rel=1e-12)

    def test_identity_is_diagonal_in_group_dimensions(self) -> None:
        grading = SymmetryGrading.continuous([0, 0, 1, 2, 2, 2])
        table = coupling_strengths(ComplexMatrix.from_array(np.eye(6)), grading, grading)
        assert np.array_equal(table.x, np.diag([2.0, 1.0, 3.0]))

    @pytest.mark.parametrize(
        ("outgoing_order", "incoming_order"),
        [([1, 0, 2, 5, 3, 4], [0, 1, 2, 3, 4, 5]), ([0, 1, 2, 4, 5, 3], [1, 0, 2, 5, 4, 3])],
    )
    def test_reordering_within_groups(
        self,
        outgoing_order: list[int],
        incoming_order: list[int],
    ) -> None:
        grading = SymmetryGrading.continuous([0, 0, 1, 2, 2, 2])
        s = random_operator(np.random.default_rng(SEED), 6)
        reordered = ComplexMatrix.from_array(s.entries[np.ix_(outgoing_order, incoming_order)])
        expected = coupling_strengths(s, grading, grading)
        table = coupling_strengths(reordered, grading, grading)
        assert table.incoming_gammas == expected.incoming_gammas
        assert np.allclose(table.x, expected.x, rtol=1e-14, atol=0)

    def test_unitary_mixing_within_groups(self) -> None:
        rng = np.random.default_rng(SEED)
        grading = SymmetryGrading.continuous([0, 0, 1, 2, 2, 2])
        mixing = np.zeros((6, 6), dtype=np.complex128)
        for start, stop in ((0, 2), (2, 3), (3, 6)):
            mixing[start:stop, start:stop] = random_unitary(rng, stop - start).entries
        s = random_operator(rng, 6)
        mixed = ComplexMatrix.from_array(mixing @ s.entries @ mixing.conj().T)
        expected = coupling_strengths(s, grading, grading)
        table = coupling_strengths(mixed, grading, grading)
        assert np.allclose(table.x, expected.x, rtol=1e-12, atol=1e-14)

    def test_rectangular_operator(self) -> None:
        s = ComplexMatrix.from_array([[1, 2, 0]])
        table = coupling_strengths(
            s,
            SymmetryGrading.continuous([0, 1, 1]),
            SymmetryGrading.continuous([1]),
        )
        assert table.incoming_gammas == (0, 1)
        assert table.cell(1, 0) == 1
        assert table.cell(1, 1) == 4

    def test_size_mismatch(self) -> None:
        with pytest.raises(DimensionMismatchError):
            coupling_strengths(
                ComplexMatrix.from_array(np.eye(3)),
                SymmetryGrading.continuous([0, 1]),
                SymmetryGrading.continuous([0, 1]),
            )

    def test_negative_strengths_are_rejected(self) -> None:
        with pytest.raises(ValidationError):
            CouplingTable(
                kind="continuous",
                incoming_gammas=(0,),
                outgoing_gammas=(0,),
                x=[[-1.0]],
            )


class TestCouplingFromIntensities:
    def test_matches_operator_side_table(self) -> None:
        rng = np.random.default_rng(SEED)
        for _ in range(20):
            size = int(rng.integers(2, 13))
            s = random_operator(rng, size)
            grading = random_integer_grading(rng, size)
            measured = coupling_from_intensities(OperatorSystem(s), grading, grading)
            expected = coupling_strengths(s, grading, grading)
            assert np.allclose(measured.x, expected.x, rtol=1e-12, atol=0)

    def test_identity_stub(self) -> None:
        grading = SymmetryGrading.continuous([0, 0, 1])
        table = coupling_from_intensities(PermutationSystem([0, 1, 2]), grading, grading)
        assert np.array_equal(table.x, np.diag([2.0, 1.0]))

    def test_swap_stub_moves_intensity(self) -> None:
        grading = SymmetryGrading.continuous([0, 0, 1, 1])
        table = coupling_from_intensities(PermutationSystem([2, 3, 0, 1]), grading, grading)
        assert np.array_equal(table.x, [[0.0, 2.0], [2.0, 0.0]])

    def test_transformed_system_probes_eigenbasis(self) -> None:
        rng = np.random.default_rng(SEED)
        s = random_operator(rng, 4)
        u = random_unitary(rng, 4)
        grading = SymmetryGrading.discrete([1, 1, -1, -1])
        probed = TransformedSystem(OperatorSystem(s), u, u)
        rotated = ComplexMatrix.from_array(u.entries.conj().T @ s.entries @ u.entries)
        measured = coupling_from_intensities(probed, grading, grading)
        expected = coupling_strengths(rotated, grading, grading)
        assert np.allclose(measured.x, expected.x, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("workers", [2, 5])
    def test_independent_of_workers(self, workers: int) -> None:
        rng = np.random.default_rng(SEED)
        s = random_operator(rng, 9)
        grading = random_integer_grading(rng, 9)
        serial = coupling_from_intensities(OperatorSystem(s), grading, grading)
        parallel = coupling_from_intensities(
            OperatorSystem(s),
            grading,
            grading,
            workers=workers,
        )
        assert serial == parallel

    def test_size_mismatch(self) -> None:
        grading = SymmetryGrading.continuous([0, 1])
        with pytest.raises(DimensionMismatchError):
            coupling_from_intensities(PermutationSystem([0, 1, 2]), grading, grading)

    def test_empty_system(self) -> None:
        grading = SymmetryGrading.continuous([])
        with pytest.raises(UndefinedMeasureError):
            coupling_from_intensities(PermutationSystem([]), grading, grading)
