"""Seeded random operators, gradings and coupling tables for fuzzing the measures."""

import numpy as np

from .grading import CouplingTable, SymmetryGrading
from .operator_core import ComplexMatrix, eigenvalue_labels


def random_operator(
    rng: np.random.Generator,
    rows: int,
    cols: int | None = None,
) -> ComplexMatrix:
    """Matrix with independent standard complex Gaussian entries."""
    cols = rows if cols is None else cols
    entries = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return ComplexMatrix.from_array(entries)


def random_unitary(rng: np.random.Generator, size: int) -> ComplexMatrix:
    """Haar-distributed unitary from the QR decomposition of a Gaussian matrix."""
    gaussian = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    q, r = np.linalg.qr(gaussian)
    diagonal = np.diag(r)
    return ComplexMatrix.from_array(q * (diagonal / np.abs(diagonal))[None, :])


def random_integer_grading(
    rng: np.random.Generator,
    size: int,
    spread: int = 2,
) -> SymmetryGrading:
    """Continuous grading with integer eigenvalues drawn from -spread..spread."""
    return SymmetryGrading.continuous(rng.integers(-spread, spread + 1, size).tolist())


def random_unimodular_grading(
    rng: np.random.Generator,
    size: int,
    levels: int = 3,
) -> SymmetryGrading:
    """Discrete grading with eigenvalues drawn from `levels` random phases."""
    phases = rng.uniform(-np.pi, np.pi, levels)
    choice = rng.integers(0, levels, size)
    return SymmetryGrading.discrete(np.exp(1j * phases[choice]).tolist())


def random_diagonalizable_unitary(
    rng: np.random.Generator,
    grading: SymmetryGrading,
) -> tuple[ComplexMatrix, ComplexMatrix]:
    """A unitary T = U diag(gamma) U† with the eigenvalues of `grading`.

    Returns T in the standard basis and the eigenbasis U, whose columns carry the
    eigenvalue labels.
    """
    basis = random_unitary(rng, len(grading))
    gammas = np.array(grading.eigenvalues, dtype=np.complex128)
    transform = (basis.entries * gammas[None, :]) @ basis.entries.conj().T
    labeled_basis = ComplexMatrix(
        entries=basis.entries,
        row_labels=basis.row_labels,
        col_labels=eigenvalue_labels(grading.eigenvalues),
    )
    return ComplexMatrix.from_array(transform), labeled_basis


def random_coupling_table(
    rng: np.random.Generator,
    gammas: list[float],
) -> CouplingTable:
    """Continuous coupling table over `gammas` with exponentially distributed strengths."""
    size = len(gammas)
    return CouplingTable(
        kind="continuous",
        incoming_gammas=tuple(complex(g) for g in gammas),
        outgoing_gammas=tuple(complex(g) for g in gammas),
        x=rng.exponential(1.0, (size, size)),
    )
