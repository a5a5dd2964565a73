"""Dense complex matrices with labeled bases.

Every operator in symbreak (scattering operators, symmetry transformations, generators
and their blocks) is a `ComplexMatrix`. Instances are immutable: the entry array is
copied on construction and flagged read-only, so values can be shared between threads.
"""

from collections.abc import Sequence
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from .constants import COMPARISON_TOLERANCE, ComplexArray, Eigenvalue
from .errors import (
    DimensionMismatchError,
    NonSquareMatrixError,
    UndefinedMeasureError,
)


class BasisLabel(BaseModel):
    """Label of one basis vector: symmetry eigenvalue plus the completing multi-index."""

    model_config = ConfigDict(frozen=True)

    gamma: complex = 0j
    eta: tuple[int, ...] = ()

    @field_validator("gamma", mode="before")
    @classmethod
    def _coerce_gamma(cls, value: Any) -> complex:  # noqa: ANN401
        # numpy scalars are not accepted by pydantic's complex validator.
        return complex(value)


def index_labels(size: int) -> tuple[BasisLabel, ...]:
    """Labels that only carry the position of each basis vector."""
    return tuple(BasisLabel(eta=(i,)) for i in range(size))


def eigenvalue_labels(eigenvalues: Sequence[Eigenvalue]) -> tuple[BasisLabel, ...]:
    """Labels carrying the given eigenvalues, with eta numbering repeated eigenvalues."""
    seen: dict[complex, int] = {}
    labels: list[BasisLabel] = []
    for value in eigenvalues:
        key = complex(value)
        count = seen.get(key, 0)
        seen[key] = count + 1
        labels.append(BasisLabel(gamma=key, eta=(count,)))
    return tuple(labels)


class ComplexMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: np.ndarray
    row_labels: tuple[BasisLabel, ...]
    col_labels: tuple[BasisLabel, ...]

    @field_validator("entries", mode="before")
    @classmethod
    def _as_complex_array(cls, value: Any) -> ComplexArray:  # noqa: ANN401
        array = np.array(value, dtype=np.complex128, order="C")
        if array.ndim != 2:  # noqa: PLR2004
            msg = f"entries must be two dimensional, got {array.ndim} dimensions."
            raise ValueError(msg)
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_labels(self) -> Self:
        rows, cols = self.entries.shape
        if len(self.row_labels) != rows or len(self.col_labels) != cols:
            msg = (
                f"Label counts ({len(self.row_labels)}, {len(self.col_labels)}) do not "
                f"match the {rows}x{cols} entries."
            )
            raise ValueError(msg)
        for side, labels in (("row", self.row_labels), ("col", self.col_labels)):
            if len(set(labels)) != len(labels):
                msg = f"Duplicate {side} labels: (gamma, eta) pairs must be unique."
                raise ValueError(msg)
        return self

    @classmethod
    def from_array(
        cls,
        array: Any,  # noqa: ANN401
        row_labels: Sequence[BasisLabel] | None = None,
        col_labels: Sequence[BasisLabel] | None = None,
    ) -> Self:
        """Build a matrix, numbering any labels that are not given."""
        entries = np.asarray(array, dtype=np.complex128)
        if entries.ndim != 2:  # noqa: PLR2004
            msg = f"array must be two dimensional, got {entries.ndim} dimensions."
            raise DimensionMismatchError(msg)
        rows, cols = entries.shape
        return cls(
            entries=entries,
            row_labels=tuple(row_labels) if row_labels is not None else index_labels(rows),
            col_labels=tuple(col_labels) if col_labels is not None else index_labels(cols),
        )

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ComplexMatrix):
            return NotImplemented
        return (
            self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
            and np.array_equal(self.entries, other.entries)
        )

    def __hash__(self) -> int:
        return hash((self.entries.tobytes(), self.row_labels, self.col_labels))


def identity(labels: Sequence[BasisLabel]) -> ComplexMatrix:
    return ComplexMatrix(
        entries=np.eye(len(labels), dtype=np.complex128),
        row_labels=tuple(labels),
        col_labels=tuple(labels),
    )


def matmul(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Matrix product with row labels from `a` and column labels from `b`.

    Raises:
        DimensionMismatchError: If `a.cols` differs from `b.rows`.
    """
    if a.cols != b.rows:
        msg = f"Cannot multiply a {a.rows}x{a.cols} matrix by a {b.rows}x{b.cols} matrix."
        raise DimensionMismatchError(msg)
    return ComplexMatrix(
        entries=a.entries @ b.entries,
        row_labels=a.row_labels,
        col_labels=b.col_labels,
    )


def adjoint(a: ComplexMatrix) -> ComplexMatrix:
    return ComplexMatrix(
        entries=a.entries.conj().T,
        row_labels=a.col_labels,
        col_labels=a.row_labels,
    )


def frobenius_norm_sq(a: ComplexMatrix | ComplexArray) -> float:
    """Sum of the squared moduli of all entries, i.e. Tr(A†A)."""
    entries = a.entries if isinstance(a, ComplexMatrix) else np.asarray(a)
    return float(np.vdot(entries, entries).real)


def trace(a: ComplexMatrix) -> complex:
    if not a.is_square:
        msg = f"Trace needs a square matrix, got {a.rows}x{a.cols}."
        raise NonSquareMatrixError(msg)
    return complex(np.trace(a.entries))


def unitarity_residual(a: ComplexMatrix) -> float:
    """Squared Frobenius norm of A†A - I."""
    if not a.is_square:
        msg = f"Unitarity needs a square matrix, got {a.rows}x{a.cols}."
        raise NonSquareMatrixError(msg)
    gram = a.entries.conj().T @ a.entries
    return frobenius_norm_sq(gram - np.eye(a.rows))


def commutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """AB - BA, labeled like AB."""
    product = matmul(a, b)
    reverse = matmul(b, a)
    if product.entries.shape != reverse.entries.shape:
        msg = "Commutator needs square matrices of equal size."
        raise DimensionMismatchError(msg)
    return ComplexMatrix(
        entries=product.entries - reverse.entries,
        row_labels=product.row_labels,
        col_labels=product.col_labels,
    )


def conjugate(s: ComplexMatrix, t: ComplexMatrix) -> ComplexMatrix:
    """T S T^-1 for a unitary T, using T^-1 = T†."""
    return matmul(matmul(t, s), adjoint(t))


def change_basis(
    a: ComplexMatrix,
    u_out: ComplexMatrix,
    u_in: ComplexMatrix,
) -> ComplexMatrix:
    """Express `a` in new bases: U_out† A U_in.

    The columns of `u_in` and `u_out` are the new basis vectors written in the old
    bases; their column labels become the labels of the result.
    """
    return matmul(matmul(adjoint(u_out), a), u_in)


def relative_error(a: ComplexMatrix | ComplexArray, b: ComplexMatrix | ComplexArray) -> float:
    """Relative Frobenius error ||a - b|| / ||b||, or ||a|| when b vanishes."""
    entries_a = a.entries if isinstance(a, ComplexMatrix) else np.asarray(a)
    entries_b = b.entries if isinstance(b, ComplexMatrix) else np.asarray(b)
    if entries_a.shape != entries_b.shape:
        msg = f"Cannot compare shapes {entries_a.shape} and {entries_b.shape}."
        raise DimensionMismatchError(msg)
    difference = frobenius_norm_sq(entries_a - entries_b)
    reference = frobenius_norm_sq(entries_b)
    if reference == 0:
        return float(np.sqrt(difference))
    return float(np.sqrt(difference / reference))


def allclose(
    a: ComplexMatrix | ComplexArray,
    b: ComplexMatrix | ComplexArray,
    tolerance: float = COMPARISON_TOLERANCE,
) -> bool:
    return relative_error(a, b) <= tolerance


def operator_distance(a: ComplexMatrix, b: ComplexMatrix) -> float:
    """Normalized distance 1/2 ||A - B||^2 / (||A||^2 + ||B||^2) between two operators.

    The value lies in [0, 1]; it is 0 iff A = B and 1 iff A = -B.

    Raises:
        UndefinedMeasureError: If both operators vanish.
    """
    if a.entries.shape != b.entries.shape:
        msg = f"Cannot compare shapes {a.entries.shape} and {b.entries.shape}."
        raise DimensionMismatchError(msg)
    normalization = frobenius_norm_sq(a) + frobenius_norm_sq(b)
    if normalization == 0:
        msg = "Distance between two zero operators is undefined."
        raise UndefinedMeasureError(msg)
    return 0.5 * frobenius_norm_sq(a.entries - b.entries) / normalization
