"""Symmetry gradings, operator blocks and coupling strengths.

A grading attaches a symmetry eigenvalue to every basis vector. Basis vectors sharing an
eigenvalue span a gamma-subspace, and the coupling strength X between an incoming and an
outgoing subspace is the squared Frobenius norm of the operator block connecting them.
"""

import math
from abc import ABC, abstractmethod
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from logging import Logger, getLogger
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy.sparse import csr_array
from scipy.sparse.csgraph import connected_components

from .constants import (
    GROUPING_TOLERANCE,
    UNIMODULAR_TOLERANCE,
    ComplexArray,
    Eigenvalue,
    GradingKind,
    RealArray,
)
from .errors import (
    AmbiguousGroupingError,
    DimensionMismatchError,
    GradingKindError,
    UndefinedMeasureError,
    UnknownEigenvalueError,
)
from .operator_core import BasisLabel, ComplexMatrix, frobenius_norm_sq

default_logger = getLogger(__name__)


class SymmetryGrading(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: GradingKind
    eigenvalues: tuple[complex, ...]
    grouping_tolerance: float = GROUPING_TOLERANCE
    unimodular_tolerance: float = UNIMODULAR_TOLERANCE

    @field_validator("eigenvalues", mode="before")
    @classmethod
    def _coerce_eigenvalues(cls, value: Any) -> tuple[complex, ...]:  # noqa: ANN401
        return tuple(complex(v) for v in value)

    @model_validator(mode="after")
    def _check_eigenvalues(self) -> Self:
        for index, value in enumerate(self.eigenvalues):
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                msg = f"Eigenvalue {index} is not finite."
                raise ValueError(msg)
            if self.kind == "continuous" and value.imag != 0:
                msg = (
                    f"Eigenvalue {index} of a continuous grading must be real "
                    f"(the generator is Hermitian), got {value}."
                )
                raise ValueError(msg)
            if (
                self.kind == "discrete"
                and abs(abs(value) - 1) > self.unimodular_tolerance
            ):
                msg = (
                    f"Eigenvalue {index} of a discrete grading must have unit modulus "
                    f"(the symmetry operator is unitary), got {value}."
                )
                raise ValueError(msg)
        return self

    @classmethod
    def continuous(
        cls,
        eigenvalues: Sequence[float],
        grouping_tolerance: float = GROUPING_TOLERANCE,
    ) -> Self:
        return cls(
            kind="continuous",
            eigenvalues=tuple(complex(float(v)) for v in eigenvalues),
            grouping_tolerance=grouping_tolerance,
        )

    @classmethod
    def discrete(
        cls,
        eigenvalues: Sequence[Eigenvalue],
        grouping_tolerance: float = GROUPING_TOLERANCE,
    ) -> Self:
        return cls(
            kind="discrete",
            eigenvalues=tuple(eigenvalues),
            grouping_tolerance=grouping_tolerance,
        )

    @classmethod
    def from_labels(
        cls,
        labels: Sequence[BasisLabel],
        kind: GradingKind,
        grouping_tolerance: float = GROUPING_TOLERANCE,
    ) -> Self:
        """Read the eigenvalues carried by basis labels."""
        eigenvalues = [label.gamma for label in labels]
        if kind == "continuous":
            return cls.continuous([g.real for g in eigenvalues], grouping_tolerance)
        return cls.discrete(eigenvalues, grouping_tolerance)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def real_eigenvalues(self) -> RealArray:
        if self.kind != "continuous":
            msg = "Only continuous gradings have real eigenvalues."
            raise GradingKindError(msg)
        return np.array([g.real for g in self.eigenvalues], dtype=np.float64)


class GammaGroup(BaseModel):
    """One gamma-subspace: its eigenvalue and the basis indices spanning it."""

    model_config = ConfigDict(frozen=True)

    gamma: complex
    indices: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.indices)


def _sort_key(gamma: complex, kind: GradingKind) -> float:
    if kind == "continuous":
        return gamma.real
    phase = math.atan2(gamma.imag, gamma.real)
    # -1 may carry a negative zero imaginary part; keep the phase in (-pi, pi].
    if phase <= -math.pi + 1e-12:
        phase = math.pi
    return phase


def _cluster(
    values: Sequence[complex],
    kind: GradingKind,
    tolerance: float,
) -> list[tuple[complex, list[int]]]:
    """Cluster eigenvalues that lie within `tolerance` of each other.

    Returns:
        (representative, member indices) pairs sorted by representative.
    """
    if not values:
        return []

    array = np.asarray(values, dtype=np.complex128)
    distance = np.abs(array[:, None] - array[None, :])
    _, component = connected_components(
        csr_array((distance <= tolerance).astype(np.int8)),
        directed=False,
    )

    clusters: list[tuple[complex, list[int]]] = []
    for label in np.unique(component):
        members = np.flatnonzero(component == label)
        diameter = float(distance[np.ix_(members, members)].max())
        if diameter > tolerance:
            msg = (
                f"Eigenvalues {sorted(set(array[members].tolist()), key=abs)} chain "
                f"through the grouping tolerance {tolerance} but span {diameter}."
            )
            raise AmbiguousGroupingError(msg)
        representative = complex(array[members].mean())
        if kind == "discrete":
            representative /= abs(representative)
        elif kind == "continuous":
            representative = complex(representative.real)
        clusters.append((representative, members.tolist()))

    clusters.sort(key=lambda cluster: _sort_key(cluster[0], kind))
    return clusters


def group_indices(
    labels: Sequence[BasisLabel] | None,
    grading: SymmetryGrading,
) -> tuple[GammaGroup, ...]:
    """Partition basis indices into gamma-subspaces.

    Args:
        labels: Basis labels of the space being graded, used only to check sizes. None
            skips the check.
        grading: The eigenvalue of each basis index.

    Returns:
        Disjoint groups covering every index, sorted ascending for continuous gradings
        and by phase for discrete gradings.
    """
    if labels is not None and len(labels) != len(grading):
        msg = f"Grading has {len(grading)} eigenvalues for {len(labels)} basis labels."
        raise DimensionMismatchError(msg)

    return tuple(
        GammaGroup(gamma=gamma, indices=tuple(members))
        for gamma, members in _cluster(
            grading.eigenvalues,
            grading.kind,
            grading.grouping_tolerance,
        )
    )


class AlignedGroups(BaseModel):
    """Incoming and outgoing groups over a shared eigenvalue alphabet.

    An eigenvalue present on one side only gets an empty group on the other side.
    """

    model_config = ConfigDict(frozen=True)

    kind: GradingKind
    gammas: tuple[complex, ...]
    incoming: tuple[tuple[int, ...], ...]
    outgoing: tuple[tuple[int, ...], ...]

    def find(self, gamma: Eigenvalue, tolerance: float) -> int:
        for position, value in enumerate(self.gammas):
            if abs(value - complex(gamma)) <= tolerance:
                return position
        msg = f"Eigenvalue {gamma} is not part of the grading alphabet {self.gammas}."
        raise UnknownEigenvalueError(msg)


def align_gradings(
    grading_in: SymmetryGrading,
    grading_out: SymmetryGrading,
) -> AlignedGroups:
    if grading_in.kind != grading_out.kind:
        msg = (
            f"Incoming grading is {grading_in.kind} but outgoing grading is "
            f"{grading_out.kind}."
        )
        raise GradingKindError(msg)

    size_in = len(grading_in)
    combined = grading_in.eigenvalues + grading_out.eigenvalues
    tolerance = max(grading_in.grouping_tolerance, grading_out.grouping_tolerance)
    clusters = _cluster(combined, grading_in.kind, tolerance)

    return AlignedGroups(
        kind=grading_in.kind,
        gammas=tuple(gamma for gamma, _ in clusters),
        incoming=tuple(
            tuple(i for i in members if i < size_in) for _, members in clusters
        ),
        outgoing=tuple(
            tuple(i - size_in for i in members if i >= size_in) for _, members in clusters
        ),
    )


def _check_operator_size(
    s: ComplexMatrix,
    grading_in: SymmetryGrading,
    grading_out: SymmetryGrading,
) -> None:
    if s.cols != len(grading_in) or s.rows != len(grading_out):
        msg = (
            f"Operator is {s.rows}x{s.cols} but the gradings have {len(grading_out)} "
            f"outgoing and {len(grading_in)} incoming eigenvalues."
        )
        raise DimensionMismatchError(msg)


def restrict_block(
    s: ComplexMatrix,
    grading_in: SymmetryGrading,
    grading_out: SymmetryGrading,
    gamma: Eigenvalue,
    gamma_bar: Eigenvalue,
) -> ComplexMatrix:
    """Block of `s` mapping the incoming gamma-subspace to the outgoing gamma_bar one.

    Raises:
        UnknownEigenvalueError: If either eigenvalue is not in the grading alphabet.
    """
    _check_operator_size(s, grading_in, grading_out)
    aligned = align_gradings(grading_in, grading_out)
    tolerance = max(grading_in.grouping_tolerance, grading_out.grouping_tolerance)
    cols = list(aligned.incoming[aligned.find(gamma, tolerance)])
    rows = list(aligned.outgoing[aligned.find(gamma_bar, tolerance)])

    return ComplexMatrix(
        entries=s.entries[np.ix_(rows, cols)],
        row_labels=tuple(s.row_labels[i] for i in rows),
        col_labels=tuple(s.col_labels[j] for j in cols),
    )


class CouplingTable(BaseModel):
    """Coupling strengths X[gamma_bar, gamma]: rows are outgoing, columns incoming."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: GradingKind
    incoming_gammas: tuple[complex, ...]
    outgoing_gammas: tuple[complex, ...]
    x: np.ndarray

    @field_validator("x", mode="before")
    @classmethod
    def _as_real_array(cls, value: Any) -> RealArray:  # noqa: ANN401
        array = np.array(value, dtype=np.float64)
        if array.ndim != 2:  # noqa: PLR2004
            msg = f"X must be two dimensional, got {array.ndim} dimensions."
            raise ValueError(msg)
        if not np.all(np.isfinite(array)) or np.any(array < 0):
            msg = "Coupling strengths must be finite and nonnegative."
            raise ValueError(msg)
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_shape(self) -> Self:
        expected = (len(self.outgoing_gammas), len(self.incoming_gammas))
        if self.x.shape != expected:
            msg = f"X has shape {self.x.shape}, expected {expected}."
            raise ValueError(msg)
        if self.kind == "continuous" and any(
            g.imag != 0 for g in self.incoming_gammas + self.outgoing_gammas
        ):
            msg = "A continuous coupling table needs real eigenvalues."
            raise ValueError(msg)
        return self

    @property
    def total(self) -> float:
        return float(self.x.sum())

    def cell(self, gamma_bar: Eigenvalue, gamma: Eigenvalue) -> float:
        row = self.outgoing_gammas.index(complex(gamma_bar))
        col = self.incoming_gammas.index(complex(gamma))
        return float(self.x[row, col])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CouplingTable):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.incoming_gammas == other.incoming_gammas
            and self.outgoing_gammas == other.outgoing_gammas
            and np.array_equal(self.x, other.x)
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.incoming_gammas, self.outgoing_gammas, self.x.tobytes()))


def coupling_strengths(
    s: ComplexMatrix,
    grading_in: SymmetryGrading,
    grading_out: SymmetryGrading,
) -> CouplingTable:
    """Coupling strengths X = ||S_{gamma_bar gamma}||_F^2 of every operator block.

    Raises:
        UndefinedMeasureError: If the operator is empty.
    """
    if s.rows == 0 or s.cols == 0:
        msg = "Coupling strengths of an empty operator are undefined."
        raise UndefinedMeasureError(msg)
    _check_operator_size(s, grading_in, grading_out)
    aligned = align_gradings(grading_in, grading_out)

    size = len(aligned.gammas)
    x = np.zeros((size, size))
    for row, rows in enumerate(aligned.outgoing):
        for col, cols in enumerate(aligned.incoming):
            if rows and cols:
                x[row, col] = frobenius_norm_sq(s.entries[np.ix_(rows, cols)])

    return CouplingTable(
        kind=aligned.kind,
        incoming_gammas=aligned.gammas,
        outgoing_gammas=aligned.gammas,
        x=x,
    )


class BlackBoxSystem(ABC):
    """A system that can only be probed: incoming coefficients in, outgoing out.

    The incoming basis is the standard basis of `incoming_labels`. Implementations must
    be deterministic.
    """

    @property
    @abstractmethod
    def incoming_labels(self) -> tuple[BasisLabel, ...]: ...

    @property
    @abstractmethod
    def outgoing_labels(self) -> tuple[BasisLabel, ...]: ...

    @abstractmethod
    def evaluate(self, incoming: ComplexArray) -> ComplexArray: ...


class OperatorSystem(BlackBoxSystem):
    """Black box replaying a stored operator, e.g. one loaded from a file."""

    def __init__(self, operator: ComplexMatrix) -> None:
        self.operator = operator

    @property
    def incoming_labels(self) -> tuple[BasisLabel, ...]:
        return self.operator.col_labels

    @property
    def outgoing_labels(self) -> tuple[BasisLabel, ...]:
        return self.operator.row_labels

    def evaluate(self, incoming: ComplexArray) -> ComplexArray:
        return self.operator.entries @ incoming


class TransformedSystem(BlackBoxSystem):
    """Probe another system in rotated bases: v -> U_out† system(U_in v).

    Used to illuminate with eigenvectors of a symmetry operator that is not diagonal in
    the system's own basis.
    """

    def __init__(
        self,
        system: BlackBoxSystem,
        u_in: ComplexMatrix,
        u_out: ComplexMatrix,
    ) -> None:
        if u_in.rows != len(system.incoming_labels) or u_out.rows != len(
            system.outgoing_labels,
        ):
            msg = "Basis changes do not match the dimensions of the system."
            raise DimensionMismatchError(msg)
        self.system = system
        self.u_in = u_in
        self.u_out = u_out

    @property
    def incoming_labels(self) -> tuple[BasisLabel, ...]:
        return self.u_in.col_labels

    @property
    def outgoing_labels(self) -> tuple[BasisLabel, ...]:
        return self.u_out.col_labels

    def evaluate(self, incoming: ComplexArray) -> ComplexArray:
        outgoing = self.system.evaluate(self.u_in.entries @ incoming)
        return self.u_out.entries.conj().T @ outgoing


def coupling_from_intensities(
    system: BlackBoxSystem,
    grading_in: SymmetryGrading,
    grading_out: SymmetryGrading,
    *,
    workers: int = 1,
    logger: Logger = default_logger,
) -> CouplingTable:
    """Coupling strengths from intensity-only measurements.

    Each incoming basis vector is sent through the system once and the squared moduli of
    the outgoing coordinates are accumulated per outgoing gamma-subspace. Phases are never
    read. Accumulation runs in a fixed order (incoming group ascending, then eta), so the
    result does not depend on `workers`.

    Args:
        system: The system to probe.
        grading_in: Eigenvalues of the incoming basis vectors.
        grading_out: Eigenvalues of the outgoing basis vectors.
        workers: Number of threads evaluating incoming basis vectors.
        logger: Logger for progress messages.

    Returns:
        The coupling table.
    """
    size_in = len(system.incoming_labels)
    size_out = len(system.outgoing_labels)
    if size_in != len(grading_in) or size_out != len(grading_out):
        msg = (
            f"System maps {size_in} to {size_out} coordinates but the gradings have "
            f"{len(grading_in)} incoming and {len(grading_out)} outgoing eigenvalues."
        )
        raise DimensionMismatchError(msg)
    if size_in == 0 or size_out == 0:
        msg = "Coupling strengths of an empty system are undefined."
        raise UndefinedMeasureError(msg)

    aligned = align_gradings(grading_in, grading_out)
    schedule = [
        (col, index)
        for col, indices in enumerate(aligned.incoming)
        for index in indices
    ]

    def measure(index: int) -> RealArray:
        probe = np.zeros(size_in, dtype=np.complex128)
        probe[index] = 1.0
        outgoing = np.asarray(system.evaluate(probe))
        if outgoing.shape != (size_out,):
            msg = f"Evaluator returned shape {outgoing.shape}, expected ({size_out},)."
            raise DimensionMismatchError(msg)
        return np.abs(outgoing) ** 2

    logger.info("Probing system with %d incoming basis vectors", len(schedule))
    with ThreadPoolExecutor(max_workers=workers) as executor:
        intensities = list(executor.map(measure, [index for _, index in schedule]))

    size = len(aligned.gammas)
    x = np.zeros((size, size))
    for (col, _), intensity in zip(schedule, intensities, strict=True):
        for row, rows in enumerate(aligned.outgoing):
            if rows:
                x[row, col] += float(np.sum(intensity[list(rows)]))

    return CouplingTable(
        kind=aligned.kind,
        incoming_gammas=aligned.gammas,
        outgoing_gammas=aligned.gammas,
        x=x,
    )
