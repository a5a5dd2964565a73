"""Two dimensional scalar multiple scattering by sound-soft discs.

Fields are expanded about the global origin in regular waves J_m(kr) e^{im phi} (incoming
coordinates) and outgoing waves H1_m(kr) e^{im phi} (outgoing coordinates), m = -L..L. Each
disc scatters with its diagonal T-matrix, the discs are coupled through the Foldy-Lax
equations, and Graf's addition theorem moves expansions between origins.

The transition operator maps incoming global coefficients to scattered outgoing global
coefficients. The full scattering operator is S = 1 + 2 * transition.
"""

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from logging import Logger, getLogger
from typing import Literal, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import lu_factor, lu_solve

from .constants import (
    CONDITION_LIMIT,
    CONVERGENCE_TOLERANCE,
    GLOBAL_ORDER_MARGIN,
    LOCAL_ORDER_MARGIN,
    ComplexArray,
    OperatorMode,
    SymmetryName,
    TranslationKind,
)
from .errors import (
    DimensionMismatchError,
    IllConditionedSystemError,
    SingularTranslationError,
    TruncationConvergenceError,
)
from .grading import BlackBoxSystem, SymmetryGrading, coupling_strengths
from .measures import measure_continuous_closed, measure_direct
from .operator_core import BasisLabel, ComplexMatrix, eigenvalue_labels
from .special import bessel_j_orders, hankel1_orders, signed_orders

default_logger = getLogger(__name__)

type MirrorAxis = Literal["x", "y"]


class Disc(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float = Field(allow_inf_nan=False)
    y: float = Field(allow_inf_nan=False)
    radius: float = Field(gt=0, allow_inf_nan=False)

    @property
    def center(self) -> complex:
        return complex(self.x, self.y)


class Scene(BaseModel):
    """Non-overlapping sound-soft discs probed at wavenumber k."""

    model_config = ConfigDict(frozen=True)

    discs: tuple[Disc, ...] = Field(min_length=1)
    wavenumber: float = Field(gt=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _check_overlap(self) -> Self:
        for i, first in enumerate(self.discs):
            for j in range(i + 1, len(self.discs)):
                second = self.discs[j]
                distance = abs(first.center - second.center)
                if distance <= first.radius + second.radius:
                    msg = (
                        f"Discs {i} and {j} overlap: center distance {distance} is not "
                        f"larger than the sum of radii {first.radius + second.radius}."
                    )
                    raise ValueError(msg)
        return self

    @property
    def circumscribing_radius(self) -> float:
        """Radius of the smallest origin-centered circle containing every disc."""
        return max(abs(disc.center) + disc.radius for disc in self.discs)

    def rotated(self, alpha: float) -> "Scene":
        """The scene rotated by `alpha` about the origin."""
        phase = complex(math.cos(alpha), math.sin(alpha))
        discs = []
        for disc in self.discs:
            center = disc.center * phase
            discs.append(Disc(x=center.real, y=center.imag, radius=disc.radius))
        return Scene(discs=tuple(discs), wavenumber=self.wavenumber)

    def reflected(self, axis: MirrorAxis = "x") -> "Scene":
        """The scene mirrored across the x-axis or the y-axis."""
        discs = tuple(
            Disc(x=disc.x, y=-disc.y, radius=disc.radius)
            if axis == "x"
            else Disc(x=-disc.x, y=disc.y, radius=disc.radius)
            for disc in self.discs
        )
        return Scene(discs=discs, wavenumber=self.wavenumber)


class SimConfig(BaseModel):
    """Truncation orders and the operator returned by the assembly.

    `local_order` applies to every disc when set; otherwise each disc gets
    ceil(k a) + LOCAL_ORDER_MARGIN, capped at the global order.
    """

    model_config = ConfigDict(frozen=True)

    global_order: int = Field(ge=1)
    local_order: int | None = Field(default=None, ge=1)
    operator_mode: OperatorMode = "transition"

    @model_validator(mode="after")
    def _check_orders(self) -> Self:
        if self.local_order is not None and self.local_order > self.global_order:
            msg = (
                f"local_order ({self.local_order}) must not exceed global_order "
                f"({self.global_order})."
            )
            raise ValueError(msg)
        return self


def default_sim_config(scene: Scene, operator_mode: OperatorMode = "transition") -> SimConfig:
    """Global order ceil(k R_scene) + GLOBAL_ORDER_MARGIN with per-disc local orders."""
    global_order = math.ceil(scene.wavenumber * scene.circumscribing_radius)
    return SimConfig(
        global_order=global_order + GLOBAL_ORDER_MARGIN,
        operator_mode=operator_mode,
    )


def local_orders(scene: Scene, cfg: SimConfig) -> tuple[int, ...]:
    if cfg.local_order is not None:
        return (cfg.local_order,) * len(scene.discs)
    return tuple(
        min(math.ceil(scene.wavenumber * disc.radius) + LOCAL_ORDER_MARGIN, cfg.global_order)
        for disc in scene.discs
    )


def multipole_labels(order: int) -> tuple[BasisLabel, ...]:
    """Labels of the cylindrical multipoles m = -order..order, carrying gamma = m."""
    return eigenvalue_labels(range(-order, order + 1))


def single_disc_tmatrix(radius: float, wavenumber: float, order: int) -> ComplexArray:
    """Diagonal T-matrix t_m = -J_m(ka) / H1_m(ka) of a sound-soft disc, m = -order..order."""
    size = radius * wavenumber
    if not size > 0:
        msg = f"k * radius must be positive, got {size}."
        raise ValueError(msg)
    j = bessel_j_orders(order, size)
    h = hankel1_orders(order, size)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = -j / h
    # Y overflows for high orders at small arguments, where t vanishes.
    t = np.where(np.isfinite(t), t, 0)
    return np.concatenate([t[:0:-1], t])


def graf_translation(
    displacement: complex,
    wavenumber: float,
    order_src: int,
    order_dst: int,
    kind: TranslationKind = "regular_to_regular",
) -> ComplexMatrix:
    """Re-expansion matrix for moving to an origin displaced by `displacement`.

    `displacement` is the position of the new origin relative to the old one, written as
    x + iy. Entries are R[n, m] = C_{m-n}(k|d|) e^{i(m-n) arg d}, with C = H1 for
    outgoing_to_regular and C = J for the other kinds. outgoing_to_outgoing is valid
    outside the circle of radius |d| about the new origin.

    Raises:
        SingularTranslationError: For outgoing_to_regular with a zero displacement.
    """
    if order_src < 1 or order_dst < 1:
        msg = f"Truncation orders must be at least 1, got {order_src} and {order_dst}."
        raise DimensionMismatchError(msg)
    distance = abs(displacement)
    argument = wavenumber * distance
    top = order_src + order_dst
    if kind == "outgoing_to_regular":
        if distance == 0:
            msg = "An outgoing wave cannot be re-expanded about its own origin."
            raise SingularTranslationError(msg)
        radial = signed_orders(hankel1_orders(top, argument))
    else:
        radial = signed_orders(bessel_j_orders(top, argument)).astype(np.complex128)

    destination = np.arange(-order_dst, order_dst + 1)[:, None]
    source = np.arange(-order_src, order_src + 1)[None, :]
    difference = source - destination
    phase = np.exp(1j * difference * np.angle(displacement))
    return ComplexMatrix(
        entries=radial[top + difference] * phase,
        row_labels=multipole_labels(order_dst),
        col_labels=multipole_labels(order_src),
    )


class FoldyLaxSystem:
    """The factored Foldy-Lax system of a scene.

    The disc coefficients solve (I - T G) b = T A a, where A re-expands the incoming global
    field about every disc, G couples the outgoing field of each disc to the others, and T
    is block diagonal with the disc T-matrices. The matrix is factored once; every right-hand
    side is solved separately, so a column does not depend on which columns are solved with it.
    """

    def __init__(
        self,
        scene: Scene,
        cfg: SimConfig,
        *,
        condition_limit: float = CONDITION_LIMIT,
        logger: Logger = default_logger,
    ) -> None:
        self.scene = scene
        self.cfg = cfg
        self.local_orders = local_orders(scene, cfg)
        k = scene.wavenumber
        global_order = cfg.global_order

        sizes = [2 * order + 1 for order in self.local_orders]
        self.offsets = tuple(int(offset) for offset in np.cumsum([0, *sizes]))
        total = self.offsets[-1]

        tmatrices = [
            single_disc_tmatrix(disc.radius, k, order)
            for disc, order in zip(scene.discs, self.local_orders, strict=True)
        ]
        matrix = np.eye(total, dtype=np.complex128)
        for i, disc_i in enumerate(scene.discs):
            rows = slice(self.offsets[i], self.offsets[i + 1])
            for j, disc_j in enumerate(scene.discs):
                if i == j:
                    continue
                coupling = graf_translation(
                    disc_i.center - disc_j.center,
                    k,
                    self.local_orders[j],
                    self.local_orders[i],
                    "outgoing_to_regular",
                )
                cols = slice(self.offsets[j], self.offsets[j + 1])
                matrix[rows, cols] -= tmatrices[i][:, None] * coupling.entries

        self.condition_estimate = float(np.linalg.cond(matrix))
        logger.debug(
            "Foldy-Lax system of size %d has condition estimate %.3e",
            total,
            self.condition_estimate,
        )
        if not math.isfinite(self.condition_estimate) or self.condition_estimate > condition_limit:
            msg = (
                f"The Foldy-Lax system is ill-conditioned: condition estimate "
                f"{self.condition_estimate:.3e} exceeds {condition_limit:.3e}."
            )
            raise IllConditionedSystemError(msg, self.condition_estimate)
        self._factorization = lu_factor(matrix)

        self._to_discs = np.vstack(
            [
                tmatrices[i][:, None]
                * graf_translation(
                    disc.center, k, global_order, order, "regular_to_regular"
                ).entries
                for i, (disc, order) in enumerate(
                    zip(scene.discs, self.local_orders, strict=True)
                )
            ],
        )
        self._to_origin = np.hstack(
            [
                graf_translation(
                    -disc.center, k, order, global_order, "outgoing_to_outgoing"
                ).entries
                for disc, order in zip(scene.discs, self.local_orders, strict=True)
            ],
        )

    @property
    def global_order(self) -> int:
        return self.cfg.global_order

    def solve(self, incoming: ComplexArray) -> ComplexArray:
        """Stacked outgoing coefficients of every disc for one incoming global vector."""
        incoming = np.asarray(incoming, dtype=np.complex128)
        if incoming.shape != (2 * self.global_order + 1,):
            msg = (
                f"Incoming coefficients must have shape ({2 * self.global_order + 1},), "
                f"got {incoming.shape}."
            )
            raise DimensionMismatchError(msg)
        return lu_solve(self._factorization, self._to_discs @ incoming)

    def split(self, stacked: ComplexArray) -> tuple[ComplexArray, ...]:
        return tuple(
            stacked[self.offsets[i] : self.offsets[i + 1]] for i in range(len(self.scene.discs))
        )

    def scattered(self, incoming: ComplexArray) -> ComplexArray:
        """Outgoing global coefficients of the scattered field."""
        return self._to_origin @ self.solve(incoming)


class FoldyLaxSolution(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coefficients: tuple[np.ndarray, ...]
    local_orders: tuple[int, ...]
    condition_estimate: float


def foldy_lax_solve(
    scene: Scene,
    cfg: SimConfig,
    incoming: ComplexArray,
    *,
    condition_limit: float = CONDITION_LIMIT,
) -> FoldyLaxSolution:
    """Per-disc outgoing coefficients for incoming global regular coefficients."""
    system = FoldyLaxSystem(scene, cfg, condition_limit=condition_limit)
    return FoldyLaxSolution(
        coefficients=system.split(system.solve(incoming)),
        local_orders=system.local_orders,
        condition_estimate=system.condition_estimate,
    )


class SimulatorSystem(BlackBoxSystem):
    """A scene seen only through its response to incoming multipole vectors."""

    def __init__(
        self,
        scene: Scene,
        cfg: SimConfig,
        *,
        condition_limit: float = CONDITION_LIMIT,
        logger: Logger = default_logger,
    ) -> None:
        self.foldy_lax = FoldyLaxSystem(
            scene,
            cfg,
            condition_limit=condition_limit,
            logger=logger,
        )
        self.operator_mode = cfg.operator_mode
        self._labels = multipole_labels(cfg.global_order)

    @property
    def incoming_labels(self) -> tuple[BasisLabel, ...]:
        return self._labels

    @property
    def outgoing_labels(self) -> tuple[BasisLabel, ...]:
        return self._labels

    def evaluate(self, incoming: ComplexArray) -> ComplexArray:
        incoming = np.asarray(incoming, dtype=np.complex128)
        scattered = self.foldy_lax.scattered(incoming)
        if self.operator_mode == "full_s":
            return incoming + 2 * scattered
        return scattered


class Assembly(BaseModel):
    model_config = ConfigDict(frozen=True)

    operator: ComplexMatrix
    local_orders: tuple[int, ...]
    condition_estimate: float


def assemble_with_diagnostics(
    scene: Scene,
    cfg: SimConfig,
    *,
    workers: int = 1,
    condition_limit: float = CONDITION_LIMIT,
    logger: Logger = default_logger,
) -> Assembly:
    """Assemble the operator column by column, keeping the solver diagnostics."""
    system = SimulatorSystem(scene, cfg, condition_limit=condition_limit, logger=logger)
    size = 2 * cfg.global_order + 1
    logger.info(
        "Assembling %s operator of size %d for %d discs",
        cfg.operator_mode,
        size,
        len(scene.discs),
    )

    def column(index: int) -> ComplexArray:
        probe = np.zeros(size, dtype=np.complex128)
        probe[index] = 1.0
        return system.evaluate(probe)

    with ThreadPoolExecutor(max_workers=workers) as executor:
        columns = list(executor.map(column, range(size)))

    labels = multipole_labels(cfg.global_order)
    return Assembly(
        operator=ComplexMatrix(
            entries=np.column_stack(columns),
            row_labels=labels,
            col_labels=labels,
        ),
        local_orders=system.foldy_lax.local_orders,
        condition_estimate=system.foldy_lax.condition_estimate,
    )


def assemble_scattering_operator(
    scene: Scene,
    cfg: SimConfig,
    *,
    workers: int = 1,
    condition_limit: float = CONDITION_LIMIT,
    logger: Logger = default_logger,
) -> ComplexMatrix:
    """Transition operator (or 1 + 2 * transition for full_s) labeled by gamma = m."""
    return assemble_with_diagnostics(
        scene,
        cfg,
        workers=workers,
        condition_limit=condition_limit,
        logger=logger,
    ).operator


def rotation_grading(order: int) -> SymmetryGrading:
    """Continuous grading by angular momentum, gamma = m for m = -order..order."""
    return SymmetryGrading.continuous(range(-order, order + 1))


def mirror_operator(order: int, axis: MirrorAxis = "x") -> ComplexMatrix:
    """Coefficient map of a reflection.

    Across the x-axis, J_m(kr) e^{im phi} becomes (-1)^m times the -m multipole, so the
    matrix is the signed permutation |m> -> (-1)^m |-m>. Across the y-axis it is the plain
    permutation |m> -> |-m>.
    """
    size = 2 * order + 1
    entries = np.zeros((size, size), dtype=np.complex128)
    for m in range(-order, order + 1):
        sign = -1.0 if axis == "x" and m % 2 else 1.0
        entries[order - m, order + m] = sign
    labels = multipole_labels(order)
    return ComplexMatrix(entries=entries, row_labels=labels, col_labels=labels)


def rotated_mirror_operator(order: int, theta: float) -> ComplexMatrix:
    """Reflection across the line through the origin at angle theta / 2."""
    phases = np.exp(-1j * theta * np.arange(-order, order + 1))
    mirror = mirror_operator(order)
    return ComplexMatrix(
        entries=phases[:, None] * mirror.entries,
        row_labels=mirror.row_labels,
        col_labels=mirror.col_labels,
    )


def mirror_eigenbasis(order: int, axis: MirrorAxis = "x") -> ComplexMatrix:
    """Orthonormal eigenvectors of `mirror_operator` as columns, labeled by gamma = +-1.

    The columns are |0> and (|m> +- s_m |-m>) / sqrt(2) for m = 1..order, with s_m the
    sign of the reflection on |m>.
    """
    size = 2 * order + 1
    entries = np.zeros((size, size), dtype=np.complex128)
    gammas: list[float] = [1.0]
    entries[order, 0] = 1.0
    column = 1
    scale = 1 / math.sqrt(2)
    for m in range(1, order + 1):
        sign = -1.0 if axis == "x" and m % 2 else 1.0
        for parity in (1.0, -1.0):
            entries[order + m, column] = scale
            entries[order - m, column] = parity * sign * scale
            gammas.append(parity)
            column += 1
    return ComplexMatrix(
        entries=entries,
        row_labels=multipole_labels(order),
        col_labels=eigenvalue_labels(gammas),
    )


def _truncation_measures(
    scene: Scene,
    cfg: SimConfig,
    symmetry: SymmetryName,
    thetas: Sequence[float],
    workers: int,
    condition_limit: float,
    logger: Logger,
) -> list[float]:
    operator = assemble_scattering_operator(
        scene,
        cfg,
        workers=workers,
        condition_limit=condition_limit,
        logger=logger,
    )
    order = cfg.global_order
    if symmetry == "mirror":
        return [
            measure_direct(operator, rotated_mirror_operator(order, theta))
            for theta in thetas
        ]
    grading = rotation_grading(order)
    x = coupling_strengths(operator, grading, grading)
    return [measure_continuous_closed(x, theta) for theta in thetas]


def check_truncation_convergence(
    scene: Scene,
    cfg: SimConfig,
    thetas: Sequence[float],
    *,
    symmetry: SymmetryName = "rotation",
    tolerance: float = CONVERGENCE_TOLERANCE,
    workers: int = 1,
    condition_limit: float = CONDITION_LIMIT,
    logger: Logger = default_logger,
) -> float:
    """Largest change of M over `thetas` when the global order grows by 2.

    Raises:
        TruncationConvergenceError: If the change exceeds `tolerance`.
    """
    if symmetry == "generator":
        msg = "Truncation convergence is checked for the rotation or the mirror."
        raise ValueError(msg)
    finer = cfg.model_copy(update={"global_order": cfg.global_order + 2})
    coarse_values = _truncation_measures(
        scene, cfg, symmetry, thetas, workers, condition_limit, logger
    )
    fine_values = _truncation_measures(
        scene, finer, symmetry, thetas, workers, condition_limit, logger
    )
    change = max(
        (abs(fine - coarse) for fine, coarse in zip(fine_values, coarse_values, strict=True)),
        default=0.0,
    )
    logger.info(
        "Truncation L=%d -> L=%d changes M by %.3e",
        cfg.global_order,
        finer.global_order,
        change,
    )
    if change > tolerance:
        msg = (
            f"M changes by {change:.3e} when the global order grows from {cfg.global_order} "
            f"to {finer.global_order}, above the tolerance {tolerance:.3e}."
        )
        raise TruncationConvergenceError(msg, change)
    return change
