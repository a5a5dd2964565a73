"""Text formats: operators, coupling tables, scene descriptions and sweep curves.

Every float is written with 17 significant digits, so reading a file back reproduces the
written values exactly.
"""

import math
from collections.abc import Sequence
from logging import getLogger
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from .constants import FLOAT_FORMAT, GradingKind, OperatorMode
from .errors import FileFormatError
from .grading import CouplingTable
from .measures import MeasureSample
from .operator_core import BasisLabel, ComplexMatrix
from .scatter2d import Disc, Scene, SimConfig, default_sim_config

default_logger = getLogger(__name__)

SWEEP_HEADER = "theta,M"
_OPERATOR_MODES: tuple[OperatorMode, ...] = ("transition", "full_s")
_GRADING_KINDS: tuple[GradingKind, ...] = ("continuous", "discrete")


def format_float(value: float) -> str:
    return format(float(value), FLOAT_FORMAT)


def _parse_float(token: str, path: Path | None, line_number: int) -> float:
    try:
        value = float(token)
    except ValueError:
        msg = f"Expected a number, got {token!r}."
        raise FileFormatError(msg, path, line_number) from None
    if not math.isfinite(value):
        msg = f"Numbers must be finite, got {token!r}."
        raise FileFormatError(msg, path, line_number)
    return value


def _parse_int(token: str, path: Path | None, line_number: int) -> int:
    try:
        return int(token)
    except ValueError:
        msg = f"Expected an integer, got {token!r}."
        raise FileFormatError(msg, path, line_number) from None


def _read_lines(path: Path) -> list[str]:
    if not path.is_file():
        msg = "File does not exist."
        raise FileFormatError(msg, path)
    return path.read_text(encoding="utf-8").splitlines()


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


# Operators


def _format_label(side: str, index: int, label: BasisLabel) -> str:
    fields = [
        side,
        str(index),
        format_float(label.gamma.real),
        format_float(label.gamma.imag),
        *(str(value) for value in label.eta),
    ]
    return " ".join(fields)


def format_operator(matrix: ComplexMatrix) -> str:
    lines = [f"{matrix.rows} {matrix.cols}"]
    for row in matrix.entries:
        lines.append(
            " ".join(f"{format_float(value.real)} {format_float(value.imag)}" for value in row),
        )
    lines.extend(
        _format_label("row", index, label) for index, label in enumerate(matrix.row_labels)
    )
    lines.extend(
        _format_label("col", index, label) for index, label in enumerate(matrix.col_labels)
    )
    return "\n".join(lines) + "\n"


def parse_operator(lines: Sequence[str], path: Path | None = None) -> ComplexMatrix:
    """Parse an operator file.

    The file starts with `rows cols`, then one line of `re im` pairs per row, then one
    `row <index> gamma_re gamma_im eta...` line per row and optionally one `col ...` line per
    column. Missing column labels default to the row labels of a square matrix, or to
    index labels.
    """
    if not lines:
        msg = "Empty operator file."
        raise FileFormatError(msg, path, 1)
    header = lines[0].split()
    if len(header) != 2:  # noqa: PLR2004
        msg = f"Expected 'rows cols', got {lines[0]!r}."
        raise FileFormatError(msg, path, 1)
    rows, cols = (_parse_int(token, path, 1) for token in header)
    if rows < 1 or cols < 1:
        msg = f"Matrix dimensions must be positive, got {rows}x{cols}."
        raise FileFormatError(msg, path, 1)
    if len(lines) < rows + 1:
        msg = f"Expected {rows} rows of entries, found {len(lines) - 1} lines."
        raise FileFormatError(msg, path, len(lines))

    entries = np.empty((rows, cols), dtype=np.complex128)
    for row in range(rows):
        line_number = row + 2
        tokens = lines[row + 1].split()
        if len(tokens) != 2 * cols:
            msg = f"Expected {2 * cols} numbers in row {row}, got {len(tokens)}."
            raise FileFormatError(msg, path, line_number)
        values = [_parse_float(token, path, line_number) for token in tokens]
        entries[row] = np.array(values[0::2]) + 1j * np.array(values[1::2])

    labels: dict[str, dict[int, BasisLabel]] = {"row": {}, "col": {}}
    for offset, line in enumerate(lines[rows + 1 :]):
        line_number = rows + 2 + offset
        tokens = line.split()
        if not tokens:
            continue
        side = tokens[0]
        if side not in labels or len(tokens) < 4:  # noqa: PLR2004
            msg = f"Expected a 'row' or 'col' label line, got {line!r}."
            raise FileFormatError(msg, path, line_number)
        index = _parse_int(tokens[1], path, line_number)
        limit = rows if side == "row" else cols
        if not 0 <= index < limit or index in labels[side]:
            msg = f"Invalid or repeated {side} label index {index}."
            raise FileFormatError(msg, path, line_number)
        gamma = complex(
            _parse_float(tokens[2], path, line_number),
            _parse_float(tokens[3], path, line_number),
        )
        eta = tuple(_parse_int(token, path, line_number) for token in tokens[4:])
        labels[side][index] = BasisLabel(gamma=gamma, eta=eta)

    row_labels = _complete_labels(labels["row"], rows, "row", path)
    col_labels = _complete_labels(labels["col"], cols, "col", path)
    if col_labels is None and rows == cols:
        col_labels = row_labels
    try:
        return ComplexMatrix.from_array(entries, row_labels, col_labels)
    except ValidationError as error:
        msg = f"Invalid labels: {error.errors()[0]['msg']}"
        raise FileFormatError(msg, path) from error


def _complete_labels(
    labels: dict[int, BasisLabel],
    size: int,
    side: str,
    path: Path | None,
) -> tuple[BasisLabel, ...] | None:
    if not labels:
        return None
    if len(labels) != size:
        msg = f"Expected {size} {side} labels, found {len(labels)}."
        raise FileFormatError(msg, path)
    return tuple(labels[index] for index in range(size))


def write_operator(path: Path, matrix: ComplexMatrix) -> None:
    _write_text(path, format_operator(matrix))
    default_logger.debug("Wrote %dx%d operator to %s", matrix.rows, matrix.cols, path)


def read_operator(path: Path) -> ComplexMatrix:
    return parse_operator(_read_lines(path), path)


# Coupling tables


def _format_gamma(gamma: complex, kind: GradingKind) -> str:
    if kind == "continuous":
        return format_float(gamma.real)
    return f"{format_float(gamma.real)},{format_float(gamma.imag)}"


def _parse_gamma(token: str, kind: GradingKind, path: Path | None, line_number: int) -> complex:
    if kind == "continuous":
        return complex(_parse_float(token, path, line_number))
    parts = token.split(",")
    if len(parts) != 2:  # noqa: PLR2004
        msg = f"Discrete eigenvalues are written as 're,im', got {token!r}."
        raise FileFormatError(msg, path, line_number)
    return complex(
        _parse_float(parts[0], path, line_number),
        _parse_float(parts[1], path, line_number),
    )


def format_coupling_table(table: CouplingTable) -> str:
    lines = [
        f"kind: {table.kind}",
        "gammas_in: "
        + " ".join(_format_gamma(gamma, table.kind) for gamma in table.incoming_gammas),
        "gammas_out: "
        + " ".join(_format_gamma(gamma, table.kind) for gamma in table.outgoing_gammas),
    ]
    lines.extend(" ".join(format_float(value) for value in row) for row in table.x)
    return "\n".join(lines) + "\n"


def _header_value(line: str, key: str, path: Path | None, line_number: int) -> str:
    prefix = f"{key}:"
    if not line.startswith(prefix):
        msg = f"Expected a '{prefix}' header, got {line!r}."
        raise FileFormatError(msg, path, line_number)
    return line[len(prefix) :].strip()


def _infer_kind(gammas_line: str) -> GradingKind:
    """Discrete tables write eigenvalues as 're,im', continuous ones as plain numbers."""
    return "discrete" if "," in gammas_line else "continuous"


def parse_coupling_table(lines: Sequence[str], path: Path | None = None) -> CouplingTable:
    """Parse a coupling table; rows are outgoing gammas and columns incoming gammas.

    The `kind:` header is optional. Without it, the kind is discrete when the eigenvalues
    are written as 're,im' and continuous otherwise.
    """
    offset = 1 if lines and lines[0].startswith("kind:") else 0
    if len(lines) < offset + 2:
        msg = "A coupling table needs 'gammas_in:' and 'gammas_out:' headers."
        raise FileFormatError(msg, path, len(lines) or 1)
    in_line, out_line = offset + 1, offset + 2
    gammas_in = _header_value(lines[offset], "gammas_in", path, in_line)
    gammas_out = _header_value(lines[offset + 1], "gammas_out", path, out_line)
    if offset:
        kind = _header_value(lines[0], "kind", path, 1)
        if kind not in _GRADING_KINDS:
            msg = f"Unknown grading kind {kind!r}."
            raise FileFormatError(msg, path, 1)
    else:
        kind = _infer_kind(gammas_in)
    incoming = tuple(_parse_gamma(token, kind, path, in_line) for token in gammas_in.split())
    outgoing = tuple(_parse_gamma(token, kind, path, out_line) for token in gammas_out.split())

    body = lines[offset + 2 :]
    if len(body) != len(outgoing):
        msg = f"Expected {len(outgoing)} rows of coupling strengths, found {len(body)}."
        raise FileFormatError(msg, path, len(lines))
    x = np.empty((len(outgoing), len(incoming)))
    for row, line in enumerate(body):
        line_number = row + offset + 3
        tokens = line.split()
        if len(tokens) != len(incoming):
            msg = f"Expected {len(incoming)} values, got {len(tokens)}."
            raise FileFormatError(msg, path, line_number)
        x[row] = [_parse_float(token, path, line_number) for token in tokens]

    try:
        return CouplingTable(
            kind=kind,
            incoming_gammas=incoming,
            outgoing_gammas=outgoing,
            x=x,
        )
    except ValidationError as error:
        msg = f"Invalid coupling table: {error.errors()[0]['msg']}"
        raise FileFormatError(msg, path) from error


def write_coupling_table(path: Path, table: CouplingTable) -> None:
    _write_text(path, format_coupling_table(table))


def read_coupling_table(path: Path) -> CouplingTable:
    return parse_coupling_table(_read_lines(path), path)


# Scenes


class SceneFile(BaseModel):
    """A scene with the truncation settings given next to it."""

    model_config = ConfigDict(frozen=True)

    scene: Scene
    global_order: int | None = None
    local_order: int | None = None
    operator_mode: OperatorMode | None = None

    def sim_config(self, operator_mode: OperatorMode | None = None) -> SimConfig:
        """Settings from the file, falling back to the truncation heuristics.

        `operator_mode` overrides the mode given in the file.
        """
        mode = operator_mode or self.operator_mode or "transition"
        if self.global_order is None:
            cfg = default_sim_config(self.scene, mode)
            if self.local_order is None:
                return cfg
            return SimConfig(
                global_order=max(cfg.global_order, self.local_order),
                local_order=self.local_order,
                operator_mode=mode,
            )
        return SimConfig(
            global_order=self.global_order,
            local_order=self.local_order,
            operator_mode=mode,
        )


_SCENE_KEYS = ("k", "L", "l", "mode")


def parse_scene(lines: Sequence[str], path: Path | None = None) -> SceneFile:
    """Parse a scene description.

    Lines are `k = <real>`, `L = <int>`, `l = <int>`, `mode = transition|full_s` and one
    `disc <cx> <cy> <radius>` per disc. `#` starts a comment.
    """
    settings: dict[str, str] = {}
    discs: list[Disc] = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "disc":
            if len(tokens) != 4:  # noqa: PLR2004
                msg = f"Expected 'disc <cx> <cy> <radius>', got {line!r}."
                raise FileFormatError(msg, path, line_number)
            cx, cy, radius = (_parse_float(token, path, line_number) for token in tokens[1:])
            if radius <= 0:
                msg = f"Disc radius must be positive, got {radius}."
                raise FileFormatError(msg, path, line_number)
            discs.append(Disc(x=cx, y=cy, radius=radius))
            continue

        key, separator, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not separator or not value:
            msg = f"Expected 'key = value' or a disc line, got {line!r}."
            raise FileFormatError(msg, path, line_number)
        if key not in _SCENE_KEYS:
            msg = f"Unknown key {key!r}; expected one of {', '.join(_SCENE_KEYS)}."
            raise FileFormatError(msg, path, line_number)
        if key in settings:
            msg = f"Key {key!r} is given twice."
            raise FileFormatError(msg, path, line_number)
        settings[key] = value
        if key in {"L", "l"} and _parse_int(value, path, line_number) < 1:
            msg = f"{key} must be a positive integer, got {value}."
            raise FileFormatError(msg, path, line_number)
        if key == "k" and _parse_float(value, path, line_number) <= 0:
            msg = f"k must be positive, got {value}."
            raise FileFormatError(msg, path, line_number)
        if key == "mode" and value not in _OPERATOR_MODES:
            msg = f"mode must be one of {', '.join(_OPERATOR_MODES)}, got {value!r}."
            raise FileFormatError(msg, path, line_number)

    if "k" not in settings:
        msg = "The scene does not give the wavenumber 'k'."
        raise FileFormatError(msg, path)
    if not discs:
        msg = "The scene has no discs."
        raise FileFormatError(msg, path)

    try:
        return SceneFile(
            scene=Scene(discs=tuple(discs), wavenumber=float(settings["k"])),
            global_order=int(settings["L"]) if "L" in settings else None,
            local_order=int(settings["l"]) if "l" in settings else None,
            operator_mode=settings.get("mode"),
        )
    except ValidationError as error:
        msg = f"Invalid scene: {error.errors()[0]['msg']}"
        raise FileFormatError(msg, path) from error


def format_scene(scene_file: SceneFile) -> str:
    lines = [f"k = {format_float(scene_file.scene.wavenumber)}"]
    if scene_file.global_order is not None:
        lines.append(f"L = {scene_file.global_order}")
    if scene_file.local_order is not None:
        lines.append(f"l = {scene_file.local_order}")
    if scene_file.operator_mode is not None:
        lines.append(f"mode = {scene_file.operator_mode}")
    lines.extend(
        f"disc {format_float(disc.x)} {format_float(disc.y)} {format_float(disc.radius)}"
        for disc in scene_file.scene.discs
    )
    return "\n".join(lines) + "\n"


def write_scene(path: Path, scene_file: SceneFile) -> None:
    _write_text(path, format_scene(scene_file))


def read_scene(path: Path) -> SceneFile:
    return parse_scene(_read_lines(path), path)


# Sweep curves


def format_sweep(samples: Sequence[MeasureSample]) -> str:
    lines = [SWEEP_HEADER]
    for sample in samples:
        if sample.theta is None:
            msg = "Sweep samples need an angle."
            raise ValueError(msg)
        lines.append(f"{format_float(sample.theta)},{format_float(sample.measure)}")
    return "\n".join(lines) + "\n"


def parse_sweep(lines: Sequence[str], path: Path | None = None) -> tuple[MeasureSample, ...]:
    if not lines or lines[0].strip() != SWEEP_HEADER:
        msg = f"Expected the header {SWEEP_HEADER!r}."
        raise FileFormatError(msg, path, 1)
    samples: list[MeasureSample] = []
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tokens = line.split(",")
        if len(tokens) != 2:  # noqa: PLR2004
            msg = f"Expected 'theta,M', got {line!r}."
            raise FileFormatError(msg, path, line_number)
        theta, measure = (_parse_float(token, path, line_number) for token in tokens)
        samples.append(MeasureSample(theta=theta, measure=measure))
    return tuple(samples)


def write_sweep(path: Path, samples: Sequence[MeasureSample]) -> None:
    _write_text(path, format_sweep(samples))


def read_sweep(path: Path) -> tuple[MeasureSample, ...]:
    return parse_sweep(_read_lines(path), path)


def write_json_report(path: Path, report: BaseModel) -> None:
    _write_text(path, report.model_dump_json(indent=2) + "\n")
