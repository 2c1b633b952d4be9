"""
Text codecs for samples, grids, ranks/signs and null tables.

Samples are UTF-8 CSV with one header row and one observation per row.
Floats are written with 17 significant digits so they read back exactly.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Tuple

import numpy as np

from src.models.domain import Grid, NullTable, RanksSigns, TestKind
from src.models.errors import InputError

logger = logging.getLogger(__name__)

_FLOAT_FORMAT = ".17g"


def format_float(value: float) -> str:
    """Shortest text that round-trips a double."""
    return format(float(value), _FLOAT_FORMAT)


@dataclass
class Sample:
    """
    A two-block sample read from CSV.

    Attributes:
        x1: n x d1 block
        x2: n x d2 block
        columns1: Header names of block 1
        columns2: Header names of block 2
    """
    x1: np.ndarray
    x2: np.ndarray
    columns1: List[str]
    columns2: List[str]

    @property
    def n(self) -> int:
        return self.x1.shape[0]


def _read_rows(path: Path) -> Tuple[List[str], List[List[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = [row for row in csv.reader(f) if row]
    except FileNotFoundError:
        raise InputError(f"Input file not found: {path}")
    except (UnicodeDecodeError, csv.Error) as e:
        raise InputError(f"Malformed CSV {path}: {e}")

    if not rows:
        raise InputError(f"Empty CSV: {path}")
    return [h.strip() for h in rows[0]], rows[1:]


def _to_matrix(rows: List[List[str]], width: int, path: Path) -> np.ndarray:
    data = np.empty((len(rows), width), dtype=float)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InputError(
                f"{path}: row {i + 2} has {len(row)} cells, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise InputError(f"{path}: non-numeric cell {cell!r} at row {i + 2}")
    if not np.all(np.isfinite(data)):
        raise InputError(f"{path}: non-finite values in sample")
    return data


def _column_indices(header: List[str], names: Sequence[str], path: Path) -> List[int]:
    indices = []
    for name in names:
        if name not in header:
            raise InputError(f"{path}: column {name!r} not in header {header}")
        indices.append(header.index(name))
    return indices


def read_sample_csv(
    path: str | Path,
    d1: Optional[int] = None,
    d2: Optional[int] = None,
    block1: Optional[Sequence[str]] = None,
    block2: Optional[Sequence[str]] = None,
) -> Sample:
    """
    Read a two-block sample.

    Blocks are chosen either by header names (block1/block2) or by
    position: the first d1 columns form block 1 and the next d2 block 2.

    Args:
        path: CSV file
        d1, d2: Block dimensions for positional selection
        block1, block2: Column names for selection by name

    Returns:
        Sample with both blocks

    Raises:
        InputError: Missing file, malformed rows, non-numeric cells or bad columns
    """
    path = Path(path)
    header, rows = _read_rows(path)
    data = _to_matrix(rows, len(header), path)

    if block1 or block2:
        if not (block1 and block2):
            raise InputError("Both --block1 and --block2 are needed for selection by name")
        idx1 = _column_indices(header, block1, path)
        idx2 = _column_indices(header, block2, path)
        if set(idx1) & set(idx2):
            raise InputError("The two blocks share a column")
    else:
        if d1 is None or d2 is None:
            raise InputError("Block dimensions d1 and d2 are required")
        if d1 < 1 or d2 < 1:
            raise InputError(f"Block dimensions must be >= 1, got d1={d1}, d2={d2}")
        if d1 + d2 > len(header):
            raise InputError(
                f"{path}: {len(header)} columns cannot hold d1 + d2 = {d1 + d2}"
            )
        idx1 = list(range(d1))
        idx2 = list(range(d1, d1 + d2))

    logger.debug(f"Read {data.shape[0]} rows from {path}")
    return Sample(
        x1=data[:, idx1],
        x2=data[:, idx2],
        columns1=[header[i] for i in idx1],
        columns2=[header[i] for i in idx2],
    )


def write_sample_csv(
    out: TextIO,
    x1: np.ndarray,
    x2: np.ndarray,
    header: Optional[Sequence[str]] = None,
) -> None:
    """Write a two-block sample in the format read_sample_csv accepts."""
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    if x1.shape[0] != x2.shape[0]:
        raise InputError("Blocks have different row counts")
    d1, d2 = x1.shape[1], x2.shape[1]
    if header is None:
        header = [f"x1_{j + 1}" for j in range(d1)] + [f"x2_{j + 1}" for j in range(d2)]

    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in np.hstack([x1, x2]):
        writer.writerow([format_float(v) for v in row])


def write_grid_csv(out: TextIO, grid: Grid) -> None:
    """Write grid points, one per row, d columns."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([f"u{j + 1}" for j in range(grid.d)])
    for point in grid.points:
        writer.writerow([format_float(v) for v in point])


def read_grid_csv(path: str | Path) -> np.ndarray:
    """Read grid points written by write_grid_csv."""
    path = Path(path)
    header, rows = _read_rows(path)
    return _to_matrix(rows, len(header), path)


def write_ranks_signs_csv(out: TextIO, rs: RanksSigns) -> None:
    """Write index, rank, rescaled rank and sign components per observation."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["index", "rank", "rescaled_rank"] + [f"sign{j + 1}" for j in range(rs.d)]
    )
    for i in range(rs.n):
        writer.writerow(
            [i, format_float(rs.ranks[i]), format_float(rs.rescaled_ranks[i])]
            + [format_float(v) for v in rs.signs[i]]
        )


def _format_seed(seed: Optional[int]) -> str:
    return "none" if seed is None else str(seed)


def _parse_seed(text: str) -> Optional[int]:
    return None if text == "none" else int(text)


def dump_null_table(table: NullTable) -> str:
    """
    Serialize a NullTable.

    One header line of key=value pairs after '#', then one value per line.
    """
    header = (
        f"# kind={table.kind.value} n={table.n} d1={table.d1} d2={table.d2} "
        f"grid_seed1={_format_seed(table.grid_seeds[0])} "
        f"grid_seed2={_format_seed(table.grid_seeds[1])} "
        f"B={table.B} seed={_format_seed(table.seed)}"
    )
    lines = [header] + [format_float(v) for v in table.values]
    return "\n".join(lines) + "\n"


def load_null_table(text: str) -> NullTable:
    """
    Parse the output of dump_null_table.

    Raises:
        InputError: If the header or values are malformed
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("#"):
        raise InputError("Null table is missing its header line")

    try:
        fields = dict(item.split("=", 1) for item in lines[0][1:].split())
        values = np.array([float(line) for line in lines[1:]])
        return NullTable(
            kind=TestKind(fields["kind"]),
            n=int(fields["n"]),
            d1=int(fields["d1"]),
            d2=int(fields["d2"]),
            grid_seeds=(_parse_seed(fields["grid_seed1"]), _parse_seed(fields["grid_seed2"])),
            B=int(fields["B"]),
            values=values,
            seed=_parse_seed(fields["seed"]),
        )
    except (KeyError, ValueError) as e:
        raise InputError(f"Malformed null table: {e}")
