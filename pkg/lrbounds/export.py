import csv
import json
import math
import os
from dataclasses import dataclass, field
from typing import IO, Any, Dict, Iterator, List, Sequence, Union

import numpy as np

from .bounds import BoundConstants, MuPolicy, bound_compliance
from .config import OutputFormat

__all__ = ["ResultGrid", "format_value", "check_bounds"]


def format_value(value: Any) -> str:
    """Text form of one table entry.

    Floats use the shortest representation that round-trips to the same
    double, so that identical runs give byte-identical files. Infinite values
    are written ``inf``, booleans ``true``/``false``.
    """
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_value(value)
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_json_value(v) for v in value]
    return str(value)


@dataclass
class ResultGrid:
    """A table of results with provenance metadata.

    Parameters
    ----------
    columns : dict of str to sequence
        Column name to values, all of the same length, in output order.
    metadata : dict
        Provenance (tool version, configuration, method) written as a header.
    """

    columns: Dict[str, List[Any]] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.columns = {name: list(values) for name, values in self.columns.items()}
        lengths = {len(values) for values in self.columns.values()}
        if len(lengths) > 1:
            raise RuntimeError(f"Columns have different lengths: {sorted(lengths)}.")

    @property
    def n_rows(self) -> int:
        """Number of rows."""
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def add_column(self, name: str, values: Sequence[Any]) -> None:
        """Append a column; replaces an existing column with the same name."""
        values = list(values)
        if self.columns and len(values) != self.n_rows:
            raise RuntimeError(
                f"Column '{name}' has {len(values)} entries but the grid has {self.n_rows} rows."
            )
        self.columns[name] = values

    def extend(self, other: "ResultGrid") -> None:
        """Append the rows of a grid with the same columns."""
        if not self.columns:
            self.columns = {name: list(values) for name, values in other.columns.items()}
            return
        if list(other.columns) != list(self.columns):
            raise RuntimeError(
                f"Cannot append columns {list(other.columns)} to {list(self.columns)}."
            )
        for name, values in other.columns.items():
            self.columns[name].extend(values)

    def column(self, name: str) -> np.ndarray:
        """A column as an array."""
        return np.asarray(self.columns[name])

    def rows(self) -> Iterator[List[Any]]:
        """Iterate over rows in column order."""
        return (list(row) for row in zip(*self.columns.values()))

    def to_csv(self, stream: IO[str]) -> None:
        """Write ``#``-prefixed metadata lines followed by a CSV table."""
        for key in sorted(self.metadata):
            value = json.dumps(_json_value(self.metadata[key]), sort_keys=True)
            stream.write(f"# {key}: {value}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(list(self.columns))
        for row in self.rows():
            writer.writerow([format_value(value) for value in row])

    def to_json(self, stream: IO[str]) -> None:
        """Write one JSON object with 'metadata', 'columns' and 'rows'."""
        payload = {
            "metadata": _json_value(self.metadata),
            "columns": list(self.columns),
            "rows": [[_json_value(value) for value in row] for row in self.rows()],
        }
        json.dump(payload, stream, sort_keys=True, indent=1, allow_nan=False)
        stream.write("\n")

    def write(self, stream: IO[str], fmt: Union[str, OutputFormat] = OutputFormat.CSV) -> None:
        """Write the grid in the requested format."""
        if fmt not in OutputFormat:
            raise RuntimeError(
                f"Unrecognized format {fmt}. Use one of {[f.value for f in OutputFormat]}."
            )
        if OutputFormat(fmt) == OutputFormat.CSV:
            self.to_csv(stream)
        else:
            self.to_json(stream)

    def save(self, path: Union[str, os.PathLike], fmt: Union[str, OutputFormat]) -> None:
        """Write the grid to a file."""
        with open(path, "w", newline="") as fout:
            self.write(fout, fmt)


def check_bounds(grid: ResultGrid, policy: MuPolicy, signal: str = "Q") -> bool:
    """Append bound columns and a compliance flag to a grid of simulated signals.

    Parameters
    ----------
    grid : ResultGrid
        A grid with 'alpha', 'r', 't' and signal columns.
    policy : MuPolicy
        How ``mu`` is chosen for the hybrid bound.
    signal : str
        Name of the signal column. Default is 'Q'.

    Returns
    -------
    compliant : bool
        Whether every row lies below its bounds. The grid gains the columns
        'hybrid_bound', 'mu', 'hk_bound' and 'compliant'.
    """
    alpha = grid.column("alpha").astype(float)
    r, t, q = (grid.column(name).astype(float) for name in ("r", "t", signal))

    columns: Dict[str, np.ndarray] = {
        "hybrid_bound": np.full(alpha.shape, np.nan),
        "mu": np.full(alpha.shape, np.nan),
        "hk_bound": np.full(alpha.shape, np.nan),
        "compliant": np.ones(alpha.shape, dtype=bool),
    }
    for value in dict.fromkeys(alpha.tolist()):
        rows = alpha == value
        checked = bound_compliance(
            r[rows], t[rows], q[rows], BoundConstants.from_alpha(value), policy
        )
        for name, values in checked.items():
            columns[name][rows] = values
    for name, values in columns.items():
        grid.add_column(name, values.tolist())
    return bool(np.all(columns["compliant"]))
