"""Result containers and their on-disk layout."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Column:
    symbol: str
    unit: str
    values: np.ndarray

    @property
    def header(self) -> str:
        return f"{self.symbol}[{self.unit}]"


@dataclass
class Table:
    name: str
    columns: list[Column] = field(default_factory=list)

    def add(self, symbol: str, unit: str, values) -> "Table":
        arr = np.asarray(values)
        if self.columns and arr.shape[0] != len(self):
            raise ValueError(f"column {symbol!r} has {arr.shape[0]} rows, table {self.name!r} has {len(self)}")
        self.columns.append(Column(symbol, unit, arr))
        return self

    def __len__(self) -> int:
        return int(self.columns[0].values.shape[0]) if self.columns else 0

    def column(self, symbol: str) -> np.ndarray:
        for c in self.columns:
            if c.symbol == symbol:
                return c.values
        raise KeyError(symbol)

    def write_csv(self, path: Path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
            w.writerow([c.header for c in self.columns])
            for i in range(len(self)):
                w.writerow([_fmt(c.values[i]) for c in self.columns])


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (complex, np.complexfloating)):
        raise TypeError("complex values must be split into real and imaginary columns")
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


@dataclass
class ScenarioResult:
    """One scenario's tables, scalar metrics, truncation report and acceptance flags.

    ``flags`` maps a flag name to a boolean; ``targets`` records the
    tolerance each flag was judged against so the summary is self-describing.
    """

    id: str
    params: dict
    tables: list[Table] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    convergence: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    targets: dict = field(default_factory=dict)
    informational: set = field(default_factory=set)

    def flag(self, name: str, ok: bool, target: str, informational: bool = False):
        self.flags[name] = bool(ok)
        self.targets[name] = target
        if informational:
            self.informational.add(name)

    @property
    def passed(self) -> bool:
        return all(v for k, v in self.flags.items() if k not in self.informational)

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def summary(self) -> dict:
        return _jsonable({
            "id": self.id,
            "passed": self.passed,
            "flags": self.flags,
            "targets": self.targets,
            "informational": sorted(self.informational),
            "metrics": self.metrics,
            "convergence": self.convergence,
        })

    def write(self, outdir) -> Path:
        root = Path(outdir) / self.id
        data = root / "data"
        data.mkdir(parents=True, exist_ok=True)
        for t in self.tables:
            t.write_csv(data / f"{t.name}.csv")
        for name, payload in (("summary.json", self.summary()), ("params.json", _jsonable(self.params))):
            with open(root / name, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")
        return root
