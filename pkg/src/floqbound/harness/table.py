"""Column-oriented result tables with CSV and JSON encodings."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class ResultTable:
    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}
        lengths = {v.shape for v in self.columns.values()}
        if len(lengths) > 1 or any(len(s) != 1 for s in lengths):
            raise ValueError(f"columns must be 1-d and of equal length, got {lengths}")

    def __len__(self) -> int:
        return next(iter(self.columns.values())).size if self.columns else 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def to_csv(self) -> str:
        out = io.StringIO()
        for key, value in self.metadata.items():
            out.write(f"# {key}: {json.dumps(value, separators=(',', ':'))}\n")
        out.write(",".join(self.columns) + "\n")
        for row in zip(*self.columns.values()):
            out.write(",".join(_fmt(x) for x in row) + "\n")
        return out.getvalue()

    def to_json(self) -> str:
        doc = {
            "metadata": self.metadata,
            "columns": {k: [float(x) for x in v] for k, v in self.columns.items()},
        }
        return json.dumps(doc, indent=1) + "\n"

    def dumps(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")

    def write(self, path: str, fmt: str = "csv") -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps(fmt))

    @classmethod
    def from_csv(cls, text: str) -> ResultTable:
        meta, rows, header = {}, [], None
        for line in text.splitlines():
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                meta[key] = json.loads(value)
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(x) for x in line.split(",")])
        data = np.array(rows, dtype=float).reshape(len(rows), len(header))
        return cls({name: data[:, i] for i, name in enumerate(header)}, meta)

    @classmethod
    def from_json(cls, text: str) -> ResultTable:
        doc = json.loads(text)
        return cls({k: np.array(v, dtype=float) for k, v in doc["columns"].items()}, doc["metadata"])

    @classmethod
    def read(cls, path: str) -> ResultTable:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        return cls.from_json(text) if text.lstrip().startswith("{") else cls.from_csv(text)
