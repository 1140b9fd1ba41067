"""Residual records shared by every verification routine."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .algebra import DEFAULT_TOL


@dataclass(frozen=True)
class CheckRecord:
    name: str
    degree: int | None
    max_residual: float
    worst_index: tuple | None
    status: str  # "pass", "fail" or "skip"
    suite: str = ""
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def in_suite(self, suite: str) -> "CheckRecord":
        return CheckRecord(self.name, self.degree, self.max_residual, self.worst_index,
                           self.status, suite, self.detail)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = self.passed
        out["worst_index"] = list(self.worst_index) if self.worst_index is not None else None
        return out


def residual_record(name: str, residual: np.ndarray | float, tol: float = DEFAULT_TOL,
                    degree: int | None = None, index_labels: Sequence | None = None,
                    detail: str = "") -> CheckRecord:
    """Record the largest |entry| of ``residual`` and where it occurs.

    ``index_labels`` optionally translates the first axis position into a label.
    """
    arr = np.abs(np.asarray(residual))
    if arr.size == 0:
        return CheckRecord(name, degree, 0.0, None, "pass", detail=detail)
    flat = int(np.argmax(arr))
    worst = float(arr.reshape(-1)[flat])
    index = tuple(int(i) for i in np.unravel_index(flat, arr.shape)) if arr.ndim else None
    if index and index_labels is not None:
        index = (index_labels[index[0]],) + index[1:]
    if not np.isfinite(worst):
        worst = float("inf")
    status = "pass" if worst < tol else "fail"
    return CheckRecord(name, degree, worst, index, status, detail=detail)


def flag_record(name: str, ok: bool, degree: int | None = None, detail: str = "") -> CheckRecord:
    return CheckRecord(name, degree, 0.0 if ok else 1.0, None, "pass" if ok else "fail", detail=detail)


def skip_record(name: str, reason: str, degree: int | None = None) -> CheckRecord:
    return CheckRecord(name, degree, float("nan"), None, "skip", detail=reason)


def worst(records: Sequence[CheckRecord]) -> float:
    values = [r.max_residual for r in records if r.status != "skip"]
    return max(values, default=0.0)


@dataclass
class CheckReport:
    """An ordered collection of records with convenience lookups."""

    records: list[CheckRecord] = field(default_factory=list)

    def add(self, record: CheckRecord) -> CheckRecord:
        self.records.append(record)
        return record

    def extend(self, records) -> None:
        self.records.extend(records)

    @property
    def all_pass(self) -> bool:
        return not any(r.failed for r in self.records)

    def __getitem__(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def named(self, prefix: str) -> list[CheckRecord]:
        return [r for r in self.records if r.name.startswith(prefix)]

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)
