"""Per-iteration operation counts of the update term of each algorithm.

Counts cover only the update term (for HQC ``U_F U_F^T G(e) e``), using the
convention that a ``T1 x T2`` by ``T2 x T3`` product costs ``T1 T2 T3``
multiplications and ``T1 T3 (T2 - 1)`` additions.  Values are exact
:class:`fractions.Fraction` so the ``F^3 / 3`` inversion term stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction

from .algorithms import KINDS
from .errors import InputError


@dataclass(frozen=True)
class OperationCounts:
    mul: Fraction
    add: Fraction
    sqrt: Fraction = Fraction(0)
    exp: Fraction = Fraction(0)
    power: Fraction = Fraction(0)
    dmi: Fraction = Fraction(0)

    @property
    def total(self) -> Fraction:
        return sum((getattr(self, f.name) for f in fields(self)), Fraction(0))

    def as_dict(self) -> dict:
        d = {f.name: _num(getattr(self, f.name)) for f in fields(self)}
        d["total"] = _num(self.total)
        return d


def _num(x: Fraction):
    return int(x) if x.denominator == 1 else float(x)


def operation_counts(kind: str, N: int, F: int, S: int) -> OperationCounts:
    """Operation counts of one update for algorithm ``kind``."""
    for name, v in (("N", N), ("F", F), ("S", S)):
        if int(v) != v or v < 1:
            raise InputError(f"{name} must be a positive integer, got {v!r}")
    N, F, S = Fraction(int(N)), Fraction(int(F)), Fraction(int(S))
    kind = kind.upper()
    if kind == "LMS":
        return OperationCounts(F * (S + N), F * S - F + N * F - N)
    if kind == "NLMS":
        return OperationCounts((S + N) * (F * F + F), F * F * (S + N - 1) + F * (S - 1) - N,
                               dmi=F ** 3 / 3)
    if kind == "MCC":
        return OperationCounts(N * N * (F + 1) + N + S, N * (N * F - 1), exp=N, power=N)
    if kind == "GMCC":
        return OperationCounts(N * N * (F + 1) + 2 * N + S, N * (N * F - 1), exp=N, power=2 * N)
    if kind == "LOG":
        return OperationCounts(N * N * (F + 1) + 2 * N + S, N * N * F, power=N)
    if kind == "HQC":
        return OperationCounts(N * N * (F + 1) + 2 * N + S, N * N * F, sqrt=N, power=N)
    raise InputError(f"unknown algorithm kind {kind!r}")


def closed_form_total(kind: str, N: int, F: int, S: int) -> Fraction:
    """Collapsed single-polynomial total for ``kind`` (cross-check of ``OperationCounts.total``)."""
    N, F, S = Fraction(N), Fraction(F), Fraction(S)
    return {
        "LMS": 2 * F * S + 2 * F * N - F - N,
        "NLMS": 2 * F * F * S + 2 * F * S + 2 * F * F * N + N * F - F * F - F - N + F ** 3 / 3,
        "MCC": 2 * N * N * F + N * N + S + 2 * N,
        "GMCC": 2 * N * N * F + N * N + 4 * N + S,
        "LOG": 2 * N * N * F + N * N + 3 * N + S,
        "HQC": 2 * N * N * F + N * N + 4 * N + S,
    }[kind.upper()]


@dataclass(frozen=True)
class ComplexityReport:
    N: int
    F: int
    S: int
    baseline: str
    counts: dict  # kind -> OperationCounts

    def percentage(self, kind: str) -> float:
        """Total of ``kind`` relative to the baseline, in percent."""
        return float(self.counts[kind.upper()].total / self.counts[self.baseline].total * 100)

    @property
    def percentages(self) -> dict:
        return {k: self.percentage(k) for k in self.counts}

    def as_dict(self) -> dict:
        return {
            "N": self.N, "F": self.F, "S": self.S, "baseline": self.baseline,
            "algorithms": {k: {**c.as_dict(), "percent_of_baseline": self.percentage(k)}
                           for k, c in self.counts.items()},
        }


def complexity_report(N: int, F: int, S: int, baseline: str = "LOG") -> ComplexityReport:
    baseline = baseline.upper()
    if baseline not in KINDS:
        raise InputError(f"unknown baseline {baseline!r}; expected one of {KINDS}")
    return ComplexityReport(int(N), int(F), int(S), baseline,
                            {k: operation_counts(k, N, F, S) for k in KINDS})
