"""Collected verification results and their JSON form."""

import itertools
import random
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

from propcalc.utils import format_rational


def jsonable(obj):
    """Convert nested report data to JSON-ready values (rationals as "p/q")."""
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {_key(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return str(obj)


def _key(k) -> str:
    if isinstance(k, tuple):
        return ",".join(str(x) for x in k)
    return str(k)


@dataclass
class Violation:
    check: str
    biarity: tuple[int, ...] | None
    witness: dict

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "biarity": list(self.biarity) if self.biarity is not None else None,
            "witness": jsonable(self.witness),
        }


@dataclass
class CheckReport:
    name: str
    violations: list[Violation] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)
    counts: dict[str, dict] = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def violate(self, check: str, biarity: tuple[int, ...] | None = None, **witness) -> None:
        self.violations.append(Violation(check, biarity, witness))

    def skip(self, check: str, reason: str, **info) -> None:
        self.skipped.append({"check": check, "reason": reason, **info})

    def record(self, check: str, checked: int, total: int) -> None:
        entry = self.counts.setdefault(check, {"checked": 0, "total": 0, "exhaustive": True})
        entry["checked"] += checked
        entry["total"] += total
        entry["exhaustive"] = entry["exhaustive"] and checked == total

    def merge(self, other: "CheckReport") -> None:
        self.violations.extend(other.violations)
        self.skipped.extend(other.skipped)
        for check, entry in other.counts.items():
            mine = self.counts.setdefault(check, {"checked": 0, "total": 0, "exhaustive": True})
            mine["checked"] += entry["checked"]
            mine["total"] += entry["total"]
            mine["exhaustive"] = mine["exhaustive"] and entry["exhaustive"]

    def violations_of(self, check: str) -> list[Violation]:
        return [v for v in self.violations if v.check == check]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "violations": [v.to_dict() for v in self.violations],
            "skipped": jsonable(self.skipped),
            "counts": jsonable(self.counts),
            "details": jsonable(self.details),
        }


def basis_tuples(
    lists: Sequence[Sequence[str]], max_tuples: int, seed: int = 0
) -> tuple[Iterator[tuple[str, ...]], int, int]:
    """
    All tuples of the product, or a seeded sample of `max_tuples` of them.

    Returns (iterator, number yielded, total).
    """
    total = prod(len(x) for x in lists)
    if total <= max_tuples:
        return itertools.product(*lists), total, total
    rng = random.Random(f"{seed}:{[len(x) for x in lists]}")
    picks = [tuple(rng.choice(x) for x in lists) for _ in range(max_tuples)]
    return iter(picks), max_tuples, total
