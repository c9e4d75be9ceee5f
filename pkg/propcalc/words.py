"""Generator words: formal composites of prop generators, and their evaluation."""

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from propcalc import linalg
from propcalc.biobject import Biarity, Permutation, identity_perm, perm_from_json
from propcalc.errors import ArityMismatch, ShapeMismatch, TruncationExceeded
from propcalc.linalg import Vector
from propcalc.utils import format_rational


@dataclass(frozen=True)
class Gen:
    symbol: str


@dataclass(frozen=True)
class Unit:
    n: int


@dataclass(frozen=True)
class Zero:
    m: int
    n: int


@dataclass(frozen=True)
class Horizontal:
    left: "Word"
    right: "Word"


@dataclass(frozen=True)
class Vertical:
    """outer ∘_v inner."""

    outer: "Word"
    inner: "Word"


@dataclass(frozen=True)
class Permuted:
    """τ·word·σ."""

    word: "Word"
    left: Permutation | None = None
    right: Permutation | None = None


@dataclass(frozen=True)
class Combination:
    terms: tuple[tuple[Fraction, "Word"], ...]


Word = Gen | Unit | Zero | Horizontal | Vertical | Permuted | Combination


def word_biarity(word: Word, arities: Mapping[str, Biarity]) -> Biarity:
    match word:
        case Gen(symbol):
            if symbol not in arities:
                raise ArityMismatch(f"unknown generator {symbol!r}")
            return arities[symbol]
        case Unit(n):
            return (n, n)
        case Zero(m, n):
            return (m, n)
        case Horizontal(left, right):
            a, b = word_biarity(left, arities), word_biarity(right, arities)
            return (a[0] + b[0], a[1] + b[1])
        case Vertical(outer, inner):
            (k, n), (m, k2) = word_biarity(outer, arities), word_biarity(inner, arities)
            if k != k2:
                raise ArityMismatch(f"vertical composite of {(k, n)} after {(m, k2)}")
            return (m, n)
        case Permuted(inner, left, right):
            m, n = word_biarity(inner, arities)
            if left is not None and len(left) != n:
                raise ArityMismatch(f"left permutation of length {len(left)} on {n} outputs")
            if right is not None and len(right) != m:
                raise ArityMismatch(f"right permutation of length {len(right)} on {m} inputs")
            return (m, n)
        case Combination(terms):
            if not terms:
                raise ArityMismatch("empty combination")
            found = {word_biarity(w, arities) for _, w in terms}
            if len(found) != 1:
                raise ArityMismatch(f"combination mixes biarities {sorted(found)}")
            return found.pop()
    raise ShapeMismatch(f"not a generator word: {word!r}")


def word_degree(word: Word, degrees: Mapping[str, int]) -> int | None:
    """Degree of a homogeneous word; None for a combination of mixed degrees."""
    match word:
        case Gen(symbol):
            return degrees[symbol]
        case Unit() | Zero():
            return 0
        case Horizontal(left, right) | Vertical(left, right):
            a, b = word_degree(left, degrees), word_degree(right, degrees)
            return None if a is None or b is None else a + b
        case Permuted(inner):
            return word_degree(inner, degrees)
        case Combination(terms):
            found = {word_degree(w, degrees) for c, w in terms if c}
            return found.pop() if len(found) == 1 else None
    raise ShapeMismatch(f"not a generator word: {word!r}")


def generators_of(word: Word) -> set[str]:
    match word:
        case Gen(symbol):
            return {symbol}
        case Horizontal(left, right) | Vertical(left, right):
            return generators_of(left) | generators_of(right)
        case Permuted(inner):
            return generators_of(inner)
        case Combination(terms):
            return set().union(*(generators_of(w) for _, w in terms))
    return set()


def evaluate_word(prop, word: Word, assignment: Mapping[str, Vector], arities: Mapping[str, Biarity]) -> Vector:
    """
    Evaluate a word in a truncated prop, with generators sent to the given elements.

    Raises ArityMismatch for ill-typed words and TruncationExceeded when a
    subterm leaves the bound.
    """
    m, n = word_biarity(word, arities)
    if not prop.in_bound(m, n):
        raise TruncationExceeded((m, n), prop.bound)
    match word:
        case Gen(symbol):
            return dict(assignment[symbol])
        case Unit(n):
            return prop.unit(n)
        case Zero():
            return {}
        case Horizontal(left, right):
            a, b = word_biarity(left, arities), word_biarity(right, arities)
            return prop.horizontal(
                evaluate_word(prop, left, assignment, arities), a, evaluate_word(prop, right, assignment, arities), b
            )
        case Vertical(outer, inner):
            k = word_biarity(inner, arities)[1]
            return prop.vertical(
                evaluate_word(prop, outer, assignment, arities),
                evaluate_word(prop, inner, assignment, arities),
                m,
                k,
                n,
            )
        case Permuted(inner, left, right):
            v = evaluate_word(prop, inner, assignment, arities)
            v = prop.act_left(m, n, left or identity_perm(n), v)
            return prop.act_right(m, n, v, right or identity_perm(m))
        case Combination(terms):
            return linalg.combine((c, evaluate_word(prop, w, assignment, arities)) for c, w in terms)
    raise ShapeMismatch(f"not a generator word: {word!r}")


# -- JSON --------------------------------------------------------------------


def word_from_json(data) -> Word:
    if isinstance(data, str):
        return Gen(data)
    if not isinstance(data, dict) or len(data.keys() - {"left", "right"}) != 1:
        raise ShapeMismatch(f"cannot read a generator word from {data!r}")
    if "gen" in data:
        return Gen(str(data["gen"]))
    if "unit" in data:
        return Unit(int(data["unit"]))
    if "zero" in data:
        m, n = data["zero"]
        return Zero(int(m), int(n))
    if "h" in data:
        left, right = data["h"]
        return Horizontal(word_from_json(left), word_from_json(right))
    if "v" in data:
        outer, inner = data["v"]
        return Vertical(word_from_json(outer), word_from_json(inner))
    if "perm" in data:
        left = perm_from_json(data["left"]) if "left" in data else None
        right = perm_from_json(data["right"]) if "right" in data else None
        return Permuted(word_from_json(data["perm"]), left, right)
    if "sum" in data:
        return Combination(tuple((linalg.to_fraction(c), word_from_json(w)) for c, w in data["sum"]))
    raise ShapeMismatch(f"cannot read a generator word from {data!r}")


def word_to_json(word: Word):
    match word:
        case Gen(symbol):
            return {"gen": symbol}
        case Unit(n):
            return {"unit": n}
        case Zero(m, n):
            return {"zero": [m, n]}
        case Horizontal(left, right):
            return {"h": [word_to_json(left), word_to_json(right)]}
        case Vertical(outer, inner):
            return {"v": [word_to_json(outer), word_to_json(inner)]}
        case Permuted(inner, left, right):
            out = {"perm": word_to_json(inner)}
            if left is not None:
                out["left"] = list(left)
            if right is not None:
                out["right"] = list(right)
            return out
        case Combination(terms):
            return {"sum": [[format_rational(c), word_to_json(w)] for c, w in terms]}
    raise ShapeMismatch(f"not a generator word: {word!r}")
