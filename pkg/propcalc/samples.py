"""
Small props to test against.

UnitProp has P(n,n) = ℚ·id and nothing else. PermutationProp is ℚ[Σ_n] on
the diagonal. ForestProp is the free prop on one binary operation g of
biarity (2,1): P(m,n) is spanned by forests of n planar binary trees whose
m leaves carry the inputs 0..m-1.
"""

import itertools
import logging
from collections.abc import Mapping, Sequence
from fractions import Fraction
from functools import lru_cache

from propcalc.biobject import (
    Permutation,
    all_perms,
    block_sum,
    compose_perms,
    identity_perm,
    inverse_perm,
    symmetric_power_action,
    tensor_power,
)
from propcalc.errors import InvalidLabel, ShapeMismatch, TruncationExceeded
from propcalc.gradedlinear import ChainComplex, zero_complex
from propcalc.lifting import Generator, QuasiFreePresentation
from propcalc.linalg import Vector
from propcalc.propcore import EndomorphismProp, PropMorphism, TableProp, TruncatedProp, tabulate
from propcalc.words import Gen, Horizontal, Permuted, Unit, Vertical, Word

log = logging.getLogger(__name__)

ONE = Fraction(1)
ID = "id"
EMPTY = "empty"


class UnitProp(TruncatedProp):
    def __init__(self, bound: int, name: str = "I"):
        super().__init__(bound, name)

    def _build_component(self, m, n):
        if m != n:
            return zero_complex()
        return ChainComplex({0: (ID,)}, {})

    def _vertical_basis(self, x, y, m, k, n):
        return {ID: ONE}

    def _horizontal_basis(self, x, a, y, b):
        return {ID: ONE}

    def unit(self, n):
        if not self.in_bound(n, n):
            raise TruncationExceeded((n, n), self.bound)
        return {ID: ONE}

    def _act_left_basis(self, m, n, tau, x):
        return {x: ONE}

    def _act_right_basis(self, m, n, x, sigma):
        return {x: ONE}


def unit_action(P: UnitProp, X: ChainComplex, bound: int | None = None) -> PropMorphism:
    """id_n ↦ identity of X^{⊗n}. Equivariant only when Σ_n acts trivially on X^{⊗n}."""
    end_X = EndomorphismProp(X, P.bound if bound is None else bound, "End_X")
    return PropMorphism(P, end_X, lambda m, n, x: end_X.unit(n), name="unit_action")


# -- permutations ------------------------------------------------------------


def perm_label(sigma: Permutation) -> str:
    return "-".join(str(i) for i in sigma) if sigma else "e"


def parse_perm_label(label: str) -> Permutation:
    if label == "e":
        return ()
    try:
        return tuple(int(i) for i in label.split("-"))
    except ValueError as e:
        raise InvalidLabel(label, "not a permutation label") from e


class PermutationProp(TruncatedProp):
    """ℚ[Σ_n] in biarity (n,n); the initial prop."""

    def __init__(self, bound: int, name: str = "Σ"):
        super().__init__(bound, name)

    def _build_component(self, m, n):
        if m != n:
            return zero_complex()
        return ChainComplex({0: tuple(perm_label(p) for p in all_perms(n))}, {})

    def _vertical_basis(self, x, y, m, k, n):
        return {perm_label(compose_perms(parse_perm_label(x), parse_perm_label(y))): ONE}

    def _horizontal_basis(self, x, a, y, b):
        return {perm_label(block_sum(parse_perm_label(x), parse_perm_label(y))): ONE}

    def unit(self, n):
        if not self.in_bound(n, n):
            raise TruncationExceeded((n, n), self.bound)
        return {perm_label(identity_perm(n)): ONE}

    def _act_left_basis(self, m, n, tau, x):
        return {perm_label(compose_perms(tau, parse_perm_label(x))): ONE}

    def _act_right_basis(self, m, n, x, sigma):
        return {perm_label(compose_perms(parse_perm_label(x), sigma)): ONE}


def permutation_action(P: PermutationProp, X: ChainComplex, bound: int | None = None) -> PropMorphism:
    """σ ↦ the Koszul-signed permutation of the factors of X^{⊗n}."""
    end_X = EndomorphismProp(X, P.bound if bound is None else bound, "End_X")

    def on_basis(m, n, x):
        return end_X.from_columns(n, n, symmetric_power_action(X, n, parse_perm_label(x)).columns)

    return PropMorphism(P, end_X, on_basis, name="permutation_action")


def endomorphism_table(X: ChainComplex, bound: int, name: str = "End_X") -> TableProp:
    return tabulate(EndomorphismProp(X, bound, name), name)


# -- forests -----------------------------------------------------------------

Tree = int | tuple  # a leaf index, or a pair (left, right)
Forest = tuple[Tree, ...]


def tree_label(t: Tree) -> str:
    if isinstance(t, int):
        return str(t)
    return f"[{tree_label(t[0])},{tree_label(t[1])}]"


def forest_label(forest: Forest) -> str:
    return ";".join(tree_label(t) for t in forest) if forest else EMPTY


def _parse_tree(text: str, pos: int) -> tuple[Tree, int]:
    if text.startswith("[", pos):
        left, pos = _parse_tree(text, pos + 1)
        if not text.startswith(",", pos):
            raise InvalidLabel(text, f"expected ',' at {pos}")
        right, pos = _parse_tree(text, pos + 1)
        if not text.startswith("]", pos):
            raise InvalidLabel(text, f"expected ']' at {pos}")
        return (left, right), pos + 1
    end = pos
    while end < len(text) and text[end].isdigit():
        end += 1
    if end == pos:
        raise InvalidLabel(text, f"expected a leaf at {pos}")
    return int(text[pos:end]), end


def parse_forest(label: str) -> Forest:
    if label == EMPTY:
        return ()
    trees = []
    for part in label.split(";"):
        tree, end = _parse_tree(part, 0)
        if end != len(part):
            raise InvalidLabel(label, "trailing characters")
        trees.append(tree)
    return tuple(trees)


def leaves(t: Tree) -> list[int]:
    """Leaves in planar order."""
    if isinstance(t, int):
        return [t]
    return leaves(t[0]) + leaves(t[1])


def _relabel(t: Tree, mapping: Sequence[int] | Mapping[int, int]) -> Tree:
    if isinstance(t, int):
        return mapping[t]
    return (_relabel(t[0], mapping), _relabel(t[1], mapping))


def _substitute(t: Tree, inner: Forest) -> Tree:
    if isinstance(t, int):
        return inner[t]
    return (_substitute(t[0], inner), _substitute(t[1], inner))


@lru_cache(maxsize=None)
def trees_on(labels: frozenset[int]) -> tuple[Tree, ...]:
    """Every planar binary tree whose leaves are exactly `labels`."""
    if len(labels) == 1:
        return (next(iter(labels)),)
    out = []
    ordered = sorted(labels)
    for r in range(1, len(ordered)):
        for left in itertools.combinations(ordered, r):
            right = frozenset(labels - set(left))
            for tl in trees_on(frozenset(left)):
                for tr in trees_on(right):
                    out.append((tl, tr))
    return tuple(out)


def forests(m: int, n: int) -> list[Forest]:
    if n == 0:
        return [()] if m == 0 else []
    out: list[Forest] = []
    for owner in itertools.product(range(n), repeat=m):
        blocks = [frozenset(i for i in range(m) if owner[i] == j) for j in range(n)]
        if any(not block for block in blocks):
            continue
        out.extend(itertools.product(*(trees_on(block) for block in blocks)))
    return out


class ForestProp(TruncatedProp):
    """The free prop on one degree-0 operation of biarity (2,1)."""

    def __init__(self, bound: int, name: str = "F"):
        super().__init__(bound, name)

    def _build_component(self, m, n):
        labels = sorted(forest_label(f) for f in forests(m, n))
        if not labels:
            return zero_complex()
        log.debug("forests(%d,%d): %d", m, n, len(labels))
        return ChainComplex({0: tuple(labels)}, {})

    def _vertical_basis(self, x, y, m, k, n):
        outer, inner = parse_forest(x), parse_forest(y)
        return {forest_label(tuple(_substitute(t, inner) for t in outer)): ONE}

    def _horizontal_basis(self, x, a, y, b):
        shift = a[0]
        right = tuple(_relabel(t, range(shift, shift + b[0])) for t in parse_forest(y))
        return {forest_label(parse_forest(x) + right): ONE}

    def unit(self, n):
        if not self.in_bound(n, n):
            raise TruncationExceeded((n, n), self.bound)
        return {forest_label(tuple(range(n))): ONE}

    def _act_left_basis(self, m, n, tau, x):
        trees = parse_forest(x)
        moved: list[Tree] = [0] * n
        for i, t in enumerate(trees):
            moved[tau[i]] = t
        return {forest_label(tuple(moved)): ONE}

    def _act_right_basis(self, m, n, x, sigma):
        inverse = inverse_perm(sigma)
        return {forest_label(tuple(_relabel(t, inverse) for t in parse_forest(x))): ONE}


GENERATOR = "g"
PRODUCT = "[0,1]"


def _standard_word(t: Tree) -> Word:
    if isinstance(t, int):
        return Unit(1)
    return Vertical(Gen(GENERATOR), Horizontal(_standard_word(t[0]), _standard_word(t[1])))


def forest_word(forest: Forest) -> Word:
    """A word evaluating to the forest: planar trees side by side, then the leaves relabelled."""
    if not forest:
        return Unit(0)
    word = _standard_word(forest[0])
    for t in forest[1:]:
        word = Horizontal(word, _standard_word(t))
    planar = tuple(leaf for t in forest for leaf in leaves(t))
    if planar == identity_perm(len(planar)):
        return word
    return Permuted(word, None, inverse_perm(planar))


def forest_presentation(P: ForestProp) -> QuasiFreePresentation:
    words = {
        (m, n): {x: forest_word(parse_forest(x)) for x in P.component(m, n).all_labels()}
        for m, n in P.biarities()
    }
    values = {GENERATOR: {PRODUCT: ONE}} if P.in_bound(2, 1) else {}
    generators = (Generator(GENERATOR, (2, 1), 0),) if P.in_bound(2, 1) else ()
    return QuasiFreePresentation(P, generators, values, words)


def unit_presentation(P: UnitProp) -> QuasiFreePresentation:
    words = {(n, n): {ID: Unit(n)} for n in range(P.bound + 1)}
    return QuasiFreePresentation(P, (), {}, words)


def product_element(end_X: EndomorphismProp, table: Mapping[tuple[str, str], Mapping[str, Fraction]]) -> Vector:
    """The (2,1) element x⋆y ↦ table[(x, y)]; missing pairs multiply to zero."""
    X = end_X.X
    power = tensor_power(X, 2)
    if any(a not in X or b not in X for a, b in table):
        raise ShapeMismatch("product table mentions labels outside the carrier")
    columns = {power.labels[(a, b)]: dict(v) for (a, b), v in table.items() if v}
    return end_X.from_columns(2, 1, columns)
