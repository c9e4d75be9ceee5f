"""
Σ-biobjects truncated at a biarity bound.

Permutations are tuples in zero-based one-line notation, σ = (σ(0), ..., σ(m-1)).
The generator s_i (i >= 1) swaps positions i-1 and i. A permutation acts on a
tensor word by moving the factor at position i to position σ(i), with the
Koszul sign of the crossings.
"""

import itertools
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from propcalc import linalg
from propcalc.errors import TruncationExceeded
from propcalc.gradedlinear import (
    ChainComplex,
    ChainMap,
    chain_map_defects,
    is_cofibration,
    is_fibration,
    is_quasi_iso,
    unit_complex,
    zero_complex,
)
from propcalc.linalg import Vector
from propcalc.reports import CheckReport
from propcalc.utils import sum_label, word_label

log = logging.getLogger(__name__)

Permutation = tuple[int, ...]
Biarity = tuple[int, int]


def identity_perm(m: int) -> Permutation:
    return tuple(range(m))


def compose_perms(sigma: Permutation, tau: Permutation) -> Permutation:
    """σ∘τ."""
    return tuple(sigma[t] for t in tau)


def inverse_perm(sigma: Permutation) -> Permutation:
    return tuple(int(i) for i in np.argsort(np.array(sigma, dtype=int), kind="stable"))


def transposition(m: int, i: int) -> Permutation:
    """s_i in Σ_m, swapping positions i-1 and i."""
    p = list(range(m))
    p[i - 1], p[i] = p[i], p[i - 1]
    return tuple(p)


def block_sum(sigma: Permutation, tau: Permutation) -> Permutation:
    shift = len(sigma)
    return tuple(sigma) + tuple(shift + t for t in tau)


def adjacent_word(sigma: Permutation) -> list[int]:
    """Generators i with σ = s_{i_1}∘s_{i_2}∘...∘s_{i_k} (a reduced word)."""
    w = list(sigma)
    steps: list[int] = []
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] > w[i + 1]:
                w[i], w[i + 1] = w[i + 1], w[i]
                steps.append(i + 1)
                changed = True
    return steps[::-1]


def all_perms(m: int) -> list[Permutation]:
    return [tuple(p) for p in itertools.permutations(range(m))]


def perm_from_json(data: Sequence[int], one_based: bool = False) -> Permutation:
    p = tuple(int(x) - (1 if one_based else 0) for x in data)
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation: {list(data)}")
    return p


def permute_word(sigma: Permutation, word: tuple[str, ...], degree_of: Mapping[str, int]) -> tuple[int, tuple[str, ...]]:
    """(sign, σ·word) where the factor at position i moves to σ(i)."""
    out: list[str] = [""] * len(word)
    for i, x in enumerate(word):
        out[sigma[i]] = x
    sign = 1
    for i in range(len(word)):
        for j in range(i + 1, len(word)):
            if sigma[i] > sigma[j] and degree_of[word[i]] % 2 and degree_of[word[j]] % 2:
                sign = -sign
    return sign, tuple(out)


@dataclass(frozen=True, eq=False)
class TensorPower:
    """X^{⊗m} with flat word labels."""

    base: ChainComplex
    m: int
    complex: ChainComplex
    words: Mapping[str, tuple[str, ...]]
    labels: Mapping[tuple[str, ...], str]


@lru_cache(maxsize=None)
def tensor_power(X: ChainComplex, m: int) -> TensorPower:
    letters = X.all_labels()
    words: dict[str, tuple[str, ...]] = {}
    labels: dict[tuple[str, ...], str] = {}
    basis: dict[int, list[str]] = {}
    for word in itertools.product(letters, repeat=m):
        label = word_label(word)
        words[label] = word
        labels[word] = label
        basis.setdefault(sum(X.degree(x) for x in word), []).append(label)
    differential: dict[str, Vector] = {}
    for label, word in words.items():
        image: Vector = {}
        shift = 0
        for i, x in enumerate(word):
            sign = -1 if shift % 2 else 1
            for y, c in X.differential.get(x, {}).items():
                linalg.add_into(image, {labels[word[:i] + (y,) + word[i + 1 :]]: c}, sign)
            shift += X.degree(x)
        if image:
            differential[label] = image
    ordered = {n: tuple(basis[n]) for n in sorted(basis, reverse=True)}
    return TensorPower(X, m, ChainComplex(ordered, differential), words, labels)


def symmetric_power_action(X: ChainComplex, m: int, sigma: Permutation) -> ChainMap:
    """σ acting on X^{⊗m} by permuting factors with Koszul signs."""
    power = tensor_power(X, m)
    columns: dict[str, Vector] = {}
    for label, word in power.words.items():
        sign, moved = permute_word(sigma, word, X.degree_of)
        columns[label] = {power.labels[moved]: Fraction(sign)}
    return ChainMap(power.complex, power.complex, columns)


def tensor_power_map(f: ChainMap, m: int) -> ChainMap:
    """f^{⊗m} for a degree-0 chain map f."""
    source = tensor_power(f.source, m)
    target = tensor_power(f.target, m)
    columns: dict[str, Vector] = {}
    for label, word in source.words.items():
        image: dict[tuple[str, ...], Fraction] = {(): Fraction(1)}
        for x in word:
            step: dict[tuple[str, ...], Fraction] = {}
            for prefix, c in image.items():
                for y, cy in f.columns.get(x, {}).items():
                    key = prefix + (y,)
                    step[key] = step.get(key, Fraction(0)) + c * cy
            image = {k: v for k, v in step.items() if v}
        if image:
            columns[label] = {target.labels[w]: c for w, c in image.items()}
    return ChainMap(source.complex, target.complex, columns)


@dataclass(frozen=True, eq=False)
class BiObject:
    """
    Components M(m,n) for m, n <= bound with the generator actions.

    `left[(m, n)][i]` is s_i ∈ Σ_n acting on outputs, `right[(m, n)][i]` is
    s_i ∈ Σ_m acting on inputs.
    """

    bound: int
    components: Mapping[Biarity, ChainComplex]
    left: Mapping[Biarity, Mapping[int, ChainMap]]
    right: Mapping[Biarity, Mapping[int, ChainMap]]

    def biarities(self) -> list[Biarity]:
        return [(m, n) for m in range(self.bound + 1) for n in range(self.bound + 1)]

    def component(self, m: int, n: int) -> ChainComplex:
        if m > self.bound or n > self.bound:
            raise TruncationExceeded((m, n), self.bound)
        return self.components.get((m, n), zero_complex())

    def act_left(self, m: int, n: int, tau: Permutation, v: Mapping[str, Fraction]) -> Vector:
        out = dict(v)
        for i in reversed(adjacent_word(tau)):
            out = self.left[(m, n)][i](out)
        return out

    def act_right(self, m: int, n: int, v: Mapping[str, Fraction], sigma: Permutation) -> Vector:
        out = dict(v)
        for i in adjacent_word(sigma):
            out = self.right[(m, n)][i](out)
        return out


def biobject_from_actions(bound: int, components: Mapping[Biarity, ChainComplex], act_left, act_right) -> BiObject:
    """Tabulate the generator actions of callables act_left(m, n, τ, v) and act_right(m, n, v, σ)."""
    left: dict[Biarity, dict[int, ChainMap]] = {}
    right: dict[Biarity, dict[int, ChainMap]] = {}
    for (m, n), C in components.items():
        left[(m, n)] = {
            i: ChainMap(C, C, {x: act_left(m, n, transposition(n, i), {x: Fraction(1)}) for x in C.all_labels()})
            for i in range(1, n)
        }
        right[(m, n)] = {
            i: ChainMap(C, C, {x: act_right(m, n, {x: Fraction(1)}, transposition(m, i)) for x in C.all_labels()})
            for i in range(1, m)
        }
    return BiObject(bound, dict(components), left, right)


def check_biobject(M: BiObject, spot_check: int = 3) -> CheckReport:
    """Chain-map, Coxeter and commutation checks on the generators, plus a full group check on small arities."""
    report = CheckReport("biobject")
    for (m, n), C in sorted(M.components.items()):
        labels = C.all_labels()
        gens = [("left", i, g) for i, g in M.left.get((m, n), {}).items()]
        gens += [("right", i, g) for i, g in M.right.get((m, n), {}).items()]
        for side, i, g in gens:
            bad = chain_map_defects(g)
            if bad:
                report.violate("action_chain_map", (m, n), side=side, generator=f"s{i}", labels=bad)
            for x in labels:
                if not linalg.vectors_equal(g(g({x: Fraction(1)})), {x: Fraction(1)}):
                    report.violate("involution", (m, n), side=side, generator=f"s{i}", label=x)
        for side, table in (("left", M.left.get((m, n), {})), ("right", M.right.get((m, n), {}))):
            for i in table:
                for j in table:
                    if j <= i:
                        continue
                    for x in labels:
                        v = {x: Fraction(1)}
                        if j == i + 1:
                            lhs = table[i](table[j](table[i](v)))
                            rhs = table[j](table[i](table[j](v)))
                            name = "braid"
                        else:
                            lhs = table[i](table[j](v))
                            rhs = table[j](table[i](v))
                            name = "far_commutation"
                        if not linalg.vectors_equal(lhs, rhs):
                            report.violate(name, (m, n), side=side, generators=[f"s{i}", f"s{j}"], label=x)
        for i, g in M.left.get((m, n), {}).items():
            for j, h in M.right.get((m, n), {}).items():
                for x in labels:
                    v = {x: Fraction(1)}
                    if not linalg.vectors_equal(g(h(v)), h(g(v))):
                        report.violate("left_right_commute", (m, n), left=f"s{i}", right=f"s{j}", label=x)
        checked = 0
        if m <= spot_check and n <= spot_check:
            for x in labels:
                v = {x: Fraction(1)}
                for a in all_perms(n):
                    for b in all_perms(n):
                        lhs = M.act_left(m, n, a, M.act_left(m, n, b, v))
                        if not linalg.vectors_equal(lhs, M.act_left(m, n, compose_perms(a, b), v)):
                            report.violate("left_group_law", (m, n), perms=[list(a), list(b)], label=x)
                        checked += 1
                for a in all_perms(m):
                    for b in all_perms(m):
                        lhs = M.act_right(m, n, M.act_right(m, n, v, a), b)
                        if not linalg.vectors_equal(lhs, M.act_right(m, n, v, compose_perms(a, b))):
                            report.violate("right_group_law", (m, n), perms=[list(a), list(b)], label=x)
                        checked += 1
            report.record("group_law", checked, checked)
    return report


@dataclass(frozen=True, eq=False)
class BiObjectMorphism:
    source: BiObject
    target: BiObject
    maps: Mapping[Biarity, ChainMap]

    def component_map(self, m: int, n: int) -> ChainMap:
        f = self.maps.get((m, n))
        if f is None:
            return ChainMap(self.source.component(m, n), self.target.component(m, n), {})
        return f


def check_equivariance(f: BiObjectMorphism) -> CheckReport:
    report = CheckReport("equivariance")
    for (m, n) in f.source.biarities():
        g = f.component_map(m, n)
        for x in g.source.all_labels():
            v = {x: Fraction(1)}
            for i in range(1, n):
                tau = transposition(n, i)
                if not linalg.vectors_equal(g(f.source.act_left(m, n, tau, v)), f.target.act_left(m, n, tau, g(v))):
                    report.violate("left_equivariance", (m, n), generator=f"s{i}", label=x)
            for i in range(1, m):
                sigma = transposition(m, i)
                if not linalg.vectors_equal(g(f.source.act_right(m, n, v, sigma)), f.target.act_right(m, n, g(v), sigma)):
                    report.violate("right_equivariance", (m, n), generator=f"s{i}", label=x)
    return report


def _copy_tag(tau: Permutation, sigma: Permutation) -> str:
    return "".join(str(t) for t in tau) + "." + "".join(str(s) for s in sigma)


def free_biobject(M: Mapping[Biarity, ChainComplex], bound: int) -> BiObject:
    """⊕_{Σ_n × Σ_m} M(m,n) with the actions permuting the copies."""
    components: dict[Biarity, ChainComplex] = {}
    left: dict[Biarity, dict[int, ChainMap]] = {}
    right: dict[Biarity, dict[int, ChainMap]] = {}
    for (m, n), C in M.items():
        if m > bound or n > bound:
            raise TruncationExceeded((m, n), bound)
        copies = [(tau, sigma) for tau in all_perms(n) for sigma in all_perms(m)]
        basis: dict[int, list[str]] = {}
        differential: dict[str, Vector] = {}
        for tau, sigma in copies:
            tag = _copy_tag(tau, sigma)
            for d in C.degrees:
                basis.setdefault(d, []).extend(sum_label(tag, x) for x in C.labels(d))
            for x, image in C.differential.items():
                differential[sum_label(tag, x)] = {sum_label(tag, y): c for y, c in image.items()}
        total = ChainComplex({d: tuple(v) for d, v in basis.items()}, differential)
        components[(m, n)] = total

        left[(m, n)] = {}
        for i in range(1, n):
            s = transposition(n, i)
            columns = {}
            for tau, sigma in copies:
                for x in C.all_labels():
                    columns[sum_label(_copy_tag(tau, sigma), x)] = {
                        sum_label(_copy_tag(compose_perms(s, tau), sigma), x): Fraction(1)
                    }
            left[(m, n)][i] = ChainMap(total, total, columns)
        right[(m, n)] = {}
        for i in range(1, m):
            s = transposition(m, i)
            columns = {}
            for tau, sigma in copies:
                for x in C.all_labels():
                    columns[sum_label(_copy_tag(tau, sigma), x)] = {
                        sum_label(_copy_tag(tau, compose_perms(sigma, s)), x): Fraction(1)
                    }
            right[(m, n)][i] = ChainMap(total, total, columns)
    log.debug("free biobject on %d components", len(components))
    return BiObject(bound, components, left, right)


def generator_biobject(m: int, n: int, bound: int) -> BiObject:
    """G_{(m,n)}: the free biobject on the unit concentrated in biarity (m,n)."""
    return free_biobject({(m, n): unit_complex("g")}, bound)


def expected_free_dim(M: Mapping[Biarity, ChainComplex], m: int, n: int) -> int:
    C = M.get((m, n))
    return factorial(m) * factorial(n) * (C.dim if C is not None else 0)


def classify_morphism(f: BiObjectMorphism) -> dict[Biarity, dict[str, bool]]:
    out: dict[Biarity, dict[str, bool]] = {}
    for (m, n) in f.source.biarities():
        g = f.component_map(m, n)
        out[(m, n)] = {
            "weak_equiv": is_quasi_iso(g),
            "fibration": is_fibration(g),
            "cofibration": is_cofibration(g),
        }
    return out


def has_nonempty_inputs(M: BiObject, include_unit: bool = True) -> bool:
    """M(0,0) is the unit and M(0,n) = 0 for n > 0."""
    for n in range(M.bound + 1):
        C = M.component(0, n)
        if n == 0:
            if include_unit and (C.dims() != {0: 1} or C.differential):
                return False
        elif C.dim:
            return False
    return True


def has_nonempty_outputs(M: BiObject, include_unit: bool = True) -> bool:
    for m in range(M.bound + 1):
        C = M.component(m, 0)
        if m == 0:
            if include_unit and (C.dims() != {0: 1} or C.differential):
                return False
        elif C.dim:
            return False
    return True
