"""
Props truncated at a biarity bound.

A prop here is anything that can build its components P(m,n) and compose
basis elements: vertical x∘_v y for x ∈ P(k,n), y ∈ P(m,k), horizontal
x∘_h y, units, and the two symmetric actions. Elements are sparse vectors
over the component basis and always travel with their biarity.
"""

import itertools
import logging
from abc import ABC, abstractmethod
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from propcalc import linalg
from propcalc.biobject import (
    BiObject,
    Biarity,
    Permutation,
    adjacent_word,
    biobject_from_actions,
    block_sum,
    identity_perm,
    inverse_perm,
    permute_word,
    tensor_power,
    tensor_power_map,
    transposition,
)
from propcalc.config import Settings
from propcalc.errors import ClosureViolation, NotInSubspace, ShapeMismatch, TruncationExceeded
from propcalc.gradedlinear import (
    ChainComplex,
    ChainMap,
    Subcomplex,
    check_chain_map,
    direct_sum,
    equalizer,
    hom_complex,
    hom_pairs,
    postcompose,
    precompose,
    tensor,
    tensor_pairs,
    zero_complex,
)
from propcalc.linalg import Vector
from propcalc.reports import CheckReport, basis_tuples
from propcalc.utils import sum_label, tensor_label

log = logging.getLogger(__name__)

ONE = Fraction(1)


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def _e(label: str) -> Vector:
    return {label: ONE}


class TruncatedProp(ABC):
    def __init__(self, bound: int, name: str = "P"):
        self.bound = bound
        self.name = name
        self._components: dict[Biarity, ChainComplex] = {}
        self._vertical_cache: dict[tuple, Vector] = {}
        self._horizontal_cache: dict[tuple, Vector] = {}

    # -- structure on basis elements, provided by subclasses ---------------

    @abstractmethod
    def _build_component(self, m: int, n: int) -> ChainComplex: ...

    @abstractmethod
    def _vertical_basis(self, x: str, y: str, m: int, k: int, n: int) -> Vector:
        """x∘_v y for basis x ∈ P(k,n), y ∈ P(m,k)."""

    @abstractmethod
    def _horizontal_basis(self, x: str, a: Biarity, y: str, b: Biarity) -> Vector: ...

    @abstractmethod
    def unit(self, n: int) -> Vector: ...

    @abstractmethod
    def _act_left_basis(self, m: int, n: int, tau: Permutation, x: str) -> Vector: ...

    @abstractmethod
    def _act_right_basis(self, m: int, n: int, x: str, sigma: Permutation) -> Vector: ...

    # -- derived -----------------------------------------------------------

    def biarities(self) -> list[Biarity]:
        return [(m, n) for m in range(self.bound + 1) for n in range(self.bound + 1)]

    def in_bound(self, m: int, n: int) -> bool:
        return 0 <= m <= self.bound and 0 <= n <= self.bound

    def component(self, m: int, n: int) -> ChainComplex:
        if not self.in_bound(m, n):
            raise TruncationExceeded((m, n), self.bound)
        C = self._components.get((m, n))
        if C is None:
            C = self._build_component(m, n)
            self._components[(m, n)] = C
        return C

    def degree(self, m: int, n: int, label: str) -> int:
        return self.component(m, n).degree(label)

    def d(self, m: int, n: int, v: Mapping[str, Fraction]) -> Vector:
        return self.component(m, n).d(v)

    def vertical(self, x: Mapping[str, Fraction], y: Mapping[str, Fraction], m: int, k: int, n: int) -> Vector:
        for biarity in ((m, k), (k, n), (m, n)):
            if not self.in_bound(*biarity):
                raise TruncationExceeded(biarity, self.bound)
        out: Vector = {}
        for xl, xc in x.items():
            for yl, yc in y.items():
                key = (xl, yl, m, k, n)
                value = self._vertical_cache.get(key)
                if value is None:
                    value = self._vertical_basis(xl, yl, m, k, n)
                    self._vertical_cache[key] = value
                linalg.add_into(out, value, xc * yc)
        return out

    def horizontal(self, x: Mapping[str, Fraction], a: Biarity, y: Mapping[str, Fraction], b: Biarity) -> Vector:
        total = (a[0] + b[0], a[1] + b[1])
        if not self.in_bound(*total):
            raise TruncationExceeded(total, self.bound)
        out: Vector = {}
        for xl, xc in x.items():
            for yl, yc in y.items():
                key = (xl, a, yl, b)
                value = self._horizontal_cache.get(key)
                if value is None:
                    value = self._horizontal_basis(xl, a, yl, b)
                    self._horizontal_cache[key] = value
                linalg.add_into(out, value, xc * yc)
        return out

    def act_left(self, m: int, n: int, tau: Permutation, v: Mapping[str, Fraction]) -> Vector:
        if tau == identity_perm(n):
            return dict(v)
        out: Vector = {}
        for label, c in v.items():
            linalg.add_into(out, self._act_left_basis(m, n, tau, label), c)
        return out

    def act_right(self, m: int, n: int, v: Mapping[str, Fraction], sigma: Permutation) -> Vector:
        if sigma == identity_perm(m):
            return dict(v)
        out: Vector = {}
        for label, c in v.items():
            linalg.add_into(out, self._act_right_basis(m, n, label, sigma), c)
        return out

    def biobject(self) -> BiObject:
        components = {(m, n): self.component(m, n) for m, n in self.biarities()}
        return biobject_from_actions(self.bound, components, self.act_left, self.act_right)


# -- concrete props ----------------------------------------------------------


class TableProp(TruncatedProp):
    """
    A prop given by explicit tables, as read from JSON.

    Missing table entries are zero. Actions are given by generator matrices.
    """

    def __init__(
        self,
        bound: int,
        components: Mapping[Biarity, ChainComplex],
        vertical: Mapping[tuple[Biarity, Biarity, str, str], Vector],
        horizontal: Mapping[tuple[Biarity, Biarity, str, str], Vector],
        units: Mapping[int, Vector],
        left: Mapping[Biarity, Mapping[int, Mapping[str, Vector]]],
        right: Mapping[Biarity, Mapping[int, Mapping[str, Vector]]],
        name: str = "P",
    ):
        super().__init__(bound, name)
        self.components = dict(components)
        self.vertical_table = dict(vertical)
        self.horizontal_table = dict(horizontal)
        self.units = dict(units)
        self.left_table = left
        self.right_table = right

    def _build_component(self, m, n):
        return self.components.get((m, n), zero_complex())

    def _vertical_basis(self, x, y, m, k, n):
        return dict(self.vertical_table.get(((k, n), (m, k), x, y), {}))

    def _horizontal_basis(self, x, a, y, b):
        return dict(self.horizontal_table.get((a, b, x, y), {}))

    def unit(self, n):
        return dict(self.units.get(n, {}))

    def _act_left_basis(self, m, n, tau, x):
        v: Vector = {x: ONE}
        for i in reversed(adjacent_word(tau)):
            v = linalg.apply(self.left_table.get((m, n), {}).get(i, {}), v)
        return v

    def _act_right_basis(self, m, n, x, sigma):
        v: Vector = {x: ONE}
        for i in adjacent_word(sigma):
            v = linalg.apply(self.right_table.get((m, n), {}).get(i, {}), v)
        return v


def tabulate(P: TruncatedProp, name: str | None = None) -> TableProp:
    """Materialize every structure table of P (for serialization and fault injection)."""
    components = {(m, n): P.component(m, n) for m, n in P.biarities()}
    vertical: dict = {}
    horizontal: dict = {}
    for (m, k), (k2, n) in itertools.product(P.biarities(), P.biarities()):
        if k != k2:
            continue
        for x in components[(k, n)].all_labels():
            for y in components[(m, k)].all_labels():
                value = P.vertical({x: ONE}, {y: ONE}, m, k, n)
                if value:
                    vertical[((k, n), (m, k), x, y)] = value
    for a, b in itertools.product(P.biarities(), P.biarities()):
        if not P.in_bound(a[0] + b[0], a[1] + b[1]):
            continue
        for x in components[a].all_labels():
            for y in components[b].all_labels():
                value = P.horizontal({x: ONE}, a, {y: ONE}, b)
                if value:
                    horizontal[(a, b, x, y)] = value
    units = {n: P.unit(n) for n in range(P.bound + 1)}
    left = {
        (m, n): {
            i: {x: P.act_left(m, n, transposition(n, i), {x: ONE}) for x in components[(m, n)].all_labels()}
            for i in range(1, n)
        }
        for m, n in P.biarities()
    }
    right = {
        (m, n): {
            i: {x: P.act_right(m, n, {x: ONE}, transposition(m, i)) for x in components[(m, n)].all_labels()}
            for i in range(1, m)
        }
        for m, n in P.biarities()
    }
    return TableProp(P.bound, components, vertical, horizontal, units, left, right, name or P.name)


class EndomorphismProp(TruncatedProp):
    """End_X(m,n) = Hom(X^{⊗m}, X^{⊗n}) on elementary maps E_{b,a}."""

    def __init__(self, X: ChainComplex, bound: int, name: str = "End"):
        super().__init__(bound, name)
        self.X = X
        self._pairs: dict[Biarity, dict[str, tuple[str, str]]] = {}
        self._labels: dict[Biarity, dict[tuple[str, str], str]] = {}

    def _build_component(self, m, n):
        A = tensor_power(self.X, m).complex
        B = tensor_power(self.X, n).complex
        pairs = hom_pairs(A, B)
        self._pairs[(m, n)] = pairs
        self._labels[(m, n)] = {ab: label for label, ab in pairs.items()}
        return hom_complex(A, B)

    def pairs(self, m: int, n: int) -> dict[str, tuple[str, str]]:
        self.component(m, n)
        return self._pairs[(m, n)]

    def label(self, m: int, n: int, a: str, b: str) -> str:
        self.component(m, n)
        return self._labels[(m, n)][(a, b)]

    def word_degree(self, word_label: str, m: int) -> int:
        return tensor_power(self.X, m).complex.degree(word_label)

    def _vertical_basis(self, x, y, m, k, n):
        b2, c = self.pairs(k, n)[x]
        a, b = self.pairs(m, k)[y]
        if b != b2:
            return {}
        return {self.label(m, n, a, c): ONE}

    def _horizontal_basis(self, x, a, y, b):
        (m1, n1), (m2, n2) = a, b
        in1, out1 = self.pairs(m1, n1)[x]
        in2, out2 = self.pairs(m2, n2)[y]
        p1, p2 = tensor_power(self.X, m1), tensor_power(self.X, m2)
        q1, q2 = tensor_power(self.X, n1), tensor_power(self.X, n2)
        g_degree = q2.complex.degree(out2) - p2.complex.degree(in2)
        sign = _sign(g_degree * p1.complex.degree(in1))
        source = tensor_power(self.X, m1 + m2).labels[p1.words[in1] + p2.words[in2]]
        target = tensor_power(self.X, n1 + n2).labels[q1.words[out1] + q2.words[out2]]
        return {self.label(m1 + m2, n1 + n2, source, target): Fraction(sign)}

    def unit(self, n):
        if not self.in_bound(n, n):
            raise TruncationExceeded((n, n), self.bound)
        power = tensor_power(self.X, n)
        return {self.label(n, n, w, w): ONE for w in power.words}

    def _act_left_basis(self, m, n, tau, x):
        a, b = self.pairs(m, n)[x]
        power = tensor_power(self.X, n)
        sign, moved = permute_word(tau, power.words[b], self.X.degree_of)
        return {self.label(m, n, a, power.labels[moved]): Fraction(sign)}

    def _act_right_basis(self, m, n, x, sigma):
        a, b = self.pairs(m, n)[x]
        power = tensor_power(self.X, m)
        _, source = permute_word(inverse_perm(sigma), power.words[a], self.X.degree_of)
        sign, _ = permute_word(sigma, source, self.X.degree_of)
        return {self.label(m, n, power.labels[source], b): Fraction(sign)}

    def as_columns(self, m: int, n: int, v: Mapping[str, Fraction]) -> dict[str, Vector]:
        """The element as a linear map X^{⊗m} -> X^{⊗n}."""
        pairs = self.pairs(m, n)
        columns: dict[str, Vector] = {}
        for label, c in v.items():
            a, b = pairs[label]
            linalg.add_into(columns.setdefault(a, {}), {b: c})
        return {a: col for a, col in columns.items() if col}

    def from_columns(self, m: int, n: int, columns: Mapping[str, Mapping[str, Fraction]]) -> Vector:
        out: Vector = {}
        for a, image in columns.items():
            for b, c in image.items():
                if c:
                    out[self.label(m, n, a, b)] = Fraction(c)
        return out


def endomorphism_prop(X: ChainComplex, bound: int, name: str = "End") -> EndomorphismProp:
    return EndomorphismProp(X, bound, name)


class ProductProp(TruncatedProp):
    """Componentwise product ∏ P_i with labels tag|x."""

    def __init__(self, factors: Sequence[tuple[str, TruncatedProp]], name: str = "product"):
        bound = min(P.bound for _, P in factors)
        super().__init__(bound, name)
        self.factors = list(factors)
        self.by_tag = dict(factors)
        self._decode: dict[Biarity, dict[str, tuple[str, str]]] = {}

    def _build_component(self, m, n):
        parts = [(tag, P.component(m, n)) for tag, P in self.factors]
        self._decode[(m, n)] = {sum_label(tag, x): (tag, x) for tag, C in parts for x in C.all_labels()}
        return direct_sum(parts)

    def decode(self, m: int, n: int) -> dict[str, tuple[str, str]]:
        self.component(m, n)
        return self._decode[(m, n)]

    def project(self, m: int, n: int, v: Mapping[str, Fraction], tag: str) -> Vector:
        decode = self.decode(m, n)
        return {decode[label][1]: c for label, c in v.items() if decode[label][0] == tag}

    def combine(self, parts: Mapping[str, Mapping[str, Fraction]]) -> Vector:
        return {sum_label(tag, x): c for tag, v in parts.items() for x, c in v.items() if c}

    def _vertical_basis(self, x, y, m, k, n):
        tx, x0 = self.decode(k, n)[x]
        ty, y0 = self.decode(m, k)[y]
        if tx != ty:
            return {}
        value = self.by_tag[tx].vertical({x0: ONE}, {y0: ONE}, m, k, n)
        return {sum_label(tx, z): c for z, c in value.items()}

    def _horizontal_basis(self, x, a, y, b):
        tx, x0 = self.decode(*a)[x]
        ty, y0 = self.decode(*b)[y]
        if tx != ty:
            return {}
        value = self.by_tag[tx].horizontal({x0: ONE}, a, {y0: ONE}, b)
        return {sum_label(tx, z): c for z, c in value.items()}

    def unit(self, n):
        return self.combine({tag: P.unit(n) for tag, P in self.factors})

    def _act_left_basis(self, m, n, tau, x):
        tag, x0 = self.decode(m, n)[x]
        return {sum_label(tag, z): c for z, c in self.by_tag[tag].act_left(m, n, tau, {x0: ONE}).items()}

    def _act_right_basis(self, m, n, x, sigma):
        tag, x0 = self.decode(m, n)[x]
        return {sum_label(tag, z): c for z, c in self.by_tag[tag].act_right(m, n, {x0: ONE}, sigma).items()}


class HadamardProp(TruncatedProp):
    """
    The arity-wise tensor product (K ⊠ P)(m,n) = K(m,n)⊗P(m,n).

    (k⊗p)∘(k'⊗p') = (-1)^{|p||k'|} (k∘k')⊗(p∘p') for both compositions,
    the actions are diagonal.
    """

    def __init__(self, K: TruncatedProp, P: TruncatedProp, name: str = "K⊠P"):
        super().__init__(min(K.bound, P.bound), name)
        self.K = K
        self.P = P
        self._decode: dict[Biarity, dict[str, tuple[str, str]]] = {}

    def _build_component(self, m, n):
        K, P = self.K.component(m, n), self.P.component(m, n)
        self._decode[(m, n)] = tensor_pairs(K, P)
        return tensor(K, P)

    def decode(self, m: int, n: int) -> dict[str, tuple[str, str]]:
        self.component(m, n)
        return self._decode[(m, n)]

    def pure(self, k: Mapping[str, Fraction], p: Mapping[str, Fraction]) -> Vector:
        return {tensor_label(a, b): ca * cb for a, ca in k.items() for b, cb in p.items() if ca * cb}

    def split(self, m: int, n: int, v: Mapping[str, Fraction]) -> dict[str, Vector]:
        """Group an element by its P-leg: p -> K-vector."""
        decode = self.decode(m, n)
        out: dict[str, Vector] = {}
        for label, c in v.items():
            k, p = decode[label]
            out.setdefault(p, {})[k] = c
        return out

    def _vertical_basis(self, x, y, m, k, n):
        kx, px = self.decode(k, n)[x]
        ky, py = self.decode(m, k)[y]
        sign = _sign(self.P.degree(k, n, px) * self.K.degree(m, k, ky))
        kk = self.K.vertical({kx: ONE}, {ky: ONE}, m, k, n)
        if not kk:
            return {}
        pp = self.P.vertical({px: ONE}, {py: ONE}, m, k, n)
        return linalg.scaled(self.pure(kk, pp), sign)

    def _horizontal_basis(self, x, a, y, b):
        kx, px = self.decode(*a)[x]
        ky, py = self.decode(*b)[y]
        sign = _sign(self.P.degree(*a, px) * self.K.degree(*b, ky))
        kk = self.K.horizontal({kx: ONE}, a, {ky: ONE}, b)
        if not kk:
            return {}
        pp = self.P.horizontal({px: ONE}, a, {py: ONE}, b)
        return linalg.scaled(self.pure(kk, pp), sign)

    def unit(self, n):
        return self.pure(self.K.unit(n), self.P.unit(n))

    def _act_left_basis(self, m, n, tau, x):
        k, p = self.decode(m, n)[x]
        return self.pure(self.K.act_left(m, n, tau, {k: ONE}), self.P.act_left(m, n, tau, {p: ONE}))

    def _act_right_basis(self, m, n, x, sigma):
        k, p = self.decode(m, n)[x]
        return self.pure(self.K.act_right(m, n, {k: ONE}, sigma), self.P.act_right(m, n, {p: ONE}, sigma))


class SubProp(TruncatedProp):
    """
    A sub-prop carried by subcomplexes of an ambient prop's components.

    Structure maps are computed in the ambient prop and restricted back;
    a result outside the carrier raises ClosureViolation.
    """

    def __init__(self, ambient: TruncatedProp, carrier: Callable[[int, int], Subcomplex], name: str = "sub"):
        super().__init__(ambient.bound, name)
        self.ambient = ambient
        self._carrier_factory = carrier
        self._carriers: dict[Biarity, Subcomplex] = {}

    def carrier(self, m: int, n: int) -> Subcomplex:
        if not self.in_bound(m, n):
            raise TruncationExceeded((m, n), self.bound)
        c = self._carriers.get((m, n))
        if c is None:
            c = self._carrier_factory(m, n)
            self._carriers[(m, n)] = c
        return c

    def _build_component(self, m, n):
        return self.carrier(m, n).complex

    def embed(self, m: int, n: int, v: Mapping[str, Fraction]) -> Vector:
        return self.carrier(m, n).embed(v)

    def restrict(self, m: int, n: int, w: Mapping[str, Fraction], what: str = "") -> Vector:
        try:
            return self.carrier(m, n).coordinates(w)
        except NotInSubspace as e:
            raise ClosureViolation(f"{self.name}: {what} leaves the carrier in biarity {(m, n)}") from e

    def _vertical_basis(self, x, y, m, k, n):
        value = self.ambient.vertical(self.embed(k, n, {x: ONE}), self.embed(m, k, {y: ONE}), m, k, n)
        return self.restrict(m, n, value, "vertical composition")

    def _horizontal_basis(self, x, a, y, b):
        value = self.ambient.horizontal(self.embed(*a, {x: ONE}), a, self.embed(*b, {y: ONE}), b)
        return self.restrict(a[0] + b[0], a[1] + b[1], value, "horizontal composition")

    def unit(self, n):
        return self.restrict(n, n, self.ambient.unit(n), "unit")

    def _act_left_basis(self, m, n, tau, x):
        return self.restrict(m, n, self.ambient.act_left(m, n, tau, self.embed(m, n, {x: ONE})), "left action")

    def _act_right_basis(self, m, n, x, sigma):
        return self.restrict(m, n, self.ambient.act_right(m, n, self.embed(m, n, {x: ONE}), sigma), "right action")


# -- morphisms ---------------------------------------------------------------


class PropMorphism:
    """A componentwise map of props, given on basis elements and extended linearly."""

    def __init__(
        self,
        source: TruncatedProp,
        target: TruncatedProp,
        on_basis: Callable[[int, int, str], Vector],
        name: str = "f",
    ):
        self.source = source
        self.target = target
        self._on_basis = on_basis
        self.name = name
        self._cache: dict[tuple[int, int, str], Vector] = {}

    def image(self, m: int, n: int, label: str) -> Vector:
        key = (m, n, label)
        value = self._cache.get(key)
        if value is None:
            value = self._on_basis(m, n, label)
            self._cache[key] = value
        return value

    def __call__(self, m: int, n: int, v: Mapping[str, Fraction]) -> Vector:
        out: Vector = {}
        for label, c in v.items():
            linalg.add_into(out, self.image(m, n, label), c)
        return out

    def chain_map(self, m: int, n: int) -> ChainMap:
        S = self.source.component(m, n)
        T = self.target.component(m, n)
        return ChainMap(S, T, {x: self.image(m, n, x) for x in S.all_labels() if self.image(m, n, x)})


def identity_morphism(P: TruncatedProp) -> PropMorphism:
    return PropMorphism(P, P, lambda m, n, x: {x: ONE}, name=f"id_{P.name}")


def compose_morphisms(g: PropMorphism, f: PropMorphism) -> PropMorphism:
    """g∘f."""
    return PropMorphism(f.source, g.target, lambda m, n, x: g(m, n, f.image(m, n, x)), name=f"{g.name}∘{f.name}")


def product_morphism(target: ProductProp, parts: Sequence[tuple[str, PropMorphism]]) -> PropMorphism:
    """The morphism into a product with the given components."""
    source = parts[0][1].source

    def on_basis(m, n, x):
        return target.combine({tag: f.image(m, n, x) for tag, f in parts})

    return PropMorphism(source, target, on_basis, name="(" + ",".join(f.name for _, f in parts) + ")")


def projection_morphism(P: ProductProp, tag: str) -> PropMorphism:
    return PropMorphism(P, P.by_tag[tag], lambda m, n, x: P.project(m, n, {x: ONE}, tag), name=f"pr_{tag}")


# -- verification ------------------------------------------------------------


def _parallel(settings: Settings, items: list, fn) -> list:
    if settings.threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        return list(pool.map(fn, items))


def _labels(P: TruncatedProp, m: int, n: int) -> list[str]:
    return P.component(m, n).all_labels()


def _record_tuples(report: CheckReport, check: str, biarity, lists, settings: Settings, fn) -> None:
    tuples, checked, total = basis_tuples(lists, settings.max_tuples, settings.seed)
    for t in tuples:
        witness = fn(*t)
        if witness is not None:
            report.violate(check, biarity, basis=list(t), **witness)
    report.record(check, checked, total)


def _unequal(lhs: Vector, rhs: Vector) -> dict | None:
    if linalg.vectors_equal(lhs, rhs):
        return None
    return {"lhs": lhs, "rhs": rhs}


def _arities(P: TruncatedProp, settings: Settings) -> list[int]:
    start = 0 if settings.include_empty_units else 1
    return list(range(start, P.bound + 1))


def check_prop_axioms(P: TruncatedProp, settings: Settings | None = None) -> CheckReport:
    """
    Verify the prop relations on basis tuples within the bound.

    Compositions that would leave the bound are skipped and counted.
    """
    settings = settings or Settings()
    report = CheckReport(f"prop_axioms:{P.name}")
    ar = _arities(P, settings)

    def units_and_differentials(n: int) -> CheckReport:
        r = CheckReport("units")
        u = P.unit(n)
        C = P.component(n, n)
        if P.d(n, n, u):
            r.violate("unit_cycle", (n, n), unit=u)
        if any(C.degree(x) != 0 for x in u):
            r.violate("unit_degree", (n, n), unit=u)
        for m in ar:
            if not P.in_bound(m, n):
                continue
            for a in _labels(P, m, n):
                w = _unequal(P.vertical(u, _e(a), m, n, n), _e(a))
                if w:
                    r.violate("left_unit", (m, n), basis=[a], **w)
                w = _unequal(P.vertical(_e(a), P.unit(m), m, m, n), _e(a))
                if w:
                    r.violate("right_unit", (m, n), basis=[a], **w)
            r.record("unit_laws", len(_labels(P, m, n)), len(_labels(P, m, n)))
        for k in ar:
            if P.in_bound(n + k, n + k):
                w = _unequal(P.horizontal(u, (n, n), P.unit(k), (k, k)), P.unit(n + k))
                if w:
                    r.violate("unit_compatibility", (n, k), **w)
        return r

    def vertical_checks(combo) -> CheckReport:
        m, k, l, n = combo
        r = CheckReport("vertical")
        A, B, C = _labels(P, l, n), _labels(P, k, l), _labels(P, m, k)

        def assoc(a, b, c):
            lhs = P.vertical(P.vertical(_e(a), _e(b), k, l, n), _e(c), m, k, n)
            rhs = P.vertical(_e(a), P.vertical(_e(b), _e(c), m, k, l), m, l, n)
            return _unequal(lhs, rhs)

        _record_tuples(r, "vertical_associativity", (m, k, l, n), [A, B, C], settings, assoc)
        return r

    def vertical_pairs(combo) -> CheckReport:
        m, k, n = combo
        r = CheckReport("vertical_pairs")
        A, B = _labels(P, k, n), _labels(P, m, k)
        Ck = P.component(k, n)

        def leibniz(a, b):
            lhs = P.d(m, n, P.vertical(_e(a), _e(b), m, k, n))
            rhs = P.vertical(P.d(k, n, _e(a)), _e(b), m, k, n)
            linalg.add_into(rhs, P.vertical(_e(a), P.d(m, k, _e(b)), m, k, n), _sign(Ck.degree(a)))
            return _unequal(lhs, rhs)

        def equivariance(a, b):
            for i in range(1, n):
                t = transposition(n, i)
                w = _unequal(
                    P.vertical(P.act_left(k, n, t, _e(a)), _e(b), m, k, n),
                    P.act_left(m, n, t, P.vertical(_e(a), _e(b), m, k, n)),
                )
                if w:
                    return {"side": "left", "generator": f"s{i}", **w}
            for i in range(1, m):
                s = transposition(m, i)
                w = _unequal(
                    P.vertical(_e(a), P.act_right(m, k, _e(b), s), m, k, n),
                    P.act_right(m, n, P.vertical(_e(a), _e(b), m, k, n), s),
                )
                if w:
                    return {"side": "right", "generator": f"s{i}", **w}
            for i in range(1, k):
                s = transposition(k, i)
                w = _unequal(
                    P.vertical(P.act_right(k, n, _e(a), s), _e(b), m, k, n),
                    P.vertical(_e(a), P.act_left(m, k, s, _e(b)), m, k, n),
                )
                if w:
                    return {"side": "middle", "generator": f"s{i}", **w}
            return None

        _record_tuples(r, "vertical_leibniz", (m, k, n), [A, B], settings, leibniz)
        _record_tuples(r, "vertical_equivariance", (m, k, n), [A, B], settings, equivariance)
        return r

    def horizontal_pairs(combo) -> CheckReport:
        (m1, n1), (m2, n2) = combo
        r = CheckReport("horizontal_pairs")
        a_b, b_b = (m1, n1), (m2, n2)
        A, B = _labels(P, m1, n1), _labels(P, m2, n2)
        Ca = P.component(m1, n1)
        M, N = m1 + m2, n1 + n2

        def leibniz(a, b):
            lhs = P.d(M, N, P.horizontal(_e(a), a_b, _e(b), b_b))
            rhs = P.horizontal(P.d(m1, n1, _e(a)), a_b, _e(b), b_b)
            linalg.add_into(rhs, P.horizontal(_e(a), a_b, P.d(m2, n2, _e(b)), b_b), _sign(Ca.degree(a)))
            return _unequal(lhs, rhs)

        def equivariance(a, b):
            prod = P.horizontal(_e(a), a_b, _e(b), b_b)
            for i in range(1, n1):
                t = transposition(n1, i)
                w = _unequal(
                    P.horizontal(P.act_left(m1, n1, t, _e(a)), a_b, _e(b), b_b),
                    P.act_left(M, N, block_sum(t, identity_perm(n2)), prod),
                )
                if w:
                    return {"side": "left", "factor": 0, "generator": f"s{i}", **w}
            for i in range(1, n2):
                t = transposition(n2, i)
                w = _unequal(
                    P.horizontal(_e(a), a_b, P.act_left(m2, n2, t, _e(b)), b_b),
                    P.act_left(M, N, block_sum(identity_perm(n1), t), prod),
                )
                if w:
                    return {"side": "left", "factor": 1, "generator": f"s{i}", **w}
            for i in range(1, m1):
                s = transposition(m1, i)
                w = _unequal(
                    P.horizontal(P.act_right(m1, n1, _e(a), s), a_b, _e(b), b_b),
                    P.act_right(M, N, prod, block_sum(s, identity_perm(m2))),
                )
                if w:
                    return {"side": "right", "factor": 0, "generator": f"s{i}", **w}
            for i in range(1, m2):
                s = transposition(m2, i)
                w = _unequal(
                    P.horizontal(_e(a), a_b, P.act_right(m2, n2, _e(b), s), b_b),
                    P.act_right(M, N, prod, block_sum(identity_perm(m1), s)),
                )
                if w:
                    return {"side": "right", "factor": 1, "generator": f"s{i}", **w}
            return None

        _record_tuples(r, "horizontal_leibniz", (m1, n1, m2, n2), [A, B], settings, leibniz)
        _record_tuples(r, "horizontal_equivariance", (m1, n1, m2, n2), [A, B], settings, equivariance)
        return r

    def horizontal_triples(combo) -> CheckReport:
        a_b, b_b, c_b = combo
        r = CheckReport("horizontal_triples")
        ab = (a_b[0] + b_b[0], a_b[1] + b_b[1])
        bc = (b_b[0] + c_b[0], b_b[1] + c_b[1])

        def assoc(a, b, c):
            lhs = P.horizontal(P.horizontal(_e(a), a_b, _e(b), b_b), ab, _e(c), c_b)
            rhs = P.horizontal(_e(a), a_b, P.horizontal(_e(b), b_b, _e(c), c_b), bc)
            return _unequal(lhs, rhs)

        lists = [_labels(P, *a_b), _labels(P, *b_b), _labels(P, *c_b)]
        _record_tuples(r, "horizontal_associativity", (*a_b, *b_b, *c_b), lists, settings, assoc)
        return r

    def interchange(combo) -> CheckReport:
        k1, n1, k2, n2, m1, m2 = combo
        r = CheckReport("interchange")
        Cb, Cc = P.component(k2, n2), P.component(m1, k1)

        def law(a, b, c, d):
            top = P.horizontal(_e(a), (k1, n1), _e(b), (k2, n2))
            bottom = P.horizontal(_e(c), (m1, k1), _e(d), (m2, k2))
            lhs = P.vertical(top, bottom, m1 + m2, k1 + k2, n1 + n2)
            left = P.vertical(_e(a), _e(c), m1, k1, n1)
            right = P.vertical(_e(b), _e(d), m2, k2, n2)
            rhs = linalg.scaled(P.horizontal(left, (m1, n1), right, (m2, n2)), _sign(Cb.degree(b) * Cc.degree(c)))
            return _unequal(lhs, rhs)

        lists = [_labels(P, k1, n1), _labels(P, k2, n2), _labels(P, m1, k1), _labels(P, m2, k2)]
        _record_tuples(r, "interchange", combo, lists, settings, law)
        return r

    for sub in _parallel(settings, ar, units_and_differentials):
        report.merge(sub)

    fits = P.in_bound
    vertical_combos = list(itertools.product(ar, repeat=4))
    for sub in _parallel(settings, vertical_combos, vertical_checks):
        report.merge(sub)
    for sub in _parallel(settings, list(itertools.product(ar, repeat=3)), vertical_pairs):
        report.merge(sub)

    pairs, skipped = [], 0
    for a_b, b_b in itertools.product(itertools.product(ar, repeat=2), repeat=2):
        if fits(a_b[0] + b_b[0], a_b[1] + b_b[1]):
            pairs.append((a_b, b_b))
        else:
            skipped += 1
    if skipped:
        report.skip("horizontal_pairs", "truncation", combinations=skipped)
    for sub in _parallel(settings, pairs, horizontal_pairs):
        report.merge(sub)

    triples, skipped = [], 0
    for a_b, b_b, c_b in itertools.product(itertools.product(ar, repeat=2), repeat=3):
        if fits(a_b[0] + b_b[0] + c_b[0], a_b[1] + b_b[1] + c_b[1]):
            triples.append((a_b, b_b, c_b))
        else:
            skipped += 1
    if skipped:
        report.skip("horizontal_associativity", "truncation", combinations=skipped)
    for sub in _parallel(settings, triples, horizontal_triples):
        report.merge(sub)

    combos, skipped = [], 0
    for combo in itertools.product(ar, repeat=6):
        k1, n1, k2, n2, m1, m2 = combo
        if fits(m1 + m2, k1 + k2) and fits(k1 + k2, n1 + n2) and fits(m1 + m2, n1 + n2):
            combos.append(combo)
        else:
            skipped += 1
    if skipped:
        report.skip("interchange", "truncation", combinations=skipped)
    for sub in _parallel(settings, combos, interchange):
        report.merge(sub)

    log.info("%s: %d violations", report.name, len(report.violations))
    return report


def check_prop_morphism(f: PropMorphism, settings: Settings | None = None) -> CheckReport:
    """Preservation of differentials, units, both compositions and both actions."""
    settings = settings or Settings()
    report = CheckReport(f"prop_morphism:{f.name}")
    S, T = f.source, f.target
    ar = _arities(S, settings)
    bound = min(S.bound, T.bound)
    ar = [a for a in ar if a <= bound]

    def per_component(biarity) -> CheckReport:
        m, n = biarity
        r = CheckReport("component")
        C = S.component(m, n)
        T.component(m, n)
        for x in C.all_labels():
            image = f.image(m, n, x)
            tgt = T.component(m, n)
            if any(t not in tgt for t in image):
                r.violate("chain_map", (m, n), basis=[x], reason="image outside the target component")
                continue
            if any(tgt.degree(t) != C.degree(x) for t in image):
                r.violate("chain_map", (m, n), basis=[x], reason="degree not preserved", image=image)
                continue
            w = _unequal(T.d(m, n, image), f(m, n, S.d(m, n, _e(x))))
            if w:
                r.violate("chain_map", (m, n), basis=[x], **w)
            for i in range(1, n):
                t = transposition(n, i)
                w = _unequal(f(m, n, S.act_left(m, n, t, _e(x))), T.act_left(m, n, t, image))
                if w:
                    r.violate("left_action", (m, n), basis=[x], generator=f"s{i}", **w)
            for i in range(1, m):
                s = transposition(m, i)
                w = _unequal(f(m, n, S.act_right(m, n, _e(x), s)), T.act_right(m, n, image, s))
                if w:
                    r.violate("right_action", (m, n), basis=[x], generator=f"s{i}", **w)
        r.record("chain_map", C.dim, C.dim)
        if m == n:
            w = _unequal(f(n, n, S.unit(n)), T.unit(n))
            if w:
                r.violate("unit", (n, n), **w)
        return r

    def vertical(combo) -> CheckReport:
        m, k, n = combo
        r = CheckReport("vertical")

        def law(a, b):
            lhs = f(m, n, S.vertical(_e(a), _e(b), m, k, n))
            rhs = T.vertical(f.image(k, n, a), f.image(m, k, b), m, k, n)
            return _unequal(lhs, rhs)

        _record_tuples(r, "vertical", combo, [_labels(S, k, n), _labels(S, m, k)], settings, law)
        return r

    def horizontal(combo) -> CheckReport:
        a_b, b_b = combo
        r = CheckReport("horizontal")
        M, N = a_b[0] + b_b[0], a_b[1] + b_b[1]

        def law(a, b):
            lhs = f(M, N, S.horizontal(_e(a), a_b, _e(b), b_b))
            rhs = T.horizontal(f.image(*a_b, a), a_b, f.image(*b_b, b), b_b)
            return _unequal(lhs, rhs)

        _record_tuples(r, "horizontal", (*a_b, *b_b), [_labels(S, *a_b), _labels(S, *b_b)], settings, law)
        return r

    comps = [(m, n) for m in ar for n in ar]
    for sub in _parallel(settings, comps, per_component):
        report.merge(sub)
    for sub in _parallel(settings, list(itertools.product(ar, repeat=3)), vertical):
        report.merge(sub)
    pairs, skipped = [], 0
    for a_b, b_b in itertools.product(itertools.product(ar, repeat=2), repeat=2):
        if a_b[0] + b_b[0] <= bound and a_b[1] + b_b[1] <= bound:
            pairs.append((a_b, b_b))
        else:
            skipped += 1
    if skipped:
        report.skip("horizontal", "truncation", combinations=skipped)
    for sub in _parallel(settings, pairs, horizontal):
        report.merge(sub)
    log.info("%s: %d violations", report.name, len(report.violations))
    return report


@dataclass
class PAlgebra:
    carrier: ChainComplex
    action: PropMorphism


def check_algebra(P: TruncatedProp, X: ChainComplex, action: PropMorphism, settings: Settings | None = None) -> CheckReport:
    if action.source is not P:
        raise ShapeMismatch("action is not defined on the given prop")
    if not isinstance(action.target, EndomorphismProp) or action.target.X is not X:
        raise ShapeMismatch("action does not land in the endomorphism prop of the carrier")
    report = check_prop_morphism(action, settings)
    report.name = f"algebra:{P.name}"
    return report


def check_algebra_morphism(
    action_X: PropMorphism, action_Y: PropMorphism, f: ChainMap, settings: Settings | None = None
) -> CheckReport:
    """f^{⊗n}∘A_X(x) = A_Y(x)∘f^{⊗m} for every operation x."""
    settings = settings or Settings()
    report = CheckReport("algebra_morphism")
    P = action_X.source
    if action_Y.source is not P:
        raise ShapeMismatch("the two actions are defined on different props")
    bound = min(action_X.target.bound, action_Y.target.bound, P.bound)
    for m, n in itertools.product(range(bound + 1), repeat=2):
        labels = P.component(m, n).all_labels()
        if not labels:
            continue
        post = postcompose(tensor_power(f.source, m).complex, tensor_power_map(f, n))
        pre = precompose(tensor_power_map(f, m), tensor_power(f.target, n).complex)
        for x in labels:
            if not linalg.vectors_equal(post(action_X.image(m, n, x)), pre(action_Y.image(m, n, x))):
                report.violate("commutes", (m, n), basis=[x])
        report.record("commutes", len(labels), len(labels))
    return report


# -- diagrams ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Arrow:
    name: str
    source: str
    target: str
    map: ChainMap


@dataclass(frozen=True, eq=False)
class DiagramShape:
    objects: tuple[tuple[str, ChainComplex], ...]
    arrows: tuple[Arrow, ...]

    def obj(self, name: str) -> ChainComplex:
        return dict(self.objects)[name]

    def names(self) -> list[str]:
        return [name for name, _ in self.objects]


def make_diagram(objects: Sequence[tuple[str, ChainComplex]], arrows: Sequence[Arrow]) -> DiagramShape:
    names = {name for name, _ in objects}
    if len(names) != len(objects):
        raise ShapeMismatch("diagram object names must be unique")
    lookup = dict(objects)
    for u in arrows:
        if u.source not in names or u.target not in names:
            raise ShapeMismatch(f"arrow {u.name} refers to an unknown object")
        if u.map.source is not lookup[u.source] or u.map.target is not lookup[u.target]:
            raise ShapeMismatch(f"arrow {u.name} does not match its endpoints")
        check_chain_map(u.map)
    return DiagramShape(tuple(objects), tuple(arrows))


def sub_diagram(D: DiagramShape, names: Sequence[str]) -> DiagramShape:
    keep = set(names)
    objects = [(name, X) for name, X in D.objects if name in keep]
    arrows = [u for u in D.arrows if u.source in keep and u.target in keep]
    return DiagramShape(tuple(objects), tuple(arrows))


class DiagramEndomorphismProp(SubProp):
    """
    End_D(m,n): families φ(i) ∈ End_{X_i}(m,n) with u^{⊗n}∘φ(i) = φ(j)∘u^{⊗m}
    for every arrow u: i -> j, as the equalizer of post- and precomposition.
    """

    def __init__(self, D: DiagramShape, bound: int, name: str = "End_D"):
        self.diagram = D
        self.ends = {obj: EndomorphismProp(X, bound, f"End_{obj}") for obj, X in D.objects}
        ambient = ProductProp([(obj, self.ends[obj]) for obj in D.names()], name=f"∏{name}")
        self._cofaces: dict[Biarity, tuple[ChainMap, ChainMap, ChainComplex]] = {}
        super().__init__(ambient, self._build_carrier, name)

    def cofaces(self, m: int, n: int) -> tuple[ChainMap, ChainMap, ChainComplex]:
        """(d0, d1, target): the coreflexive pair on the product component."""
        cached = self._cofaces.get((m, n))
        if cached is not None:
            return cached
        D = self.diagram
        source = self.ambient.component(m, n)
        parts: list[tuple[str, ChainComplex]] = []
        d0: dict[str, Vector] = {}
        d1: dict[str, Vector] = {}
        for obj, X in D.objects:
            hom = self.ends[obj].component(m, n)
            tag = f"id:{obj}"
            parts.append((tag, hom))
            for h in hom.all_labels():
                d0[sum_label(obj, h)] = {sum_label(tag, h): ONE}
                d1[sum_label(obj, h)] = {sum_label(tag, h): ONE}
        for u in D.arrows:
            Xi, Xj = D.obj(u.source), D.obj(u.target)
            Ai, Bj = tensor_power(Xi, m).complex, tensor_power(Xj, n).complex
            post = postcompose(Ai, tensor_power_map(u.map, n))
            pre = precompose(tensor_power_map(u.map, m), Bj)
            tag = f"arrow:{u.name}"
            parts.append((tag, hom_complex(Ai, Bj)))
            for h, image in post.columns.items():
                linalg.add_into(d0.setdefault(sum_label(u.source, h), {}), {sum_label(tag, t): c for t, c in image.items()})
            for h, image in pre.columns.items():
                linalg.add_into(d1.setdefault(sum_label(u.target, h), {}), {sum_label(tag, t): c for t, c in image.items()})
        target = direct_sum(parts)
        result = (ChainMap(source, target, d0), ChainMap(source, target, d1), target)
        self._cofaces[(m, n)] = result
        return result

    def coreflexive_section(self, m: int, n: int) -> ChainMap:
        """s0: projection of the coface target onto the identity-arrow components."""
        _, _, target = self.cofaces(m, n)
        source = self.ambient.component(m, n)
        columns = {}
        for obj, _X in self.diagram.objects:
            for h in self.ends[obj].component(m, n).all_labels():
                columns[sum_label(f"id:{obj}", h)] = {sum_label(obj, h): ONE}
        return ChainMap(target, source, columns)

    def _build_carrier(self, m: int, n: int) -> Subcomplex:
        d0, d1, _ = self.cofaces(m, n)
        eq = equalizer(d0, d1)
        log.debug("%s(%d,%d): equalizer of dim %d", self.name, m, n, eq.complex.dim)
        return eq.carrier

    def family(self, m: int, n: int, v: Mapping[str, Fraction]) -> dict[str, Vector]:
        """An element as the family object -> End element."""
        ambient = self.embed(m, n, v)
        return {obj: self.ambient.project(m, n, ambient, obj) for obj in self.diagram.names()}

    def from_family(self, m: int, n: int, family: Mapping[str, Mapping[str, Fraction]]) -> Vector:
        return self.restrict(m, n, self.ambient.combine(family), "family")

    def commuting_square_defects(self, m: int, n: int, family: Mapping[str, Mapping[str, Fraction]]) -> list[str]:
        """Arrows whose square fails for the family, by direct matrix composition."""
        bad = []
        D = self.diagram
        for u in D.arrows:
            post = postcompose(tensor_power(D.obj(u.source), m).complex, tensor_power_map(u.map, n))
            pre = precompose(tensor_power_map(u.map, m), tensor_power(D.obj(u.target), n).complex)
            lhs = post(family.get(u.source, {}))
            rhs = pre(family.get(u.target, {}))
            if not linalg.vectors_equal(lhs, rhs):
                bad.append(u.name)
        return bad


def diagram_endomorphism_prop(D: DiagramShape, bound: int, name: str = "End_D") -> DiagramEndomorphismProp:
    return DiagramEndomorphismProp(D, bound, name)


def restriction_morphism(
    source: DiagramEndomorphismProp, target: DiagramEndomorphismProp, mapping: Mapping[str, str] | None = None
) -> PropMorphism:
    """
    The map induced by an inclusion of diagrams: keep the components of the
    target's objects. `mapping` sends target object names to source object names.
    """
    mapping = dict(mapping or {obj: obj for obj in target.diagram.names()})

    def on_basis(m, n, x):
        family = source.family(m, n, {x: ONE})
        return target.from_family(m, n, {obj: family[mapping[obj]] for obj in target.diagram.names()})

    return PropMorphism(source, target, on_basis, name=f"{source.name}->{target.name}")


def end_isomorphism(D_prop: DiagramEndomorphismProp, obj: str) -> PropMorphism:
    """Projection End_D -> End_{X_obj}; an isomorphism when obj determines the family."""
    return PropMorphism(D_prop, D_prop.ends[obj], lambda m, n, x: D_prop.family(m, n, {x: ONE})[obj], name=f"pr_{obj}")
