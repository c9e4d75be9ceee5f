"""
Finite-dimensional chain complexes over ℚ.

Complexes carry a named basis per degree and a homological differential of
degree -1, stored sparsely as label -> d(label). Tensor products use the
Koszul rule d(a⊗b) = da⊗b + (-1)^{|a|} a⊗db, duals use
d(f) = -(-1)^{|f|} f∘d, and Hom(A,B) uses d(f) = d∘f - (-1)^{|f|} f∘d on the
elementary maps E_{b,a}: a ↦ b, labelled like the tensor a*⋆b.
"""

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from propcalc import linalg
from propcalc.errors import ClosureViolation, NotAChainMap, NotInSubspace, ShapeMismatch, SquareZeroViolation
from propcalc.linalg import Vector
from propcalc.utils import UNIT_LABEL, check_label, dual_label, sum_label, tensor_label

log = logging.getLogger(__name__)

GradedDims = dict[int, int]


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


@dataclass(frozen=True, eq=False)
class ChainComplex:
    basis: Mapping[int, tuple[str, ...]]
    differential: Mapping[str, Vector]
    degree_of: Mapping[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        degree_of: dict[str, int] = {}
        for n, labels in self.basis.items():
            for label in labels:
                degree_of[label] = n
        object.__setattr__(self, "degree_of", degree_of)

    @property
    def degrees(self) -> list[int]:
        """Degrees with a nonzero basis, highest first."""
        return sorted((n for n, labels in self.basis.items() if labels), reverse=True)

    def labels(self, n: int) -> tuple[str, ...]:
        return self.basis.get(n, ())

    def all_labels(self) -> list[str]:
        return [label for n in self.degrees for label in self.basis[n]]

    def degree(self, label: str) -> int:
        return self.degree_of[label]

    def dims(self) -> GradedDims:
        return {n: len(self.basis[n]) for n in self.degrees}

    @property
    def dim(self) -> int:
        return len(self.degree_of)

    def __contains__(self, label: str) -> bool:
        return label in self.degree_of

    def d(self, v: Mapping[str, Fraction]) -> Vector:
        return linalg.apply(self.differential, v)

    def d_block(self, n: int) -> dict[str, Vector]:
        """Columns of d restricted to degree n."""
        return {label: dict(self.differential.get(label, {})) for label in self.labels(n)}


@dataclass(frozen=True, eq=False)
class ChainMap:
    source: ChainComplex
    target: ChainComplex
    columns: Mapping[str, Vector]

    def __call__(self, v: Mapping[str, Fraction]) -> Vector:
        return linalg.apply(self.columns, v)

    def image(self, label: str) -> Vector:
        return dict(self.columns.get(label, {}))

    def block(self, n: int) -> dict[str, Vector]:
        return {label: dict(self.columns.get(label, {})) for label in self.source.labels(n)}

    def matrix(self, n: int) -> np.ndarray:
        return linalg.to_dense(self.columns, self.target.labels(n), self.source.labels(n))


def make_complex(
    basis: Mapping[int, Sequence[str]],
    differential: Mapping[str, Mapping[str, object]] | None = None,
    check_labels: bool = False,
) -> ChainComplex:
    """
    Build and validate a complex.

    Raises ShapeMismatch for unknown labels or entries of the wrong degree and
    SquareZeroViolation if d∘d is nonzero.
    """
    clean_basis: dict[int, tuple[str, ...]] = {}
    seen: set[str] = set()
    for n, labels in basis.items():
        labels = tuple(labels)
        for label in labels:
            if check_labels:
                check_label(label)
            if label in seen:
                raise ShapeMismatch(f"basis label {label!r} appears twice")
            seen.add(label)
        if labels:
            clean_basis[int(n)] = labels
    degree_of = {label: n for n, labels in clean_basis.items() for label in labels}
    clean_d: dict[str, Vector] = {}
    for src, image in (differential or {}).items():
        if src not in degree_of:
            raise ShapeMismatch(f"differential given on unknown label {src!r}")
        v = linalg.vector(image)
        for tgt in v:
            if tgt not in degree_of:
                raise ShapeMismatch(f"d({src}) has unknown label {tgt!r}")
            if degree_of[tgt] != degree_of[src] - 1:
                raise ShapeMismatch(
                    f"d({src}) has a term {tgt!r} in degree {degree_of[tgt]}, expected {degree_of[src] - 1}"
                )
        if v:
            clean_d[src] = v
    complex_ = ChainComplex(clean_basis, clean_d)
    check_square_zero(complex_)
    return complex_


def check_square_zero(A: ChainComplex) -> None:
    for label, image in A.differential.items():
        dd = A.d(image)
        if dd:
            raise SquareZeroViolation(A.degree(label), {"label": label, "dd": dd})


def zero_complex() -> ChainComplex:
    return ChainComplex({}, {})


def unit_complex(label: str = UNIT_LABEL, degree: int = 0) -> ChainComplex:
    return ChainComplex({degree: (label,)}, {})


def make_chain_map(
    source: ChainComplex, target: ChainComplex, columns: Mapping[str, Mapping[str, object]], check: bool = True
) -> ChainMap:
    clean: dict[str, Vector] = {}
    for src, image in columns.items():
        if src not in source:
            raise ShapeMismatch(f"map given on unknown label {src!r}")
        v = linalg.vector(image)
        if v:
            clean[src] = v
    f = ChainMap(source, target, clean)
    if check:
        check_chain_map(f)
    return f


def check_chain_map(f: ChainMap) -> None:
    """Raise unless f is a degree-0 map commuting with the differentials."""
    for src, image in f.columns.items():
        n = f.source.degree(src)
        for tgt in image:
            if tgt not in f.target:
                raise ShapeMismatch(f"image of {src!r} has unknown label {tgt!r}")
            if f.target.degree(tgt) != n:
                raise ShapeMismatch(f"image of {src!r} leaves degree {n}")
    for src in f.source.all_labels():
        lhs = f.target.d(f.columns.get(src, {}))
        rhs = f(f.source.differential.get(src, {}))
        if not linalg.vectors_equal(lhs, rhs):
            raise NotAChainMap(src)


def chain_map_defects(f: ChainMap) -> list[str]:
    """Labels on which d∘f and f∘d disagree."""
    bad = []
    for src in f.source.all_labels():
        lhs = f.target.d(f.columns.get(src, {}))
        rhs = f(f.source.differential.get(src, {}))
        if not linalg.vectors_equal(lhs, rhs):
            bad.append(src)
    return bad


def identity_map(A: ChainComplex) -> ChainMap:
    return ChainMap(A, A, {label: {label: Fraction(1)} for label in A.all_labels()})


def compose_maps(g: ChainMap, f: ChainMap) -> ChainMap:
    """g∘f."""
    return ChainMap(f.source, g.target, {src: v for src, v in linalg.compose(g.columns, f.columns).items() if v})


def add_maps(f: ChainMap, g: ChainMap, scale: int | Fraction = 1) -> ChainMap:
    """f + scale·g."""
    columns: dict[str, Vector] = {}
    for src in f.source.all_labels():
        v = linalg.add_into(dict(f.columns.get(src, {})), g.columns.get(src, {}), scale)
        if v:
            columns[src] = v
    return ChainMap(f.source, f.target, columns)


def direct_sum(parts: Sequence[tuple[str, ChainComplex]]) -> ChainComplex:
    basis: dict[int, list[str]] = {}
    differential: dict[str, Vector] = {}
    for tag, part in parts:
        for n in part.degrees:
            basis.setdefault(n, []).extend(sum_label(tag, label) for label in part.labels(n))
        for src, image in part.differential.items():
            differential[sum_label(tag, src)] = {sum_label(tag, t): c for t, c in image.items()}
    return ChainComplex({n: tuple(labels) for n, labels in basis.items()}, differential)


def summand_projection(total: ChainComplex, tag: str, part: ChainComplex) -> ChainMap:
    return ChainMap(total, part, {sum_label(tag, label): {label: Fraction(1)} for label in part.all_labels()})


def map_into_sum(total: ChainComplex, parts: Sequence[tuple[str, ChainMap]]) -> ChainMap:
    """The map W -> ⊕ with the given components."""
    source = parts[0][1].source
    columns: dict[str, Vector] = {}
    for tag, f in parts:
        for src, image in f.columns.items():
            col = columns.setdefault(src, {})
            for t, c in image.items():
                col[sum_label(tag, t)] = c
    return ChainMap(source, total, columns)


def tensor_pairs(A: ChainComplex, B: ChainComplex) -> dict[str, tuple[str, str]]:
    """Label of A⊗B -> (a, b), in the basis order of tensor(A, B)."""
    pairs: dict[str, tuple[str, str]] = {}
    for p in A.degrees:
        for q in B.degrees:
            for a in A.labels(p):
                for b in B.labels(q):
                    pairs[tensor_label(a, b)] = (a, b)
    return pairs


def tensor(A: ChainComplex, B: ChainComplex) -> ChainComplex:
    basis: dict[int, list[str]] = {}
    for p in A.degrees:
        for q in B.degrees:
            target = basis.setdefault(p + q, [])
            for a in A.labels(p):
                for b in B.labels(q):
                    target.append(tensor_label(a, b))
    differential: dict[str, Vector] = {}
    for a in A.all_labels():
        sign = _sign(A.degree(a))
        da = A.differential.get(a, {})
        for b in B.all_labels():
            image: Vector = {}
            for a2, c in da.items():
                image[tensor_label(a2, b)] = c
            for b2, c in B.differential.get(b, {}).items():
                linalg.add_into(image, {tensor_label(a, b2): c}, sign)
            if image:
                differential[tensor_label(a, b)] = image
    return ChainComplex({n: tuple(labels) for n, labels in basis.items()}, differential)


def tensor_maps(f: ChainMap, g: ChainMap) -> ChainMap:
    """f⊗g for degree-0 chain maps; no Koszul sign arises."""
    source = tensor(f.source, g.source)
    target = tensor(f.target, g.target)
    columns: dict[str, Vector] = {}
    for label, (a, b) in tensor_pairs(f.source, g.source).items():
        fa = f.columns.get(a, {})
        gb = g.columns.get(b, {})
        image = {tensor_label(x, y): cx * cy for x, cx in fa.items() for y, cy in gb.items()}
        if image:
            columns[label] = image
    return ChainMap(source, target, columns)


def dual(A: ChainComplex) -> ChainComplex:
    basis = {-n: tuple(dual_label(a) for a in A.labels(n)) for n in A.degrees}
    differential: dict[str, Vector] = {}
    # d(a0*) = -(-1)^{|a0*|} Σ_a [coefficient of a0 in d(a)] a*
    for a, image in A.differential.items():
        for a0, c in image.items():
            sign = -_sign(-A.degree(a0))
            linalg.add_into(differential.setdefault(dual_label(a0), {}), {dual_label(a): c}, sign)
    return ChainComplex(basis, {k: v for k, v in differential.items() if v})


def double_dual_identity(A: ChainComplex) -> ChainMap:
    """A -> dual(dual(A)), a ↦ (-1)^{|a|} a**."""
    AA = dual(dual(A))
    return ChainMap(A, AA, {a: {dual_label(dual_label(a)): Fraction(_sign(A.degree(a)))} for a in A.all_labels()})


def evaluation_pairing(A: ChainComplex) -> ChainMap:
    """dual(A)⊗A -> ℚ, f⊗a ↦ f(a)."""
    source = tensor(dual(A), A)
    unit = unit_complex()
    columns = {tensor_label(dual_label(a), a): {UNIT_LABEL: Fraction(1)} for a in A.all_labels()}
    return ChainMap(source, unit, columns)


def hom_pairs(A: ChainComplex, B: ChainComplex) -> dict[str, tuple[str, str]]:
    """Label of Hom(A,B) -> (a, b) for the elementary map a ↦ b."""
    pairs: dict[str, tuple[str, str]] = {}
    for k in A.degrees:
        for a in A.labels(k):
            for b in B.all_labels():
                pairs[tensor_label(dual_label(a), b)] = (a, b)
    return pairs


def hom_complex(A: ChainComplex, B: ChainComplex) -> ChainComplex:
    basis: dict[int, list[str]] = {}
    for b_deg in B.degrees:
        for a_deg in A.degrees:
            target = basis.setdefault(b_deg - a_deg, [])
            for a in A.labels(a_deg):
                for b in B.labels(b_deg):
                    target.append(tensor_label(dual_label(a), b))
    # columns of d_A by target: a -> {a'': coefficient of a in d(a'')}
    into: dict[str, Vector] = {}
    for a2, image in A.differential.items():
        for a, c in image.items():
            into.setdefault(a, {})[a2] = c
    differential: dict[str, Vector] = {}
    for a in A.all_labels():
        for b in B.all_labels():
            degree = B.degree(b) - A.degree(a)
            image: Vector = {}
            for b2, c in B.differential.get(b, {}).items():
                image[tensor_label(dual_label(a), b2)] = c
            sign = -_sign(degree)
            for a2, c in into.get(a, {}).items():
                linalg.add_into(image, {tensor_label(dual_label(a2), b): c}, sign)
            if image:
                differential[tensor_label(dual_label(a), b)] = image
    return ChainComplex({n: tuple(labels) for n, labels in basis.items()}, differential)


def dual_tensor_to_hom(A: ChainComplex, B: ChainComplex) -> ChainMap:
    """The natural isomorphism dual(A)⊗B -> Hom(A,B), a*⊗b ↦ (-1)^{|a||b|} E_{b,a}."""
    source = tensor(dual(A), B)
    target = hom_complex(A, B)
    columns = {}
    for label, (a, b) in hom_pairs(A, B).items():
        columns[label] = {label: Fraction(_sign(A.degree(a) * B.degree(b)))}
    return ChainMap(source, target, columns)


def precompose(h: ChainMap, B: ChainComplex) -> ChainMap:
    """h*: Hom(A,B) -> Hom(A',B), φ ↦ φ∘h, for h: A' -> A of degree 0."""
    A2, A = h.source, h.target
    into: dict[str, Vector] = {}
    for a2, image in h.columns.items():
        for a, c in image.items():
            into.setdefault(a, {})[a2] = c
    columns: dict[str, Vector] = {}
    for label, (a, b) in hom_pairs(A, B).items():
        image = {tensor_label(dual_label(a2), b): c for a2, c in into.get(a, {}).items()}
        if image:
            columns[label] = image
    return ChainMap(hom_complex(A, B), hom_complex(A2, B), columns)


def postcompose(A: ChainComplex, k: ChainMap) -> ChainMap:
    """k_*: Hom(A,B) -> Hom(A,B'), φ ↦ k∘φ, for k: B -> B' of degree 0."""
    B, B2 = k.source, k.target
    columns: dict[str, Vector] = {}
    for label, (a, b) in hom_pairs(A, B).items():
        image = {tensor_label(dual_label(a), b2): c for b2, c in k.columns.get(b, {}).items()}
        if image:
            columns[label] = image
    return ChainMap(hom_complex(A, B), hom_complex(A, B2), columns)


# -- homology ----------------------------------------------------------------


def _rank_of_d(A: ChainComplex, n: int) -> int:
    if not A.labels(n) or not A.labels(n - 1):
        return 0
    return linalg.rank(A.d_block(n), A.labels(n))


def homology(A: ChainComplex) -> GradedDims:
    """Nonzero homology dimensions: dim ker d_n - rank d_{n+1}."""
    ranks = {n: _rank_of_d(A, n) for n in A.degrees}
    out: GradedDims = {}
    for n in A.degrees:
        h = len(A.labels(n)) - ranks[n] - ranks.get(n + 1, 0)
        if h:
            out[n] = h
    return out


def cycles(A: ChainComplex, n: int) -> list[Vector]:
    return [v for _, v in linalg.kernel(A.d_block(n), A.labels(n))]


def boundaries(A: ChainComplex, n: int) -> list[Vector]:
    return [dict(A.differential[x]) for x in A.labels(n + 1) if x in A.differential]


def homology_basis(A: ChainComplex) -> dict[int, list[Vector]]:
    """Representative cycles whose classes form a basis of H_n, per degree."""
    out: dict[int, list[Vector]] = {}
    for n in A.degrees:
        reducer = linalg.RowReducer({label: i for i, label in enumerate(A.labels(n))})
        for b in boundaries(A, n):
            reducer.add(b)
        reps = []
        for z in cycles(A, n):
            pivot, _, _ = reducer.add(z)
            if pivot is not None:
                reps.append(z)
        if reps:
            out[n] = reps
    return out


@dataclass
class DegreeVerdict:
    degree: int
    source_dim: int
    target_dim: int
    rank: int
    matrix: list[list[Fraction]]

    @property
    def bijective(self) -> bool:
        return self.source_dim == self.target_dim == self.rank


@dataclass
class QuasiIsoReport:
    degrees: list[DegreeVerdict]

    @property
    def quasi_iso(self) -> bool:
        return all(v.bijective for v in self.degrees)

    def homology_source(self) -> GradedDims:
        return {v.degree: v.source_dim for v in self.degrees if v.source_dim}

    def homology_target(self) -> GradedDims:
        return {v.degree: v.target_dim for v in self.degrees if v.target_dim}


def quasi_iso_report(f: ChainMap) -> QuasiIsoReport:
    """Homology bases of both ends and the matrix of the induced map per degree."""
    source_reps = homology_basis(f.source)
    target_reps = homology_basis(f.target)
    verdicts = []
    for n in sorted(set(source_reps) | set(target_reps), reverse=True):
        s_reps = source_reps.get(n, [])
        t_reps = target_reps.get(n, [])
        columns: dict[str, Vector] = {f"h{i}": rep for i, rep in enumerate(t_reps)}
        for j, b in enumerate(boundaries(f.target, n)):
            columns[f"b{j}"] = b
        order = list(columns)
        matrix = [[Fraction(0)] * len(s_reps) for _ in t_reps]
        for j, z in enumerate(s_reps):
            x, _ = linalg.solve(columns, f(z), order)
            if x is None:
                raise NotAChainMap("", "image of a cycle is not a cycle")
            for i in range(len(t_reps)):
                matrix[i][j] = x.get(f"h{i}", Fraction(0))
        induced = {f"s{j}": {f"t{i}": matrix[i][j] for i in range(len(t_reps)) if matrix[i][j]} for j in range(len(s_reps))}
        r = linalg.rank(induced, list(induced)) if s_reps and t_reps else 0
        verdicts.append(DegreeVerdict(n, len(s_reps), len(t_reps), r, matrix))
    return QuasiIsoReport(verdicts)


def is_quasi_iso(f: ChainMap) -> bool:
    return quasi_iso_report(f).quasi_iso


def surjective_degrees(f: ChainMap) -> dict[int, bool]:
    out = {}
    for n in f.target.degrees:
        r = linalg.rank(f.block(n), f.source.labels(n)) if f.source.labels(n) else 0
        out[n] = r == len(f.target.labels(n))
    return out


def injective_degrees(f: ChainMap) -> dict[int, bool]:
    out = {}
    for n in f.source.degrees:
        out[n] = linalg.rank(f.block(n), f.source.labels(n)) == len(f.source.labels(n))
    return out


def is_fibration(f: ChainMap) -> bool:
    return all(surjective_degrees(f).values())


def is_cofibration(f: ChainMap) -> bool:
    return all(injective_degrees(f).values())


def mapping_cone(f: ChainMap) -> ChainComplex:
    """Cone(f)_n = S_{n-1} ⊕ T_n with d(s, t) = (-ds, f(s) + dt)."""
    S, T = f.source, f.target
    basis: dict[int, list[str]] = {}
    for n in S.degrees:
        basis.setdefault(n + 1, []).extend(sum_label("s", x) for x in S.labels(n))
    for n in T.degrees:
        basis.setdefault(n, []).extend(sum_label("t", y) for y in T.labels(n))
    differential: dict[str, Vector] = {}
    for x in S.all_labels():
        image = {sum_label("s", x2): -c for x2, c in S.differential.get(x, {}).items()}
        for y, c in f.columns.get(x, {}).items():
            image[sum_label("t", y)] = c
        if image:
            differential[sum_label("s", x)] = image
    for y, image in T.differential.items():
        differential[sum_label("t", y)] = {sum_label("t", y2): c for y2, c in image.items()}
    return ChainComplex({n: tuple(labels) for n, labels in basis.items()}, differential)


# -- subcomplexes and limits -------------------------------------------------


class Subcomplex:
    """
    A subcomplex given by basis vectors in an ambient complex.

    Each basis vector is labelled by an ambient label where it has
    coefficient 1 and every other basis vector has coefficient 0, so
    coordinates are read off directly.
    """

    def __init__(self, ambient: ChainComplex, basis: Mapping[int, Sequence[str]], vectors: Mapping[str, Vector]):
        self.ambient = ambient
        self.basis = {n: tuple(labels) for n, labels in basis.items() if labels}
        self.vectors = vectors

    def embed(self, v: Mapping[str, Fraction]) -> Vector:
        out: Vector = {}
        for label, c in v.items():
            linalg.add_into(out, self.vectors[label], c)
        return out

    def coordinates(self, w: Mapping[str, Fraction], check: bool = True) -> Vector:
        coords = {label: c for label, c in w.items() if label in self.vectors and c}
        if check and not linalg.vectors_equal(self.embed(coords), w):
            raise NotInSubspace("vector does not lie in the subcomplex")
        return coords

    def contains(self, w: Mapping[str, Fraction]) -> bool:
        try:
            self.coordinates(w)
        except NotInSubspace:
            return False
        return True

    @cached_property
    def complex(self) -> ChainComplex:
        differential: dict[str, Vector] = {}
        for labels in self.basis.values():
            for label in labels:
                image = self.ambient.d(self.vectors[label])
                try:
                    coords = self.coordinates(image)
                except NotInSubspace as e:
                    raise ClosureViolation(f"differential leaves the subcomplex at {label!r}") from e
                if coords:
                    differential[label] = coords
        return ChainComplex(dict(self.basis), differential)

    def inclusion(self) -> ChainMap:
        return ChainMap(self.complex, self.ambient, {label: dict(v) for label, v in self.vectors.items()})


def kernel_subcomplex(ambient: ChainComplex, constraint: Mapping[str, Mapping[str, Fraction]]) -> Subcomplex:
    """Degreewise kernel of a degree-0 chain map given by its columns on `ambient`."""
    basis: dict[int, list[str]] = {}
    vectors: dict[str, Vector] = {}
    for n in ambient.degrees:
        labels = ambient.labels(n)
        block = {label: constraint.get(label, {}) for label in labels}
        for free, v in linalg.kernel(block, labels):
            basis.setdefault(n, []).append(free)
            vectors[free] = v
    log.debug("kernel subcomplex: %d of %d ambient dims", len(vectors), ambient.dim)
    return Subcomplex(ambient, basis, vectors)


@dataclass
class Pullback:
    complex: ChainComplex
    carrier: Subcomplex
    proj_a: ChainMap
    proj_b: ChainMap
    tags: tuple[str, str]


def pullback(f: ChainMap, g: ChainMap, tags: tuple[str, str] = ("A", "B")) -> Pullback:
    """A ×_C B as the kernel of (f, -g): A⊕B -> C."""
    A, B = f.source, g.source
    ambient = direct_sum([(tags[0], A), (tags[1], B)])
    constraint: dict[str, Vector] = {}
    for a, image in f.columns.items():
        constraint[sum_label(tags[0], a)] = image
    for b, image in g.columns.items():
        constraint[sum_label(tags[1], b)] = linalg.scaled(image, -1)
    carrier = kernel_subcomplex(ambient, constraint)
    complex_ = carrier.complex
    proj_a = compose_maps(summand_projection(ambient, tags[0], A), carrier.inclusion())
    proj_b = compose_maps(summand_projection(ambient, tags[1], B), carrier.inclusion())
    return Pullback(complex_, carrier, proj_a, proj_b, tags)


def factor_through_pullback(pb: Pullback, a: ChainMap, b: ChainMap) -> ChainMap:
    """The unique map W -> A ×_C B with the given projections; raises NotInSubspace for a non-commuting cone."""
    ambient = pb.carrier.ambient
    pair = map_into_sum(ambient, [(pb.tags[0], a), (pb.tags[1], b)])
    columns = {src: pb.carrier.coordinates(image) for src, image in pair.columns.items()}
    return ChainMap(a.source, pb.complex, {k: v for k, v in columns.items() if v})


@dataclass
class Equalizer:
    complex: ChainComplex
    carrier: Subcomplex
    inclusion: ChainMap


def equalizer(f: ChainMap, g: ChainMap) -> Equalizer:
    constraint = add_maps(f, g, -1).columns
    carrier = kernel_subcomplex(f.source, constraint)
    return Equalizer(carrier.complex, carrier, carrier.inclusion())


def factor_through_equalizer(eq: Equalizer, h: ChainMap) -> ChainMap:
    columns = {src: eq.carrier.coordinates(image) for src, image in h.columns.items()}
    return ChainMap(h.source, eq.complex, {k: v for k, v in columns.items() if v})


def graded_convolution(a: GradedDims, b: GradedDims) -> GradedDims:
    out: GradedDims = {}
    for p, x in a.items():
        for q, y in b.items():
            out[p + q] = out.get(p + q, 0) + x * y
    return {n: v for n, v in out.items() if v}


def complex_from_columns(basis: Mapping[int, Iterable[str]], differential: Mapping[str, Vector]) -> ChainComplex:
    """Unchecked construction for internally generated data."""
    return ChainComplex({n: tuple(labels) for n, labels in basis.items() if labels}, dict(differential))


def cokernel(f: ChainMap) -> tuple[ChainComplex, ChainMap]:
    """
    B / im(f) for a degree-0 chain map f: A -> B.

    The quotient is based on the labels of B that are not pivots of the
    image, and comes with the quotient map B -> B / im(f).
    """
    B = f.target
    reducers: dict[int, linalg.RowReducer] = {}
    for n in B.degrees:
        reducer = linalg.RowReducer({label: i for i, label in enumerate(B.labels(n))})
        for label in f.source.labels(n):
            image = f.columns.get(label)
            if image:
                reducer.add(image)
        reducers[n] = reducer

    def project(v: Mapping[str, Fraction], n: int) -> Vector:
        if n not in reducers:
            return {}
        remainder, _ = reducers[n].reduce(v)
        return remainder

    basis = {n: tuple(label for label in B.labels(n) if label not in reducers[n].rows) for n in B.degrees}
    differential: dict[str, Vector] = {}
    for n, labels in basis.items():
        for label in labels:
            image = project(B.d({label: Fraction(1)}), n - 1)
            if image:
                differential[label] = image
    quotient = complex_from_columns(basis, differential)
    columns = {}
    for label in B.all_labels():
        image = project({label: Fraction(1)}, B.degree(label))
        if image:
            columns[label] = image
    log.debug("cokernel: %d of %d dims survive", quotient.dim, B.dim)
    return quotient, ChainMap(B, quotient, columns)
