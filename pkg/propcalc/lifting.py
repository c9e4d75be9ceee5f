"""
Lifting quasi-freely presented prop morphisms, and the path-object zigzag.

A presentation lists generators in a well-order, a generator word for every
basis element, and a differential word per generator in earlier generators.
Lifts are solved generator by generator as exact linear systems and then
extended to every basis element by word evaluation.
"""

import itertools
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from propcalc import linalg
from propcalc.biobject import Biarity, tensor_power, tensor_power_map
from propcalc.config import Settings
from propcalc.errors import (
    CompatibilityFailure,
    InconsistentPresentation,
    NoSolution,
    PropcalcError,
    ShapeMismatch,
    ZigzagViolation,
)
from propcalc.gradedlinear import (
    ChainComplex,
    ChainMap,
    identity_map,
    is_quasi_iso,
    postcompose,
    precompose,
    tensor_maps,
)
from propcalc.linalg import Vector
from propcalc.pathobject import make_Z, path_object
from propcalc.pdiagramprops import CalYProp, CalZProp, build_corner_square, build_ev
from propcalc.propcore import (
    EndomorphismProp,
    PropMorphism,
    TruncatedProp,
    check_prop_morphism,
)
from propcalc.reports import CheckReport
from propcalc.words import Word, evaluate_word, generators_of, word_biarity, word_degree

log = logging.getLogger(__name__)

ONE = Fraction(1)


@dataclass(frozen=True)
class Generator:
    symbol: str
    biarity: Biarity
    degree: int


@dataclass(eq=False)
class QuasiFreePresentation:
    prop: TruncatedProp
    generators: tuple[Generator, ...]
    values: dict[str, Vector]
    words: dict[Biarity, dict[str, Word]]
    differentials: dict[str, Word] = field(default_factory=dict)

    @property
    def arities(self) -> dict[str, Biarity]:
        return {g.symbol: g.biarity for g in self.generators}

    @property
    def degrees(self) -> dict[str, int]:
        return {g.symbol: g.degree for g in self.generators}

    def generator(self, symbol: str) -> Generator:
        for g in self.generators:
            if g.symbol == symbol:
                return g
        raise KeyError(symbol)


def check_presentation(pres: QuasiFreePresentation) -> CheckReport:
    """Words reproduce the basis and differential words reproduce d of each generator."""
    P = pres.prop
    report = CheckReport("presentation")
    arities = pres.arities
    seen: set[str] = set()
    for g in pres.generators:
        m, n = g.biarity
        if g.symbol in seen:
            report.violate("duplicate_generator", g.biarity, generator=g.symbol)
        C = P.component(m, n)
        value = pres.values.get(g.symbol, {})
        if any(x not in C or C.degree(x) != g.degree for x in value):
            report.violate("generator_value", g.biarity, generator=g.symbol, value=value)
            seen.add(g.symbol)
            continue
        dword = pres.differentials.get(g.symbol)
        expected = P.d(m, n, value)
        if dword is None:
            got: Vector = {}
        else:
            late = generators_of(dword) - seen
            if late:
                report.violate("well_order", g.biarity, generator=g.symbol, uses=sorted(late))
                seen.add(g.symbol)
                continue
            if word_biarity(dword, arities) != g.biarity:
                report.violate("differential_arity", g.biarity, generator=g.symbol)
                seen.add(g.symbol)
                continue
            got = evaluate_word(P, dword, pres.values, arities)
        if not linalg.vectors_equal(got, expected):
            report.violate("differential", g.biarity, generator=g.symbol, word_value=got, d_value=expected)
        seen.add(g.symbol)
    for m, n in P.biarities():
        C = P.component(m, n)
        words = pres.words.get((m, n), {})
        for x in C.all_labels():
            if x not in words:
                report.violate("missing_word", (m, n), basis=[x])
                continue
            word = words[x]
            try:
                if word_biarity(word, arities) != (m, n):
                    report.violate("word_arity", (m, n), basis=[x])
                    continue
                degree = word_degree(word, pres.degrees)
                value = evaluate_word(P, word, pres.values, arities)
            except PropcalcError as e:
                report.violate("word_error", (m, n), basis=[x], error=str(e))
                continue
            if degree is not None and degree != C.degree(x):
                report.violate("word_degree", (m, n), basis=[x], degree=degree)
            if not linalg.vectors_equal(value, {x: ONE}):
                report.violate("consistency", (m, n), basis=[x], value=value)
        report.record("words", len(words), C.dim)
    log.info("presentation of %s: %d violations", P.name, len(report.violations))
    return report


def algebra_from_generators(
    pres: QuasiFreePresentation, X: ChainComplex, images: Mapping[str, Vector], bound: int | None = None
) -> PropMorphism:
    """The action P -> End_X with the given generator images, by word evaluation."""
    P = pres.prop
    end_X = EndomorphismProp(X, P.bound if bound is None else bound, "End_X")
    arities = pres.arities

    def on_basis(m, n, x):
        return evaluate_word(end_X, pres.words[(m, n)][x], images, arities)

    return PropMorphism(P, end_X, on_basis, name="action")


@dataclass(eq=False)
class LiftProblem:
    presentation: QuasiFreePresentation
    q: PropMorphism
    b: PropMorphism


@dataclass(eq=False)
class LiftResult:
    morphism: PropMorphism
    values: dict[str, Vector]
    report: CheckReport


def _prefixed(prefix: str, v: Mapping[str, Fraction]) -> Vector:
    return {f"{prefix}|{k}": c for k, c in v.items()}


def lift(problem: LiftProblem, settings: Settings | None = None, verify: bool = True) -> LiftResult:
    """
    l: P -> E with q∘l = b.

    Raises InconsistentPresentation for a broken presentation and
    NoSolution, with an inconsistency witness, when a generator cannot be lifted.
    """
    pres, q, b = problem.presentation, problem.q, problem.b
    P = pres.prop
    if b.source is not P or q.target is not b.target:
        raise ShapeMismatch("lift problem maps do not fit together")
    E = q.source
    checked = check_presentation(pres)
    if not checked.passed:
        raise InconsistentPresentation([v.to_dict() for v in checked.violations])
    arities = pres.arities
    values: dict[str, Vector] = {}
    for g in pres.generators:
        m, n = g.biarity
        labels = list(E.component(m, n).labels(g.degree))
        columns: dict[str, Vector] = {}
        for e in labels:
            col = _prefixed("q", q.image(m, n, e))
            col.update(_prefixed("d", E.d(m, n, {e: ONE})))
            columns[e] = col
        rhs = _prefixed("q", b(m, n, pres.values[g.symbol]))
        dword = pres.differentials.get(g.symbol)
        if dword is not None:
            rhs.update(_prefixed("d", evaluate_word(E, dword, values, arities)))
        x, witness = linalg.solve(columns, rhs, labels)
        if x is None:
            log.info("generator %s: no lift (witness on %d equations)", g.symbol, len(witness or {}))
            raise NoSolution(g.symbol, witness or {})
        values[g.symbol] = x
        log.info("generator %s: lifted with support %d", g.symbol, len(x))

    def on_basis(m, n, x):
        return evaluate_word(E, pres.words[(m, n)][x], values, arities)

    l = PropMorphism(P, E, on_basis, name="lift")
    report = CheckReport("lift")
    if verify:
        for m, n in P.biarities():
            labels = P.component(m, n).all_labels()
            for x in labels:
                lhs = q(m, n, l.image(m, n, x))
                rhs = b.image(m, n, x)
                if not linalg.vectors_equal(lhs, rhs):
                    report.violate("q_after_lift", (m, n), basis=[x], lhs=lhs, rhs=rhs)
            report.record("q_after_lift", len(labels), len(labels))
        report.merge(check_prop_morphism(l, settings))
    report.details["generators"] = {g: v for g, v in values.items()}
    return LiftResult(l, values, report)


# -- the zigzag --------------------------------------------------------------


@dataclass(eq=False)
class Zigzag:
    X: ChainComplex
    ZX: ChainComplex
    s: ChainMap
    d0: ChainMap
    d1: ChainMap
    operations: dict[str, dict[str, Vector]]
    verdicts: dict[str, bool]

    def to_dict(self) -> dict:
        return {
            "operations": {vertex: ops for vertex, ops in self.operations.items()},
            "verdicts": dict(self.verdicts),
            "dims": {"X": self.X.dims(), "ZX": self.ZX.dims()},
        }


def _family_of(ev, m: int, n: int, v: Mapping[str, Fraction]) -> dict[str, Vector]:
    out: dict[str, Vector] = {}
    for label, c in v.items():
        for obj, image in ev.family(m, n, label).items():
            linalg.add_into(out.setdefault(obj, {}), image, c)
    return out


def functorial_path_action(
    pres: QuasiFreePresentation, lifted: PropMorphism, X: ChainComplex, action: PropMorphism
) -> Zigzag:
    """
    The actions on X, Z⊗X, X0 and X1 induced through End_calY(P) -> End_calY(X).

    Raises ZigzagViolation when an induced operation does not commute with s, d0 or d1.
    """
    calY = lifted.target
    if not isinstance(calY, CalYProp):
        raise ShapeMismatch("the lift must land in End_calY(P)")
    ev = build_ev(calY, X, action, "calY")
    diagram_prop = ev.target
    factorization = path_object(X)
    operations: dict[str, dict[str, Vector]] = {"X": {}, "ZX": {}, "X0": {}, "X1": {}}
    vertex_ok = True
    for g in pres.generators:
        m, n = g.biarity
        if not diagram_prop.in_bound(m, n):
            continue
        family = _family_of(ev, m, n, lifted(m, n, pres.values[g.symbol]))
        for vertex in operations:
            operations[vertex][g.symbol] = family.get(vertex, {})
        bad = diagram_prop.commuting_square_defects(m, n, family)
        if bad:
            raise ZigzagViolation(g.symbol, bad[0], [{"generator": g.symbol, "arrow": a} for a in bad])
    P = pres.prop
    for m, n in P.biarities():
        if not diagram_prop.in_bound(m, n):
            continue
        for x in P.component(m, n).all_labels():
            family = _family_of(ev, m, n, lifted.image(m, n, x))
            expected = action.image(m, n, x)
            for vertex in ("X", "X0", "X1"):
                if not linalg.vectors_equal(family.get(vertex, {}), expected):
                    vertex_ok = False
                    log.info("vertex %s differs from the action on %s", vertex, x)
    verdicts = {
        "vertex_actions_match": vertex_ok,
        "d0_quasi_iso": is_quasi_iso(factorization.d0),
        "d1_quasi_iso": is_quasi_iso(factorization.d1),
    }
    return Zigzag(X, factorization.ZX, factorization.s, factorization.d0, factorization.d1, operations, verdicts)


def check_zigzag_naturality(zx: Zigzag, zy: Zigzag, f: ChainMap, pres: QuasiFreePresentation) -> CheckReport:
    """id_Z⊗f: Z⊗X -> Z⊗Y commutes with the induced operations, for an algebra morphism f."""
    report = CheckReport("zigzag_naturality")
    lifted = tensor_maps(identity_map(make_Z().complex), f)
    zf = ChainMap(zx.ZX, zy.ZX, lifted.columns)
    for g in pres.generators:
        m, n = g.biarity
        if g.symbol not in zx.operations["ZX"]:
            continue
        post = postcompose(tensor_power(zx.ZX, m).complex, tensor_power_map(zf, n))
        pre = precompose(tensor_power_map(zf, m), tensor_power(zy.ZX, n).complex)
        if not linalg.vectors_equal(post(zx.operations["ZX"][g.symbol]), pre(zy.operations["ZX"][g.symbol])):
            report.violate("naturality", g.biarity, generator=g.symbol)
    report.record("naturality", len(pres.generators), len(pres.generators))
    return report


def verify_homotopy_zigzag(
    P: TruncatedProp,
    homotopy: PropMorphism,
    phi: PropMorphism,
    psi: PropMorphism,
    X: ChainComplex,
    action: PropMorphism,
    calY: CalYProp | None = None,
) -> CheckReport:
    """
    For m: P -> End_calZ(P) with u∘m = (phi, psi), the induced maps
    phi*(X) <- Z⊗X -> psi*(X) are P-algebra weak equivalences.

    Raises CompatibilityFailure when u∘m differs from (phi, psi).
    """
    calZ = homotopy.target
    if not isinstance(calZ, CalZProp):
        raise ShapeMismatch("the homotopy must land in End_calZ(P)")
    square = build_corner_square(P, calY if calY is not None else CalYProp(P, calZ))
    u, T = square.u, square.T
    report = CheckReport("homotopy_zigzag")
    conflicts = []
    for m, n in P.biarities():
        for x in P.component(m, n).all_labels():
            lhs = u(m, n, homotopy.image(m, n, x))
            rhs = T.combine({"P0": phi.image(m, n, x), "P1": psi.image(m, n, x)})
            if not linalg.vectors_equal(lhs, rhs):
                conflicts.append({"biarity": [m, n], "basis": x})
    if conflicts:
        raise CompatibilityFailure(f"u∘m differs from (phi, psi) on {len(conflicts)} basis elements, e.g. {conflicts[0]}")
    ev = build_ev(calZ, X, action, "calZ")
    factorization = path_object(X)
    components = {"d0": factorization.d0, "d1": factorization.d1}
    commutes = {"d0": True, "d1": True}
    vertices = {"d0": "X0", "d1": "X1"}
    bound = min(P.bound, ev.target.bound)
    for m, n in itertools.product(range(bound + 1), repeat=2):
        for name, d in components.items():
            post = postcompose(tensor_power(factorization.ZX, m).complex, tensor_power_map(d, n))
            pre = precompose(tensor_power_map(d, m), tensor_power(X, n).complex)
            for x in P.component(m, n).all_labels():
                family = _family_of(ev, m, n, homotopy.image(m, n, x))
                if not linalg.vectors_equal(post(family.get("ZX", {})), pre(family.get(vertices[name], {}))):
                    commutes[name] = False
                    report.violate("algebra_morphism", (m, n), component=name, basis=[x])
    for name, d in components.items():
        weq = is_quasi_iso(d)
        report.details[name] = {"commutes": commutes[name], "weak_equivalence": weq}
        if not weq:
            report.violate("weak_equivalence", None, component=name)
    return report
