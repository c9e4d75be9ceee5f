"""
Props of P-diagrams built from the interval complex Z.

End_Z(P) decorates each operation of P with a map Z^{⊗m} -> Z^{⊗n}:
End_Z(P) = End_Z ⊠ P. End_calZ(P) is the pullback that adds the two
endpoint operations in P0 and P1, and End_calY(P) the pullback that adds the
constant operation in P. The projection pi: End_calY(P) -> P is checked to be
an acyclic fibration componentwise.

The pullback components are computed with P replaced by ℚ and then
extended by -⊗P(m,n); every structure map involved is of the form f⊗id.
"""

import itertools
import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from propcalc import linalg
from propcalc.biobject import TensorPower, tensor_power, tensor_power_map
from propcalc.config import Settings
from propcalc.errors import ShapeMismatch
from propcalc.gradedlinear import (
    ChainComplex,
    ChainMap,
    Pullback,
    Subcomplex,
    direct_sum,
    dual,
    factor_through_pullback,
    identity_map,
    is_cofibration,
    is_fibration,
    is_quasi_iso,
    postcompose,
    precompose,
    pullback,
    quasi_iso_report,
    surjective_degrees,
    tensor,
    tensor_maps,
    unit_complex,
)
from propcalc.linalg import Vector
from propcalc.pathobject import RHO0, TAU, make_Z, path_tensor, structure_maps
from propcalc.propcore import (
    Arrow,
    DiagramEndomorphismProp,
    EndomorphismProp,
    HadamardProp,
    ProductProp,
    PropMorphism,
    SubProp,
    TruncatedProp,
    make_diagram,
)
from propcalc.reports import CheckReport, basis_tuples
from propcalc.utils import UNIT_LABEL, dual_label, sum_label, tensor_label

log = logging.getLogger(__name__)

ONE = Fraction(1)
P0, P1 = "p0", "p1"
KP = ChainComplex({0: (P0, P1)}, {})

# d0: τ ↦ 1; d1: τ, ρ0 ↦ 1
ENDPOINTS = ({TAU: ONE}, {TAU: ONE, RHO0: ONE})


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def z_power(m: int) -> TensorPower:
    return tensor_power(make_Z().complex, m)


@lru_cache(maxsize=None)
def end_Z(bound: int) -> EndomorphismProp:
    return EndomorphismProp(make_Z().complex, bound, "End_Z")


def endpoint_coefficient(which: int, word: tuple[str, ...]) -> Fraction:
    """Coefficient of d_which^{⊗m} on a Z-word."""
    c = ONE
    for letter in word:
        c *= ENDPOINTS[which].get(letter, 0)
        if not c:
            return Fraction(0)
    return c


def dbar_index_set(m: int, which: int) -> list[str]:
    """Words j of Z^{⊗m} with d_which^{⊗m}(j) = 1: τ^{⊗m} for d0, words in τ, ρ0 for d1."""
    letters = set(ENDPOINTS[which])
    power = z_power(m)
    return [label for label in power.complex.all_labels() if set(power.words[label]) <= letters]


def dbar_index_set_brute(m: int, which: int) -> list[str]:
    """The same index set, read off the matrix of d_which^{⊗m}."""
    Z = make_Z()
    d = tensor_power_map((Z.d0, Z.d1)[which], m)
    return [label for label in z_power(m).complex.all_labels() if list(d.image(label).values()) == [ONE]]


def decoration(ezp: HadamardProp, m: int, n: int, label: str) -> tuple[tuple[str, ...], tuple[str, ...], str]:
    """(input word, output word, P-label) of a basis element of End_Z(P)(m,n)."""
    k, p = ezp.decode(m, n)[label]
    a, b = ezp.K.pairs(m, n)[k]
    return z_power(m).words[a], z_power(n).words[b], p


def build_end_ZP(P: TruncatedProp) -> HadamardProp:
    return HadamardProp(end_Z(P.bound), P, name=f"End_Z({P.name})")


# -- scalar-level maps -------------------------------------------------------


def scalar_dbar_pair(m: int, n: int) -> ChainMap:
    """Hom(Z^m, Z^n) -> (Z^m)*⊗(ℚp0⊕ℚp1), E_{b,a} ↦ Σ_i d_i^{⊗n}(b) a*⊗p_i."""
    source = end_Z(max(m, n)).component(m, n)
    pairs = end_Z(max(m, n)).pairs(m, n)
    target = tensor(dual(z_power(m).complex), KP)
    outputs = z_power(n).words
    columns: dict[str, Vector] = {}
    for label, (a, b) in pairs.items():
        image: Vector = {}
        for which, p in enumerate((P0, P1)):
            c = endpoint_coefficient(which, outputs[b])
            if c:
                image[tensor_label(dual_label(a), p)] = c
        if image:
            columns[label] = image
    return ChainMap(source, target, columns)


def scalar_dbar_star(m: int) -> ChainMap:
    """ℚ0⊕ℚ1 -> (Z^m)*⊗(ℚp0⊕ℚp1), 1_i ↦ Σ_{j ∈ J_i} j*⊗p_i."""
    source = direct_sum([("P0", unit_complex()), ("P1", unit_complex())])
    target = tensor(dual(z_power(m).complex), KP)
    columns = {
        sum_label(tag, UNIT_LABEL): {tensor_label(dual_label(j), p): ONE for j in dbar_index_set(m, which)}
        for which, (tag, p) in enumerate((("P0", P0), ("P1", P1)))
    }
    return ChainMap(source, target, columns)


@lru_cache(maxsize=None)
def scalar_calZ(m: int, n: int) -> Pullback:
    pb = pullback(scalar_dbar_pair(m, n), scalar_dbar_star(m), tags=("ZP", "P01"))
    log.debug("scalar End_calZ(%d,%d): %s", m, n, pb.complex.dims())
    return pb


def scalar_sbar_lower(n: int) -> ChainMap:
    """ℚ -> Z^{⊗n}, 1 ↦ τ^{⊗n}."""
    power = z_power(n)
    return ChainMap(unit_complex(), power.complex, {UNIT_LABEL: {power.labels[(TAU,) * n]: ONE}})


def scalar_sbar_upper(m: int, n: int, section: str = TAU) -> ChainMap:
    """Scalar End_calZ(m,n) -> Z^{⊗n}: evaluate the Z-part at section^{⊗m}."""
    pb = scalar_calZ(m, n)
    pairs = end_Z(max(m, n)).pairs(m, n)
    start = z_power(m).labels[(section,) * m]
    columns: dict[str, Vector] = {}
    for label in pb.complex.all_labels():
        image: Vector = {}
        for entry, c in pb.carrier.embed({label: ONE}).items():
            tag, rest = entry.split("|", 1)
            if tag != "ZP":
                continue
            a, b = pairs[rest]
            if a == start:
                linalg.add_into(image, {b: c})
        if image:
            columns[label] = image
    return ChainMap(pb.complex, z_power(n).complex, columns)


@lru_cache(maxsize=None)
def scalar_calY(m: int, n: int, section: str = TAU) -> Pullback:
    pb = pullback(scalar_sbar_lower(n), scalar_sbar_upper(m, n, section), tags=("P", "calZ"))
    log.debug("scalar End_calY(%d,%d): %s", m, n, pb.complex.dims())
    return pb


def _extend(carrier: Subcomplex, extend_label: Callable[[str, str], str], ambient: ChainComplex, P: ChainComplex) -> Subcomplex:
    """carrier⊗P inside ambient, relabelled by extend_label(scalar label, p)."""
    basis: dict[int, list[str]] = {}
    vectors: dict[str, Vector] = {}
    for e in sorted(carrier.basis, reverse=True):
        for label in carrier.basis[e]:
            v = carrier.vectors[label]
            for q in P.degrees:
                for p in P.labels(q):
                    new = extend_label(label, p)
                    basis.setdefault(e + q, []).append(new)
                    vectors[new] = {extend_label(x, p): c for x, c in v.items()}
    sub = Subcomplex(ambient, basis, vectors)
    missing = [x for vector in vectors.values() for x in vector if x not in ambient]
    if missing:
        raise ShapeMismatch(f"extended carrier uses unknown labels, e.g. {missing[0]!r}")
    return sub


def extend_calZ_label(label: str, p: str) -> str:
    tag, rest = label.split("|", 1)
    if tag == "ZP":
        return sum_label("ZP", tensor_label(rest, p))
    return sum_label(rest.split("|", 1)[0], p)


def extend_calY_label(label: str, p: str) -> str:
    tag, rest = label.split("|", 1)
    if tag == "P":
        return sum_label("P", p)
    return sum_label("calZ", extend_calZ_label(rest, p))


# -- the props ---------------------------------------------------------------


class CalZProp(SubProp):
    """End_calZ(P) inside End_Z(P) × P0 × P1."""

    def __init__(self, P: TruncatedProp, ezp: HadamardProp | None = None):
        self.P = P
        self.ezp = ezp or build_end_ZP(P)
        ambient = ProductProp([("ZP", self.ezp), ("P0", P), ("P1", P)], name=f"End_Z({P.name})×P0×P1")
        super().__init__(ambient, self._carrier, name=f"End_calZ({P.name})")

    def _carrier(self, m: int, n: int) -> Subcomplex:
        scalar = scalar_calZ(m, n).carrier
        return _extend(scalar, extend_calZ_label, self.ambient.component(m, n), self.P.component(m, n))

    def parts(self, m: int, n: int, v: Mapping[str, Fraction]) -> dict[str, Vector]:
        """The ZP, P0 and P1 parts of an element."""
        ambient = self.embed(m, n, v)
        return {tag: self.ambient.project(m, n, ambient, tag) for tag in ("ZP", "P0", "P1")}


class CalYProp(SubProp):
    """End_calY(P) inside P × End_calZ(P)."""

    def __init__(self, P: TruncatedProp, calZ: CalZProp | None = None, section: str = TAU):
        self.P = P
        self.calZ = calZ or CalZProp(P)
        self.section = section
        ambient = ProductProp([("P", P), ("calZ", self.calZ)], name=f"P×End_calZ({P.name})")
        super().__init__(ambient, self._carrier, name=f"End_calY({P.name})")

    def _carrier(self, m: int, n: int) -> Subcomplex:
        scalar = scalar_calY(m, n, self.section).carrier
        return _extend(scalar, extend_calY_label, self.ambient.component(m, n), self.P.component(m, n))

    def parts(self, m: int, n: int, v: Mapping[str, Fraction]) -> dict[str, Vector]:
        ambient = self.embed(m, n, v)
        return {tag: self.ambient.project(m, n, ambient, tag) for tag in ("P", "calZ")}


def build_end_calZP(P: TruncatedProp, ezp: HadamardProp | None = None) -> CalZProp:
    return CalZProp(P, ezp)


def build_end_calYP(P: TruncatedProp, calZ: CalZProp | None = None, section: str = TAU) -> tuple[CalYProp, PropMorphism]:
    """End_calY(P) with the projection pi onto P."""
    calY = CalYProp(P, calZ, section)
    pi = PropMorphism(calY, P, lambda m, n, x: calY.parts(m, n, {x: ONE})["P"], name="pi")
    return calY, pi


# -- P-level structure maps --------------------------------------------------


def map_dbar(P: TruncatedProp, m: int, n: int, which: int) -> ChainMap:
    """P(m,n) -> (Z^m)*⊗P(m,n), ξ ↦ Σ_{j ∈ J} j*⊗ξ."""
    C = P.component(m, n)
    target = tensor(dual(z_power(m).complex), C)
    J = dbar_index_set(m, which)
    columns = {p: {tensor_label(dual_label(j), p): ONE for j in J} for p in C.all_labels()}
    return ChainMap(C, target, columns)


def map_dbar0(P: TruncatedProp, m: int, n: int) -> ChainMap:
    return map_dbar(P, m, n, 0)


def map_dbar1(P: TruncatedProp, m: int, n: int) -> ChainMap:
    return map_dbar(P, m, n, 1)


def map_dbar_pair(ezp: HadamardProp, m: int, n: int) -> ChainMap:
    """End_Z(P)(m,n) -> (Z^m)*⊗(ℚp0⊕ℚp1)⊗P(m,n)."""
    C = ezp.P.component(m, n)
    scalar = scalar_dbar_pair(m, n)
    target = tensor(scalar.target, C)
    columns: dict[str, Vector] = {}
    for label, (k, p) in ezp.decode(m, n).items():
        image = {tensor_label(t, p): c for t, c in scalar.columns.get(k, {}).items()}
        if image:
            columns[label] = image
    return ChainMap(ezp.component(m, n), target, columns)


def map_dbar_star(P: TruncatedProp, m: int, n: int) -> ChainMap:
    """P0(m,n)⊕P1(m,n) -> (Z^m)*⊗(ℚp0⊕ℚp1)⊗P(m,n)."""
    C = P.component(m, n)
    scalar = scalar_dbar_star(m)
    target = tensor(scalar.target, C)
    source = direct_sum([("P0", C), ("P1", C)])
    columns = {}
    for tag in ("P0", "P1"):
        image = scalar.columns[sum_label(tag, UNIT_LABEL)]
        for p in C.all_labels():
            columns[sum_label(tag, p)] = {tensor_label(t, p): c for t, c in image.items()}
    return ChainMap(source, target, columns)


def direct_calZ_pullback(ezp: HadamardProp, m: int, n: int) -> Pullback:
    """The End_calZ(P)(m,n) pullback computed on the full component."""
    return pullback(map_dbar_pair(ezp, m, n), map_dbar_star(ezp.P, m, n), tags=("ZP", "P01"))


def map_sbar_lower(P: TruncatedProp, m: int, n: int) -> ChainMap:
    """P(m,n) -> Z^{⊗n}⊗P(m,n), ξ ↦ τ^{⊗n}⊗ξ."""
    C = P.component(m, n)
    tau = z_power(n).labels[(TAU,) * n]
    return ChainMap(C, tensor(z_power(n).complex, C), {p: {tensor_label(tau, p): ONE} for p in C.all_labels()})


def map_sbar_upper(calZ: CalZProp, m: int, n: int, section: str = TAU) -> ChainMap:
    """End_calZ(P)(m,n) -> Z^{⊗n}⊗P(m,n): the Z-part evaluated at section^{⊗m}."""
    C = calZ.P.component(m, n)
    start = z_power(m).labels[(section,) * m]
    pairs = calZ.ezp.K.pairs(m, n)
    decode = calZ.ezp.decode(m, n)
    columns: dict[str, Vector] = {}
    for label in calZ.component(m, n).all_labels():
        image: Vector = {}
        for entry, c in calZ.parts(m, n, {label: ONE})["ZP"].items():
            k, p = decode[entry]
            a, b = pairs[k]
            if a == start:
                linalg.add_into(image, {tensor_label(b, p): c})
        if image:
            columns[label] = image
    return ChainMap(calZ.component(m, n), tensor(z_power(n).complex, C), columns)


def pullback_square_defects(calZ: CalZProp, m: int, n: int) -> list[str]:
    """Carrier basis elements on which the two sides of the End_calZ square differ."""
    pair = map_dbar_pair(calZ.ezp, m, n)
    star = map_dbar_star(calZ.P, m, n)
    bad = []
    for label in calZ.component(m, n).all_labels():
        parts = calZ.parts(m, n, {label: ONE})
        lhs = pair(parts["ZP"])
        rhs = star({sum_label(tag, p): c for tag in ("P0", "P1") for p, c in parts[tag].items()})
        if not linalg.vectors_equal(lhs, rhs):
            bad.append(label)
    return bad


# -- pi ----------------------------------------------------------------------


def check_pi_acyclic_fibration(
    P: TruncatedProp,
    bound: int | None = None,
    section: str = TAU,
    max_arity_sum: int | None = None,
    calY: CalYProp | None = None,
) -> CheckReport:
    """Degreewise surjectivity and quasi-isomorphism of pi(m,n) in every component."""
    bound = P.bound if bound is None else min(bound, P.bound)
    if calY is None:
        calY, pi = build_end_calYP(P, section=section)
    else:
        pi = PropMorphism(calY, P, lambda m, n, x: calY.parts(m, n, {x: ONE})["P"], name="pi")
    report = CheckReport(f"check_pi:{P.name}")
    components = []
    for m, n in itertools.product(range(bound + 1), repeat=2):
        if max_arity_sum is not None and m + n > max_arity_sum:
            report.skip("pi", "arity sum", biarity=[m, n])
            continue
        f = pi.chain_map(m, n)
        surjective = all(surjective_degrees(f).values())
        q = quasi_iso_report(f)
        entry = {
            "component": f"{m},{n}",
            "surjective": surjective,
            "homology_source": q.homology_source(),
            "homology_target": q.homology_target(),
            "quasi_iso": q.quasi_iso,
        }
        components.append(entry)
        if not surjective:
            report.violate("surjective", (m, n), degrees=surjective_degrees(f))
        if not q.quasi_iso:
            report.violate("quasi_iso", (m, n), homology_source=entry["homology_source"], homology_target=entry["homology_target"])
        log.debug("pi(%d,%d): surjective=%s quasi_iso=%s", m, n, surjective, q.quasi_iso)
    report.record("pi", len(components), (bound + 1) ** 2)
    report.details["components"] = components
    report.details["section"] = f"{section}^m"
    report.details["lower_section"] = "tau^n"
    log.info("%s: %d violations", report.name, len(report.violations))
    return report


def pushout_product_witness(m: int, n: int) -> CheckReport:
    """
    Hom(Z^m, Z^n) -> Hom(ℚ, Z^n) ×_{Hom(ℚ, ℚp0⊕ℚp1)} Hom(Z^m, ℚp0⊕ℚp1), induced by
    f: ℚ -> Z^m (1 ↦ τ^m) and g = (d0, d1)^{⊗n}: Z^n -> ℚp0⊕ℚp1.
    """
    report = CheckReport(f"pushout_product:{m},{n}")
    Zm, Zn = z_power(m).complex, z_power(n).complex
    unit = unit_complex()
    f = ChainMap(unit, Zm, {UNIT_LABEL: {z_power(m).labels[(TAU,) * m]: ONE}})
    words = z_power(n).words
    g_columns = {}
    for label in Zn.all_labels():
        image = {p: endpoint_coefficient(which, words[label]) for which, p in enumerate((P0, P1))}
        image = {p: c for p, c in image.items() if c}
        if image:
            g_columns[label] = image
    g = ChainMap(Zn, KP, g_columns)
    f_ok = is_cofibration(f) and is_quasi_iso(f)
    g_ok = is_fibration(g)
    report.details["f_acyclic_cofibration"] = f_ok
    report.details["g_fibration"] = g_ok
    if not f_ok:
        report.violate("f_acyclic_cofibration", (m, n))
    if not g_ok:
        if n == 0:
            report.skip("induced", "g is the diagonal of ℚ for n = 0", biarity=[m, n])
            return report
        report.violate("g_fibration", (m, n))
    pb = pullback(postcompose(unit, g), precompose(f, KP), tags=("outputs", "inputs"))
    induced = factor_through_pullback(pb, precompose(f, Zn), postcompose(Zm, g))
    surjective = all(surjective_degrees(induced).values())
    quasi = is_quasi_iso(induced)
    report.details["induced_surjective"] = surjective
    report.details["induced_quasi_iso"] = quasi
    report.details["pullback_dims"] = pb.complex.dims()
    if not (surjective and quasi):
        report.violate("induced_acyclic_fibration", (m, n), surjective=surjective, quasi_iso=quasi)
    return report


# -- evaluation morphisms ----------------------------------------------------


def _shuffle_sign(outer: tuple[str, ...], inner: tuple[str, ...], Z: ChainComplex, X: ChainComplex) -> int:
    """Sign of z1..zm x1..xm -> z1 x1 ... zm xm: x_i passes z_j for i < j."""
    e = 0
    for i, x in enumerate(inner):
        if X.degree(x) % 2:
            e += sum(Z.degree(z) for z in outer[i + 1 :])
    return _sign(e)


def diagram_of(tag: str, X: ChainComplex):
    """The diagram of chain complexes built from X for a tag."""
    ZX = path_tensor(X)
    s, d0, d1 = structure_maps(X)
    if tag == "V":
        return make_diagram([("X", X)], [])
    if tag == "T":
        return make_diagram([("X0", X), ("X1", X)], [])
    if tag == "calZ":
        return make_diagram(
            [("X0", X), ("ZX", ZX), ("X1", X)],
            [Arrow("d0", "ZX", "X0", d0), Arrow("d1", "ZX", "X1", d1)],
        )
    if tag == "calY":
        return make_diagram(
            [("X", X), ("ZX", ZX), ("X0", X), ("X1", X)],
            [Arrow("s", "X", "ZX", s), Arrow("d0", "ZX", "X0", d0), Arrow("d1", "ZX", "X1", d1)],
        )
    raise ShapeMismatch(f"unknown diagram tag {tag!r}")


@dataclass(eq=False)
class EvaluationMorphism:
    tag: str
    X: ChainComplex
    action: PropMorphism
    objects: dict[str, ChainComplex]
    morphism: PropMorphism
    family: Callable[[int, int, str], dict[str, Vector]]
    target: TruncatedProp


def _z_evaluator(ezp: HadamardProp, X: ChainComplex, action: PropMorphism, end_ZX: EndomorphismProp):
    Z = make_Z().complex
    ZX = end_ZX.X
    end_X = action.target

    def ev(m: int, n: int, label: str) -> Vector:
        k, p = ezp.decode(m, n)[label]
        a, b = ezp.K.pairs(m, n)[k]
        wa, wb = z_power(m).words[a], z_power(n).words[b]
        deg_a = sum(Z.degree(z) for z in wa)
        xm, xn = tensor_power(X, m), tensor_power(X, n)
        zxm, zxn = tensor_power(ZX, m), tensor_power(ZX, n)
        out: Vector = {}
        for e, c in action.image(m, n, p).items():
            x, y = end_X.pairs(m, n)[e]
            wx, wy = xm.words[x], xn.words[y]
            g_deg = xn.complex.degree(y) - xm.complex.degree(x)
            sign = _sign(g_deg * deg_a) * _shuffle_sign(wa, wx, Z, X) * _shuffle_sign(wb, wy, Z, X)
            source = zxm.labels[tuple(tensor_label(z, t) for z, t in zip(wa, wx))]
            target = zxn.labels[tuple(tensor_label(z, t) for z, t in zip(wb, wy))]
            linalg.add_into(out, {end_ZX.label(m, n, source, target): Fraction(sign)}, c)
        return out

    return ev


def build_ev(source: TruncatedProp, X: ChainComplex, action: PropMorphism, tag: str) -> EvaluationMorphism:
    """
    ev_X: End_D(P) -> End_D(X) for D one of Z, calZ, calY, V, T.

    `source` is the prop of P-diagrams for the tag: End_Z(P), End_calZ(P),
    End_calY(P), P itself, or P0×P1 as a product with tags P0 and P1.
    """
    if not isinstance(action.target, EndomorphismProp) or action.target.X is not X:
        raise ShapeMismatch("the action must land in the endomorphism prop of X")
    bound = min(source.bound, action.target.bound)
    ZX = path_tensor(X)
    end_ZX = EndomorphismProp(ZX, bound, "End_Z(X)")

    def z_part(ezp: HadamardProp):
        ev = _z_evaluator(ezp, X, action, end_ZX)

        def image(m: int, n: int, v: Mapping[str, Fraction]) -> Vector:
            out: Vector = {}
            for label, c in v.items():
                linalg.add_into(out, ev(m, n, label), c)
            return out

        return image

    if tag == "Z":
        if not isinstance(source, HadamardProp):
            raise ShapeMismatch("ev for Z needs End_Z(P)")
        image = z_part(source)

        def family(m, n, x):
            return {"ZX": image(m, n, {x: ONE})}

        morphism = PropMorphism(source, end_ZX, lambda m, n, x: family(m, n, x)["ZX"], name="ev_Z")
        return EvaluationMorphism(tag, X, action, {"ZX": ZX}, morphism, family, end_ZX)

    D = diagram_of(tag, X)
    target = DiagramEndomorphismProp(D, bound, name=f"End_{tag}(X)")
    if tag == "V":

        def family(m, n, x):
            return {"X": action.image(m, n, x)}

    elif tag == "T":
        if not isinstance(source, ProductProp):
            raise ShapeMismatch("ev for T needs P0×P1")

        def family(m, n, x):
            return {
                "X0": action(m, n, source.project(m, n, {x: ONE}, "P0")),
                "X1": action(m, n, source.project(m, n, {x: ONE}, "P1")),
            }

    elif tag == "calZ":
        if not isinstance(source, CalZProp):
            raise ShapeMismatch("ev for calZ needs End_calZ(P)")
        image = z_part(source.ezp)

        def family(m, n, x):
            parts = source.parts(m, n, {x: ONE})
            return {"X0": action(m, n, parts["P0"]), "ZX": image(m, n, parts["ZP"]), "X1": action(m, n, parts["P1"])}

    elif tag == "calY":
        if not isinstance(source, CalYProp):
            raise ShapeMismatch("ev for calY needs End_calY(P)")
        image = z_part(source.calZ.ezp)

        def family(m, n, x):
            parts = source.parts(m, n, {x: ONE})
            inner = source.calZ.parts(m, n, parts["calZ"])
            return {
                "X": action(m, n, parts["P"]),
                "ZX": image(m, n, inner["ZP"]),
                "X0": action(m, n, inner["P0"]),
                "X1": action(m, n, inner["P1"]),
            }

    else:
        raise ShapeMismatch(f"unknown diagram tag {tag!r}")

    morphism = PropMorphism(source, target, lambda m, n, x: target.from_family(m, n, family(m, n, x)), name=f"ev_{tag}")
    return EvaluationMorphism(tag, X, action, dict(D.objects), morphism, family, target)


def check_ev_naturality(
    ev_X: EvaluationMorphism, ev_Y: EvaluationMorphism, f: ChainMap, settings: Settings | None = None
) -> CheckReport:
    """
    For an algebra morphism f: X -> Y, every object of the diagram carries
    f or id_Z⊗f, and ev_Y(α)∘f^{⊗m} = f^{⊗n}∘ev_X(α) objectwise.
    """
    settings = settings or Settings()
    if f.source is not ev_X.X or f.target is not ev_Y.X:
        raise ShapeMismatch("naturality needs f: X -> Y between the two carriers")
    source = ev_X.morphism.source
    report = CheckReport(f"ev_naturality:{ev_X.tag}")
    maps: dict[str, ChainMap] = {}
    for obj in ev_X.objects:
        if obj == "ZX":
            lifted = tensor_maps(identity_map(make_Z().complex), f)
            maps[obj] = ChainMap(path_tensor(ev_X.X), path_tensor(ev_Y.X), lifted.columns)
        else:
            maps[obj] = f
    bound = min(source.bound, ev_X.target.bound, ev_Y.target.bound)
    for m, n in itertools.product(range(bound + 1), repeat=2):
        labels = source.component(m, n).all_labels()
        tuples, checked, total = basis_tuples([labels], settings.max_tuples, settings.seed)
        squares = {}
        for obj, g in maps.items():
            A = tensor_power(g.source, m).complex
            B = tensor_power(g.target, n).complex
            squares[obj] = (postcompose(A, tensor_power_map(g, n)), precompose(tensor_power_map(g, m), B))
        for (x,) in tuples:
            fam_X = ev_X.family(m, n, x)
            fam_Y = ev_Y.family(m, n, x)
            for obj, (post, pre) in squares.items():
                if not linalg.vectors_equal(post(fam_X[obj]), pre(fam_Y[obj])):
                    report.violate("naturality", (m, n), basis=[x], object=obj)
        report.record("naturality", checked, total)
    return report


def check_evaluation_square(calY: CalYProp, pi: PropMorphism, ev: EvaluationMorphism, settings: Settings | None = None) -> CheckReport:
    """End_calY(P) -> End_calY(X) -> End_X agrees with End_calY(P) -> P -> End_X."""
    settings = settings or Settings()
    report = CheckReport("evaluation_square")
    bound = min(calY.bound, ev.target.bound)
    for m, n in itertools.product(range(bound + 1), repeat=2):
        tuples, checked, total = basis_tuples([calY.component(m, n).all_labels()], settings.max_tuples, settings.seed)
        for (x,) in tuples:
            lhs = ev.family(m, n, x)["X"]
            rhs = ev.action(m, n, pi.image(m, n, x))
            if not linalg.vectors_equal(lhs, rhs):
                report.violate("evaluation_square", (m, n), basis=[x], lhs=lhs, rhs=rhs)
        report.record("evaluation_square", checked, total)
    return report


# -- the corner square -------------------------------------------------------


@dataclass(eq=False)
class CornerSquare:
    calY: CalYProp
    calZ: CalZProp
    P: TruncatedProp
    T: ProductProp
    v: PropMorphism
    w: PropMorphism
    t: PropMorphism
    u: PropMorphism


def build_corner_square(P: TruncatedProp, calY: CalYProp | None = None) -> CornerSquare:
    """
    End_calY(P) --w--> End_calZ(P)
        |v                 |u
        P ------t------> P0×P1
    """
    if calY is None:
        calY, v = build_end_calYP(P)
    else:
        v = PropMorphism(calY, P, lambda m, n, x: calY.parts(m, n, {x: ONE})["P"], name="pi")
    calZ = calY.calZ
    T = ProductProp([("P0", P), ("P1", P)], name=f"{P.name}0×{P.name}1")
    w = PropMorphism(calY, calZ, lambda m, n, x: calY.parts(m, n, {x: ONE})["calZ"], name="w")
    t = PropMorphism(P, T, lambda m, n, x: T.combine({"P0": {x: ONE}, "P1": {x: ONE}}), name="t")

    def u_basis(m, n, x):
        parts = calZ.parts(m, n, {x: ONE})
        return T.combine({"P0": parts["P0"], "P1": parts["P1"]})

    u = PropMorphism(calZ, T, u_basis, name="u")
    return CornerSquare(calY, calZ, P, T, v, w, t, u)


def check_corner_square(square: CornerSquare, bound: int | None = None) -> CheckReport:
    report = CheckReport("corner_square")
    bound = square.P.bound if bound is None else bound
    for m, n in itertools.product(range(bound + 1), repeat=2):
        labels = square.calY.component(m, n).all_labels()
        for x in labels:
            lhs = square.u(m, n, square.w.image(m, n, x))
            rhs = square.t(m, n, square.v.image(m, n, x))
            if not linalg.vectors_equal(lhs, rhs):
                report.violate("commutes", (m, n), basis=[x], lhs=lhs, rhs=rhs)
        report.record("commutes", len(labels), len(labels))
        degrees = surjective_degrees(square.u.chain_map(m, n))
        if not all(degrees.values()):
            report.violate("u_surjective", (m, n), degrees=degrees)
    return report


def calY_dims(calY: CalYProp, bound: int | None = None) -> dict[tuple[int, int], dict[int, int]]:
    bound = calY.bound if bound is None else bound
    return {(m, n): calY.component(m, n).dims() for m, n in itertools.product(range(bound + 1), repeat=2)}


def end_ZP_dim(P: TruncatedProp, m: int, n: int) -> int:
    return 5 ** (m + n) * P.component(m, n).dim
