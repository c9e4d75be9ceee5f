"""
The interval complex Z and the path object Z⊗X.

Z has τ, ρ0, ρ1 in degree 0 and σ0, σ1 in degree -1, with d(ρi) = σi.
The structure maps are s: ℚ -> Z (1 ↦ τ), d0: τ ↦ 1 and d1: τ, ρ0 ↦ 1.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from propcalc import linalg
from propcalc.biobject import tensor_power
from propcalc.errors import FactorizationFailure, ShapeMismatch
from propcalc.gradedlinear import (
    ChainComplex,
    ChainMap,
    QuasiIsoReport,
    chain_map_defects,
    cokernel,
    compose_maps,
    direct_sum,
    homology,
    identity_map,
    injective_degrees,
    is_cofibration,
    is_quasi_iso,
    map_into_sum,
    quasi_iso_report,
    surjective_degrees,
    tensor,
    tensor_maps,
    unit_complex,
)
from propcalc.linalg import Vector
from propcalc.utils import UNIT_LABEL, sum_label, tensor_label

log = logging.getLogger(__name__)

TAU = "tau"
RHO0 = "rho0"
RHO1 = "rho1"
SIG0 = "sig0"
SIG1 = "sig1"
Z_ORDER = (TAU, RHO0, RHO1, SIG0, SIG1)

ONE = Fraction(1)


@dataclass(frozen=True, eq=False)
class PathComplexZ:
    complex: ChainComplex
    unit: ChainComplex
    s: ChainMap
    d0: ChainMap
    d1: ChainMap


@lru_cache(maxsize=None)
def make_Z() -> PathComplexZ:
    Z = ChainComplex(
        {0: (TAU, RHO0, RHO1), -1: (SIG0, SIG1)},
        {RHO0: {SIG0: ONE}, RHO1: {SIG1: ONE}},
    )
    unit = unit_complex()
    s = ChainMap(unit, Z, {UNIT_LABEL: {TAU: ONE}})
    d0 = ChainMap(Z, unit, {TAU: {UNIT_LABEL: ONE}})
    d1 = ChainMap(Z, unit, {TAU: {UNIT_LABEL: ONE}, RHO0: {UNIT_LABEL: ONE}})
    return PathComplexZ(Z, unit, s, d0, d1)


@dataclass(frozen=True, eq=False)
class PathFactorization:
    X: ChainComplex
    ZX: ChainComplex
    XX: ChainComplex
    s: ChainMap
    d0: ChainMap
    d1: ChainMap
    pair: ChainMap
    diag: ChainMap
    verdicts: dict[str, bool] = field(default_factory=dict)
    s_report: QuasiIsoReport | None = None


@lru_cache(maxsize=None)
def path_tensor(X: ChainComplex) -> ChainComplex:
    """Z⊗X, cached per complex so that its tensor powers are shared."""
    return tensor(make_Z().complex, X)


def structure_maps(X: ChainComplex) -> tuple[ChainMap, ChainMap, ChainMap]:
    """(s, d0, d1) between X and Z⊗X."""
    Z = make_Z()
    ZX = path_tensor(X)
    s = ChainMap(X, ZX, {x: {tensor_label(TAU, x): ONE} for x in X.all_labels()})
    maps = []
    for d in (Z.d0, Z.d1):
        columns: dict[str, Vector] = {}
        for z, image in d.columns.items():
            c = image[UNIT_LABEL]
            for x in X.all_labels():
                columns[tensor_label(z, x)] = {x: c}
        maps.append(ChainMap(ZX, X, columns))
    return s, maps[0], maps[1]


def path_object(X: ChainComplex) -> PathFactorization:
    """
    The factorization X -> Z⊗X -> X⊕X of the diagonal.

    Raises FactorizationFailure when any of the model-category properties fails.
    """
    ZX = path_tensor(X)
    s, d0, d1 = structure_maps(X)
    XX = direct_sum([("X0", X), ("X1", X)])
    identity = identity_map(X)
    diag = map_into_sum(XX, [("X0", identity), ("X1", identity)])
    pair = map_into_sum(XX, [("X0", d0), ("X1", d1)])
    composite = compose_maps(pair, s)
    s_report = quasi_iso_report(s)
    verdicts = {
        "chain_maps": not any(chain_map_defects(f) for f in (s, d0, d1, pair)),
        "pair_after_s_is_diagonal": all(
            linalg.vectors_equal(composite.image(x), diag.image(x)) for x in X.all_labels()
        ),
        "s_injective": all(injective_degrees(s).values()),
        "s_quasi_iso": s_report.quasi_iso,
        "pair_surjective": all(surjective_degrees(pair).values()),
        "d0_quasi_iso": is_quasi_iso(d0),
        "d1_quasi_iso": is_quasi_iso(d1),
    }
    failed = [name for name, ok in verdicts.items() if not ok]
    if failed:
        raise FactorizationFailure(f"path object of a {X.dim}-dimensional complex fails: {', '.join(failed)}")
    log.debug("path object: dim Z⊗X = %d", ZX.dim)
    return PathFactorization(X, ZX, XX, s, d0, d1, pair, diag, verdicts, s_report)


@dataclass(frozen=True, eq=False)
class SplitZ:
    tilde: ChainComplex
    tilde_inclusion: ChainMap
    tau_inclusion: ChainMap


def split_Z() -> SplitZ:
    """Z = Z̃ ⊕ ℚτ with Z̃ spanned by ρ0, ρ1, σ0, σ1."""
    Z = make_Z()
    keep = [label for label in Z.complex.all_labels() if label != TAU]
    tilde = ChainComplex(
        {n: tuple(label for label in Z.complex.labels(n) if label != TAU) for n in Z.complex.degrees},
        {k: dict(v) for k, v in Z.complex.differential.items()},
    )
    inclusion = ChainMap(tilde, Z.complex, {label: {label: ONE} for label in keep})
    return SplitZ(tilde, inclusion, Z.s)


def split_Z_power(m: int) -> SplitZ:
    """Z^{⊗m} = S_m ⊕ ℚτ^{⊗m}, S_m spanned by the words other than τ^{⊗m}."""
    power = tensor_power(make_Z().complex, m)
    tau_word = power.labels[(TAU,) * m]
    C = power.complex
    S = ChainComplex(
        {n: tuple(label for label in C.labels(n) if label != tau_word) for n in C.degrees},
        {k: dict(v) for k, v in C.differential.items()},
    )
    inclusion = ChainMap(S, C, {label: {label: ONE} for label in S.all_labels()})
    tau_inclusion = ChainMap(unit_complex(), C, {UNIT_LABEL: {tau_word: ONE}})
    return SplitZ(S, inclusion, tau_inclusion)


@dataclass
class PushoutProductReport:
    pushout_dims: dict[int, int]
    image_dims: dict[int, int]
    cofibration: bool
    cokernel_homology: dict[int, int]
    expected_acyclic: bool

    @property
    def acyclic(self) -> bool:
        return not self.cokernel_homology

    @property
    def passed(self) -> bool:
        return self.cofibration and (self.acyclic or not self.expected_acyclic)

    def to_dict(self) -> dict:
        return {
            "pushout_dims": self.pushout_dims,
            "image_dims": self.image_dims,
            "cofibration": self.cofibration,
            "cokernel_homology": self.cokernel_homology,
            "acyclic": self.acyclic,
            "expected_acyclic": self.expected_acyclic,
            "passed": self.passed,
        }


def pushout_product(i: ChainMap, j: ChainMap) -> PushoutProductReport:
    """
    The map A⊗D ⊕_{A⊗C} B⊗C -> B⊗D for injections i: A -> B, j: C -> D.

    It is injective, and acyclic when i or j is a quasi-isomorphism.
    """
    if not (is_cofibration(i) and is_cofibration(j)):
        raise ShapeMismatch("pushout-product needs two injective chain maps")
    A, B, C, D = i.source, i.target, j.source, j.target
    BD = tensor(B, D)
    left = tensor_maps(i, identity_map(D))
    right = tensor_maps(identity_map(B), j)
    AD, BC, AC = tensor(A, D), tensor(B, C), tensor(A, C)
    both = direct_sum([("AD", AD), ("BC", BC)])
    columns = {sum_label("AD", k): v for k, v in left.columns.items()}
    columns.update({sum_label("BC", k): v for k, v in right.columns.items()})
    combined = ChainMap(both, BD, columns)
    degrees = sorted(set(BD.degrees) | set(both.degrees), reverse=True)
    pushout_dims = {
        n: len(AD.labels(n)) + len(BC.labels(n)) - len(AC.labels(n))
        for n in degrees
    }
    image_dims = {
        n: linalg.rank(combined.block(n), both.labels(n)) if both.labels(n) else 0 for n in degrees
    }
    quotient, _ = cokernel(combined)
    report = PushoutProductReport(
        {n: v for n, v in pushout_dims.items() if v},
        {n: v for n, v in image_dims.items() if v},
        pushout_dims == image_dims,
        homology(quotient),
        is_quasi_iso(i) or is_quasi_iso(j),
    )
    log.info("pushout-product: cofibration=%s acyclic=%s", report.cofibration, report.acyclic)
    return report
