from fractions import Fraction

import pytest

from propcalc.config import Settings
from propcalc.errors import ClosureViolation, ShapeMismatch, TruncationExceeded
from propcalc.gradedlinear import compose_maps, identity_map, make_chain_map, make_complex
from propcalc.lifting import algebra_from_generators
from propcalc.pathobject import make_Z
from propcalc.pdiagramprops import build_end_ZP
from propcalc.propcore import (
    Arrow,
    EndomorphismProp,
    PAlgebra,
    ProductProp,
    PropMorphism,
    SubProp,
    check_algebra,
    check_algebra_morphism,
    check_prop_axioms,
    check_prop_morphism,
    compose_morphisms,
    diagram_endomorphism_prop,
    end_isomorphism,
    endomorphism_prop,
    identity_morphism,
    make_diagram,
    product_morphism,
    projection_morphism,
    restriction_morphism,
    sub_diagram,
    tabulate,
)
from propcalc.samples import ForestProp, PermutationProp, UnitProp, forest_presentation, unit_action

ONE = Fraction(1)


def _acyclic():
    return make_complex({1: ["a"], 0: ["b"]}, {"a": {"b": 1}})


def _point():
    return make_complex({0: ["x"]})


def _product_algebra(P, X, scale=1):
    """The forest action on a one-dimensional carrier with g(x⋆x) = scale·x."""
    pres = forest_presentation(P)
    end_X = EndomorphismProp(X, P.bound, "End_X")
    images = {"g": end_X.from_columns(2, 1, {"x⋆x": {"x": Fraction(scale)}})}
    return pres, algebra_from_generators(pres, X, images)


class TestPropAxioms:
    @pytest.mark.parametrize("factory", [UnitProp, PermutationProp, ForestProp])
    def test_sample_props(self, factory):
        report = check_prop_axioms(factory(2))
        assert report.passed, report.violations[:3]

    def test_endomorphism_prop_with_odd_elements(self):
        report = check_prop_axioms(EndomorphismProp(_acyclic(), 2))
        assert report.passed, report.violations[:3]

    def test_tabulated_prop(self):
        assert check_prop_axioms(tabulate(ForestProp(2))).passed

    def test_corrupted_table_is_caught(self):
        T = tabulate(ForestProp(2))
        key = next(k for k in T.vertical_table if k[0] == (1, 1))
        T.vertical_table[key] = {}
        report = check_prop_axioms(T)
        assert not report.passed
        assert report.violations_of("left_unit")

    def test_hadamard_with_interval_endomorphisms(self):
        ezp = build_end_ZP(UnitProp(1))
        assert ezp.component(1, 1).dim == 25
        assert check_prop_axioms(ezp).passed

    def test_counts_are_exhaustive_for_small_props(self):
        report = check_prop_axioms(UnitProp(2))
        assert all(entry["exhaustive"] for entry in report.counts.values())

    def test_sampling_is_recorded(self):
        report = check_prop_axioms(ForestProp(2), Settings(max_tuples=1))
        assert any(not entry["exhaustive"] for entry in report.counts.values())

    def test_empty_arities_can_be_left_out(self):
        full = check_prop_axioms(UnitProp(2))
        reduced = check_prop_axioms(UnitProp(2), Settings(include_empty_units=False))
        assert reduced.passed
        assert sum(e["total"] for e in reduced.counts.values()) < sum(e["total"] for e in full.counts.values())

    def test_threads_give_the_same_verdict(self):
        one = check_prop_axioms(ForestProp(2), Settings(threads=1)).to_dict()
        four = check_prop_axioms(ForestProp(2), Settings(threads=4)).to_dict()
        assert one == four


class TestTruncation:
    def test_component_out_of_bound(self):
        with pytest.raises(TruncationExceeded):
            UnitProp(1).component(2, 2)

    def test_horizontal_out_of_bound(self):
        P = ForestProp(2)
        with pytest.raises(TruncationExceeded):
            P.horizontal({"[0,1]": ONE}, (2, 1), {"[0,1]": ONE}, (2, 1))


class TestMorphisms:
    def test_identity(self):
        assert check_prop_morphism(identity_morphism(ForestProp(2))).passed

    def test_zero_map_breaks_units(self):
        P = ForestProp(2)
        zero = PropMorphism(P, P, lambda m, n, x: {}, name="zero")
        report = check_prop_morphism(zero)
        assert report.violations_of("unit")

    def test_composition_and_products(self):
        P = ForestProp(2)
        product = ProductProp([("A", P), ("B", P)])
        diagonal = product_morphism(product, [("A", identity_morphism(P)), ("B", identity_morphism(P))])
        back = compose_morphisms(projection_morphism(product, "B"), diagonal)
        assert check_prop_morphism(diagonal).passed
        assert back.image(2, 1, "[1,0]") == {"[1,0]": ONE}


class TestAlgebras:
    def test_unit_action_on_a_point(self):
        P = UnitProp(2)
        X = _point()
        assert check_algebra(P, X, unit_action(P, X)).passed

    def test_unit_action_needs_trivial_symmetries(self):
        P = UnitProp(2)
        X = make_complex({1: ["a", "b"]})
        report = check_algebra(P, X, unit_action(P, X))
        assert report.violations_of("right_action")

    def test_action_on_wrong_prop(self):
        X = _point()
        with pytest.raises(ShapeMismatch):
            check_algebra(UnitProp(2), X, unit_action(UnitProp(2), X))

    def test_forest_product_action(self):
        P = ForestProp(2)
        X = _point()
        _, action = _product_algebra(P, X)
        assert check_algebra(P, X, action).passed

    def test_algebra_morphism(self):
        P = ForestProp(2)
        X = _point()
        _, action = _product_algebra(P, X)
        assert check_algebra_morphism(action, action, identity_map(X)).passed
        doubling = make_chain_map(X, X, {"x": {"x": 2}})
        assert not check_algebra_morphism(action, action, doubling).passed


class TestDiagrams:
    def _diagram(self):
        X = make_complex({0: ["x0", "x1"]})
        Y = make_complex({0: ["y0", "y1"]})
        u = make_chain_map(X, Y, {"x0": {"y0": 1}, "x1": {"y1": 1}})
        return make_diagram([("X", X), ("Y", Y)], [Arrow("u", "X", "Y", u)])

    def test_isomorphism_determines_the_family(self):
        E = diagram_endomorphism_prop(self._diagram(), 1)
        assert E.component(1, 1).dim == E.ends["X"].component(1, 1).dim == 4
        pr = end_isomorphism(E, "X")
        assert check_prop_morphism(pr).passed

    def test_square_defects(self):
        E = diagram_endomorphism_prop(self._diagram(), 1)
        family = {"X": E.ends["X"].unit(1), "Y": {}}
        assert E.commuting_square_defects(1, 1, family) == ["u"]

    def test_non_commuting_family_is_not_in_the_carrier(self):
        E = diagram_endomorphism_prop(self._diagram(), 1)
        with pytest.raises(ClosureViolation):
            E.from_family(1, 1, {"X": E.ends["X"].unit(1), "Y": {}})

    def test_unknown_arrow_endpoint(self):
        X = _point()
        with pytest.raises(ShapeMismatch):
            make_diagram([("X", X)], [Arrow("u", "X", "Y", identity_map(X))])

    def test_subprop_of_whole_prop(self):
        D = self._diagram()
        E = diagram_endomorphism_prop(D, 1)
        assert isinstance(E, SubProp)
        assert check_prop_axioms(E).passed

    def test_coreflexive_section_splits_both_cofaces(self):
        E = diagram_endomorphism_prop(self._diagram(), 1)
        d0, d1, _ = E.cofaces(1, 1)
        s0 = E.coreflexive_section(1, 1)
        for coface in (d0, d1):
            composite = compose_maps(s0, coface)
            assert all(composite.image(x) == {x: ONE} for x in E.ambient.component(1, 1).all_labels())

    def test_two_copies_without_arrows(self):
        X = _acyclic()
        T = diagram_endomorphism_prop(make_diagram([("X0", X), ("X1", X)], []), 1)
        assert T.component(1, 1).dim == 2 * endomorphism_prop(X, 1).component(1, 1).dim

    def test_identity_arrow_adds_no_constraint(self):
        X = _acyclic()
        D = make_diagram([("X", X), ("X'", X)], [Arrow("id", "X", "X'", identity_map(X))])
        E = diagram_endomorphism_prop(D, 1)
        assert E.component(1, 1).dims() == endomorphism_prop(X, 1).component(1, 1).dims()

    def test_restriction_to_a_sub_diagram(self):
        D = self._diagram()
        E = diagram_endomorphism_prop(D, 1)
        F = diagram_endomorphism_prop(sub_diagram(D, ["X"]), 1)
        r = restriction_morphism(E, F)
        assert check_prop_morphism(r).passed
        assert F.component(1, 1).dim == E.component(1, 1).dim


class TestEndomorphismProp:
    def test_interval_complex_dims(self):
        assert endomorphism_prop(make_Z().complex, 1).component(1, 1).dims() == {1: 6, 0: 13, -1: 6}

    def test_vertical_is_matrix_product(self):
        X = make_complex({0: ["x0", "x1"]})
        E = endomorphism_prop(X, 1)
        a = E.from_columns(1, 1, {"x0": {"x0": ONE, "x1": ONE}, "x1": {"x1": Fraction(2)}})
        b = E.from_columns(1, 1, {"x0": {"x1": ONE}, "x1": {"x0": Fraction(3)}})
        product = E.as_columns(1, 1, E.vertical(a, b, 1, 1, 1))
        assert product == {"x0": {"x1": Fraction(2)}, "x1": {"x0": Fraction(3), "x1": Fraction(3)}}

    def test_algebra_record(self):
        P = UnitProp(1)
        X = _point()
        algebra = PAlgebra(X, unit_action(P, X))
        assert check_algebra(P, algebra.carrier, algebra.action).passed
