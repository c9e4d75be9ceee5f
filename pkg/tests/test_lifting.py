from dataclasses import replace
from fractions import Fraction

import pytest

from propcalc.errors import CompatibilityFailure, InconsistentPresentation, NoSolution, ShapeMismatch
from propcalc.gradedlinear import identity_map, make_complex
from propcalc.lifting import (
    LiftProblem,
    algebra_from_generators,
    check_presentation,
    check_zigzag_naturality,
    functorial_path_action,
    lift,
    verify_homotopy_zigzag,
)
from propcalc.pathobject import RHO0
from propcalc.pdiagramprops import build_corner_square, build_end_calYP
from propcalc.propcore import EndomorphismProp, PropMorphism, compose_morphisms, identity_morphism
from propcalc.samples import (
    GENERATOR,
    PRODUCT,
    ForestProp,
    UnitProp,
    forest_presentation,
    unit_action,
    unit_presentation,
)
from propcalc.words import Gen

ONE = Fraction(1)


def _make_unit_lift():
    P = UnitProp(1)
    calY, pi = build_end_calYP(P)
    pres = unit_presentation(P)
    result = lift(LiftProblem(pres, pi, identity_morphism(P)))
    return P, calY, pi, pres, result


class TestCheckPresentation:
    def test_forest_presentation_passes(self):
        assert check_presentation(forest_presentation(ForestProp(2))).passed

    def test_unit_presentation_passes(self):
        assert check_presentation(unit_presentation(UnitProp(2))).passed

    def test_missing_word(self):
        pres = forest_presentation(ForestProp(2))
        words = {k: dict(v) for k, v in pres.words.items()}
        del words[(2, 1)]["[1,0]"]
        report = check_presentation(replace(pres, words=words))
        assert [v.witness["basis"] for v in report.violations_of("missing_word")] == [["[1,0]"]]

    def test_word_for_another_basis_element(self):
        pres = forest_presentation(ForestProp(2))
        words = {k: dict(v) for k, v in pres.words.items()}
        words[(2, 1)]["[1,0]"] = words[(2, 1)][PRODUCT]
        report = check_presentation(replace(pres, words=words))
        assert report.violations_of("consistency")

    def test_generator_value_outside_component(self):
        pres = forest_presentation(ForestProp(2))
        report = check_presentation(replace(pres, values={GENERATOR: {"[0,1];0": ONE}}))
        assert report.violations_of("generator_value")

    def test_differential_uses_later_generator(self):
        pres = forest_presentation(ForestProp(2))
        report = check_presentation(replace(pres, differentials={GENERATOR: Gen(GENERATOR)}))
        assert report.violations_of("well_order")


class TestLift:
    def test_unit_prop_lifts(self):
        *_, result = _make_unit_lift()
        assert result.report.passed
        assert result.values == {}

    def test_generator_lifts_through_pi(self):
        P = ForestProp(2)
        calY, pi = build_end_calYP(P)
        result = lift(LiftProblem(forest_presentation(P), pi, identity_morphism(P)), verify=False)
        assert pi(2, 1, result.values[GENERATOR]) == {PRODUCT: ONE}
        assert calY.component(2, 1).degree(next(iter(result.values[GENERATOR]))) == 0

    @pytest.mark.slow
    def test_forest_lift_is_a_prop_morphism(self):
        P = ForestProp(2)
        _, pi = build_end_calYP(P)
        result = lift(LiftProblem(forest_presentation(P), pi, identity_morphism(P)))
        assert result.report.passed, result.report.violations

    def test_no_solution_when_pi_is_not_surjective(self):
        P = ForestProp(2)
        _, pi = build_end_calYP(P, section=RHO0)
        with pytest.raises(NoSolution) as excinfo:
            lift(LiftProblem(forest_presentation(P), pi, identity_morphism(P)))
        assert excinfo.value.generator == GENERATOR
        assert excinfo.value.witness

    def test_inconsistent_presentation(self):
        P = ForestProp(2)
        pres = forest_presentation(P)
        words = {k: dict(v) for k, v in pres.words.items()}
        words[(2, 1)].pop(PRODUCT)
        _, pi = build_end_calYP(P)
        with pytest.raises(InconsistentPresentation) as excinfo:
            lift(LiftProblem(replace(pres, words=words), pi, identity_morphism(P)))
        assert excinfo.value.conflicts

    def test_maps_must_fit(self):
        P = UnitProp(1)
        _, pi = build_end_calYP(P)
        with pytest.raises(ShapeMismatch):
            lift(LiftProblem(unit_presentation(P), pi, identity_morphism(UnitProp(1))))


class TestZigzag:
    def test_unit_action_on_point(self):
        P, _, _, pres, result = _make_unit_lift()
        X = make_complex({0: ["x"]})
        zigzag = functorial_path_action(pres, result.morphism, X, unit_action(P, X))
        assert all(zigzag.verdicts.values())
        assert set(zigzag.verdicts) == {"vertex_actions_match", "d0_quasi_iso", "d1_quasi_iso"}
        assert zigzag.to_dict()["dims"] == {"X": {0: 1}, "ZX": {0: 3, -1: 2}}

    def test_lift_must_land_in_calY(self):
        P = UnitProp(1)
        X = make_complex({0: ["x"]})
        with pytest.raises(ShapeMismatch):
            functorial_path_action(unit_presentation(P), identity_morphism(P), X, unit_action(P, X))

    def test_naturality_along_identity(self):
        P, _, _, pres, result = _make_unit_lift()
        X = make_complex({0: ["x"]})
        zigzag = functorial_path_action(pres, result.morphism, X, unit_action(P, X))
        assert check_zigzag_naturality(zigzag, zigzag, identity_map(X), pres).passed

    @pytest.mark.slow
    def test_forest_product_zigzag(self):
        P = ForestProp(2)
        X = make_complex({0: ["x"]})
        _, pi = build_end_calYP(P)
        pres = forest_presentation(P)
        result = lift(LiftProblem(pres, pi, identity_morphism(P)), verify=False)
        end_X = EndomorphismProp(X, P.bound, "End_X")
        action = algebra_from_generators(pres, X, {GENERATOR: end_X.from_columns(2, 1, {"x⋆x": {"x": ONE}})})
        zigzag = functorial_path_action(pres, result.morphism, X, action)
        assert all(zigzag.verdicts.values())
        assert zigzag.operations["ZX"][GENERATOR]


class TestHomotopyZigzag:
    def test_identity_homotopy(self):
        P, calY, _, _, result = _make_unit_lift()
        X = make_complex({0: ["x"]})
        square = build_corner_square(P, calY)
        homotopy = compose_morphisms(square.w, result.morphism)
        identity = identity_morphism(P)
        report = verify_homotopy_zigzag(P, homotopy, identity, identity, X, unit_action(P, X), calY)
        assert report.passed, report.violations
        assert report.details["d0"] == {"commutes": True, "weak_equivalence": True}

    def test_endpoints_must_match(self):
        P, calY, _, _, result = _make_unit_lift()
        X = make_complex({0: ["x"]})
        square = build_corner_square(P, calY)
        homotopy = compose_morphisms(square.w, result.morphism)
        zero = PropMorphism(P, P, lambda m, n, x: {}, name="zero")
        with pytest.raises(CompatibilityFailure):
            verify_homotopy_zigzag(P, homotopy, zero, identity_morphism(P), X, unit_action(P, X), calY)

    def test_homotopy_must_land_in_calZ(self):
        P = UnitProp(1)
        X = make_complex({0: ["x"]})
        identity = identity_morphism(P)
        with pytest.raises(ShapeMismatch):
            verify_homotopy_zigzag(P, identity, identity, identity, X, unit_action(P, X))
