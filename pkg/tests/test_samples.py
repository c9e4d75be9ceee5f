from fractions import Fraction

import pytest

from propcalc.errors import InvalidLabel, ShapeMismatch
from propcalc.gradedlinear import make_complex
from propcalc.lifting import check_presentation
from propcalc.propcore import EndomorphismProp, check_algebra, check_prop_axioms
from propcalc.samples import (
    ForestProp,
    PermutationProp,
    UnitProp,
    endomorphism_table,
    forest_label,
    forest_presentation,
    forests,
    parse_forest,
    parse_perm_label,
    perm_label,
    permutation_action,
    product_element,
    trees_on,
    unit_presentation,
)

ONE = Fraction(1)


class TestForestLabels:
    def test_round_trip(self):
        for label in ("[[0,2],1]", "0;[1,2]", "empty", "[10,3]"):
            assert forest_label(parse_forest(label)) == label

    @pytest.mark.parametrize("label", ["[0,", "[0;1]", "a", "[0,1]x"])
    def test_malformed(self, label):
        with pytest.raises(InvalidLabel):
            parse_forest(label)

    def test_trees_on_three_leaves(self):
        assert len(trees_on(frozenset({0, 1, 2}))) == 12


class TestForestProp:
    @pytest.mark.parametrize(
        "biarity,dim",
        [((0, 0), 1), ((1, 1), 1), ((2, 1), 2), ((3, 1), 12), ((2, 2), 2), ((3, 2), 12), ((3, 3), 6), ((0, 1), 0), ((1, 2), 0)],
    )
    def test_dims(self, biarity, dim):
        assert ForestProp(3).component(*biarity).dim == dim

    def test_dims_match_forest_count(self):
        P = ForestProp(3)
        for m, n in P.biarities():
            assert P.component(m, n).dim == len(forests(m, n))

    def test_vertical_substitutes_into_leaves(self):
        P = ForestProp(3)
        value = P.vertical({"[0,1]": ONE}, {"[0,1];2": ONE}, 3, 2, 1)
        assert value == {"[[0,1],2]": ONE}

    def test_horizontal_shifts_leaves(self):
        P = ForestProp(3)
        assert P.horizontal({"[0,1]": ONE}, (2, 1), {"0": ONE}, (1, 1)) == {"[0,1];2": ONE}

    def test_actions(self):
        P = ForestProp(2)
        assert P.act_right(2, 1, {"[0,1]": ONE}, (1, 0)) == {"[1,0]": ONE}
        assert P.act_left(2, 2, (1, 0), {"0;1": ONE}) == {"1;0": ONE}

    @pytest.mark.slow
    def test_axioms_at_bound_three(self):
        assert check_prop_axioms(ForestProp(3)).passed

    def test_presentation(self):
        report = check_presentation(forest_presentation(ForestProp(3)))
        assert report.passed, report.violations[:3]


class TestPermutationProp:
    def test_labels(self):
        assert perm_label((2, 0, 1)) == "2-0-1"
        assert perm_label(()) == "e"
        assert parse_perm_label("e") == ()

    def test_bad_label(self):
        with pytest.raises(InvalidLabel):
            parse_perm_label("1-x")

    def test_composition(self):
        P = PermutationProp(3)
        assert P.vertical({"1-0": ONE}, {"1-0": ONE}, 2, 2, 2) == {"0-1": ONE}
        assert P.horizontal({"1-0": ONE}, (2, 2), {"0": ONE}, (1, 1)) == {"1-0-2": ONE}

    def test_acts_on_any_complex(self):
        P = PermutationProp(2)
        X = make_complex({1: ["a"], 0: ["b"]}, {"a": {"b": 1}})
        assert check_algebra(P, X, permutation_action(P, X)).passed


class TestUnitProp:
    def test_only_diagonal_components(self):
        P = UnitProp(2)
        assert [P.component(m, n).dim for m, n in P.biarities()] == [1, 0, 0, 0, 1, 0, 0, 0, 1]

    def test_presentation(self):
        assert check_presentation(unit_presentation(UnitProp(2))).passed


class TestProductElement:
    def test_builds_a_binary_operation(self):
        X = make_complex({0: ["x0", "x1"]})
        end_X = EndomorphismProp(X, 2)
        v = product_element(end_X, {("x0", "x1"): {"x1": ONE}})
        assert end_X.as_columns(2, 1, v) == {"x0⋆x1": {"x1": ONE}}

    def test_unknown_labels(self):
        X = make_complex({0: ["x0"]})
        with pytest.raises(ShapeMismatch):
            product_element(EndomorphismProp(X, 2), {("x0", "zz"): {"x0": ONE}})

    def test_endomorphism_table(self):
        X = make_complex({0: ["x0"]})
        T = endomorphism_table(X, 1)
        assert T.component(1, 1).dim == 1
        assert check_prop_axioms(T).passed
