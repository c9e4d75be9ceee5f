from fractions import Fraction

import pytest

from propcalc.errors import ArityMismatch, ShapeMismatch, TruncationExceeded
from propcalc.samples import GENERATOR, PRODUCT, ForestProp, forest_label, forest_word, forests
from propcalc.words import (
    Combination,
    Gen,
    Horizontal,
    Permuted,
    Unit,
    Vertical,
    Zero,
    evaluate_word,
    generators_of,
    word_biarity,
    word_degree,
    word_from_json,
    word_to_json,
)

ONE = Fraction(1)
ARITIES = {GENERATOR: (2, 1)}
LEFT_COMB = Vertical(Gen(GENERATOR), Horizontal(Gen(GENERATOR), Unit(1)))


class TestBiarity:
    def test_generator_and_units(self):
        assert word_biarity(Gen(GENERATOR), ARITIES) == (2, 1)
        assert word_biarity(Unit(3), ARITIES) == (3, 3)

    def test_composite(self):
        assert word_biarity(LEFT_COMB, ARITIES) == (3, 1)

    def test_mismatched_vertical(self):
        with pytest.raises(ArityMismatch):
            word_biarity(Vertical(Gen(GENERATOR), Gen(GENERATOR)), ARITIES)

    def test_unknown_generator(self):
        with pytest.raises(ArityMismatch):
            word_biarity(Gen("h"), ARITIES)

    def test_permutation_of_wrong_length(self):
        with pytest.raises(ArityMismatch):
            word_biarity(Permuted(Gen(GENERATOR), None, (0, 1, 2)), ARITIES)

    def test_mixed_combination(self):
        with pytest.raises(ArityMismatch):
            word_biarity(Combination(((ONE, Unit(1)), (ONE, Unit(2)))), ARITIES)


class TestDegreeAndGenerators:
    def test_degree_adds_up(self):
        assert word_degree(LEFT_COMB, {GENERATOR: 1}) == 2

    def test_mixed_degree_combination(self):
        word = Combination(((ONE, Gen(GENERATOR)), (ONE, Zero(2, 1))))
        assert word_degree(word, {GENERATOR: 1}) is None

    def test_generators_of(self):
        assert generators_of(LEFT_COMB) == {GENERATOR}
        assert generators_of(Unit(2)) == set()


class TestEvaluate:
    def test_forest_words_reproduce_their_forest(self):
        P = ForestProp(3)
        assignment = {GENERATOR: {PRODUCT: ONE}}
        for m in range(4):
            for n in range(4):
                for forest in forests(m, n):
                    label = forest_label(forest)
                    assert evaluate_word(P, forest_word(forest), assignment, ARITIES) == {label: ONE}

    def test_combination(self):
        P = ForestProp(2)
        word = Combination(((Fraction(2), Gen(GENERATOR)), (Fraction(-1), Permuted(Gen(GENERATOR), None, (1, 0)))))
        value = evaluate_word(P, word, {GENERATOR: {PRODUCT: ONE}}, ARITIES)
        assert value == {"[0,1]": Fraction(2), "[1,0]": Fraction(-1)}

    def test_word_beyond_the_bound(self):
        P = ForestProp(2)
        with pytest.raises(TruncationExceeded):
            evaluate_word(P, Horizontal(Gen(GENERATOR), Gen(GENERATOR)), {GENERATOR: {PRODUCT: ONE}}, ARITIES)


class TestJson:
    def test_round_trip(self):
        word = Combination(((Fraction(1, 2), Permuted(LEFT_COMB, None, (2, 0, 1))), (ONE, Zero(3, 1))))
        assert word_from_json(word_to_json(word)) == word

    def test_bare_string_is_a_generator(self):
        assert word_from_json("g") == Gen("g")

    def test_unknown_shape(self):
        with pytest.raises(ShapeMismatch):
            word_from_json({"bogus": 1})
