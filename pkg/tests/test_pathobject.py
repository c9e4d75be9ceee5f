from fractions import Fraction

import pytest

from propcalc.errors import ShapeMismatch
from propcalc.gradedlinear import chain_map_defects, homology, make_complex
from propcalc.pathobject import (
    RHO0,
    SIG0,
    TAU,
    make_Z,
    path_object,
    path_tensor,
    pushout_product,
    split_Z,
    split_Z_power,
    structure_maps,
)

ONE = Fraction(1)


class TestIntervalComplex:
    def test_shape(self):
        Z = make_Z()
        assert Z.complex.dims() == {0: 3, -1: 2}
        assert Z.complex.d({RHO0: ONE}) == {SIG0: ONE}

    def test_structure_maps(self):
        Z = make_Z()
        for f in (Z.s, Z.d0, Z.d1):
            assert chain_map_defects(f) == []
        assert Z.d1.image(RHO0) == {"1": ONE}
        assert Z.d0.image(RHO0) == {}

    def test_tilde_part_is_acyclic(self):
        assert homology(split_Z().tilde) == {}

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_complement_of_tau_power_is_acyclic(self, m):
        split = split_Z_power(m)
        assert homology(split.tilde) == {}
        assert split.tau_inclusion.image("1") == {"⋆".join([TAU] * m): ONE}


class TestPathObject:
    @pytest.mark.parametrize(
        "X",
        [
            make_complex({0: ["x"]}),
            make_complex({1: ["u"], 0: ["v", "w"]}),
            make_complex({1: ["a"], 0: ["b"]}, {"a": {"b": 1}}),
        ],
        ids=["point", "two_degrees", "acyclic"],
    )
    def test_factorization(self, X):
        factorization = path_object(X)
        assert all(factorization.verdicts.values())
        assert factorization.ZX.dim == 5 * X.dim
        assert factorization.XX.dim == 2 * X.dim

    def test_structure_maps_on_tensor(self):
        X = make_complex({0: ["x"]})
        s, d0, d1 = structure_maps(X)
        assert s.target is path_tensor(X)
        assert d0.image(f"{TAU}⋆x") == {"x": ONE}
        assert d1.image(f"{RHO0}⋆x") == {"x": ONE}


class TestPushoutProduct:
    def test_acyclic_cofibration_with_cofibration(self):
        report = pushout_product(make_Z().s, split_Z().tilde_inclusion)
        assert report.cofibration
        assert report.expected_acyclic
        assert report.acyclic
        assert report.passed

    def test_needs_injections(self):
        with pytest.raises(ShapeMismatch):
            pushout_product(make_Z().d0, make_Z().s)
