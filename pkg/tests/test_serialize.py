import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import pytest

from propcalc.biobject import check_biobject
from propcalc.errors import InvalidLabel, ParseError, SquareZeroViolation
from propcalc.gradedlinear import homology
from propcalc.lifting import check_presentation
from propcalc.pathobject import make_Z
from propcalc.pdiagramprops import CalYProp
from propcalc.propcore import check_algebra, check_prop_axioms, check_prop_morphism, identity_morphism, tabulate
from propcalc.samples import ForestProp, UnitProp
from propcalc.serialize import (
    action_to_json,
    algebra_from_json,
    biobject_from_json,
    chain_map_from_json,
    chain_map_to_json,
    complex_from_json,
    complex_to_json,
    diagram_from_json,
    lift_from_json,
    lift_to_json,
    load_document,
    morphism_from_json,
    morphism_to_json,
    presentation_from_json,
    prop_from_json,
    prop_to_json,
    vector_to_json,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

Z_DOCUMENT = {
    "degrees": {"0": ["tau", "rho0", "rho1"], "-1": ["sig0", "sig1"]},
    "differential": {"rho0": {"sig0": "1"}, "rho1": {"sig1": "1"}},
}


def _load(name):
    return load_document(FIXTURES / name).data


def _algebra(name):
    data = _load(name)
    P = prop_from_json(data["prop"])
    pres = presentation_from_json(data["presentation"], P) if "presentation" in data else None
    algebra = algebra_from_json(data, P, pres)
    return P, algebra.carrier, algebra.action


class TestLoadDocument:
    def _write(self, text):
        fd, path = tempfile.mkstemp(suffix=".json")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        return path

    def test_reads_kind(self):
        doc = load_document(FIXTURES / "q.json")
        assert doc.kind == "complex"
        assert doc.path.endswith("q.json")

    def test_bad_json_reports_line(self):
        path = self._write('{\n  "kind": "complex",\n  "basis": \n}\n')
        try:
            with pytest.raises(ParseError) as excinfo:
                load_document(path)
            assert excinfo.value.line == 4
        finally:
            os.unlink(path)

    def test_missing_kind(self):
        path = self._write(json.dumps({"components": {}}))
        try:
            with pytest.raises(ParseError):
                load_document(path)
        finally:
            os.unlink(path)

    def test_complex_without_kind(self):
        path = self._write(json.dumps(Z_DOCUMENT))
        try:
            doc = load_document(path)
            assert doc.kind == "complex"
            assert homology(complex_from_json(doc.data, doc.path)) == {0: 1}
        finally:
            os.unlink(path)

    def test_missing_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(ParseError):
                load_document(os.path.join(tmpdir, "absent.json"))


class TestComplexes:
    def test_sample_Z(self):
        assert complex_from_json({"sample": "Z"}) is make_Z().complex

    def test_fixture(self):
        X = complex_from_json(_load("two_degrees.json"))
        assert X.dims() == {1: 1, 0: 2}

    def test_square_zero_is_checked(self):
        with pytest.raises(SquareZeroViolation):
            complex_from_json(_load("bad_square.json"))

    def test_reserved_characters(self):
        with pytest.raises(InvalidLabel):
            complex_from_json({"degrees": {"0": ["a⋆b"]}})

    def test_bad_coefficient(self):
        with pytest.raises(ParseError):
            complex_from_json({"degrees": {"1": ["a"], "0": ["b"]}, "differential": {"a": {"b": "1/0"}}})

    def test_non_integer_degree(self):
        with pytest.raises(ParseError):
            complex_from_json({"degrees": {"zero": ["a"]}})

    def test_written_form_reads_back(self):
        X = complex_from_json(_load("acyclic.json"))
        again = complex_from_json(complex_to_json(X))
        assert again.dims() == X.dims()
        assert homology(again) == {}

    def test_written_form_uses_degrees(self):
        data = complex_to_json(complex_from_json(Z_DOCUMENT))
        assert set(data["degrees"]) == {"-1", "0"}
        assert sorted(data["degrees"]["0"]) == ["rho0", "rho1", "tau"]
        assert "basis" not in data

    def test_basis_is_read_as_degrees(self):
        X = complex_from_json({"basis": {"0": ["a"]}})
        assert X.dims() == {0: 1}

    def test_chain_map_reads_back(self):
        Z = make_Z()
        f = chain_map_from_json(json.loads(json.dumps(chain_map_to_json(Z.d1))))
        assert f.image("rho0") == {"1": Fraction(1)}
        assert f.source.dims() == {0: 3, -1: 2}

    def test_vector_to_json(self):
        assert vector_to_json({"b": Fraction(1, 2), "a": Fraction(3), "c": Fraction(0)}) == {"a": "3", "b": "1/2"}


class TestProps:
    def test_explicit_table(self):
        P = prop_from_json(_load("unit_table.json"))
        assert P.component(2, 2).dims() == {0: 1}
        assert check_prop_axioms(P).passed

    def test_samples_are_written_by_name(self):
        assert prop_to_json(ForestProp(2)) == {"kind": "prop", "sample": "forest", "bound": 2}

    def test_unknown_sample(self):
        with pytest.raises(ParseError):
            prop_from_json({"sample": "monoid", "bound": 2})

    def test_tables_read_back(self):
        data = prop_to_json(tabulate(ForestProp(2), "F"))
        P = prop_from_json(json.loads(json.dumps(data)))
        assert P.component(2, 1).dims() == {0: 2}
        assert P.component(2, 2).dims() == {0: 2}
        assert check_prop_axioms(P).passed

    def test_endomorphisms(self):
        P = prop_from_json(_load("end_q2.json"))
        assert P.component(2, 1).dim == 8

    def test_bad_biarity_key(self):
        with pytest.raises(ParseError):
            prop_from_json({"bound": 1, "components": {"one": {"degrees": {"0": ["x"]}}}})

    def test_flat_and_nested_label_pairs(self):
        P = prop_from_json(_load("unit_table.json"))
        assert P.vertical_table[((1, 1), (1, 1), "id", "id")] == {"id": Fraction(1)}
        assert P.horizontal_table[((0, 0), (1, 1), "id", "id")] == {"id": Fraction(1)}

    def test_pair_tables_are_keyed_by_biarities(self):
        data = json.loads(json.dumps(prop_to_json(tabulate(ForestProp(2), "F"))))
        assert "1,1|2,1" in data["vertical"]
        for key, rows in data["vertical"].items():
            top, bottom = key.split("|")
            assert top.split(",")[0] == bottom.split(",")[1]
            assert all(isinstance(images, dict) for images in rows.values())
        assert all(name.startswith("s") for gens in data["left"].values() for name in gens)

    def test_bad_pair_key(self):
        data = _load("unit_table.json")
        data["vertical"] = {"1,1": {"id,id": {"id": "1"}}}
        with pytest.raises(ParseError):
            prop_from_json(data)

    def test_unknown_label_pair(self):
        data = _load("unit_table.json")
        data["vertical"] = {"1,1|1,1": {"id,x": {"id": "1"}}}
        with pytest.raises(ParseError):
            prop_from_json(data)

    def test_generator_out_of_range(self):
        data = _load("unit_table.json")
        data["left"] = {"2,2": {"s2": {"id": {"id": "1"}}}}
        with pytest.raises(ParseError):
            prop_from_json(data)

    def test_morphism_reads_back(self):
        P = UnitProp(1)
        data = json.loads(json.dumps(morphism_to_json(identity_morphism(P))))
        assert data["source"] == {"kind": "prop", "sample": "unit", "bound": 1}
        f = morphism_from_json(data, P, P)
        assert f.image(1, 1, "id") == {"id": Fraction(1)}
        assert check_prop_morphism(f).passed

    def test_bound_override(self):
        assert prop_from_json({"sample": "unit", "bound": 2}, bound=1).bound == 1


class TestBiobjects:
    def test_swap_and_sign(self):
        M = biobject_from_json(_load("biobject_swap.json"))
        report = check_biobject(M)
        assert report.passed
        assert M.act_left(0, 2, (1, 0), {"a": Fraction(1)}) == {"b": Fraction(1)}

    def test_broken_involution(self):
        report = check_biobject(biobject_from_json(_load("biobject_bad_involution.json")))
        assert [v.witness["label"] for v in report.violations_of("involution")] == ["a"]

    def test_generator_beyond_arity(self):
        with pytest.raises(ParseError) as excinfo:
            biobject_from_json(_load("biobject_bad_key.json"))
        assert excinfo.value.field == "left.2,0.s1"

    @pytest.mark.parametrize("name", ["t1", "s", "1", "s0"])
    def test_malformed_generator(self, name):
        data = _load("biobject_swap.json")
        data["left"] = {"0,2": {name: {"a": {"b": "1"}, "b": {"a": "1"}}}}
        with pytest.raises(ParseError):
            biobject_from_json(data)


class TestPresentations:
    def test_sample(self):
        P = ForestProp(2)
        assert check_presentation(presentation_from_json({"kind": "presentation", "sample": "forest"}, P)).passed

    def test_explicit_words(self):
        data = _load("forest_presentation_b2.json")
        P = prop_from_json(data["prop"])
        pres = presentation_from_json(data, P)
        assert [g.symbol for g in pres.generators] == ["g"]
        assert check_presentation(pres).passed

    def test_sample_must_fit_prop(self):
        with pytest.raises(ParseError):
            presentation_from_json({"sample": "forest"}, UnitProp(2))


class TestAlgebras:
    def test_unit_action(self):
        P, X, action = _algebra("algebra_q_unit.json")
        assert check_algebra(P, X, action).passed

    def test_generator_images(self):
        P, X, action = _algebra("algebra_q2_product.json")
        assert check_algebra(P, X, action).passed

    def test_image_that_is_not_a_chain_map(self):
        P, X, action = _algebra("algebra_bad_chain_map.json")
        report = check_algebra(P, X, action)
        assert report.violations_of("chain_map")

    def test_unit_action_needs_unit_prop(self):
        data = _load("algebra_q_unit.json")
        with pytest.raises(ParseError):
            algebra_from_json(data, ForestProp(2))

    def test_table_form_reads_back(self):
        P, X, action = _algebra("algebra_q_mult.json")
        data = json.loads(json.dumps(action_to_json(X, action)))
        again = algebra_from_json(data, P)
        assert check_algebra(P, again.carrier, again.action).passed
        assert again.action.image(2, 1, "[0,1]") == action.image(2, 1, "[0,1]")

    def test_unknown_tensor_word(self):
        data = _load("algebra_q_mult.json")
        data["action"]["images"]["g"] = {"x⋆y": {"x": "1"}}
        P = ForestProp(2)
        pres = presentation_from_json(data["presentation"], P)
        with pytest.raises(ParseError):
            algebra_from_json(data, P, pres)


class TestDiagramsAndLifts:
    def test_diagram(self):
        D = diagram_from_json(_load("diagram_identity.json"))
        assert D.names() == ["X", "Y"]

    def test_arrow_to_unknown_object(self):
        data = _load("diagram_identity.json")
        data["arrows"][0]["target"] = "W"
        with pytest.raises(ParseError):
            diagram_from_json(data)

    def test_lift_reads_back(self):
        data = lift_to_json({"sample": "unit", "bound": 1}, {"kind": "presentation", "sample": "unit"}, "tau", {})
        P, pres, l = lift_from_json(json.loads(json.dumps(data)))
        assert isinstance(l.target, CalYProp)
        assert pres.prop is P
        assert check_prop_morphism(l).passed

    def test_lift_needs_every_generator(self):
        data = lift_to_json({"sample": "forest", "bound": 2}, {"kind": "presentation", "sample": "forest"}, "tau", {})
        with pytest.raises(ParseError):
            lift_from_json(data)
