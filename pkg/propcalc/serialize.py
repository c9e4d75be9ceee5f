"""
JSON input and output.

Every file is an object with a "kind" field: complex, chain_map, biobject,
prop, morphism, presentation, algebra, diagram or lift. A complex may leave
out its kind. Rationals are written "p/q", biarities as "m,n" keys, pairs of
biarities as "m,n|k,l" and symmetric generators as "s1", "s2", ... Props, presentations and
algebras may name a built-in sample instead of spelling out their tables.
"""

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from propcalc import linalg
from propcalc.biobject import Biarity, BiObject, adjacent_word, biobject_from_actions
from propcalc.errors import ParseError, PropcalcError, ShapeMismatch
from propcalc.gradedlinear import ChainComplex, ChainMap, make_chain_map, make_complex
from propcalc.lifting import Generator, QuasiFreePresentation, algebra_from_generators
from propcalc.linalg import Vector
from propcalc.pathobject import make_Z
from propcalc.pdiagramprops import CalYProp
from propcalc.propcore import (
    Arrow,
    DiagramShape,
    EndomorphismProp,
    PAlgebra,
    PropMorphism,
    TableProp,
    TruncatedProp,
    make_diagram,
    tabulate,
)
from propcalc.reports import jsonable
from propcalc.samples import (
    ForestProp,
    PermutationProp,
    UnitProp,
    forest_presentation,
    permutation_action,
    unit_action,
    unit_presentation,
)
from propcalc.words import evaluate_word, word_from_json, word_to_json

log = logging.getLogger(__name__)

SAMPLE_PROPS = {"unit": UnitProp, "permutation": PermutationProp, "forest": ForestProp}


@dataclass
class Document:
    """A parsed input file: its kind, raw data and the path it came from."""

    kind: str
    data: dict
    path: str
    text: str


def load_document(path: str | Path) -> Document:
    path = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(path, "", f"cannot read file: {e.strerror}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(path, "", e.msg, e.lineno) from e
    if isinstance(data, dict) and "kind" not in data and ("degrees" in data or "basis" in data):
        data = {"kind": "complex", **data}
    if not isinstance(data, dict) or not isinstance(data.get("kind"), str):
        raise ParseError(path, "kind", "expected an object with a string 'kind'", 1)
    return Document(data["kind"], data, path, text)


def _field(data: Mapping, name: str, path: str, where: str = ""):
    if name not in data:
        raise ParseError(path, f"{where}{name}", "missing field")
    return data[name]


def _biarity(key: str, path: str, where: str) -> Biarity:
    try:
        m, n = (int(x) for x in key.split(","))
    except ValueError as e:
        raise ParseError(path, where, f"bad biarity key {key!r}") from e
    return (m, n)


def _vector(data, path: str, where: str) -> Vector:
    if not isinstance(data, Mapping):
        raise ParseError(path, where, "expected an object of coefficients")
    try:
        return linalg.vector(data)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise ParseError(path, where, f"bad coefficient: {e}") from e


def vector_to_json(v: Mapping[str, Fraction]) -> dict:
    return {k: jsonable(Fraction(c)) for k, c in sorted(v.items()) if c}


# -- complexes ---------------------------------------------------------------


def complex_from_json(data, path: str = "<memory>", where: str = "", check_labels: bool = True) -> ChainComplex:
    """Raises ParseError for malformed input and SquareZeroViolation when d∘d != 0."""
    if not isinstance(data, Mapping):
        raise ParseError(path, where, "expected a complex object")
    if data.get("sample") == "Z":
        return make_Z().complex
    key = "degrees" if "degrees" in data or "basis" not in data else "basis"
    basis = _field(data, key, path, where)
    if not isinstance(basis, Mapping):
        raise ParseError(path, f"{where}{key}", "expected degree -> labels")
    try:
        degrees = {int(n): list(labels) for n, labels in basis.items()}
    except (ValueError, TypeError) as e:
        raise ParseError(path, f"{where}{key}", "degrees must be integers") from e
    differential = {
        src: _vector(image, path, f"{where}differential.{src}")
        for src, image in (data.get("differential") or {}).items()
    }
    return make_complex(degrees, differential, check_labels=check_labels)


def complex_to_json(C: ChainComplex) -> dict:
    return {
        "kind": "complex",
        "degrees": {str(n): list(C.labels(n)) for n in C.degrees},
        "differential": {src: vector_to_json(v) for src, v in sorted(C.differential.items()) if v},
    }


def chain_map_from_json(data, path: str = "<memory>") -> ChainMap:
    source = complex_from_json(_field(data, "source", path), path, "source.")
    target = complex_from_json(_field(data, "target", path), path, "target.")
    columns = {k: _vector(v, path, f"columns.{k}") for k, v in _field(data, "columns", path).items()}
    return make_chain_map(source, target, columns)


def chain_map_to_json(f: ChainMap) -> dict:
    return {
        "kind": "chain_map",
        "source": complex_to_json(f.source),
        "target": complex_to_json(f.target),
        "columns": {k: vector_to_json(v) for k, v in sorted(f.columns.items()) if v},
    }


# -- biobjects and props -----------------------------------------------------


def _components(data, path: str) -> dict[Biarity, ChainComplex]:
    return {
        _biarity(key, path, "components"): complex_from_json(value, path, f"components.{key}.", check_labels=False)
        for key, value in _field(data, "components", path).items()
    }


def _generator_index(name, arity: int, path: str, where: str) -> int:
    """"s<k>" -> k, the transposition of legs k and k+1 out of `arity`."""
    if not isinstance(name, str) or not name.startswith("s") or not name[1:].isdigit():
        raise ParseError(path, where, f"expected a generator s1, s2, ..., got {name!r}")
    k = int(name[1:])
    if not 1 <= k < arity:
        raise ParseError(path, where, f"generator {name} needs 1 <= k < {arity}")
    return k


def _generator_tables(data, path: str, side: str) -> dict[Biarity, dict[int, dict[str, Vector]]]:
    """Left generators permute the n outputs, right generators the m inputs."""
    out: dict[Biarity, dict[int, dict[str, Vector]]] = {}
    for key, gens in (data.get(side) or {}).items():
        m, n = _biarity(key, path, side)
        if not isinstance(gens, Mapping):
            raise ParseError(path, f"{side}.{key}", "expected generator -> matrix")
        tables: dict[int, dict[str, Vector]] = {}
        for name, images in gens.items():
            where = f"{side}.{key}.{name}"
            k = _generator_index(name, n if side == "left" else m, path, where)
            if not isinstance(images, Mapping):
                raise ParseError(path, where, "expected label -> image")
            tables[k] = {x: _vector(v, path, f"{where}.{x}") for x, v in images.items()}
        out[(m, n)] = tables
    return out


def _biarity_pair(key: str, path: str, where: str) -> tuple[Biarity, Biarity]:
    parts = key.split("|") if isinstance(key, str) else []
    if len(parts) != 2:
        raise ParseError(path, where, f"bad biarity pair {key!r}, expected 'm,n|k,l'")
    return _biarity(parts[0], path, where), _biarity(parts[1], path, where)


def _label_pairs(entries, xs: list[str], ys: list[str], path: str, where: str) -> dict[tuple[str, str], Vector]:
    """
    Read x -> y -> value, or the flat form "x,y" -> value.

    Labels may themselves contain commas, so a flat key is split at the comma
    that leaves a basis label of each side.
    """
    if not isinstance(entries, Mapping):
        raise ParseError(path, where, "expected a table of label pairs")
    out: dict[tuple[str, str], Vector] = {}
    for key, value in entries.items():
        if isinstance(value, Mapping) and all(isinstance(v, Mapping) for v in value.values()) and value:
            for y, image in value.items():
                out[(key, y)] = _vector(image, path, f"{where}.{key}.{y}")
            continue
        splits = [(key[:i], key[i + 1 :]) for i, c in enumerate(key) if c == ","]
        pairs = [(x, y) for x, y in splits if x in xs and y in ys]
        if len(pairs) != 1:
            raise ParseError(path, f"{where}.{key}", "not a pair of basis labels")
        out[pairs[0]] = _vector(value, path, f"{where}.{key}")
    return out


def _table_action(tables, left: bool):
    def act(m, n, a, b):
        v, perm = (b, a) if left else (a, b)
        steps = adjacent_word(perm)
        for i in reversed(steps) if left else steps:
            v = linalg.apply(tables.get((m, n), {}).get(i, {}), v)
        return v

    return act


def biobject_from_json(data, path: str = "<memory>") -> BiObject:
    bound = int(_field(data, "bound", path))
    left = _generator_tables(data, path, "left")
    right = _generator_tables(data, path, "right")
    return biobject_from_actions(bound, _components(data, path), _table_action(left, True), _table_action(right, False))


def prop_from_json(data, path: str = "<memory>", bound: int | None = None) -> TruncatedProp:
    """A TableProp, or a built-in sample prop when the object has a "sample" field."""
    if "sample" in data:
        factory = SAMPLE_PROPS.get(data["sample"])
        if factory is None:
            raise ParseError(path, "sample", f"unknown sample prop {data['sample']!r}")
        return factory(int(data.get("bound", 2) if bound is None else bound))
    if data.get("endomorphisms_of") is not None:
        X = complex_from_json(data["endomorphisms_of"], path, "endomorphisms_of.")
        return EndomorphismProp(X, int(data.get("bound", 2) if bound is None else bound), data.get("name", "End_X"))
    components = _components(data, path)

    def labels(biarity: Biarity) -> list[str]:
        C = components.get(biarity)
        return C.all_labels() if C is not None else []

    # vertical: "k,n|m,k" with x in P(k,n) applied after y in P(m,k)
    # horizontal: "m,n|k,l" with x in P(m,n) beside y in P(k,l)
    tables: dict[str, dict] = {"vertical": {}, "horizontal": {}}
    for side, table in tables.items():
        sections = data.get(side) or {}
        if not isinstance(sections, Mapping):
            raise ParseError(path, side, "expected 'm,n|k,l' -> label pairs")
        for key, entries in sections.items():
            a, b = _biarity_pair(key, path, f"{side}.{key}")
            for (x, y), v in _label_pairs(entries, labels(a), labels(b), path, f"{side}.{key}").items():
                table[(a, b, x, y)] = v
    vertical, horizontal = tables["vertical"], tables["horizontal"]
    units = {int(n): _vector(v, path, f"units.{n}") for n, v in (data.get("units") or {}).items()}
    return TableProp(
        int(_field(data, "bound", path)),
        components,
        vertical,
        horizontal,
        units,
        _generator_tables(data, path, "left"),
        _generator_tables(data, path, "right"),
        name=data.get("name", "P"),
    )


def prop_to_json(P: TruncatedProp) -> dict:
    """Full tables of P; sample props are written by name."""
    for sample, cls in SAMPLE_PROPS.items():
        if type(P) is cls:
            return {"kind": "prop", "sample": sample, "bound": P.bound}
    table = P if isinstance(P, TableProp) else tabulate(P)
    return {
        "kind": "prop",
        "name": table.name,
        "bound": table.bound,
        "components": {f"{m},{n}": complex_to_json(C) for (m, n), C in sorted(table.components.items()) if C.dim},
        "units": {str(n): vector_to_json(v) for n, v in sorted(table.units.items()) if v},
        "vertical": _pair_table_to_json(table.vertical_table),
        "horizontal": _pair_table_to_json(table.horizontal_table),
        "left": _tables_to_json(table.left_table),
        "right": _tables_to_json(table.right_table),
    }


def _tables_to_json(tables) -> dict:
    return {
        f"{m},{n}": {f"s{i}": {x: vector_to_json(v) for x, v in sorted(images.items())} for i, images in sorted(gens.items())}
        for (m, n), gens in sorted(tables.items())
        if gens
    }


def _pair_table_to_json(table) -> dict:
    out: dict[str, dict] = {}
    for (a, b, x, y), v in sorted(table.items()):
        if v:
            section = out.setdefault(f"{a[0]},{a[1]}|{b[0]},{b[1]}", {})
            section.setdefault(x, {})[y] = vector_to_json(v)
    return out


def morphism_from_json(data, source: TruncatedProp, target: TruncatedProp, path: str = "<memory>") -> PropMorphism:
    images = {
        _biarity(key, path, "images"): {x: _vector(v, path, f"images.{key}.{x}") for x, v in value.items()}
        for key, value in _field(data, "images", path).items()
    }
    return PropMorphism(source, target, lambda m, n, x: dict(images.get((m, n), {}).get(x, {})), name=data.get("name", "f"))


def morphism_to_json(f: PropMorphism) -> dict:
    return {
        "kind": "morphism",
        "name": f.name,
        "source": prop_to_json(f.source),
        "target": prop_to_json(f.target),
        "images": {
            f"{m},{n}": {x: vector_to_json(f.image(m, n, x)) for x in f.source.component(m, n).all_labels()}
            for m, n in f.source.biarities()
            if f.source.component(m, n).dim
        },
    }


# -- presentations and algebras ----------------------------------------------


def presentation_from_json(data, P: TruncatedProp, path: str = "<memory>") -> QuasiFreePresentation:
    if data.get("sample") == "forest" and isinstance(P, ForestProp):
        return forest_presentation(P)
    if data.get("sample") == "unit" and isinstance(P, UnitProp):
        return unit_presentation(P)
    if "sample" in data:
        raise ParseError(path, "sample", f"sample presentation {data['sample']!r} does not fit prop {P.name}")
    generators = []
    values: dict[str, Vector] = {}
    differentials = {}
    for i, entry in enumerate(_field(data, "generators", path)):
        where = f"generators[{i}]."
        symbol = str(_field(entry, "symbol", path, where))
        m, n = _field(entry, "biarity", path, where)
        generators.append(Generator(symbol, (int(m), int(n)), int(entry.get("degree", 0))))
        values[symbol] = _vector(_field(entry, "value", path, where), path, where + "value")
        if entry.get("d") is not None:
            differentials[symbol] = _word(entry["d"], path, where + "d")
    words = {
        _biarity(key, path, "words"): {x: _word(w, path, f"words.{key}.{x}") for x, w in value.items()}
        for key, value in _field(data, "words", path).items()
    }
    return QuasiFreePresentation(P, tuple(generators), values, words, differentials)


def _word(data, path: str, where: str):
    try:
        return word_from_json(data)
    except PropcalcError as e:
        raise ParseError(path, where, str(e)) from e


def presentation_to_json(pres: QuasiFreePresentation) -> dict:
    return {
        "kind": "presentation",
        "generators": [
            {
                "symbol": g.symbol,
                "biarity": list(g.biarity),
                "degree": g.degree,
                "value": vector_to_json(pres.values.get(g.symbol, {})),
                **({"d": word_to_json(pres.differentials[g.symbol])} if g.symbol in pres.differentials else {}),
            }
            for g in pres.generators
        ],
        "words": {
            f"{m},{n}": {x: word_to_json(w) for x, w in sorted(words.items())}
            for (m, n), words in sorted(pres.words.items())
            if words
        },
    }


def algebra_from_json(
    data, P: TruncatedProp, presentation: QuasiFreePresentation | None = None, path: str = "<memory>"
) -> PAlgebra:
    """The carrier and its action. The action is given by type: unit, permutation, generators or table."""
    X = complex_from_json(_field(data, "carrier", path), path, "carrier.")
    action = _field(data, "action", path)
    kind = action.get("type")
    if kind == "unit":
        if not isinstance(P, UnitProp):
            raise ParseError(path, "action.type", "a unit action needs the unit prop")
        return PAlgebra(X, unit_action(P, X))
    if kind == "permutation":
        if not isinstance(P, PermutationProp):
            raise ParseError(path, "action.type", "a permutation action needs the permutation prop")
        return PAlgebra(X, permutation_action(P, X))
    end_X = EndomorphismProp(X, P.bound, "End_X")
    if kind == "generators":
        if presentation is None:
            raise ParseError(path, "action.type", "generator images need a presentation")
        images = {}
        for g in presentation.generators:
            columns = _field(_field(action, "images", path, "action."), g.symbol, path, "action.images.")
            m, n = g.biarity
            try:
                images[g.symbol] = end_X.from_columns(
                    m, n, {a: _vector(v, path, f"action.images.{g.symbol}.{a}") for a, v in columns.items()}
                )
            except KeyError as e:
                raise ParseError(path, f"action.images.{g.symbol}", f"unknown tensor word {e}") from e
        return PAlgebra(X, algebra_from_generators(presentation, X, images))
    if kind == "table":
        table = {}
        for key, ops in _field(action, "images", path, "action.").items():
            m, n = _biarity(key, path, "action.images")
            for x, columns in ops.items():
                cols = {a: _vector(v, path, f"action.images.{key}.{x}.{a}") for a, v in columns.items()}
                table[(m, n, x)] = end_X.from_columns(m, n, cols)
        return PAlgebra(X, PropMorphism(P, end_X, lambda m, n, x: dict(table.get((m, n, x), {})), name="action"))
    raise ParseError(path, "action.type", f"unknown action type {kind!r}")


def action_to_json(X: ChainComplex, action: PropMorphism) -> dict:
    end_X = action.target
    if not isinstance(end_X, EndomorphismProp):
        raise ShapeMismatch("an action lands in the endomorphism prop of its carrier")
    images = {}
    for m, n in action.source.biarities():
        ops = {}
        for x in action.source.component(m, n).all_labels():
            columns = end_X.as_columns(m, n, action.image(m, n, x))
            ops[x] = {a: vector_to_json(v) for a, v in sorted(columns.items())}
        if ops:
            images[f"{m},{n}"] = ops
    return {"kind": "algebra", "carrier": complex_to_json(X), "action": {"type": "table", "images": images}}


# -- diagrams and lifts ------------------------------------------------------


def diagram_from_json(data, path: str = "<memory>") -> DiagramShape:
    objects = [
        (name, complex_from_json(value, path, f"objects.{name}."))
        for name, value in _field(data, "objects", path).items()
    ]
    lookup = dict(objects)
    arrows = []
    for i, entry in enumerate(data.get("arrows") or []):
        where = f"arrows[{i}]."
        source, target = _field(entry, "source", path, where), _field(entry, "target", path, where)
        if source not in lookup or target not in lookup:
            raise ParseError(path, where + "source", "arrow refers to an unknown object")
        columns = {k: _vector(v, path, f"{where}columns.{k}") for k, v in _field(entry, "columns", path, where).items()}
        f = make_chain_map(lookup[source], lookup[target], columns)
        arrows.append(Arrow(str(entry.get("name", f"u{i}")), source, target, f))
    return make_diagram(objects, arrows)


def lift_to_json(prop_data: dict, presentation_data: dict, section: str, values: Mapping[str, Vector]) -> dict:
    return {
        "kind": "lift",
        "target": "YP",
        "prop": prop_data,
        "presentation": presentation_data,
        "section": section,
        "values": {g: vector_to_json(v) for g, v in sorted(values.items())},
    }


def lift_from_json(data, path: str = "<memory>"):
    """(P, presentation, lifted morphism P -> End_calY(P))."""
    P = prop_from_json(_field(data, "prop", path), path)
    pres = presentation_from_json(_field(data, "presentation", path), P, path)
    calY = CalYProp(P, section=data.get("section", "tau"))
    values = {g: _vector(v, path, f"values.{g}") for g, v in _field(data, "values", path).items()}
    missing = [g.symbol for g in pres.generators if g.symbol not in values]
    if missing:
        raise ParseError(path, "values", f"no lifted value for {missing}")
    arities = pres.arities

    def on_basis(m, n, x):
        return evaluate_word(calY, pres.words[(m, n)][x], values, arities)

    return P, pres, PropMorphism(P, calY, on_basis, name="lift")
