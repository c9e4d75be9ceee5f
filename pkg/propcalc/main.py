#!/usr/bin/env python3

import argparse
import itertools
import logging
import os
import sys
from collections.abc import Callable, Sequence

from propcalc.biobject import check_biobject
from propcalc.config import DEFAULT_BOUND, Settings
from propcalc.errors import (
    ArityMismatch,
    InvalidLabel,
    NotAChainMap,
    ParseError,
    PropcalcError,
    ShapeMismatch,
    SquareZeroViolation,
    TruncationExceeded,
)
from propcalc.gradedlinear import homology, homology_basis
from propcalc.lifting import (
    LiftProblem,
    QuasiFreePresentation,
    check_presentation,
    functorial_path_action,
    lift,
)
from propcalc.pathobject import TAU, make_Z, path_object, pushout_product, split_Z
from propcalc.pdiagramprops import (
    build_corner_square,
    build_end_calYP,
    build_end_ZP,
    check_corner_square,
    check_pi_acyclic_fibration,
    dbar_index_set,
    dbar_index_set_brute,
    pullback_square_defects,
    pushout_product_witness,
)
from propcalc.pipeline import RunReport, run_pipeline
from propcalc.propcore import (
    EndomorphismProp,
    TruncatedProp,
    check_algebra,
    check_prop_axioms,
    check_prop_morphism,
    diagram_endomorphism_prop,
    identity_morphism,
    tabulate,
)
from propcalc.reports import CheckReport, jsonable
from propcalc.samples import ForestProp, UnitProp, forest_presentation, unit_presentation
from propcalc.serialize import (
    Document,
    SAMPLE_PROPS,
    algebra_from_json,
    biobject_from_json,
    chain_map_from_json,
    complex_from_json,
    diagram_from_json,
    lift_from_json,
    lift_to_json,
    load_document,
    morphism_from_json,
    presentation_from_json,
    presentation_to_json,
    prop_from_json,
    prop_to_json,
)
from propcalc.utils import canonical_json, content_hash, setup_logger

log = logging.getLogger("propcalc.main")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

INPUT_ERRORS = (
    ParseError,
    InvalidLabel,
    ShapeMismatch,
    SquareZeroViolation,
    NotAChainMap,
    ArityMismatch,
    TruncationExceeded,
)


class InputError(Exception):
    """Wraps an error raised while reading inputs, so it maps to exit code 2."""

    def __init__(self, error: PropcalcError):
        self.error = error
        super().__init__(str(error))


def _inputs(*docs: Document) -> dict[str, str]:
    return {os.path.basename(doc.path): content_hash(doc.text) for doc in docs}


def _read(path: str) -> Document:
    try:
        return load_document(path)
    except INPUT_ERRORS as e:
        raise InputError(e) from e


def _parse(fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except INPUT_ERRORS as e:
        raise InputError(e) from e


def _prop(args) -> tuple[Document, TruncatedProp]:
    doc = _read(args.prop)
    return doc, _parse(prop_from_json, doc.data, doc.path, args.bound)


def _presentation(args, P: TruncatedProp) -> tuple[Document | None, QuasiFreePresentation]:
    if getattr(args, "presentation", None):
        doc = _read(args.presentation)
        return doc, _parse(presentation_from_json, doc.data, P, doc.path)
    if isinstance(P, ForestProp):
        return None, forest_presentation(P)
    if isinstance(P, UnitProp):
        return None, unit_presentation(P)
    raise InputError(ParseError(args.prop, "presentation", "this prop needs a --presentation file"))


def _result(command: str, inputs: dict[str, str], reports: Sequence[CheckReport], **extra) -> RunReport:
    run = RunReport(command, inputs)
    for r in reports:
        run.stages[r.name] = r.to_dict()
    if extra:
        run.stages["summary"] = {"passed": True, **jsonable(extra)}
    return run


# -- commands ----------------------------------------------------------------


def cmd_validate(args, settings: Settings) -> RunReport:
    """Parse any input kind and run the invariant checks that apply to it."""
    doc = _read(args.path)
    data = doc.data
    inputs = _inputs(doc)
    kind = doc.kind
    if kind == "complex":
        X = _parse(complex_from_json, data, doc.path)
        return _result("validate", inputs, [], kind=kind, dims=X.dims(), homology=homology(X))
    if kind == "chain_map":
        f = _parse(chain_map_from_json, data, doc.path)
        return _result("validate", inputs, [], kind=kind, source_dims=f.source.dims(), target_dims=f.target.dims())
    if kind == "biobject":
        return _result("validate", inputs, [check_biobject(_parse(biobject_from_json, data, doc.path))])
    if kind == "prop":
        P = _parse(prop_from_json, data, doc.path, args.bound)
        return _result("validate", inputs, [check_prop_axioms(P, settings)])
    if kind == "morphism":
        source = _parse(prop_from_json, data.get("source", {}), doc.path, args.bound)
        target = _parse(prop_from_json, data.get("target", {}), doc.path, args.bound)
        f = _parse(morphism_from_json, data, source, target, doc.path)
        return _result("validate", inputs, [check_prop_morphism(f, settings)])
    if kind == "presentation":
        P = _parse(prop_from_json, data.get("prop", {}), doc.path, args.bound)
        pres = _parse(presentation_from_json, data, P, doc.path)
        return _result("validate", inputs, [check_presentation(pres)])
    if kind == "algebra":
        P = _parse(prop_from_json, data.get("prop", {}), doc.path, args.bound)
        pres = None
        if "presentation" in data:
            pres = _parse(presentation_from_json, data["presentation"], P, doc.path)
        algebra = _parse(algebra_from_json, data, P, pres, doc.path)
        X, action = algebra.carrier, algebra.action
        return _result("validate", inputs, [check_algebra(P, X, action, settings)])
    if kind == "diagram":
        D = _parse(diagram_from_json, data, doc.path)
        E = diagram_endomorphism_prop(D, args.bound if args.bound is not None else 1)
        dims = {f"{m},{n}": E.component(m, n).dims() for m, n in E.biarities()}
        return _result("validate", inputs, [], kind=kind, objects=D.names(), dims=dims)
    if kind == "lift":
        _, _, l = _parse(lift_from_json, data, doc.path)
        return _result("validate", inputs, [check_prop_morphism(l, settings)])
    raise InputError(ParseError(doc.path, "kind", f"unknown kind {kind!r}", 1))


def cmd_homology(args, settings: Settings) -> RunReport:
    doc = _read(args.path)
    X = _parse(complex_from_json, doc.data, doc.path)
    basis = {str(n): vectors for n, vectors in homology_basis(X).items()}
    return _result("homology", _inputs(doc), [], dims=X.dims(), homology=homology(X), representatives=basis)


def cmd_path_object(args, settings: Settings) -> RunReport:
    if args.path:
        doc = _read(args.path)
        inputs = _inputs(doc)
        X = _parse(complex_from_json, doc.data, doc.path)
    else:
        inputs, X = {}, make_Z().unit
    factorization = path_object(X)
    return _result(
        "path-object",
        inputs,
        [],
        verdicts=factorization.verdicts,
        dims={"X": X.dims(), "ZX": factorization.ZX.dims(), "XX": factorization.XX.dims()},
    )


def cmd_build_zp(args, settings: Settings) -> RunReport:
    doc, P = _prop(args)
    ezp = build_end_ZP(P)
    report = CheckReport("build_zp")
    dims = {}
    for m, n in P.biarities():
        expected = 5 ** (m + n) * P.component(m, n).dim
        got = ezp.component(m, n).dim
        dims[f"{m},{n}"] = ezp.component(m, n).dims()
        if got != expected:
            report.violate("dim_formula", (m, n), expected=expected, got=got)
    report.details["dims"] = dims
    reports = [report]
    if args.axioms:
        reports.append(check_prop_axioms(ezp, settings))
    return _result("build-zp", _inputs(doc), reports)


def cmd_build_calzp(args, settings: Settings) -> RunReport:
    doc, P = _prop(args)
    calY, _ = build_end_calYP(P)
    calZ = calY.calZ
    report = CheckReport("build_calzp")
    dims = {}
    index_sets = {}
    for m in range(P.bound + 1):
        for which in (0, 1):
            closed, read_off = dbar_index_set(m, which), dbar_index_set_brute(m, which)
            if sorted(closed) != sorted(read_off):
                report.violate("index_set", (m,), which=which, closed_form=closed, matrix=read_off)
        index_sets[str(m)] = {"d0": len(dbar_index_set(m, 0)), "d1": len(dbar_index_set(m, 1))}
    for m, n in P.biarities():
        dims[f"{m},{n}"] = calZ.component(m, n).dims()
        bad = pullback_square_defects(calZ, m, n)
        if bad:
            report.violate("pullback_square", (m, n), basis=bad[:5])
    report.details["index_sets"] = index_sets
    report.details["dims"] = dims
    reports = [report]
    if args.axioms:
        reports.append(check_prop_axioms(calZ, settings))
    return _result("build-calzp", _inputs(doc), reports)


def cmd_build_yp(args, settings: Settings) -> RunReport:
    doc, P = _prop(args)
    calY, _ = build_end_calYP(P, section=args.section)
    square = build_corner_square(P, calY)
    report = check_corner_square(square)
    report.details["dims"] = {f"{m},{n}": calY.component(m, n).dims() for m, n in P.biarities()}
    reports = [report]
    if args.axioms:
        reports.append(check_prop_axioms(calY, settings))
    return _result("build-yp", _inputs(doc), reports)


def cmd_check_pi(args, settings: Settings) -> RunReport:
    doc, P = _prop(args)
    report = check_pi_acyclic_fibration(P, settings.bound, section=args.section, max_arity_sum=args.max_arity_sum)
    return _result("check-pi", _inputs(doc), [report])


def cmd_pushout_product(args, settings: Settings) -> RunReport:
    reports = [pushout_product_witness(m, n) for m, n in itertools.product(range(args.max_arity + 1), repeat=2)]
    Z = make_Z()
    mm1 = CheckReport("pushout_product:tensor")
    tensor_report = pushout_product(Z.s, split_Z().tilde_inclusion)
    mm1.details.update(tensor_report.to_dict())
    if not tensor_report.passed:
        mm1.violate("pushout_product", None, **tensor_report.to_dict())
    return _result("pushout-product", {}, reports + [mm1])


def cmd_lift(args, settings: Settings) -> RunReport:
    doc, P = _prop(args)
    pres_doc, pres = _presentation(args, P)
    docs = [doc] + ([pres_doc] if pres_doc else [])
    if args.target != "YP":
        raise InputError(ParseError(args.prop, "target", f"unsupported lift target {args.target!r}"))
    calY, pi = build_end_calYP(P, section=args.section)
    result = lift(LiftProblem(pres, pi, identity_morphism(P)), settings)
    run = _result("lift", _inputs(*docs), [result.report])
    prop_data = prop_to_json(P)
    pres_data = pres_doc.data if pres_doc else presentation_to_json(pres)
    run.artifact = lift_to_json(prop_data, pres_data, args.section, result.values)
    return run


def cmd_zigzag(args, settings: Settings) -> RunReport:
    lift_doc = _read(args.lift)
    data = lift_doc.data.get("artifact") if lift_doc.kind == "report" else lift_doc.data
    if not isinstance(data, dict):
        raise InputError(ParseError(lift_doc.path, "artifact", "the report carries no lift"))
    P, pres, l = _parse(lift_from_json, data, lift_doc.path)
    alg_doc = _read(args.algebra)
    algebra = _parse(algebra_from_json, alg_doc.data, P, pres, alg_doc.path)
    X, action = algebra.carrier, algebra.action
    zigzag = functorial_path_action(pres, l, X, action)
    report = CheckReport("zigzag")
    for name, ok in zigzag.verdicts.items():
        if not ok:
            report.violate(name)
    report.details.update(zigzag.to_dict())
    return _result("zigzag", _inputs(lift_doc, alg_doc), [report])


def cmd_pipeline(args, settings: Settings) -> RunReport:
    doc, P = _prop(args)
    pres_doc, pres = _presentation(args, P)
    alg_doc = _read(args.algebra)
    algebra = _parse(algebra_from_json, alg_doc.data, P, pres, alg_doc.path)
    X, action = algebra.carrier, algebra.action
    docs = [doc, alg_doc] + ([pres_doc] if pres_doc else [])
    return run_pipeline(P, pres, X, action, settings, _inputs(*docs), section=args.section)


def cmd_sample(args, settings: Settings) -> RunReport:
    bound = args.bound if args.bound is not None else 2
    if args.name == "end":
        if not args.carrier:
            raise InputError(ParseError("<args>", "carrier", "the endomorphism sample needs --carrier"))
        doc = _read(args.carrier)
        X = _parse(complex_from_json, doc.data, doc.path)
        P: TruncatedProp = EndomorphismProp(X, bound, "End_X")
    else:
        P = SAMPLE_PROPS[args.name](bound)
    run = RunReport("sample", {})
    if args.presentation:
        if isinstance(P, ForestProp):
            run.artifact = presentation_to_json(forest_presentation(P))
        elif isinstance(P, UnitProp):
            run.artifact = presentation_to_json(unit_presentation(P))
        else:
            raise InputError(ParseError("<args>", "presentation", f"no presentation for sample {args.name!r}"))
    else:
        run.artifact = prop_to_json(tabulate(P) if args.tables or args.name == "end" else P)
    return run


COMMANDS: dict[str, Callable] = {
    "validate": cmd_validate,
    "homology": cmd_homology,
    "path-object": cmd_path_object,
    "build-zp": cmd_build_zp,
    "build-calzp": cmd_build_calzp,
    "build-yp": cmd_build_yp,
    "check-pi": cmd_check_pi,
    "pushout-product": cmd_pushout_product,
    "lift": cmd_lift,
    "zigzag": cmd_zigzag,
    "pipeline": cmd_pipeline,
    "sample": cmd_sample,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="propcalc",
        description="Exact verification of props of P-diagrams and the path-object construction over ℚ.",
    )
    parser.add_argument(
        "--bound",
        type=int,
        default=None,
        help=f"Truncation bound for components and checks (default: the input's own, else {DEFAULT_BOUND}).",
    )
    parser.add_argument("--out", default=None, help="Write the JSON report to this file instead of stdout.")
    parser.add_argument(
        "--canonical",
        action=argparse.BooleanOptionalAction,
        default=False,
        help="Sorted keys and no timing, for byte-identical reports (default: no).",
    )
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (default: PROPCALC_THREADS or 1).")
    parser.add_argument("--log-file", default=None, help="Log to this file instead of stderr.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="Parse an input file and check its invariants.")
    p.add_argument("path")

    p = sub.add_parser("homology", help="Homology dimensions and representatives of a complex.")
    p.add_argument("path")

    p = sub.add_parser("path-object", help="Check the factorization X -> Z⊗X -> X⊕X.")
    p.add_argument("path", nargs="?", default=None, help="A complex (default: ℚ).")

    for name, help_text in (
        ("build-zp", "Build End_Z(P) and check the dimension formula."),
        ("build-calzp", "Build End_calZ(P) and check its pullback square."),
        ("build-yp", "Build End_calY(P) and check the corner square."),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--prop", required=True)
        p.add_argument("--axioms", action="store_true", help="Also run the prop axiom suite on the result.")
        if name == "build-yp":
            p.add_argument("--section", default=TAU)

    p = sub.add_parser("check-pi", help="Check that pi: End_calY(P) -> P is an acyclic fibration.")
    p.add_argument("--prop", required=True)
    p.add_argument("--section", default=TAU, help="Point of Z evaluated on inputs (default: tau).")
    p.add_argument("--max-arity-sum", type=int, default=None)

    p = sub.add_parser("pushout-product", help="Pushout-product witnesses for m, n up to a bound.")
    p.add_argument("--max-arity", type=int, default=2)

    p = sub.add_parser("lift", help="Lift id_P through pi.")
    p.add_argument("--prop", required=True)
    p.add_argument("--presentation", default=None)
    p.add_argument("--target", default="YP")
    p.add_argument("--section", default=TAU)

    p = sub.add_parser("zigzag", help="Induced actions on the path object of an algebra.")
    p.add_argument("--lift", required=True)
    p.add_argument("--algebra", required=True)

    p = sub.add_parser("pipeline", help="Run every stage from the prop axioms to the zigzag.")
    p.add_argument("--prop", required=True)
    p.add_argument("--presentation", default=None)
    p.add_argument("--algebra", required=True)
    p.add_argument("--section", default=TAU)

    p = sub.add_parser("sample", help="Print a built-in sample prop or presentation as JSON.")
    p.add_argument("name", choices=sorted(SAMPLE_PROPS) + ["end"])
    p.add_argument("--carrier", default=None, help="The complex X for the endomorphism sample.")
    p.add_argument("--tables", action="store_true", help="Write full structure tables.")
    p.add_argument("--presentation", action="store_true", help="Write the quasi-free presentation instead.")
    return parser


def _emit(data: dict, out: str | None) -> None:
    text = canonical_json(data)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logger(args.log_file, args.verbose)
    settings = Settings.from_env().with_overrides(bound=args.bound, threads=args.threads)
    try:
        run = COMMANDS[args.command](args, settings)
    except InputError as e:
        log.error("invalid input: %s", e.error)
        _emit(_error_report(args.command, e.error), args.out)
        return EXIT_INPUT
    except PropcalcError as e:
        log.error("%s failed: %s", args.command, e)
        _emit(_error_report(args.command, e), args.out)
        return EXIT_FAILED
    data = run.artifact if args.command == "sample" else run.to_dict(canonical=args.canonical)
    _emit(data, args.out)
    log.info("%s: %s", args.command, "pass" if run.passed else "fail")
    if run.passed:
        return EXIT_OK
    # an input that parses but breaks its own invariants is invalid input
    return EXIT_INPUT if args.command == "validate" else EXIT_FAILED


def _error_report(command: str, e: PropcalcError) -> dict:
    out = {"kind": "report", "command": command, "passed": False, "error": type(e).__name__, "message": str(e)}
    for attr in ("witness", "generator", "arrow", "violations", "conflicts", "field", "line", "degree"):
        value = getattr(e, attr, None)
        if value is not None:
            out[attr] = jsonable(value)
    return out


if __name__ == "__main__":
    sys.exit(main())
