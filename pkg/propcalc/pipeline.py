import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field

from propcalc.config import Settings
from propcalc.display_progress import print_stage_progress
from propcalc.errors import PropcalcError
from propcalc.gradedlinear import ChainComplex
from propcalc.lifting import LiftProblem, QuasiFreePresentation, functorial_path_action, lift
from propcalc.pathobject import TAU
from propcalc.pdiagramprops import build_end_calYP, build_end_ZP, check_pi_acyclic_fibration
from propcalc.propcore import PropMorphism, TruncatedProp, check_algebra, check_prop_axioms, identity_morphism
from propcalc.reports import CheckReport, jsonable

log = logging.getLogger(__name__)

STAGES = ("axioms", "algebra", "build", "check_pi", "lift", "zigzag")


@dataclass
class RunReport:
    """Verdicts per stage; `timing` is left out of the canonical form."""

    command: str
    inputs: dict[str, str] = field(default_factory=dict)
    stages: dict[str, dict] = field(default_factory=dict)
    timing: dict[str, float] = field(default_factory=dict)
    artifact: dict | None = None

    @property
    def passed(self) -> bool:
        return all(stage.get("passed", False) for stage in self.stages.values() if not stage.get("skipped"))

    def to_dict(self, canonical: bool = True) -> dict:
        out = {
            "kind": "report",
            "command": self.command,
            "inputs": dict(sorted(self.inputs.items())),
            "passed": self.passed,
            "stages": jsonable(self.stages),
        }
        if not canonical:
            out["timing"] = {k: round(v, 3) for k, v in self.timing.items()}
        if self.artifact is not None:
            out["artifact"] = self.artifact
        return out


def _run_stage(report: RunReport, name: str, index: int, fn: Callable[[], dict]) -> bool:
    start = time.monotonic()
    log.info("stage %s", name)
    print_stage_progress(name, index, len(STAGES), 0)
    try:
        result = fn()
    except PropcalcError as e:
        log.info("stage %s failed: %s", name, e)
        result = {"passed": False, "error": type(e).__name__, "message": str(e), **_error_fields(e)}
    report.stages[name] = result
    report.timing[name] = time.monotonic() - start
    print_stage_progress(name, index + 1, len(STAGES), report.timing[name])
    return bool(result.get("passed"))


def _error_fields(e: PropcalcError) -> dict:
    fields = {}
    for attr in ("generator", "witness", "arrow", "violations", "conflicts"):
        if hasattr(e, attr):
            fields[attr] = jsonable(getattr(e, attr))
    return fields


def _report(r: CheckReport) -> dict:
    return r.to_dict()


def run_pipeline(
    P: TruncatedProp,
    presentation: QuasiFreePresentation,
    X: ChainComplex,
    action: PropMorphism,
    settings: Settings | None = None,
    inputs: dict[str, str] | None = None,
    section: str = TAU,
) -> RunReport:
    """
    axioms -> algebra -> End_Z(P), End_calZ(P), End_calY(P) -> pi -> lift -> zigzag.

    Stops at the first failing stage; the later stages are marked skipped.
    A section other than tau breaks pi on purpose.
    """
    settings = settings or Settings()
    report = RunReport("pipeline", dict(inputs or {}))
    calY, pi = build_end_calYP(P, section=section)
    state: dict = {}

    def build() -> dict:
        ezp = build_end_ZP(P)
        dims = {}
        formula_ok = True
        for m, n in P.biarities():
            expected = 5 ** (m + n) * P.component(m, n).dim
            got = ezp.component(m, n).dim
            formula_ok = formula_ok and got == expected
            dims[f"{m},{n}"] = {
                "End_Z(P)": got,
                "End_calZ(P)": calY.calZ.component(m, n).dim,
                "End_calY(P)": calY.component(m, n).dim,
            }
        return {"passed": formula_ok, "dims": dims, "dim_formula": formula_ok}

    def lift_stage() -> dict:
        result = lift(LiftProblem(presentation, pi, identity_morphism(P)), settings)
        state["lift"] = result
        return _report(result.report)

    def zigzag_stage() -> dict:
        zigzag = functorial_path_action(presentation, state["lift"].morphism, X, action)
        return {"passed": all(zigzag.verdicts.values()), **zigzag.to_dict()}

    stages: list[tuple[str, Callable[[], dict]]] = [
        ("axioms", lambda: _report(check_prop_axioms(P, settings))),
        ("algebra", lambda: _report(check_algebra(P, X, action, settings))),
        ("build", build),
        ("check_pi", lambda: _report(check_pi_acyclic_fibration(P, settings.bound, calY=calY))),
        ("lift", lift_stage),
        ("zigzag", zigzag_stage),
    ]
    failed = False
    for index, (name, fn) in enumerate(stages):
        if failed:
            report.stages[name] = {"skipped": True, "reason": "an earlier stage failed"}
            continue
        failed = not _run_stage(report, name, index, fn)
    log.info("pipeline finished: %s", "pass" if report.passed else "fail")
    return report
