"""The full verification pipeline behind ``varseq check``.

Each step yields a status (pass, fail, undetermined, skipped) and a JSON-able
detail record; the aggregate is FAIL if any step fails, else UNDETERMINED if
any step is undetermined, else PASS.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .bundle import Bundle, loop_points
from .cech import (Presentation, current_obstruction, fundamental_cycle_from_centers, loop_cycle,
                   obstruction_class, pair, reduce_entry, trivialization_check,
                   validate_presentation)
from .errors import VarSeqError
from .forms import Current
from .jetexpr import Verdict
from .oracles import loop_period, sphere_flux
from .varcalc import (conservation_law_prop2, is_symmetry, lie_current, noether_current,
                      second_variation, var_lie_source)

PASS, FAIL, UNDETERMINED, SKIPPED = "PASS", "FAIL", "UNDETERMINED", "SKIPPED"


def status_of(v: Verdict) -> str:
    return PASS if v.is_zero else FAIL if v.is_nonzero else UNDETERMINED


@dataclass
class Step:
    name: str
    status: str
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return {"step": self.name, "status": self.status, **self.detail}


@dataclass
class Report:
    bundle: str
    field_name: str | None
    steps: list = field(default_factory=list)

    def add(self, name, status, **detail):
        self.steps.append(Step(name, status, detail))

    @property
    def status(self) -> str:
        kinds = {s.status for s in self.steps}
        return FAIL if FAIL in kinds else UNDETERMINED if UNDETERMINED in kinds else PASS

    def first_failure(self):
        return next((s for s in self.steps if s.status == FAIL), None)

    @property
    def exit_code(self) -> int:
        return {PASS: 0, FAIL: 1, UNDETERMINED: 2}[self.status]

    def to_json(self):
        first = self.first_failure()
        return {"bundle": self.bundle, "field": self.field_name, "status": self.status,
                "first_failure": None if first is None else first.to_json(),
                "steps": [s.to_json() for s in self.steps]}

    def to_text(self) -> str:
        lines = [f"{self.status}  {self.bundle}" + (f"  field={self.field_name}" if self.field_name else "")]
        for s in self.steps:
            extra = ""
            for key in ("message", "residual", "coordinates", "pairing", "oracle", "where"):
                if key in s.detail and s.detail[key] not in (None, "", [], "0"):
                    extra += f"  {key}={s.detail[key]}"
            lines.append(f"  [{s.status:<12}] {s.name}{extra}")
        first = self.first_failure()
        if first is not None:
            lines.append(f"first failure: {first.name}")
        return "\n".join(lines)


def _class_status(cls) -> str:
    return UNDETERMINED if cls.status == "undetermined" else PASS


def _flux_check(report, bundle: Bundle, pname: str, p: Presentation, cls, tolerance: float):
    oracle = bundle.section("oracles").get("flux")
    if not oracle or oracle.get("presentation") != pname or cls.constants is None:
        return
    comps = {k: bundle.expr(v, "flux form") for k, v in oracle["form"].items()}
    flux = sphere_flux(bundle.sig, comps, oracle.get("subdivisions", 3))
    z = fundamental_cycle_from_centers(p.cover)
    pairing = pair(cls.constants, z)
    # d nu_ij = lambda_j - lambda_i, so <d nu, z> = -(flux of the curvature)
    value = float(-pairing)
    rel = abs(value - flux) / max(abs(flux), 1e-300)
    report.add("flux oracle: -<d nu, z> = surface integral", PASS if rel <= tolerance else FAIL,
               pairing=str(pairing), oracle=flux, relative_error=rel, tolerance=tolerance)


def _period_check(report, bundle: Bundle, pname: str, fname: str, p: Presentation, cls,
                  tolerance: float):
    oracle = bundle.section("oracles").get("period")
    if not oracle or oracle.get("presentation") != pname or oracle.get("field") != fname:
        return
    if cls.constants is None:
        report.add("period oracle", UNDETERMINED, message="no constant cocycle")
        return
    form = [bundle.expr(c, "period form") for c in oracle["form"]]
    loop = [bundle.expr(c, "loop") for c in oracle["loop"]]
    period = loop_period(bundle.sig, form, loop)
    z = loop_cycle(p.cover, loop_points(bundle, oracle["loop"], oracle.get("samples", 512)))
    pairing = pair(cls.constants, z)
    # eps_i - beta_i are local potentials of -(X_V -| eta), so <d J, z> = +period
    value = float(pairing)
    err = abs(value - period) / max(abs(period), 1.0)
    report.add("period oracle: <d(eps - beta), z> = loop integral", PASS if err <= tolerance else FAIL,
               pairing=str(pairing), oracle=period, error=err, tolerance=tolerance)


def check_presentation(report: Report, bundle: Bundle, pname: str, fname: str | None,
                       flux_tol: float = 1e-4, period_tol: float = 1e-6):
    p = bundle.presentation(pname)
    validity = validate_presentation(p)
    first = validity.first_failure()
    report.add(f"{pname}: presentation is valid", PASS if validity.valid else FAIL,
               **({"where": first.where, "message": first.invariant, "residual": first.residual}
                  if first else {"global": validity.global_}))
    if not validity.valid:
        return
    try:
        cls = obstruction_class(p)
        report.add(f"{pname}: obstruction class", _class_status(cls),
                   coordinates=[str(c) for c in cls.coordinates], message=cls.status,
                   unit=str(cls.unit))
        _flux_check(report, bundle, pname, p, cls, flux_tol)
    except VarSeqError as exc:
        report.add(f"{pname}: obstruction class", UNDETERMINED, message=str(exc))
    if fname is None:
        return
    X = bundle.field(fname)
    eta = p.source()
    sym = is_symmetry(eta, X, check=False)
    report.add(f"{pname}: field is a symmetry of the source form", status_of(sym),
               residual=str(var_lie_source(eta, X, check=False)))
    cochains = [bundle.trivial_cochain(t) for t in bundle.section("trivial_cochains")]
    trivial = next(((mu, nus) for pres, mu, nus in cochains if pres == pname), None)
    triv = trivialization_check(p, X, trivial)
    fail = triv.first_failure()
    report.add(f"{pname}: L_X trivializes the classes", status_of(triv.verdict),
               **({"where": fail[1], "message": fail[0], "residual": fail[3]} if fail else {}),
               checks=len(triv.steps))
    if not sym.is_zero:
        report.add(f"{pname}: current obstruction", SKIPPED, message="field is not a symmetry")
        return
    try:
        beta = bundle.boundary_currents(pname, fname)
        ccls = current_obstruction(p, X, beta)
        report.add(f"{pname}: current obstruction", _class_status(ccls),
                   coordinates=[str(c) for c in ccls.coordinates], message=ccls.status,
                   unit=str(ccls.unit))
        _period_check(report, bundle, pname, fname, p, ccls, period_tol)
    except VarSeqError as exc:
        report.add(f"{pname}: current obstruction", UNDETERMINED, message=str(exc))


def check_conservation(report: Report, bundle: Bundle, entry: dict):
    pname, fname = entry["presentation"], entry["field"]
    p = bundle.presentation(pname)
    X = bundle.field(fname)
    if "potential" in entry:
        nus = {i: bundle.current(entry["potential"]) for i in range(p.cover.size)}
    else:
        nus = {i: bundle.current([c]) for i, c in enumerate(entry["potentials"])}
    conserved = {}
    for i in range(p.cover.size):
        where = p.cover.sets[i].name
        lam = p.lagrangian(i)
        _, hyp = second_variation(lam, X)
        if not hyp.is_zero:
            report.add(f"conservation ({pname}, {fname}) on {where}", SKIPPED,
                       message="second variation does not vanish")
            continue
        cr = conservation_law_prop2(lam, X, nus[i])
        report.add(f"conservation ({pname}, {fname}) on {where}", status_of(cr.verdict),
                   message=cr.failed or "", current=str(cr.current))
        if cr.current is not None:
            conserved[i] = cr.current
    for s in p.cover.simplices_of(1):
        i, j = s
        if i in conserved and j in conserved:
            diff = conserved[j] - conserved[i]
            v = diff.is_zero()
            if not v.is_zero and p.sig.n == 1:
                entry_ = reduce_entry(p.cover, s, diff)
                v = Verdict("zero") if entry_.status == "constant" and entry_.value == 0 else v
            report.add(f"conservation ({pname}, {fname}): glued current agrees on {p.cover.label(s)}",
                       status_of(v), residual=str(diff))


def run_check(bundle: Bundle, presentation: str | None = None, field_name: str | None = None,
              tolerance: float | None = None) -> Report:
    fname = field_name or bundle.default("field")
    report = Report(bundle.name, fname)
    names = [presentation] if presentation else list(bundle.section("presentations"))
    flux_tol = tolerance if tolerance is not None else 1e-4
    period_tol = tolerance if tolerance is not None else 1e-6
    for pname in names:
        check_presentation(report, bundle, pname, fname, flux_tol, period_tol)
        if report.first_failure() is not None and report.first_failure().name.endswith("is valid"):
            return report
    for entry in bundle.data.get("conservation", []):
        if entry["field"] == fname and (presentation is None or entry["presentation"] == presentation):
            check_conservation(report, bundle, entry)
    return report
