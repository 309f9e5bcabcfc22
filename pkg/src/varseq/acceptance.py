"""The acceptance suite behind ``varseq acceptance``.

Eight criteria, each reported as one PASS/FAIL line. Symbolic identities
require an exact Zero verdict; numeric oracles are compared at fixed
tolerances. Randomized parts are reproducible from ``seed``.
"""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field

import sympy as sp

from . import randgen
from .bundle import load, loop_points
from .cech import (Cochain, Cover, OpenSet, classify, coboundary, coboundary_matrix,
                   current_obstruction, fundamental_cycle_from_centers, lie_presentation, loop_cycle,
                   nerve_cohomology, betti_numbers, obstruction_class, pair, reduce_to_constants,
                   validate_presentation)
from .forms import Current, Lagrangian, SourceForm, VarForm, d_H, horizontal_differential
from .jetexpr import JetExpr, Signature
from .oracles import first_variation_check, loop_period, sphere_flux
from .varcalc import (conservation_law_prop2, contract_source, euler_lagrange, helmholtz, is_symmetry,
                      lie_current, lie_lagrangian, noether_current, second_variation, tonti,
                      var_lie_lagrangian, var_lie_source)

FLUX_RTOL = 1e-4
PERIOD_ATOL = 1e-6
FIRST_VARIATION_RTOL = 1e-5
FIRST_VARIATION_POINTS = 10
IDENTITY_INSTANCES = 100
PROPOSITION_INSTANCES = 50


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    checks: int = 0
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"; first failure: {self.failures[0]}" if self.failures else ""
        return f"[{status}] {self.number}. {self.title} ({self.checks} checks, {self.seconds:.1f}s){extra}"

    def to_json(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "checks": self.checks, "failures": self.failures,
                "details": {k: str(v) for k, v in self.details.items()}, "seconds": self.seconds}


class _Tally:
    def __init__(self, number, title):
        self.result = CriterionResult(number, title, True)
        self.start = time.perf_counter()

    def expect(self, ok: bool, what: str):
        self.result.checks += 1
        if not ok:
            self.result.passed = False
            self.result.failures.append(what)

    def zero(self, value, what: str):
        v = value.is_zero()
        self.expect(v.is_zero, f"{what}: {v} (residual {value})")

    def done(self) -> CriterionResult:
        self.result.seconds = time.perf_counter() - self.start
        return self.result


def _sig_cycle(k: int) -> Signature:
    return randgen.SIGNATURES[k % len(randgen.SIGNATURES)]


def _order_cycle(k: int) -> int:
    return 2 if k % 4 == 3 else 1


# ---------------------------------------------------------------------------
# 1. operator identities


def criterion_operator_identities(seed: int = 0, instances: int = IDENTITY_INSTANCES) -> CriterionResult:
    t = _Tally(1, "operator identities: d_H^2, E o d_H, Helmholtz o E, Tonti round trip, Noether residual")
    rng = random.Random(seed)
    for k in range(instances):
        sig = _sig_cycle(k)
        order = _order_cycle(k)
        # d_H^2 = 0 on forms of every bidegree the signature allows
        contact = k % 2
        horizontal = rng.randrange(sig.n)
        alpha = randgen.form(rng, sig, contact, horizontal, order=1)
        t.zero(d_H(d_H(alpha)), f"d_H^2 instance {k}")
        # E o d_H = 0
        nu = randgen.current(rng, sig, order)
        t.zero(euler_lagrange(horizontal_differential(nu)), f"E(d_H nu) instance {k}")
        # Helmholtz o E = 0 and the Tonti round trip
        lam = randgen.lagrangian(rng, sig, order)
        eta = euler_lagrange(lam)
        report = helmholtz(eta)
        t.expect(report.verdict.is_zero, f"Helmholtz(E(lambda)) instance {k}: {report.failures()[:1]}")
        t.zero(euler_lagrange(tonti(eta, check=False)) - eta, f"Tonti round trip instance {k}")
        # Noether certificate: L_X lambda = X_V -| E(lambda) + d_H eps
        X = randgen.projectable_field(rng, sig)
        _, cert = var_lie_lagrangian(lam, X)
        t.expect(cert.verdict.is_zero, f"Noether residual instance {k}: {cert.residual}")
    t.result.details["instances per identity"] = instances
    return t.done()


# ---------------------------------------------------------------------------
# 2. Lie derivative and Euler-Lagrange commute; monopole classes


def criterion_lie_euler(seed: int = 0, instances: int = PROPOSITION_INSTANCES, monopole=None) -> CriterionResult:
    t = _Tally(2, "E(L_X lambda) = L_X E(lambda); monopole class killed by L_X; flux oracle")
    rng = random.Random(seed + 1)
    for k in range(instances):
        sig = _sig_cycle(k)
        lam = randgen.lagrangian(rng, sig, _order_cycle(k))
        X = randgen.projectable_field(rng, sig)
        lhs = euler_lagrange(lie_lagrangian(lam, X))
        rhs = var_lie_source(euler_lagrange(lam), X, check=True)
        t.zero(lhs - rhs, f"instance {k}")

    bundle = monopole or load("monopole")
    p = bundle.presentation("octahedral")
    X = bundle.field("rotation")
    cls = obstruction_class(p)
    t.expect(cls.status == "nontrivial", f"class of {{lambda_i}} is {cls.status}")
    lie_cls = obstruction_class(lie_presentation(p, X))
    t.expect(lie_cls.status == "trivial", f"class of {{L_X lambda_i}} is {lie_cls.status}")
    t.result.details["class of lambda_i"] = f"{cls.coordinates} x {cls.unit}"
    t.result.details["class of L_X lambda_i"] = f"{lie_cls.coordinates}"

    oracle = bundle.section("oracles")["flux"]
    comps = {key: bundle.expr(v) for key, v in oracle["form"].items()}
    flux = sphere_flux(bundle.sig, comps, oracle.get("subdivisions", 3))
    if cls.constants:
        value = float(-pair(cls.constants, fundamental_cycle_from_centers(p.cover)))
        rel = abs(value - flux) / abs(flux)
        t.expect(rel <= FLUX_RTOL, f"flux oracle relative error {rel:.3g} > {FLUX_RTOL}")
        t.result.details["flux"] = f"nerve {value:.10g} vs quadrature {flux:.10g} (rel {rel:.2g})"
    else:
        t.expect(False, "no nerve constants to compare with the flux")
    return t.done()


# ---------------------------------------------------------------------------
# 3. per-set Euler-Lagrange equality on the monopole


def criterion_global_equations(monopole=None) -> CriterionResult:
    t = _Tally(3, "E(L_X lambda_i) = E(X_V -| eta) on every set of the monopole cover")
    bundle = monopole or load("monopole")
    for pname in ("octahedral", "hemispheres"):
        p = bundle.presentation(pname)
        for fname in ("rotation", "rotation-x"):
            X = bundle.field(fname)
            for i, s in enumerate(p.cover.sets):
                lhs = euler_lagrange(lie_lagrangian(p.lagrangian(i), X))
                rhs = euler_lagrange(contract_source(p.eta[(i,)], X))
                t.zero(lhs - rhs, f"{pname}/{s.name}/{fname}")
    return t.done()


# ---------------------------------------------------------------------------
# 4. variationally trivial cochain


def criterion_trivial_cochain() -> CriterionResult:
    t = _Tally(4, "d_H L_X nu_i = L_X mu for the punctured-plane trivial cochain")
    bundle = load("punctured-plane")
    for name in bundle.section("trivial_cochains"):
        pname, mu, nus = bundle.trivial_cochain(name)
        cover = bundle.presentation(pname).cover
        t.zero(euler_lagrange(mu), f"{name}: E(mu)")
        for fname in bundle.section("fields"):
            X = bundle.field(fname)
            l_mu = lie_lagrangian(mu, X)
            for i, nu in sorted(nus.items()):
                where = f"{name}/{cover.sets[i].name}/{fname}"
                t.zero(horizontal_differential(nu) - mu, f"{where}: d_H nu_i = mu")
                t.zero(horizontal_differential(lie_current(nu, X)) - l_mu, f"{where}: d_H L_X nu_i = L_X mu")
    return t.done()


# ---------------------------------------------------------------------------
# 5. conservation law from a vanishing second variation


def criterion_conservation(monopole=None) -> CriterionResult:
    t = _Tally(5, "d_H L_X(nu_i + eps_i) = 0 when L_X L_X lambda = 0; glued current is global")
    cases = 0
    for name in ("monopole", "punctured-plane", "freeparticle", "oscillator"):
        bundle = monopole if (name == "monopole" and monopole is not None) else load(name)
        for entry in bundle.data.get("conservation", []):
            p = bundle.presentation(entry["presentation"])
            X = bundle.field(entry["field"])
            if "potential" in entry:
                nus = {i: bundle.current(entry["potential"]) for i in range(p.cover.size)}
            else:
                nus = {i: bundle.current([c]) for i, c in enumerate(entry["potentials"])}
            conserved = {}
            for i, s in enumerate(p.cover.sets):
                where = f"{name}/{entry['presentation']}/{s.name}/{entry['field']}"
                lam = p.lagrangian(i)
                _, hyp = second_variation(lam, X)
                if not hyp.is_zero:
                    continue
                cases += 1
                cr = conservation_law_prop2(lam, X, nus[i])
                t.expect(cr.verdict.is_zero, f"{where}: {cr.failed}")
                if cr.current is not None:
                    conserved[i] = cr.current
            for (i, j) in p.cover.simplices_of(1):
                if i in conserved and j in conserved:
                    t.zero(conserved[j] - conserved[i],
                           f"{name}/{entry['presentation']}/{p.cover.label((i, j))}: glued current")
    t.expect(cases > 0, "no set with vanishing second variation")
    t.result.details["sets with vanishing second variation"] = cases
    return t.done()


# ---------------------------------------------------------------------------
# 6. Cech layer


def _all_covers():
    for name in ("nerves", "monopole", "punctured-plane", "freeparticle", "oscillator", "line"):
        b = load(name)
        for cname in b.section("covers"):
            yield name, cname, b.cover(cname)


def criterion_cech(seed: int = 0) -> CriterionResult:
    t = _Tally(6, "Cech layer: d^2 = 0, Betti numbers, triangle classification")
    rng = random.Random(seed + 6)
    for bname, cname, cover in _all_covers():
        for q in range(max(cover.dimension - 1, 0)):
            D1, D0 = coboundary_matrix(cover, q + 1), coboundary_matrix(cover, q)
            t.expect((D1 * D0).is_zero_matrix, f"{bname}/{cname}: d o d matrix in degree {q}")
        for q in range(cover.dimension + 1):
            for _ in range(3):
                c = Cochain(cover, q, {s: sp.Rational(rng.randint(-9, 9), rng.randint(1, 4))
                                       for s in cover.simplices_of(q)})
                dd = coboundary(coboundary(c)) if cover.simplices_of(q + 2) else None
                if dd is not None:
                    t.expect(all(v == 0 for _, v in dd.items()), f"{bname}/{cname}: d d c in degree {q}")
    # expression-valued cochains: Lagrangians and edge potentials of the presentations
    for name in ("monopole", "punctured-plane"):
        b = load(name)
        for pname in b.section("presentations"):
            p = b.presentation(pname)
            if p.cover.simplices_of(2):
                t.zero(coboundary(coboundary(p.lagrangians)), f"{name}/{pname}: d d lambda")
                t.zero(coboundary(coboundary(p.eta)), f"{name}/{pname}: d d eta")
    nerves = load("nerves")
    for cname, expected in (("circle", (1, 1)), ("octahedral", (1, 0, 1))):
        got = tuple(betti_numbers(nerves.cover(cname)))
        t.expect(got == expected, f"betti({cname}) = {got}, expected {expected}")
        t.result.details[f"betti {cname}"] = got
    # triangle nerve: rank test against the cycle-sum criterion
    tri = nerves.cover("triangle")
    edges = tri.simplices_of(1)
    index = {e: k for k, e in enumerate(edges)}
    for k in range(60):
        if k % 3 == 0:
            a = [sp.Integer(rng.randint(-5, 5)) for _ in range(tri.size)]
            values = {(i, j): a[j] - a[i] for (i, j) in edges}
        else:
            values = {e: sp.Rational(rng.randint(-6, 6), rng.randint(1, 3)) for e in edges}
        cycle_sum = values[(0, 1)] + values[(1, 2)] - values[(0, 2)]
        reduction = reduce_to_constants(Cochain(tri, 1, values))
        cls = classify(tri, 1, reduction)
        t.expect((cls.status == "trivial") == (cycle_sum == 0),
                 f"triangle cochain {[values[e] for e in edges]}: {cls.status}, cycle sum {cycle_sum}")
    return t.done()


# ---------------------------------------------------------------------------
# 7. numeric oracles


def _first_variation_lagrangians(seed: int):
    rng = random.Random(seed + 7)
    out = [load("oscillator").lagrangian("L"), load("freeparticle").lagrangian("L")]
    s1 = Signature(("t",), ("u",), 8)
    out.append(Lagrangian(JetExpr(s1, sp.sympify("u_tt**2/2 + u*u_t**2 - t*u**3/3",
                                                   locals={"u_tt": s1.jet(0, (0, 0)), "u_t": s1.jet(0, (0,)),
                                                           "u": s1.jet(0), "t": s1.base_symbols[0]}))))
    for k in range(3):
        sig = randgen.SIGNATURES[k]
        out.append(randgen.lagrangian(rng, sig, 1 if k else 2))
    return out


def criterion_numeric_oracles(seed: int = 0) -> CriterionResult:
    t = _Tally(7, "numeric oracles: first variation (rtol 1e-5), loop period (atol 1e-6)")
    worst = 0.0
    for k, lam in enumerate(_first_variation_lagrangians(seed)):
        res = first_variation_check(lam, points=FIRST_VARIATION_POINTS, rtol=FIRST_VARIATION_RTOL, seed=seed + k)
        worst = max(worst, res.worst)
        t.expect(res.passed, f"first variation of {lam.density}: worst relative error {res.worst:.3g}")
    t.result.details["first variation worst relative error"] = f"{worst:.3g}"

    bundle = load("punctured-plane")
    oracle = bundle.section("oracles")["period"]
    p = bundle.presentation(oracle["presentation"])
    X = bundle.field(oracle["field"])
    cls = current_obstruction(p, X, bundle.boundary_currents(oracle["presentation"], oracle["field"]))
    if cls.constants is None:
        t.expect(False, f"current obstruction has no constants ({cls.message})")
    else:
        z = loop_cycle(p.cover, loop_points(bundle, oracle["loop"], oracle.get("samples", 512)))
        value = float(pair(cls.constants, z))
        period = loop_period(bundle.sig, [bundle.expr(c) for c in oracle["form"]],
                             [bundle.expr(c) for c in oracle["loop"]])
        err = abs(value - period)
        t.expect(err <= PERIOD_ATOL, f"loop period {period!r} vs nerve {value!r} (error {err:.3g})")
        t.result.details["loop period"] = f"nerve {value:.12g} vs quadrature {period:.12g} (error {err:.2g})"
    return t.done()


# ---------------------------------------------------------------------------
# 8. negative controls


def criterion_negative_controls() -> CriterionResult:
    t = _Tally(8, "negative controls fail with a named, located residual")
    line = load("line")
    report = helmholtz(line.source_form("first-derivative"))
    named = report.to_json(line.sig)["residuals"]
    t.expect(report.verdict.is_nonzero and bool(named), "u_x passes Helmholtz")
    t.result.details["u_x"] = named

    corrupted = load("corrupted")
    for pname in corrupted.section("presentations"):
        v = validate_presentation(corrupted.presentation(pname))
        first = v.first_failure()
        t.expect(not v.valid and first is not None and first.where and first.residual,
                 f"corrupted presentation {pname} validates")
        if first is not None:
            t.result.details[f"corrupted {pname}"] = f"{first.invariant} on {first.where}: {first.residual}"

    osc = load("oscillator")
    eta = osc.source_form("eta")
    X = osc.field("scaling")
    verdict = is_symmetry(eta, X)
    residual = var_lie_source(eta, X)
    t.expect(verdict.is_nonzero and not residual.is_zero().is_zero, "scaling is a symmetry of the oscillator")
    t.result.details["oscillator scaling"] = {osc.sig.fiber[a]: str(c) for a, c in enumerate(residual.components)}
    return t.done()


# ---------------------------------------------------------------------------


def run_all(seed: int = 0, stream=None) -> list:
    monopole = load("monopole")
    runners = [
        lambda: criterion_operator_identities(seed),
        lambda: criterion_lie_euler(seed, monopole=monopole),
        lambda: criterion_global_equations(monopole),
        criterion_trivial_cochain,
        lambda: criterion_conservation(monopole),
        lambda: criterion_cech(seed),
        lambda: criterion_numeric_oracles(seed),
        criterion_negative_controls,
    ]
    results = []
    for run in runners:
        r = run()
        results.append(r)
        if stream is not None:
            print(r.line(), file=stream, flush=True)
    if stream is not None:
        total = sum(r.seconds for r in results)
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed in {total:.1f}s",
              file=stream, flush=True)
    return results
