"""Command-line interface.

Exit codes: 0 Zero/PASS, 1 NonZero/FAIL, 2 Undetermined, 3 bad input
(unknown bundle, parse error, unmet precondition of the requested operation).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .bundle import Bundle, load
from .cech import betti_numbers, nerve_cohomology
from .errors import PreconditionError, VarSeqError
from .forms import Current, Lagrangian, SourceForm, horizontal_differential
from .jetexpr import Verdict
from .varcalc import (ProjectableField, euler_lagrange, euler_lagrange_via_forms, helmholtz,
                      lie_current, noether_current, tonti, var_lie_lagrangian, var_lie_source)

EXIT = {"zero": 0, "nonzero": 1, "undetermined": 2}
INPUT_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(INPUT_ERROR, f"{self.prog}: error: {message}\n")


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _bundle(args) -> Bundle:
    b = load(args.bundle)
    if args.order_cap is not None:
        data = dict(b.data)
        data["signature"] = dict(data["signature"], order_cap=args.order_cap)
        b = Bundle(data, b.source)
    return b


def _source(b: Bundle, name: str) -> SourceForm:
    if name in b.section("sources"):
        return b.source_form(name)
    return SourceForm(tuple(b.expr(c.strip(), "source") for c in name.split(";")))


def _field(b: Bundle, name: str) -> ProjectableField:
    if name in b.section("fields"):
        return b.field(name)
    if ":" not in name:
        raise PreconditionError("field", f"no field named {name!r}; inline fields look like 'xi,..:Xi,..'")
    xi, Xi = name.split(":")
    return ProjectableField([b.expr(c.strip(), "field") for c in xi.split(",")],
                            [b.expr(c.strip(), "field") for c in Xi.split(",")])


def _lagrangian_name(b: Bundle, name: str | None) -> str:
    name = name or b.default("lagrangian")
    if name is None:
        raise PreconditionError("lagrangian", "no Lagrangian given and the bundle declares no default")
    return name


# ---------------------------------------------------------------------------
# commands


def cmd_el(args) -> int:
    b = _bundle(args)
    name = _lagrangian_name(b, args.lagrangian)
    lam = b.lagrangian(name)
    eta = euler_lagrange(lam)
    payload = {"command": "el", "lagrangian": str(lam.density), "source": [str(c) for c in eta.components]}
    code = 0
    if args.verify:
        v = (eta - euler_lagrange_via_forms(lam)).is_zero()
        payload["verify"] = {"route": "interior Euler operator of d_V", "verdict": v.kind}
        code = EXIT[v.kind]
    _emit(args, payload, str(eta) + (f"\nverify: {payload['verify']['verdict']}" if args.verify else ""))
    return code


def cmd_helmholtz(args) -> int:
    b = _bundle(args)
    eta = _source(b, args.source)
    report = helmholtz(eta, roundtrip=args.verify)
    payload = {"command": "helmholtz", "source": [str(c) for c in eta.components], **report.to_json(b.sig)}
    lines = [f"locally variational: {report.verdict.kind}"]
    lines += [f"  {k} = {v}" for k, v in payload["residuals"].items()]
    if args.verify:
        lines.append(f"tonti round trip: {payload['tonti_roundtrip']}")
    _emit(args, payload, "\n".join(lines))
    return EXIT[report.verdict.kind]


def cmd_tonti(args) -> int:
    b = _bundle(args)
    eta = _source(b, args.source)
    center = None
    if args.center:
        center = {a: b.number(c) for a, c in enumerate(args.center.split(","))}
    lam = tonti(eta, center=center)
    payload = {"command": "tonti", "lagrangian": str(lam.density)}
    code = 0
    if args.verify:
        v = (euler_lagrange(lam) - eta).is_zero()
        payload["verify"] = {"route": "E(tonti(eta)) = eta", "verdict": v.kind}
        code = EXIT[v.kind]
    _emit(args, payload, str(lam) + (f"\nverify: {payload['verify']['verdict']}" if args.verify else ""))
    return code


def cmd_noether(args) -> int:
    b = _bundle(args)
    lam = b.lagrangian(_lagrangian_name(b, args.lagrangian))
    X = _field(b, args.field)
    eps = noether_current(lam, X)
    payload = {"command": "noether", "current": [str(c) for c in eps.components]}
    code = 0
    text = str(eps)
    if args.verify:
        _, cert = var_lie_lagrangian(lam, X)
        payload["verify"] = cert.to_json()
        code = EXIT[cert.verdict.kind]
        text += f"\nnoether identity residual: {cert.residual.density} ({cert.verdict.kind})"
    _emit(args, payload, text)
    return code


def cmd_lie(args) -> int:
    b = _bundle(args)
    X = _field(b, args.field)
    obj = args.object
    if obj in b.section("sources"):
        eta = b.source_form(obj)
        result = var_lie_source(eta, X)
        payload = {"command": "lie", "kind": "source", "result": [str(c) for c in result.components]}
        _emit(args, payload, str(result))
        return 0
    if obj in b.section("currents"):
        nu = b.current(obj)
        result = lie_current(nu, X)
        payload = {"command": "lie", "kind": "current", "result": [str(c) for c in result.components]}
        code = 0
        text = str(result)
        if args.verify:
            from .varcalc import lie_lagrangian
            v = (horizontal_differential(result) - lie_lagrangian(horizontal_differential(nu), X)).is_zero()
            payload["verify"] = {"route": "d_H L_X nu = L_X d_H nu", "verdict": v.kind}
            code = EXIT[v.kind]
            text += f"\nverify: {v.kind}"
        _emit(args, payload, text)
        return code
    lam = b.lagrangian(obj)
    lie, cert = var_lie_lagrangian(lam, X)
    payload = {"command": "lie", "kind": "lagrangian", "result": str(lie.density), "certificate": cert.to_json()}
    text = (f"{lie}\ncertificate: X_V -| E = {cert.contraction.density}; current = {cert.current}; "
            f"residual = {cert.residual.density} ({cert.verdict.kind})")
    _emit(args, payload, text)
    return EXIT[cert.verdict.kind]


def cmd_cohomology(args) -> int:
    b = _bundle(args)
    names = [args.cover] if args.cover else sorted(b.section("covers"))
    payload = {"command": "cohomology", "covers": {}}
    lines = []
    for name in names:
        cover = b.cover(name)
        betti = betti_numbers(cover)
        bases = {}
        for q in range(cover.dimension + 1):
            h = nerve_cohomology(cover, q)
            bases[q] = [{cover.label(s): str(v) for s, v in zip(h.simplices, vec) if v != 0}
                        for vec in h.basis]
        payload["covers"][name] = {"betti": list(betti), "basis": {str(q): v for q, v in bases.items()},
                                   "simplices": [cover.label(s) for s in cover.simplices]}
        lines.append(f"{name}: betti {tuple(betti)}")
        for q, vecs in bases.items():
            for vec in vecs:
                lines.append(f"  H^{q} generator: {vec}")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_check(args) -> int:
    from .pipeline import run_check
    b = _bundle(args)
    report = run_check(b, args.presentation, args.field, args.tolerance)
    _emit(args, report.to_json(), report.to_text())
    return report.exit_code


def cmd_acceptance(args) -> int:
    from .acceptance import run_all
    results = run_all(seed=args.seed, stream=None if args.json else sys.stdout)
    if args.json:
        print(json.dumps([r.to_json() for r in results], indent=2))
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--verify", action="store_true", help="re-run the operation's certificate")
    common.add_argument("--order-cap", type=int, default=None, help="override the bundle's jet order cap")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--tolerance", type=float, default=None, help="tolerance for numeric oracles")

    parser = _Parser(prog="varseq", description="Finite-order variational calculus on jet coordinates.")
    parser.add_argument("--version", action="version", version=f"varseq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("el", parents=[common], help="Euler-Lagrange form of a Lagrangian")
    p.add_argument("bundle")
    p.add_argument("lagrangian", nargs="?", help="name in the bundle or an inline expression")
    p.set_defaults(func=cmd_el)

    p = sub.add_parser("helmholtz", parents=[common], help="Helmholtz residuals of a source form")
    p.add_argument("bundle")
    p.add_argument("source", help="name in the bundle or inline components separated by ';'")
    p.set_defaults(func=cmd_helmholtz)

    p = sub.add_parser("tonti", parents=[common], help="local Lagrangian of a variational source form")
    p.add_argument("bundle")
    p.add_argument("source")
    p.add_argument("--center", help="fiber base point, comma separated")
    p.set_defaults(func=cmd_tonti)

    p = sub.add_parser("noether", parents=[common], help="canonical Noether current")
    p.add_argument("bundle")
    p.add_argument("lagrangian")
    p.add_argument("field", help="name in the bundle or inline 'xi,..:Xi,..'")
    p.set_defaults(func=cmd_noether)

    p = sub.add_parser("lie", parents=[common], help="variational Lie derivative with certificate")
    p.add_argument("bundle")
    p.add_argument("object", help="Lagrangian, source form or current of the bundle")
    p.add_argument("field")
    p.set_defaults(func=cmd_lie)

    p = sub.add_parser("cohomology", parents=[common], help="nerve cohomology of the bundle's covers")
    p.add_argument("bundle")
    p.add_argument("cover", nargs="?")
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("check", parents=[common], help="full verification report for a bundle")
    p.add_argument("bundle")
    p.add_argument("--presentation")
    p.add_argument("--field")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("acceptance", parents=[common], help="run the acceptance suite")
    p.set_defaults(func=cmd_acceptance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VarSeqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
