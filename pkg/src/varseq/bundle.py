"""JSON problem bundles: signature, covers, presentations, fields and oracle data.

Expressions are stored as strings in the jetexpr grammar. ``constants`` names
numeric parameters usable inside every expression of the bundle.
"""
from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path

import sympy as sp

from .cech import Cover, OpenSet, Presentation
from .errors import BundleError, VarSeqError
from .forms import Current, Lagrangian, SourceForm
from .jetexpr import Signature, parse, to_text
from .varcalc import ProjectableField

FIXTURE_PACKAGE = "varseq.fixtures"


def fixture_names() -> list:
    return sorted(p.name[:-5] for p in resources.files(FIXTURE_PACKAGE).iterdir()
                  if p.name.endswith(".json"))


def resolve(name_or_path: str) -> Path:
    """A path on disk, or the name of a shipped fixture (with or without .json)."""
    p = Path(name_or_path)
    if p.exists():
        return p
    stem = p.name
    for suffix in (".json", ".bundle"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
    candidate = resources.files(FIXTURE_PACKAGE) / f"{stem}.json"
    if candidate.is_file():
        return Path(str(candidate))
    raise BundleError(f"no bundle file or fixture named {name_or_path!r} "
                      f"(fixtures: {', '.join(fixture_names())})")


class Bundle:
    def __init__(self, data: dict, source: str = "<memory>"):
        self.data = copy.deepcopy(data)
        self.source = source
        try:
            self.sig = Signature.from_json(self.data["signature"])
        except (KeyError, TypeError, VarSeqError) as exc:
            raise BundleError(f"{source}: bad signature: {exc}")
        self.constants = {}
        for name, text in self.data.get("constants", {}).items():
            value = parse(text, self.sig, self.constants).expr
            if value.free_symbols:
                raise BundleError(f"{source}: constant {name} is not numeric")
            self.constants[name] = value
        self._covers = {}
        self._check_references()

    # -- parsing helpers
    def expr(self, text: str, where: str = ""):
        try:
            return parse(text, self.sig, self.constants)
        except VarSeqError as exc:
            raise BundleError(f"{self.source}: {where}: {exc}")

    def number(self, text: str):
        return self.expr(text, "constant").expr

    @property
    def name(self) -> str:
        return self.data.get("name", Path(self.source).stem)

    def section(self, key: str) -> dict:
        return self.data.get(key, {})

    def _lookup(self, key, name):
        sec = self.section(key)
        if name not in sec:
            raise BundleError(f"{self.source}: no {key[:-1]} named {name!r} "
                              f"(have: {', '.join(sorted(sec)) or 'none'})")
        return sec[name]

    def _check_references(self):
        for pname, p in self.section("presentations").items():
            if p.get("cover") not in self.section("covers"):
                raise BundleError(f"{self.source}: presentation {pname} names unknown cover {p.get('cover')!r}")
        for entry in self.data.get("conservation", []):
            self._lookup("presentations", entry["presentation"])
            self._lookup("fields", entry["field"])
            if "potential" in entry:
                self._lookup("currents", entry["potential"])
        # parse everything once so errors surface at load time
        self.normalized()

    # -- objects
    def lagrangian(self, name: str) -> Lagrangian:
        """A named Lagrangian of the bundle, or an inline expression."""
        text = self.section("lagrangians").get(name, name)
        return Lagrangian(self.expr(text, f"lagrangian {name}"))

    def source_form(self, name: str) -> SourceForm:
        comps = self._lookup("sources", name)
        return SourceForm(tuple(self.expr(c, f"source {name}") for c in comps))

    def field(self, name: str) -> ProjectableField:
        f = self._lookup("fields", name)
        return ProjectableField([self.expr(c, f"field {name}") for c in f["xi"]],
                                [self.expr(c, f"field {name}") for c in f["Xi"]])

    def current(self, name_or_list) -> Current:
        comps = self._lookup("currents", name_or_list) if isinstance(name_or_list, str) else name_or_list
        return Current(tuple(self.expr(c, "current") for c in comps))

    def cover(self, name: str) -> Cover:
        if name not in self._covers:
            c = self._lookup("covers", name)
            sets = []
            for s in c["sets"]:
                center = tuple(self.number(v) for v in s["center"]) if "center" in s else None
                sets.append(OpenSet(s["name"], tuple(self.expr(d, f"domain of {s['name']}")
                                                     for d in s.get("domain", [])),
                                    center, s.get("star_shaped", True)))
            try:
                self._covers[name] = Cover(self.sig, sets, c["simplices"])
            except VarSeqError as exc:
                raise BundleError(f"{self.source}: cover {name}: {exc}")
        return self._covers[name]

    def presentation(self, name: str) -> Presentation:
        p = self._lookup("presentations", name)
        cover = self.cover(p["cover"])
        lams = [self.lagrangian(t) for t in p["lagrangians"]]
        if len(lams) != cover.size:
            raise BundleError(f"{self.source}: presentation {name} needs {cover.size} Lagrangians")
        pots = {tuple(int(i) for i in k.split(",")): self.current(v)
                for k, v in p.get("potentials", {}).items()}
        unit = self.number(p.get("unit", "1"))
        return Presentation(cover, lams, pots, unit, name)

    def boundary_currents(self, presentation: str, field: str) -> dict:
        p = self._lookup("presentations", presentation)
        raw = p.get("boundary_currents", {}).get(field, {})
        return {int(k): self.current(v) for k, v in raw.items()}

    def trivial_cochain(self, name: str):
        t = self._lookup("trivial_cochains", name)
        mu = Lagrangian(self.expr(t["density"], f"trivial cochain {name}"))
        return t["presentation"], mu, {i: self.current([c]) for i, c in enumerate(t["currents"])}

    def default(self, key: str):
        return self.section("defaults").get(key)

    # -- serialization
    def normalized(self) -> dict:
        """The bundle with every expression string replaced by its normal form."""
        def norm(value, where):
            if isinstance(value, str):
                return to_text(self.expr(value, where).expr)
            if isinstance(value, list):
                return [norm(v, where) for v in value]
            if isinstance(value, dict):
                return {k: norm(v, where) for k, v in value.items()}
            return value

        out = copy.deepcopy(self.data)
        lag_names = set(self.section("lagrangians"))
        for key in ("lagrangians", "sources", "currents"):
            for name, value in out.get(key, {}).items():
                out[key][name] = norm(value, f"{key[:-1]} {name}")
        for fname, f in out.get("fields", {}).items():
            out["fields"][fname] = {k: norm(v, f"field {fname}") for k, v in f.items()}
        for cname, c in out.get("covers", {}).items():
            for s in c["sets"]:
                if "domain" in s:
                    s["domain"] = norm(s["domain"], f"domain of {s['name']}")
                if "center" in s:
                    s["center"] = norm(s["center"], "center")
        for pname, p in out.get("presentations", {}).items():
            p["lagrangians"] = [t if t in lag_names else norm(t, pname) for t in p["lagrangians"]]
            for key in ("potentials", "boundary_currents"):
                if key in p:
                    p[key] = norm(p[key], pname)
            if "unit" in p:
                p["unit"] = norm(p["unit"], pname)
        for tname, t in out.get("trivial_cochains", {}).items():
            t["density"] = norm(t["density"], tname)
            t["currents"] = norm(t["currents"], tname)
        for entry in out.get("conservation", []):
            if "potentials" in entry:
                entry["potentials"] = norm(entry["potentials"], "conservation")
        for oname, o in out.get("oracles", {}).items():
            for key in ("form", "loop"):
                if key in o:
                    o[key] = norm(o[key], oname)
        return out

    def to_json(self) -> str:
        return json.dumps(self.normalized(), indent=2, sort_keys=True) + "\n"


def load(name_or_path) -> Bundle:
    path = resolve(str(name_or_path))
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleError(f"{path}: {exc}")
    return Bundle(data, str(path))


def save(bundle: Bundle, path) -> None:
    Path(path).write_text(bundle.to_json())


def loop_points(bundle: Bundle, loop: list, samples: int) -> list:
    """Fiber points along a loop parametrized by the base coordinate over [0, 1)."""
    sig = bundle.sig
    t = sig.base_symbols[0]
    exprs = [bundle.expr(c, "loop").expr for c in loop]
    pts = []
    for k in range(samples):
        s = sp.Rational(k, samples)
        pts.append({sig.jet(a): sp.N(e.subs(t, s), 30) for a, e in enumerate(exprs)})
    return pts
