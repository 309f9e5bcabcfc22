"""Covers, nerves and cochains; presentations of local variational problems.

Restriction maps are the identity on expressions: every set of a cover shares
one global coordinate system and the topology lives in the declared nerve and
the domain inequalities. Real-coefficient classes are computed only after
entries reduce to constants; anything else is reported as undetermined.

Coboundary convention: (dc)(s_0..s_{q+1}) = sum_i (-1)^i c(s with s_i removed),
so a 0-cochain a gives a_j - a_i on the edge (i, j).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath
import sympy as sp

from .errors import DegreeError, PreconditionError, SingularPointError
from .forms import Current, Lagrangian, SourceForm, horizontal_differential
from .jetexpr import JetExpr, Signature, Verdict, eval_mpf
from .varcalc import (ProjectableField, contract_source, dh_potential, euler_lagrange,
                      is_symmetry, lie_current, lie_lagrangian, noether_current,
                      var_lie_source)

# ---------------------------------------------------------------------------
# covers


@dataclass
class OpenSet:
    name: str
    domain: tuple = ()        # JetExpr values that must be > 0 on the set
    center: tuple | None = None  # fiber point, used for Tonti and orientation
    star_shaped: bool = True


class Cover:
    """Finite cover with an explicitly declared nerve."""

    def __init__(self, sig: Signature, sets: Sequence[OpenSet], simplices: Sequence[Sequence[int]]):
        self.sig = sig
        self.sets = list(sets)
        simplices = [tuple(s) for s in simplices]
        for i in range(len(self.sets)):
            if (i,) not in simplices:
                simplices.append((i,))
        for s in simplices:
            if any(b <= a for a, b in zip(s, s[1:])):
                raise PreconditionError("nerve", f"simplex {s} is not strictly increasing")
            if any(not 0 <= i < len(self.sets) for i in s):
                raise PreconditionError("nerve", f"simplex {s} names an undeclared set")
        present = set(simplices)
        for s in simplices:
            for k in range(1, len(s)):
                for face in itertools.combinations(s, k):
                    if face not in present:
                        raise PreconditionError("nerve", f"face {face} of {s} is not listed")
        self.simplices = sorted(present, key=lambda s: (len(s), s))

    @property
    def size(self) -> int:
        return len(self.sets)

    @property
    def dimension(self) -> int:
        return max(len(s) for s in self.simplices) - 1

    def simplices_of(self, q: int) -> list:
        return [s for s in self.simplices if len(s) == q + 1]

    def label(self, simplex) -> str:
        return "(" + ",".join(self.sets[i].name for i in simplex) + ")"

    @classmethod
    def from_maximal(cls, sig, sets, maximal):
        """Cover whose nerve is the downward closure of the given simplices."""
        faces = {f for s in maximal for k in range(1, len(s) + 1)
                 for f in itertools.combinations(sorted(s), k)}
        return cls(sig, sets, sorted(faces))

    @classmethod
    def single(cls, sig, name="U"):
        return cls(sig, [OpenSet(name)], [(0,)])

    def contains(self, simplex, point: Mapping) -> bool:
        for i in simplex:
            for ineq in self.sets[i].domain:
                try:
                    if eval_mpf(ineq, point) <= 0:
                        return False
                except (SingularPointError, ValueError):
                    return False
        return True

    def sample_point(self, simplex, rng: random.Random | None = None, tries: int = 2000) -> dict:
        """Random rational point of the jet space lying in every set of the simplex."""
        rng = rng or random.Random(0)
        sig = self.sig
        symbols = list(sig.base_symbols) + [sig.jet(a, I) for a in range(sig.m)
                                            for I in sig.all_multi_indices()]
        for _ in range(tries):
            point = {s: sp.Rational(rng.randint(-2000, 2000), 1000) for s in symbols}
            if self.contains(simplex, point):
                return point
        raise PreconditionError("sample", f"no sample point found in {self.label(simplex)}")


# ---------------------------------------------------------------------------
# cochains


def _is_zero_value(v, trials=20) -> Verdict:
    if isinstance(v, (JetExpr, Lagrangian, Current, SourceForm)):
        return v.is_zero(trials)
    return Verdict("zero") if sp.sympify(v) == 0 else Verdict("nonzero")


def _signed_sum(terms):
    total = None
    for sign, v in terms:
        t = v if sign > 0 else -v
        total = t if total is None else total + t
    return total


class Cochain:
    """Assignment of a value to every q-simplex of a nerve."""

    def __init__(self, cover: Cover, q: int, values: Mapping):
        self.cover = cover
        self.q = q
        self.values = {tuple(k): v for k, v in values.items()}
        expected = set(cover.simplices_of(q))
        if set(self.values) != expected:
            missing = sorted(expected - set(self.values))
            raise PreconditionError("cochain", f"degree-{q} cochain is not total (missing {missing})")
        kinds = {type(v).__name__ for v in self.values.values()}
        if len(kinds) > 1 and not kinds <= {"Integer", "Rational", "Zero", "One", "NegativeOne",
                                            "Half", "Float", "int", "Mul", "Pi", "Add"}:
            raise PreconditionError("cochain", f"value kinds are not homogeneous: {sorted(kinds)}")

    def __getitem__(self, simplex):
        return self.values[tuple(simplex)]

    def items(self):
        return sorted(self.values.items(), key=lambda kv: kv[0])

    def __add__(self, other):
        return Cochain(self.cover, self.q, {k: v + other.values[k] for k, v in self.values.items()})

    def __sub__(self, other):
        return Cochain(self.cover, self.q, {k: v - other.values[k] for k, v in self.values.items()})

    def map(self, f):
        return Cochain(self.cover, self.q, {k: f(v) for k, v in self.values.items()})

    def zero_verdicts(self, trials=20) -> dict:
        return {k: _is_zero_value(v, trials) for k, v in self.items()}

    def is_zero(self, trials=20) -> Verdict:
        return Verdict.combine(self.zero_verdicts(trials).values())


def coboundary(c: Cochain) -> Cochain:
    cover = c.cover
    out = {}
    for s in cover.simplices_of(c.q + 1):
        out[s] = _signed_sum(((-1) ** i, c[s[:i] + s[i + 1:]]) for i in range(len(s)))
    return Cochain(cover, c.q + 1, out)


# ---------------------------------------------------------------------------
# nerve cohomology with rational coefficients


def coboundary_matrix(cover: Cover, q: int) -> sp.Matrix:
    """Matrix of d: C^q -> C^{q+1} in the simplex bases."""
    rows, cols = cover.simplices_of(q + 1), cover.simplices_of(q)
    index = {s: j for j, s in enumerate(cols)}
    M = sp.zeros(len(rows), len(cols))
    for r, s in enumerate(rows):
        for i in range(len(s)):
            M[r, index[s[:i] + s[i + 1:]]] += (-1) ** i
    return M


@dataclass
class NerveCohomology:
    degree: int
    dimension: int
    basis: list        # representative cocycles, each a list of rationals over simplices_of(q)
    image: sp.Matrix   # columns span the coboundaries d C^{q-1}
    simplices: list
    forward: sp.Matrix | None = None  # d: C^q -> C^{q+1}

    def coordinates(self, values: Sequence) -> tuple:
        """Coordinates of the class of a cocycle in the representative basis."""
        c = sp.Matrix([sp.Rational(v) for v in values])
        if self.forward is not None and any(x != 0 for x in self.forward * c):
            raise PreconditionError("cocycle", "constant cochain is not a cocycle")
        if self.dimension == 0:
            return ()
        H = sp.Matrix.hstack(*[sp.Matrix(b) for b in self.basis])
        A = sp.Matrix.hstack(H, self.image) if self.image.cols else H
        sol, params = A.gauss_jordan_solve(c)
        sol = sol.subs({p: 0 for p in params})
        return tuple(sp.nsimplify(sol[k]) for k in range(self.dimension))


def nerve_cohomology(cover: Cover, q: int) -> NerveCohomology:
    simplices = cover.simplices_of(q)
    n_q = len(simplices)
    d = coboundary_matrix(cover, q) if cover.simplices_of(q + 1) else sp.zeros(0, n_q)
    image = coboundary_matrix(cover, q - 1) if q > 0 else sp.zeros(n_q, 0)
    kernel = d.nullspace() if d.rows else [sp.eye(n_q)[:, k] for k in range(n_q)]
    basis = []
    span = image
    rank = span.rank() if span.cols else 0
    for v in kernel:
        trial = sp.Matrix.hstack(span, v) if span.cols else v
        r = trial.rank()
        if r > rank:
            basis.append(list(v))
            span, rank = trial, r
    return NerveCohomology(q, len(basis), basis, image, simplices, d if d.rows else None)


def betti_numbers(cover: Cover) -> tuple:
    return tuple(nerve_cohomology(cover, q).dimension for q in range(cover.dimension + 1))


def fundamental_cycle_from_centers(cover: Cover) -> dict:
    """Top-dimensional cycle oriented by sign det(center_i0, ..., center_iq).

    Centers must be fiber points in R^(q+1) (e.g. the octahedral cover of
    R^3 minus the origin).
    """
    q = cover.dimension
    z = {}
    for s in cover.simplices_of(q):
        M = sp.Matrix([[sp.sympify(x) for x in cover.sets[i].center] for i in s])
        if M.shape != (q + 1, q + 1):
            raise PreconditionError("orientation", "set centers must have q+1 coordinates")
        z[s] = int(sp.sign(M.det()))
    boundary = {}
    for s, c in z.items():
        for i in range(len(s)):
            f = s[:i] + s[i + 1:]
            boundary[f] = boundary.get(f, 0) + (-1) ** i * c
    if any(boundary.values()):
        raise PreconditionError("orientation", "declared centers do not give a cycle")
    return z


def loop_cycle(cover: Cover, points: Sequence[Mapping]) -> dict:
    """1-cycle of the nerve traced by a closed loop given as sample points."""
    current = None
    chain = {}
    first = None
    for p in list(points) + [points[0]]:
        inside = [i for i in range(cover.size) if cover.contains((i,), p)]
        if not inside:
            raise PreconditionError("loop", "loop leaves the cover")
        if current is None:
            current = first = inside[0]
            continue
        if current in inside:
            continue
        nxt = inside[0]
        edge = tuple(sorted((current, nxt)))
        if edge not in cover.simplices_of(1):
            raise PreconditionError("loop", f"loop jumps between non-intersecting sets {edge}")
        chain[edge] = chain.get(edge, 0) + (1 if edge[0] == current else -1)
        current = nxt
    if current != first:
        edge = tuple(sorted((current, first)))
        chain[edge] = chain.get(edge, 0) + (1 if edge[0] == current else -1)
    return {k: v for k, v in chain.items() if v}


def pair(values: Mapping, cycle: Mapping):
    return sum((values[s] * c for s, c in cycle.items()), sp.Integer(0))


# ---------------------------------------------------------------------------
# reduction to constants


@dataclass
class ConstantEntry:
    simplex: tuple
    status: str             # "constant" | "nonconstant" | "undetermined"
    value: sp.Expr | None = None
    message: str = ""


def _as_scalar(v, sig: Signature) -> JetExpr:
    if isinstance(v, (int, Fraction, sp.Number)):
        return JetExpr(sig, sp.Rational(v))
    if isinstance(v, JetExpr):
        return v
    if isinstance(v, Lagrangian):
        return v.density
    if isinstance(v, Current):
        if len(v.components) != 1:
            raise DegreeError("only currents of an n = 1 problem reduce to scalars")
        return v.components[0]
    raise DegreeError(f"cannot reduce a {type(v).__name__} to a constant")


def _recognize(value, unit, dps: int):
    """Exact multiple of the unit when value/unit is a small-denominator rational."""
    with mpmath.workdps(dps):
        u = mpmath.mpf(sp.N(unit, dps)._to_mpmath(mpmath.mp.prec))
        ratio = value / u
        frac = Fraction(mpmath.nstr(ratio, dps - 5, min_fixed=-mpmath.inf, max_fixed=mpmath.inf))
        frac = frac.limit_denominator(10000)
        if abs(ratio - mpmath.mpf(frac.numerator) / frac.denominator) < mpmath.mpf(10) ** (-(dps - 15)):
            return sp.Rational(frac.numerator, frac.denominator) * unit
    return None


def reduce_entry(cover: Cover, simplex, value, unit=sp.Integer(1), seed: int = 0,
                 dps: int = 50) -> ConstantEntry:
    e = _as_scalar(value, cover.sig)
    sig = e.sig
    for s in e.free_coordinates():
        v = JetExpr(sig, sp.diff(e.expr, s)).is_zero()
        if v.is_nonzero:
            return ConstantEntry(simplex, "nonconstant", None,
                                 f"entry on {cover.label(simplex)} depends on {s}")
        if v.is_undetermined:
            return ConstantEntry(simplex, "undetermined", None,
                                 f"constancy in {s} on {cover.label(simplex)} not certified")
    if e.expr.is_number:
        exact = sp.nsimplify(e.expr / unit)
        if exact.is_Rational:
            return ConstantEntry(simplex, "constant", exact * unit)
    point = cover.sample_point(simplex, random.Random(seed))
    value = eval_mpf(e, point, dps)
    const = _recognize(value, unit, dps)
    if const is None:
        return ConstantEntry(simplex, "undetermined", None,
                             f"value {mpmath.nstr(value, 15)} on {cover.label(simplex)} "
                             f"is not a rational multiple of {unit}")
    return ConstantEntry(simplex, "constant", const)


@dataclass
class ConstantReduction:
    entries: list
    unit: sp.Expr

    @property
    def ok(self) -> bool:
        return all(e.status == "constant" for e in self.entries)

    @property
    def values(self) -> dict:
        return {e.simplex: e.value for e in self.entries}

    def problems(self) -> list:
        return [e for e in self.entries if e.status != "constant"]


def reduce_to_constants(c: Cochain, unit=sp.Integer(1), seed: int = 0) -> ConstantReduction:
    """Constants of an expression cochain, in exact multiples of ``unit``."""
    unit = sp.sympify(unit)
    return ConstantReduction([reduce_entry(c.cover, s, v, unit, seed) for s, v in c.items()], unit)


@dataclass
class CechClass:
    degree: int
    status: str                     # "trivial" | "nontrivial" | "undetermined"
    coordinates: tuple = ()         # rational multiples of unit
    unit: sp.Expr = sp.Integer(1)
    constants: dict | None = None   # representative cocycle
    message: str = ""
    glued: dict | None = None       # set index -> global object restricted to it
    extras: dict = field(default_factory=dict)

    @property
    def trivial(self) -> bool | None:
        return None if self.status == "undetermined" else self.status == "trivial"

    def to_json(self, cover: Cover | None = None) -> dict:
        def lab(s):
            return cover.label(s) if cover else str(s)
        out = {"degree": self.degree, "status": self.status,
               "coordinates": [str(c) for c in self.coordinates], "unit": str(self.unit)}
        if self.constants is not None:
            out["cocycle"] = {lab(s): str(v) for s, v in sorted(self.constants.items())}
        if self.message:
            out["message"] = self.message
        if self.glued is not None:
            out["glued"] = {str(k): str(v) for k, v in sorted(self.glued.items())}
        out.update({k: (str(v) if isinstance(v, sp.Basic) else v) for k, v in self.extras.items()})
        return out


def classify(cover: Cover, q: int, reduction: ConstantReduction, message: str = "") -> CechClass:
    if not reduction.ok:
        bad = reduction.problems()[0]
        return CechClass(q, "undetermined", unit=reduction.unit, message=bad.message)
    values = reduction.values
    h = nerve_cohomology(cover, q)
    scaled = [values[s] / reduction.unit for s in h.simplices]
    coords = h.coordinates(scaled)
    status = "nontrivial" if any(c != 0 for c in coords) else "trivial"
    return CechClass(q, status, coords, reduction.unit, values, message)


# ---------------------------------------------------------------------------
# presentations


class Presentation:
    """Local Lagrangians {lambda_i} on a cover, optionally with edge potentials."""

    def __init__(self, cover: Cover, lagrangians: Sequence[Lagrangian],
                 potentials: Mapping | None = None, unit=sp.Integer(1), name: str = ""):
        self.cover = cover
        self.lagrangians = Cochain(cover, 0, {(i,): lam for i, lam in enumerate(lagrangians)})
        self.potentials = {tuple(k): v for k, v in (potentials or {}).items()}
        self.unit = sp.sympify(unit)
        self.name = name
        self._eta = None

    @property
    def sig(self):
        return self.cover.sig

    def lagrangian(self, i) -> Lagrangian:
        return self.lagrangians[(i,)]

    @property
    def eta(self) -> Cochain:
        if self._eta is None:
            self._eta = self.lagrangians.map(euler_lagrange)
        return self._eta

    def source(self) -> SourceForm:
        return self.eta[(0,)]


@dataclass
class Failure:
    invariant: str
    where: str
    residual: str

    def to_json(self):
        return {"invariant": self.invariant, "where": self.where, "residual": self.residual}


@dataclass
class PresentationReport:
    valid: bool
    global_: bool
    failures: list
    checked: int

    def first_failure(self) -> Failure | None:
        return self.failures[0] if self.failures else None

    def to_json(self) -> dict:
        return {"valid": self.valid, "global": self.global_, "checked_simplices": self.checked,
                "failures": [f.to_json() for f in self.failures]}


def validate_presentation(p: Presentation, trials: int = 20) -> PresentationReport:
    cover = p.cover
    d_lam = coboundary(p.lagrangians)
    # E is linear, so E(lambda_j - lambda_i) is the edge difference of the cached eta
    d_eta = coboundary(p.eta)
    failures = []
    global_ = True
    for s, diff in d_lam.items():
        residual = d_eta[s]
        if not residual.is_zero(trials).is_zero:
            failures.append(Failure("E(lambda_j - lambda_i) = 0", cover.label(s), str(residual)))
            failures.append(Failure("d eta = 0", cover.label(s), str(residual)))
        if not diff.is_zero(trials).is_zero:
            global_ = False
    return PresentationReport(not failures, global_ and not failures, failures, len(d_lam.values))


def equivalent(p: Presentation, q: Presentation, trials: int = 20) -> Verdict:
    if p.cover is not q.cover and (p.cover.simplices != q.cover.simplices or p.cover.size != q.cover.size):
        raise PreconditionError("cover", "presentations live on different covers")
    return (p.eta - q.eta).is_zero(trials)


def edge_potentials(p: Presentation) -> dict:
    """Currents nu_ij with d_H nu_ij = lambda_j - lambda_i (supplied ones are verified)."""
    out = {}
    for s, diff in coboundary(p.lagrangians).items():
        cand = p.potentials.get(s)
        c = p.cover.sets[s[0]].center
        center = dict(enumerate(c)) if c is not None and cand is None else None
        try:
            out[s] = dh_potential(diff, candidate=cand, center=center)
        except PreconditionError as exc:
            raise PreconditionError("potential", f"on {p.cover.label(s)}: {exc}", exc.residual)
    return out


def obstruction_class(p: Presentation, unit=None, seed: int = 0) -> CechClass:
    """Class of the constants (d nu)_ijk in H^2 of the nerve (n = 1)."""
    if p.sig.n != 1:
        raise DegreeError("obstruction class is implemented for one independent variable")
    report = validate_presentation(p)
    if not report.valid:
        f = report.first_failure()
        raise PreconditionError("presentation", f"{f.invariant} fails on {f.where}: {f.residual}")
    unit = p.unit if unit is None else sp.sympify(unit)
    if report.global_:
        return CechClass(2, "trivial", (0,) * nerve_cohomology(p.cover, 2).dimension, unit, {},
                         "Lagrangians agree on every overlap")
    if not p.cover.simplices_of(2):
        return CechClass(2, "trivial", (), unit, {}, "nerve has no 2-simplices")
    nu = Cochain(p.cover, 1, edge_potentials(p))
    triple = coboundary(nu)
    cls = classify(p.cover, 2, reduce_to_constants(triple, unit, seed))
    cls.extras["potentials"] = {p.cover.label(s): str(v) for s, v in nu.items()}
    return cls


def _boundary_current(lam: Lagrangian, X: ProjectableField, supplied):
    lie = lie_lagrangian(lam, X)
    return dh_potential(lie, candidate=supplied)


def current_obstruction(p: Presentation, X: ProjectableField, beta: Mapping | None = None,
                        unit=None, seed: int = 0) -> CechClass:
    """Class in H^1 of the nerve of the currents eps_i - beta_i (n = 1).

    eps_i is the Noether current of lambda_i and d_H beta_i = L_X lambda_i,
    so eps_i - beta_i is a local current for -X_V -| eta and its edge
    differences are d_H-closed.
    """
    if p.sig.n != 1:
        raise DegreeError("current obstruction is implemented for one independent variable")
    eta = p.source()
    sym = is_symmetry(eta, X, check=False)
    if not sym.is_zero:
        raise PreconditionError("symmetry", f"field is not a symmetry of the source form "
                                f"(L_X eta = {var_lie_source(eta, X, check=False)})")
    unit = p.unit if unit is None else sp.sympify(unit)
    beta = beta or {}
    J = {}
    for i in range(p.cover.size):
        lam = p.lagrangian(i)
        try:
            b = _boundary_current(lam, X, beta.get(i))
        except PreconditionError as exc:
            raise PreconditionError("boundary-current", f"on {p.cover.sets[i].name}: {exc}", exc.residual)
        J[(i,)] = noether_current(lam, X) - b
    J = Cochain(p.cover, 0, J)
    diffs = coboundary(J)
    cls = classify(p.cover, 1, reduce_to_constants(diffs, unit, seed))
    cls.extras["currents"] = {p.cover.sets[i].name: str(J[(i,)]) for i in range(p.cover.size)}
    if cls.status == "trivial":
        # solve c = d b over the nerve and shift the local currents
        cls.glued = _glue(p.cover, J, cls.constants)
    return cls


def _glue(cover: Cover, J: Cochain, constants: Mapping) -> dict:
    edges = cover.simplices_of(1)
    if not edges:
        return {i: J[(i,)] for i in range(cover.size)}
    D = coboundary_matrix(cover, 0)
    c = sp.Matrix([constants[s] for s in edges])
    sol, params = D.gauss_jordan_solve(c)
    sol = sol.subs({q: 0 for q in params})
    glued = {i: J[(i,)] - Current((JetExpr(cover.sig, sol[i]),)) for i in range(cover.size)}
    for (i, j) in edges:
        entry = reduce_entry(cover, (i, j), glued[j] - glued[i])
        if entry.status != "constant" or entry.value != 0:
            raise PreconditionError("glue", f"glued current disagrees on {cover.label((i, j))}")
    return glued


# ---------------------------------------------------------------------------
# trivialization by a field


@dataclass
class CheckReport:
    name: str
    steps: list = field(default_factory=list)   # (name, where, verdict, residual)

    def add(self, step, where, verdict: Verdict, residual=""):
        self.steps.append((step, where, verdict, str(residual)))

    @property
    def verdict(self) -> Verdict:
        return Verdict.combine(v for _, _, v, _ in self.steps)

    def first_failure(self):
        for s in self.steps:
            if not s[2].is_zero:
                return s
        return None

    def to_json(self) -> dict:
        return {"check": self.name, "verdict": self.verdict.kind,
                "steps": [{"step": s, "where": w, "verdict": v.kind, "residual": r}
                          for s, w, v, r in self.steps]}


def lie_presentation(p: Presentation, X: ProjectableField) -> Presentation:
    """{L_X lambda_i}, with potentials L_X nu_ij when p carries potentials."""
    lams = [lie_lagrangian(p.lagrangian(i), X) for i in range(p.cover.size)]
    pots = {s: lie_current(nu, X) for s, nu in p.potentials.items()}
    return Presentation(p.cover, lams, pots, p.unit, f"L_X {p.name}")


def trivialization_check(p: Presentation, X: ProjectableField,
                         trivial_cochain: tuple | None = None, obstruction: bool = True,
                         trials: int = 20) -> CheckReport:
    """Per-set and nerve-level checks that L_X kills the classes of p.

    (a) E(L_X lambda_i) = E(X_V -| eta) = L_X eta on each set;
    (b) the presentation {L_X lambda_i} has a trivial obstruction class;
    (c) for a variationally trivial (mu, {nu_i}): d_H L_X nu_i = L_X mu = d_H eps(mu, X).
    """
    report = CheckReport("trivialization")
    cover = p.cover
    global_lag = None
    for i in range(cover.size):
        where = cover.sets[i].name
        lam = p.lagrangian(i)
        eta = p.eta[(i,)]
        contraction = contract_source(eta, X)
        global_lag = contraction if global_lag is None else global_lag
        lhs = euler_lagrange(lie_lagrangian(lam, X))
        mid = euler_lagrange(contraction)
        rhs = var_lie_source(eta, X, check=False)
        report.add("E(L_X lambda_i) = E(X_V -| eta)", where, (lhs - mid).is_zero(trials), lhs - mid)
        report.add("E(X_V -| eta) = L_X eta", where, (mid - rhs).is_zero(trials), mid - rhs)
        report.add("X_V -| eta is global", where, (contraction - global_lag).is_zero(trials),
                   contraction - global_lag)
    if obstruction and p.sig.n == 1 and cover.simplices_of(2):
        cls = obstruction_class(lie_presentation(p, X))
        v = Verdict("zero") if cls.status == "trivial" else (
            Verdict("undetermined") if cls.status == "undetermined" else Verdict("nonzero"))
        report.add("class of {L_X lambda_i} is trivial", "nerve", v,
                   ",".join(map(str, cls.coordinates)) or cls.message)
    if trivial_cochain is not None:
        mu, nus = trivial_cochain
        l_mu = lie_lagrangian(mu, X)
        via_current = horizontal_differential(noether_current(mu, X))
        report.add("E(mu) = 0", "global", euler_lagrange(mu).is_zero(trials), euler_lagrange(mu))
        for i, nu in sorted(nus.items()):
            where = cover.sets[i].name
            r0 = horizontal_differential(nu) - mu
            report.add("d_H nu_i = mu", where, r0.is_zero(trials), r0.density)
            r1 = horizontal_differential(lie_current(nu, X)) - l_mu
            report.add("d_H L_X nu_i = L_X mu", where, r1.is_zero(trials), r1.density)
            r2 = l_mu - via_current
            report.add("L_X mu = d_H eps(mu, X)", where, r2.is_zero(trials), r2.density)
    return report
