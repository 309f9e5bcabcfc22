"""Contact-graded exterior calculus on coordinate representatives.

Forms are finite sums ``coefficient * f_1 ^ ... ^ f_k`` over basis 1-forms.
In the contact basis the factors are ``theta[a, I] = du^a_I - u^a_{I mu} dx^mu``
and ``dx^mu``; in the raw basis they are ``du^a_I`` and ``dx^mu``.

Sign convention (the only one used anywhere): vertical factors precede
horizontal ones, vertical factors are ordered by ``(a, I)``, horizontal ones
by base index. Every sign below follows from sorting into that order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import sympy as sp

from .errors import DegreeError, OrderCapError
from .jetexpr import (JetExpr, Signature, Verdict, add_index, is_zero_expr,
                      normalize, to_text, total_derivative_expr)

CONTACT = "contact"
RAW = "raw"


def _vert(a: int, I: tuple) -> tuple:
    return (0, a, tuple(I))


def _horiz(mu: int) -> tuple:
    return (1, mu)


def _sort_sign(factors: Iterable[tuple]):
    """Sort factors; return (sign, sorted tuple), sign 0 on a repeated factor."""
    lst = list(factors)
    sign = 1
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
    for i in range(1, len(lst)):
        if lst[i] == lst[i - 1]:
            return 0, ()
    return sign, tuple(lst)


class VarForm:
    """A differential form on a jet space, stored in the contact or raw basis."""

    __slots__ = ("sig", "terms", "basis")

    def __init__(self, sig: Signature, terms=None, basis: str = CONTACT):
        self.sig = sig
        self.basis = basis
        clean = {}
        for key, coeff in (terms or {}).items():
            sign, key = _sort_sign(key)
            if sign == 0:
                continue
            coeff = coeff.expr if isinstance(coeff, JetExpr) else sp.sympify(coeff)
            clean[key] = clean.get(key, 0) + sign * coeff
        self.terms = {}
        for key in sorted(clean):
            c = normalize(clean[key])
            if c != 0:
                self.terms[key] = c

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, sig, basis=CONTACT):
        return cls(sig, {}, basis)

    @classmethod
    def function(cls, f: JetExpr, basis=CONTACT):
        return cls(f.sig, {(): f.expr}, basis)

    @classmethod
    def dx(cls, sig, mu, basis=CONTACT):
        return cls(sig, {(_horiz(sig.base_index(mu)),): 1}, basis)

    @classmethod
    def theta(cls, sig, a=0, I=()):
        sig.jet(a, I)
        return cls(sig, {(_vert(a, tuple(sorted(I))),): 1}, CONTACT)

    @classmethod
    def du(cls, sig, a=0, I=()):
        sig.jet(a, I)
        return cls(sig, {(_vert(a, tuple(sorted(I))),): 1}, RAW)

    @classmethod
    def volume(cls, sig, basis=CONTACT):
        return cls(sig, {tuple(_horiz(mu) for mu in range(sig.n)): 1}, basis)

    # -- algebra -----------------------------------------------------------
    def _check(self, other):
        if other.basis != self.basis:
            raise ValueError("cannot combine forms stored in different bases")

    def __add__(self, other):
        if not isinstance(other, VarForm):
            return NotImplemented
        self._check(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return VarForm(self.sig, terms, self.basis)

    def __neg__(self):
        return VarForm(self.sig, {k: -c for k, c in self.terms.items()}, self.basis)

    def __sub__(self, other):
        if not isinstance(other, VarForm):
            return NotImplemented
        return self + (-other)

    def scale(self, f) -> "VarForm":
        f = f.expr if isinstance(f, JetExpr) else sp.sympify(f)
        return VarForm(self.sig, {k: c * f for k, c in self.terms.items()}, self.basis)

    def __mul__(self, f):
        if isinstance(f, VarForm):
            return NotImplemented
        return self.scale(f)

    __rmul__ = __mul__

    def wedge(self, other: "VarForm") -> "VarForm":
        return wedge(self, other)

    def __eq__(self, other):
        return isinstance(other, VarForm) and self.basis == other.basis and self.terms == other.terms

    def __hash__(self):
        return hash((self.basis, tuple(self.terms.items())))

    # -- inspection --------------------------------------------------------
    @property
    def is_literal_zero(self) -> bool:
        return not self.terms

    def coefficient(self, key: tuple) -> JetExpr:
        return JetExpr(self.sig, self.terms.get(tuple(key), 0), normalized=True)

    def bidegrees(self) -> set:
        return {(sum(1 for f in k if f[0] == 0), sum(1 for f in k if f[0] == 1)) for k in self.terms}

    def is_zero(self, trials: int = 20) -> Verdict:
        return Verdict.combine(is_zero_expr(c, trials) for c in self.terms.values())

    def _factor_text(self, f):
        if f[0] == 1:
            return "d" + self.sig.base[f[1]]
        _, a, I = f
        name = self.sig.fiber[a]
        suffix = "".join(self.sig.base[mu] for mu in I)
        if self.basis == RAW:
            return "d" + self.sig.jet_name(a, I)
        return f"theta[{name},{suffix}]" if suffix else f"theta[{name}]"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for key, c in self.terms.items():
            basis = "^".join(self._factor_text(f) for f in key)
            coeff = to_text(c)
            parts.append(f"({coeff})*{basis}" if basis else f"({coeff})")
        return " + ".join(parts)

    __repr__ = __str__


def wedge(alpha: VarForm, beta: VarForm) -> VarForm:
    alpha._check(beta)
    terms = {}
    for ka, ca in alpha.terms.items():
        for kb, cb in beta.terms.items():
            sign, key = _sort_sign(ka + kb)
            if sign:
                terms[key] = terms.get(key, 0) + sign * ca * cb
    return VarForm(alpha.sig, terms, alpha.basis)


def _derivation(form: VarForm, on_coeff: Callable, on_factor: Callable) -> VarForm:
    """Apply an odd derivation given its action on coefficients and on basis 1-forms."""
    sig = form.sig
    out = VarForm.zero(sig, form.basis)
    for key, c in form.terms.items():
        rest = VarForm(sig, {key: 1}, form.basis)
        dc = on_coeff(c)
        if dc is not None and not dc.is_literal_zero:
            out = out + wedge(dc, rest)
        for i, f in enumerate(key):
            image = on_factor(f)
            if image is None or image.is_literal_zero:
                continue
            left = VarForm(sig, {key[:i]: c}, form.basis)
            right = VarForm(sig, {key[i + 1:]: 1}, form.basis)
            piece = wedge(wedge(left, image), right)
            out = out + (piece if i % 2 == 0 else -piece)
    return out


# ---------------------------------------------------------------------------
# differentials

def _dh_coeff(sig, basis):
    def act(c):
        return VarForm(sig, {(_horiz(mu),): total_derivative_expr(sig, c, mu)
                             for mu in range(sig.n)}, basis)
    return act


def _dv_coeff(sig, basis):
    def act(c):
        return VarForm(sig, {(_vert(a, I),): sp.diff(c, sig.jet(a, I)) for a, I in sig.jets_of(c)}, basis)
    return act


def _contact_dtheta(sig):
    def act(f):
        if f[0] == 1:
            return None
        _, a, I = f
        if len(I) >= sig.order_cap:
            raise OrderCapError(f"d theta[{sig.jet_name(a, I)}] needs order {len(I) + 1} > order_cap")
        return VarForm(sig, {(_vert(a, add_index(I, mu)), _horiz(mu)): -1 for mu in range(sig.n)})
    return act


def _require(form: VarForm, basis: str):
    if form.basis != basis:
        raise ValueError(f"operation expects a form in the {basis} basis")


def d_H(form: VarForm) -> VarForm:
    _require(form, CONTACT)
    return _derivation(form, _dh_coeff(form.sig, CONTACT), _contact_dtheta(form.sig))


def d_V(form: VarForm) -> VarForm:
    _require(form, CONTACT)
    return _derivation(form, _dv_coeff(form.sig, CONTACT), lambda f: None)


def split_dH_dV(form: VarForm):
    return d_H(form), d_V(form)


def exterior_d(form: VarForm) -> VarForm:
    """d = d_H + d_V in the contact basis, or the coordinate d in the raw basis."""
    if form.basis == RAW:
        return raw_exterior_d(form)
    h, v = split_dH_dV(form)
    return h + v


def raw_exterior_d(form: VarForm) -> VarForm:
    _require(form, RAW)
    sig = form.sig

    def act(c):
        terms = {(_horiz(mu),): sp.diff(c, sig.base_symbols[mu]) for mu in range(sig.n)}
        for a, I in sig.jets_of(c):
            terms[(_vert(a, I),)] = sp.diff(c, sig.jet(a, I))
        return VarForm(sig, terms, RAW)

    return _derivation(form, act, lambda f: None)


# ---------------------------------------------------------------------------
# basis changes and projections

def _substitute_factors(form: VarForm, images: Callable, basis: str) -> VarForm:
    sig = form.sig
    out = VarForm.zero(sig, basis)
    for key, c in form.terms.items():
        piece = VarForm(sig, {(): c}, basis)
        for f in key:
            piece = wedge(piece, images(f))
        out = out + piece
    return out


def to_raw(form: VarForm) -> VarForm:
    """Rewrite theta[a,I] = du^a_I - u^a_{I mu} dx^mu."""
    if form.basis == RAW:
        return form
    sig = form.sig

    def image(f):
        if f[0] == 1:
            return VarForm(sig, {(f,): 1}, RAW)
        _, a, I = f
        terms = {(f,): 1}
        for mu in range(sig.n):
            terms[(_horiz(mu),)] = -sig.jet(a, add_index(I, mu))
        return VarForm(sig, terms, RAW)

    return _substitute_factors(form, image, RAW)


def from_raw(form: VarForm) -> VarForm:
    """Rewrite du^a_I = theta[a,I] + u^a_{I mu} dx^mu."""
    if form.basis == CONTACT:
        return form
    sig = form.sig

    def image(f):
        if f[0] == 1:
            return VarForm(sig, {(f,): 1}, CONTACT)
        _, a, I = f
        terms = {(f,): 1}
        for mu in range(sig.n):
            terms[(_horiz(mu),)] = sig.jet(a, add_index(I, mu))
        return VarForm(sig, terms, CONTACT)

    return _substitute_factors(form, image, CONTACT)


def contact_part(form: VarForm, k: int) -> VarForm:
    """Homogeneous contact-degree-k summand p_k."""
    form = from_raw(form)
    return VarForm(form.sig, {key: c for key, c in form.terms.items()
                              if sum(1 for f in key if f[0] == 0) == k})


def horizontalize(form: VarForm) -> VarForm:
    """h: keep the contact-degree-0 part after rewriting in the contact basis."""
    return contact_part(form, 0)


def contract(field, form: VarForm) -> VarForm:
    """Interior product with a prolonged projectable field.

    ``field`` must provide ``xi`` (base components) together with
    ``vertical_coefficient(a, I)`` (pairing with theta) and ``coefficient(a, I)``
    (pairing with du, raw basis only).
    """
    sig = form.sig

    def on_factor(f):
        if f[0] == 1:
            value = field.xi[f[1]]
        elif form.basis == CONTACT:
            value = field.vertical_coefficient(f[1], f[2])
        else:
            value = field.coefficient(f[1], f[2])
        value = value.expr if isinstance(value, JetExpr) else value
        return VarForm(sig, {(): value}, form.basis)

    return _derivation(form, lambda c: None, on_factor)


# ---------------------------------------------------------------------------
# Lagrangians, source forms, currents

def _inner_volume_key(sig, mu):
    """(sign, key) with dx^mu contracted out of the volume form."""
    return (-1) ** mu, tuple(_horiz(nu) for nu in range(sig.n) if nu != mu)


@dataclass(frozen=True)
class Lagrangian:
    """lambda = L * omega."""

    density: JetExpr

    @property
    def sig(self):
        return self.density.sig

    def to_form(self) -> VarForm:
        return VarForm.volume(self.sig).scale(self.density)

    @classmethod
    def from_form(cls, form: VarForm) -> "Lagrangian":
        form = from_raw(form)
        vol = tuple(_horiz(mu) for mu in range(form.sig.n))
        extra = [k for k in form.terms if k != vol]
        if extra:
            raise DegreeError("form is not a horizontal n-form")
        return cls(form.coefficient(vol))

    def __add__(self, other):
        return Lagrangian(self.density + other.density)

    def __sub__(self, other):
        return Lagrangian(self.density - other.density)

    def __neg__(self):
        return Lagrangian(-self.density)

    def __mul__(self, c):
        return Lagrangian(self.density * c)

    __rmul__ = __mul__

    def is_zero(self, trials=20) -> Verdict:
        return self.density.is_zero(trials)

    def order(self) -> int:
        return self.density.order()

    def __str__(self):
        return f"({self.density}) d" + "^d".join(self.sig.base)


@dataclass(frozen=True)
class SourceForm:
    """eta = eps_a theta^a ^ omega."""

    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        sig = self.components[0].sig
        if len(self.components) != sig.m:
            raise DegreeError(f"source form needs {sig.m} components")

    @property
    def sig(self):
        return self.components[0].sig

    def to_form(self) -> VarForm:
        sig = self.sig
        vol = tuple(_horiz(mu) for mu in range(sig.n))
        return VarForm(sig, {(_vert(a, ()),) + vol: e.expr for a, e in enumerate(self.components)})

    @classmethod
    def from_form(cls, form: VarForm) -> "SourceForm":
        form = from_raw(form)
        sig = form.sig
        vol = tuple(_horiz(mu) for mu in range(sig.n))
        comps = [JetExpr(sig, 0, normalized=True)] * sig.m
        for key, c in form.terms.items():
            if len(key) != sig.n + 1 or key[0][0] != 0 or key[0][2] != () or key[1:] != vol:
                raise DegreeError("form is not of source type eps_a theta^a ^ omega")
            comps[key[0][1]] = JetExpr(sig, c, normalized=True)
        return cls(tuple(comps))

    @classmethod
    def zero(cls, sig):
        return cls(tuple(JetExpr(sig, 0, normalized=True) for _ in range(sig.m)))

    def __add__(self, other):
        return SourceForm(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        return SourceForm(tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self):
        return SourceForm(tuple(-a for a in self.components))

    def __mul__(self, c):
        return SourceForm(tuple(a * c for a in self.components))

    __rmul__ = __mul__

    def is_zero(self, trials=20) -> Verdict:
        return Verdict.combine(c.is_zero(trials) for c in self.components)

    def order(self) -> int:
        return max(c.order() for c in self.components)

    def __str__(self):
        return "[" + ", ".join(str(c) for c in self.components) + "]"


@dataclass(frozen=True)
class Current:
    """nu = nu^mu (d/dx^mu  -| omega), a horizontal (n-1)-form."""

    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        sig = self.components[0].sig
        if len(self.components) != sig.n:
            raise DegreeError(f"current needs {sig.n} components")

    @property
    def sig(self):
        return self.components[0].sig

    @classmethod
    def zero(cls, sig):
        return cls(tuple(JetExpr(sig, 0, normalized=True) for _ in range(sig.n)))

    def to_form(self) -> VarForm:
        sig = self.sig
        terms = {}
        for mu, c in enumerate(self.components):
            sign, key = _inner_volume_key(sig, mu)
            terms[key] = terms.get(key, 0) + sign * c.expr
        return VarForm(sig, terms)

    @classmethod
    def from_form(cls, form: VarForm) -> "Current":
        form = from_raw(form)
        sig = form.sig
        comps = [JetExpr(sig, 0, normalized=True)] * sig.n
        keys = {_inner_volume_key(sig, mu)[1]: mu for mu in range(sig.n)}
        for key, c in form.terms.items():
            if key not in keys:
                raise DegreeError("form is not a horizontal (n-1)-form")
            mu = keys[key]
            comps[mu] = JetExpr(sig, (-1) ** mu * c, normalized=True)
        return cls(tuple(comps))

    def __add__(self, other):
        return Current(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        return Current(tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self):
        return Current(tuple(-a for a in self.components))

    def __mul__(self, c):
        return Current(tuple(a * c for a in self.components))

    __rmul__ = __mul__

    def is_zero(self, trials=20) -> Verdict:
        return Verdict.combine(c.is_zero(trials) for c in self.components)

    def __str__(self):
        if len(self.components) == 1:
            return str(self.components[0])
        return "[" + ", ".join(str(c) for c in self.components) + "]"


def horizontal_differential(nu: Current) -> Lagrangian:
    """d_H nu = (D_mu nu^mu) omega."""
    sig = nu.sig
    return Lagrangian(JetExpr(sig, sum(total_derivative_expr(sig, c.expr, mu)
                                       for mu, c in enumerate(nu.components))))


def interior_euler(form: VarForm) -> SourceForm:
    """I(sum theta^a_I ^ P_a^I omega) with eps_a = sum (-1)^|I| D_I P_a^I."""
    form = from_raw(form)
    sig = form.sig
    vol = tuple(_horiz(mu) for mu in range(sig.n))
    comps = [sp.Integer(0)] * sig.m
    for key, c in form.terms.items():
        if len(key) != sig.n + 1 or key[0][0] != 0 or key[1:] != vol:
            raise DegreeError("interior Euler operator needs a 1-contact horizontal-n form")
        _, a, I = key[0]
        term = c
        for mu in I:
            term = total_derivative_expr(sig, term, mu)
        comps[a] += (-1) ** len(I) * term
    return SourceForm(tuple(JetExpr(sig, c) for c in comps))
