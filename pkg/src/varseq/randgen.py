"""Seeded random polynomial instances for property checks.

Everything is driven by a ``random.Random`` so runs are reproducible from a
single seed. Coefficients are small rationals; monomials mix base
coordinates and jet coordinates up to a requested order.
"""
from __future__ import annotations

import random

import sympy as sp

from .forms import Current, Lagrangian, VarForm, wedge
from .jetexpr import JetExpr, Signature
from .varcalc import ProjectableField

SIGNATURES = (
    Signature(("t",), ("u",), 8),
    Signature(("t",), ("x", "y"), 8),
    Signature(("x", "y"), ("u",), 8),
)


def coefficient(rng: random.Random):
    return sp.Rational(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 1, 2, 3]))


def polynomial(rng: random.Random, symbols, terms: int = 3, degree: int = 3, required=()):
    """Sum of ``terms`` random monomials; every symbol in ``required`` appears at least once."""
    symbols = list(symbols)
    out = sp.Integer(0)
    for k in range(terms):
        mono = coefficient(rng)
        size = rng.randint(1, degree)
        for _ in range(size):
            mono *= rng.choice(symbols)
        if k < len(required):
            mono *= required[k]
        out += mono
    return out


def jet_symbols(sig: Signature, order: int, base: bool = True) -> list:
    out = list(sig.base_symbols) if base else []
    for r in range(order + 1):
        for I in sig.multi_indices(r):
            out += [sig.jet(a, I) for a in range(sig.m)]
    return out


def lagrangian(rng: random.Random, sig: Signature, order: int = 1, terms: int = 3,
               degree: int = 3) -> Lagrangian:
    """Random polynomial Lagrangian that genuinely depends on an order-``order`` jet."""
    top = [sig.jet(rng.randrange(sig.m), rng.choice(sig.multi_indices(order)))] if order else []
    e = polynomial(rng, jet_symbols(sig, order), terms, degree, required=top)
    return Lagrangian(JetExpr(sig, e))


def current(rng: random.Random, sig: Signature, order: int = 1, terms: int = 2,
            degree: int = 3) -> Current:
    syms = jet_symbols(sig, order)
    return Current(tuple(JetExpr(sig, polynomial(rng, syms, terms, degree)) for _ in range(sig.n)))


def projectable_field(rng: random.Random, sig: Signature) -> ProjectableField:
    """xi depends on the base only (degree <= 2); Xi on base and fiber (degree <= 2)."""
    base = list(sig.base_symbols)
    fiber = [sig.jet(a) for a in range(sig.m)]
    xi = []
    for _ in range(sig.n):
        xi.append(JetExpr(sig, polynomial(rng, base + [sp.Integer(1)], rng.randint(1, 2), 2)
                          if rng.random() < 0.7 else 0))
    Xi = [JetExpr(sig, polynomial(rng, base + fiber + [sp.Integer(1)], rng.randint(1, 3), 2))
          for _ in range(sig.m)]
    return ProjectableField(xi, Xi)


def horizontal_function(rng: random.Random, sig: Signature, order: int = 2) -> JetExpr:
    return JetExpr(sig, polynomial(rng, jet_symbols(sig, order), 3, 3))


def form(rng: random.Random, sig: Signature, contact: int, horizontal: int, order: int = 1,
         terms: int = 2) -> VarForm:
    """Random form of bidegree (contact, horizontal) in the contact basis."""
    out = VarForm.zero(sig)
    for _ in range(terms):
        piece = VarForm.function(horizontal_function(rng, sig, order))
        for _ in range(contact):
            r = rng.randint(0, order)
            piece = wedge(piece, VarForm.theta(sig, rng.randrange(sig.m), rng.choice(sig.multi_indices(r))))
        for mu in sorted(rng.sample(range(sig.n), horizontal)):
            piece = wedge(piece, VarForm.dx(sig, mu))
        out = out + piece
    return out
