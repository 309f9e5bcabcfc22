"""Numeric cross-checks that do not share code paths with the symbolic layer.

- first-variation finite differences of the action against the Euler-Lagrange form
- flux of a closed 2-form through a triangulated sphere (Dunavant degree-5 rule)
- period of a closed 1-form around a parametrized loop (Gauss-Legendre)

Sign relation used when comparing with nerve constants: if local potentials
satisfy d nu_i = alpha on U_i and c = (d nu) is the Cech coboundary, then
pairing c with a fundamental cycle z oriented like the integration domain
gives <c, z> = -integral(alpha). The same holds one degree up with
(A_j - A_i) = d chi_ij, F = dA_i.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .forms import Lagrangian, SourceForm
from .jetexpr import JetExpr, Signature
from .varcalc import euler_lagrange

# ---------------------------------------------------------------------------
# first variation


def _gauss_tensor(n: int, nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    x, w = (x + 1) / 2, w / 2
    grids = np.meshgrid(*([x] * n), indexing="ij")
    weights = np.ones_like(grids[0])
    for g in np.meshgrid(*([w] * n), indexing="ij"):
        weights = weights * g
    return [g.ravel() for g in grids], weights.ravel()


def _random_poly(symbols, rng: random.Random, degree: int):
    terms = 0
    for powers in _monomials(len(symbols), degree):
        c = sp.Rational(rng.randint(-9, 9), rng.randint(1, 5))
        terms += c * sp.Mul(*[s ** p for s, p in zip(symbols, powers)])
    return terms


def _monomials(n, degree):
    if n == 0:
        yield ()
        return
    for p in range(degree + 1):
        for rest in _monomials(n - 1, degree - p):
            yield (p,) + rest


@dataclass
class FirstVariationResult:
    trials: list  # (finite-difference derivative, Euler-Lagrange pairing, relative error)
    rtol: float

    @property
    def passed(self) -> bool:
        return all(err <= self.rtol for _, _, err in self.trials)

    @property
    def worst(self) -> float:
        return max(err for _, _, err in self.trials)


def first_variation_check(lam: Lagrangian, points: int = 10, rtol: float = 1e-5, seed: int = 0,
                          nodes: int = 24, step: float = 1e-4, source: SourceForm | None = None
                          ) -> FirstVariationResult:
    """d/de S[u + e phi] at e = 0 against the integral of E(lambda) . phi.

    Sections u are random polynomials on the unit cube; perturbations are
    random polynomials times a bump vanishing to high order on the boundary.
    The action derivative uses a central difference. ``source`` replaces
    E(lambda) as the form under test.
    """
    sig = lam.sig
    rng = random.Random(seed)
    base = list(sig.base_symbols)
    r = max(lam.order(), 0)
    E = euler_lagrange(lam) if source is None else source
    L = lam.density.expr
    jets = sig.jets_of(L)
    ejets = sorted({j for c in E.components for j in sig.jets_of(c.expr)} | set(jets))
    bump = sp.Mul(*[(s * (1 - s)) ** (r + 1) for s in base])
    xs, w = _gauss_tensor(sig.n, nodes)
    L_num = sp.lambdify(base + [sig.jet(a, I) for a, I in jets], L, "numpy")
    E_num = [sp.lambdify(base + [sig.jet(a, I) for a, I in ejets], c.expr, "numpy") for c in E.components]

    def jet_values(fields, which):
        out = []
        for a, I in which:
            d = fields[a]
            for mu in I:
                d = sp.diff(d, base[mu])
            f = sp.lambdify(base, d, "numpy")
            out.append(np.broadcast_to(np.asarray(f(*xs), dtype=float), xs[0].shape))
        return out

    def const_safe(v):
        return np.broadcast_to(np.asarray(v, dtype=float), xs[0].shape)

    trials = []
    for _ in range(points):
        u = [_random_poly(base, rng, 3) for _ in range(sig.m)]
        phi = [_random_poly(base, rng, 2) * bump for _ in range(sig.m)]
        U = jet_values(u, jets)
        P = jet_values(phi, jets)

        def action(eps):
            vals = const_safe(L_num(*xs, *[a + eps * b for a, b in zip(U, P)]))
            return float(np.dot(w, vals))

        fd = (action(step) - action(-step)) / (2 * step)
        UE = jet_values(u, ejets)
        Phi = jet_values(phi, [(a, ()) for a in range(sig.m)])
        pairing = sum(float(np.dot(w, const_safe(E_num[a](*xs, *UE)) * Phi[a])) for a in range(sig.m))
        scale = max(abs(fd), abs(pairing), 1e-12)
        trials.append((fd, pairing, abs(fd - pairing) / scale))
    return FirstVariationResult(trials, rtol)


# ---------------------------------------------------------------------------
# sphere flux

# Dunavant degree-5 rule on the reference triangle (barycentric, weights sum to 1)
_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456
DUNAVANT7 = (
    [(1 / 3, 1 / 3, 1 / 3)] + [(_A1, _B1, _B1), (_B1, _A1, _B1), (_B1, _B1, _A1)]
    + [(_A2, _B2, _B2), (_B2, _A2, _B2), (_B2, _B2, _A2)],
    [0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3,
)


def icosphere(subdivisions: int):
    """Vertices on the unit sphere and outward-oriented triangles."""
    t = (1 + 5 ** 0.5) / 2
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    V = [np.array(v, float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache, new = {}, []

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = V[i] + V[j]
                V.append(m / np.linalg.norm(m))
                cache[key] = len(V) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    V = np.array(V)
    oriented = []
    for a, b, c in faces:
        if np.dot(np.cross(V[b] - V[a], V[c] - V[a]), V[a] + V[b] + V[c]) < 0:
            b, c = c, b
        oriented.append((a, b, c))
    return V, oriented


def sphere_flux(sig: Signature, components: dict, subdivisions: int = 3, radius: float = 1.0) -> float:
    """Integral of F = F_yz dy^dz + F_zx dz^dx + F_xy dx^dy over the outward sphere.

    ``components`` maps the pairs "1,2", "2,0", "0,1" of fiber indices (or the
    fiber names "y,z", ...) to JetExpr coefficients. Each flat triangle is
    mapped radially onto the sphere and the pulled-back form is integrated
    exactly in the parametrization.
    """
    if sig.m != 3:
        raise ValueError("sphere flux needs a three-dimensional fiber")
    q = [sig.jet(a) for a in range(3)]
    comp = {}
    for key, e in components.items():
        i, j = (sig.fiber.index(k) if k in sig.fiber else int(k) for k in key.split(","))
        comp[(i, j)] = e.expr if isinstance(e, JetExpr) else sp.sympify(e)
    # flux vector with F(u, v) = Phi . (u x v)
    phi_expr = [comp.get((1, 2), 0) - comp.get((2, 1), 0),
                comp.get((2, 0), 0) - comp.get((0, 2), 0),
                comp.get((0, 1), 0) - comp.get((1, 0), 0)]
    phi = [sp.lambdify(q, c, "numpy") for c in phi_expr]
    V, faces = icosphere(subdivisions)
    V = V * radius
    bary, weights = np.array(DUNAVANT7[0]), np.array(DUNAVANT7[1])
    total = 0.0
    for a, b, c in faces:
        A, B, C = V[a], V[b], V[c]
        e1, e2 = B - A, C - A
        # s = A + a e1 + b e2 over the reference triangle of area 1/2
        for (l0, l1, l2), wq in zip(bary, weights):
            s = l0 * A + l1 * B + l2 * C
            ns = np.linalg.norm(s)
            p = radius * s / ns
            # derivative of s -> radius * s/|s|
            D = radius * (np.eye(3) - np.outer(s, s) / ns ** 2) / ns
            u, v = D @ e1, D @ e2
            flux = np.array([float(f(*p)) for f in phi])
            total += wq * np.dot(flux, np.cross(u, v)) / 2
    return float(total)


# ---------------------------------------------------------------------------
# loop period


def loop_period(sig: Signature, form: list, loop: list, panels: int = 64, nodes: int = 8) -> float:
    """Integral of alpha = alpha_a dq^a around q(s), s in [0, 1] (s is the base coordinate)."""
    s = sig.base_symbols[0]
    q = [sig.jet(a) for a in range(sig.m)]
    curve = [e.expr if isinstance(e, JetExpr) else sp.sympify(e) for e in loop]
    alpha = [e.expr if isinstance(e, JetExpr) else sp.sympify(e) for e in form]
    pulled = sum(a.xreplace(dict(zip(q, curve))) * sp.diff(c, s) for a, c in zip(alpha, curve))
    f = sp.lambdify(s, pulled, "numpy")
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for k in range(panels):
        lo, hi = k / panels, (k + 1) / panels
        pts = lo + (hi - lo) * (x + 1) / 2
        total += (hi - lo) / 2 * float(np.dot(w, np.broadcast_to(np.asarray(f(pts), float), pts.shape)))
    return total
