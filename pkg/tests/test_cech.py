import itertools
import random

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from varseq.bundle import load, loop_points
from varseq.cech import (Cochain, Cover, OpenSet, Presentation, betti_numbers, classify, coboundary,
                         coboundary_matrix, current_obstruction, edge_potentials, equivalent, fundamental_cycle_from_centers,
                         lie_presentation, loop_cycle, nerve_cohomology, obstruction_class, pair,
                         reduce_entry, reduce_to_constants, trivialization_check, validate_presentation)
from varseq.errors import DegreeError, PreconditionError
from varseq.forms import Current, Lagrangian, horizontal_differential
from varseq.varcalc import conservation_law_prop2
from varseq.jetexpr import Signature, parse

SIG = Signature(("t",), ("x", "y", "z"), 2)


def cover_from(maximal, vertices):
    return Cover.from_maximal(SIG, [OpenSet(f"U{i}") for i in range(vertices)], maximal)


@st.composite
def complexes(draw):
    vertices = draw(st.integers(1, 6))
    candidates = [s for k in (1, 2, 3, 4) for s in itertools.combinations(range(vertices), k)]
    maximal = draw(st.lists(st.sampled_from(candidates), min_size=1, max_size=8))
    return cover_from(maximal, vertices)


def numpy_betti(cover):
    """Betti numbers from floating-point ranks of the boundary matrices."""
    dims = [len(cover.simplices_of(q)) for q in range(cover.dimension + 1)]
    ranks = []
    for q in range(cover.dimension):
        M = np.array(coboundary_matrix(cover, q).tolist(), dtype=float)
        ranks.append(np.linalg.matrix_rank(M) if M.size else 0)
    ranks.append(0)
    return tuple(dims[q] - ranks[q] - (ranks[q - 1] if q else 0) for q in range(len(dims)))


# -- covers and cochains -------------------------------------------------------


def test_nerve_must_be_closed_under_faces():
    with pytest.raises(PreconditionError):
        Cover(SIG, [OpenSet("a"), OpenSet("b"), OpenSet("c")], [(0, 1, 2)])
    cover = cover_from([(0, 1, 2)], 3)
    assert len(cover.simplices) == 7


def test_coboundary_of_zero_cochain():
    cover = cover_from([(0, 1), (1, 2)], 3)
    c = Cochain(cover, 0, {(0,): 5, (1,): 7, (2,): 11})
    assert dict(coboundary(c).items()) == {(0, 1): 2, (1, 2): 4}


def test_cochains_must_be_total():
    cover = cover_from([(0, 1)], 2)
    with pytest.raises(PreconditionError):
        Cochain(cover, 0, {(0,): 1})


@settings(max_examples=40, deadline=None)
@given(complexes(), st.integers(0, 10**6))
def test_coboundary_squares_to_zero(cover, seed):
    rng = random.Random(seed)
    for q in range(max(cover.dimension - 1, 0)):
        c = Cochain(cover, q, {s: sp.Integer(rng.randint(-5, 5)) for s in cover.simplices_of(q)})
        assert all(v == 0 for _, v in coboundary(coboundary(c)).items())


@settings(max_examples=40, deadline=None)
@given(complexes())
def test_betti_numbers_against_independent_oracles(cover):
    betti = betti_numbers(cover)
    euler = sum((-1) ** q * len(cover.simplices_of(q)) for q in range(cover.dimension + 1))
    assert sum((-1) ** q * b for q, b in enumerate(betti)) == euler
    assert betti == numpy_betti(cover)


@pytest.mark.parametrize("name,expected", [("triangle", (1, 1)), ("circle", (1, 1)), ("simplex", (1, 0, 0)),
                                           ("disjoint", (2,)), ("octahedral", (1, 0, 1))])
def test_fixture_betti_numbers(name, expected):
    assert betti_numbers(load("nerves").cover(name)) == expected


def test_triangle_classification_is_the_cycle_sum():
    tri = load("nerves").cover("triangle")
    for values, trivial in [((1, 3, 2), True), ((1, 2, 3), False), ((0, 0, 0), True), ((1, 0, 0), False)]:
        c = Cochain(tri, 1, dict(zip(tri.simplices_of(1), map(sp.Integer, values))))
        cls = classify(tri, 1, reduce_to_constants(c))
        assert (cls.status == "trivial") == trivial
        if not trivial:
            # the class coordinate is the cycle sum c01 + c12 - c02 up to the basis normalization
            assert cls.coordinates != (0,)


def test_non_cocycles_are_rejected():
    simplex = load("nerves").cover("simplex")
    c = Cochain(simplex, 1, dict(zip(simplex.simplices_of(1), map(sp.Integer, (1, 2, 3)))))
    with pytest.raises(PreconditionError):
        classify(simplex, 1, reduce_to_constants(c))


def test_fundamental_cycle_of_octahedron_is_a_cycle():
    octa = load("nerves").cover("octahedral")
    z = fundamental_cycle_from_centers(octa)
    assert len(z) == 8 and set(z.values()) <= {-1, 1}
    # <d b, z> = 0 for every 1-cochain b
    rng = random.Random(3)
    b = Cochain(octa, 1, {s: sp.Integer(rng.randint(-9, 9)) for s in octa.simplices_of(1)})
    assert pair(dict(coboundary(b).items()), z) == 0


# -- constants -------------------------------------------------------------------


def test_reduce_entry_recognizes_multiples_of_the_unit():
    bundle = load("punctured-plane")
    cover = bundle.cover("half-planes")
    # on x > 0, y < 0: arctan(y/x) + arctan(x/y) = -pi/2, so the branch jump is -2 pi
    e = Lagrangian(parse("arctan(y/x) - (3*pi/2 - arctan(x/y))", bundle.sig))
    entry = reduce_entry(cover, (0, 3), e, sp.pi)
    assert entry.status == "constant" and entry.value == -2 * sp.pi


def test_reduce_entry_detects_nonconstant():
    bundle = load("punctured-plane")
    entry = reduce_entry(bundle.cover("half-planes"), (0, 1), Lagrangian(parse("x_t", bundle.sig)))
    assert entry.status == "nonconstant"


# -- presentations ----------------------------------------------------------------


def test_corrupted_presentation_fails_at_the_overlap():
    p = load("corrupted").presentation("pair")
    report = validate_presentation(p)
    assert not report.valid
    first = report.first_failure()
    assert first.where == "(left,right)" and first.residual == "[1]"
    with pytest.raises(PreconditionError):
        obstruction_class(p)


def test_single_chart_is_global():
    bundle = load("oscillator")
    p = bundle.presentation(bundle.default("presentation"))
    report = validate_presentation(p)
    assert report.valid and report.global_


def test_obstruction_needs_one_independent_variable():
    sig = Signature(("x", "y"), ("u",), 4)
    cover = Cover(sig, [OpenSet("a"), OpenSet("b")], [(0, 1)])
    p = Presentation(cover, [Lagrangian(parse("u_x^2", sig)), Lagrangian(parse("u_x^2 + u_x", sig))])
    with pytest.raises(DegreeError):
        obstruction_class(p)


@pytest.fixture(scope="module")
def monopole():
    bundle = load("monopole")
    return bundle, bundle.presentation("octahedral"), obstruction_class(bundle.presentation("octahedral"))


def test_monopole_octant_constants(monopole):
    # each octant of the sphere carries 1/8 of the total flux 4 pi e g = 6 pi
    _, p, cls = monopole
    assert cls.status == "nontrivial"
    assert {abs(v) for v in cls.constants.values()} == {3 * sp.pi / 4}


def test_monopole_pairing_is_minus_the_flux(monopole):
    _, p, cls = monopole
    assert pair(cls.constants, fundamental_cycle_from_centers(p.cover)) == -6 * sp.pi
    assert cls.coordinates == (-2,) and cls.unit == 3 * sp.pi


def test_lie_derivative_kills_the_monopole_class(monopole):
    bundle, p, _ = monopole
    X = bundle.field("rotation")
    assert obstruction_class(lie_presentation(p, X)).status == "trivial"


def test_hemispheres_have_no_triple_overlaps():
    bundle = load("monopole")
    cls = obstruction_class(bundle.presentation("hemispheres"))
    assert cls.status == "trivial"


# -- currents on the punctured plane ---------------------------------------------


def test_current_obstruction_on_punctured_plane():
    bundle = load("punctured-plane")
    p = bundle.presentation("half-planes")
    X = bundle.field("time-translation")
    cls = current_obstruction(p, X)
    # local currents differ by k times the jump of the angle: one unit 2 pi k around the origin
    assert cls.status == "nontrivial" and cls.coordinates == (1,)
    loop = bundle.section("oracles")["period"]["loop"]
    z = loop_cycle(p.cover, loop_points(bundle, loop, 64))
    assert pair(cls.constants, z) == 2 * sp.pi * sp.Rational(2, 3)


def test_rotation_currents_glue_on_punctured_plane():
    bundle = load("punctured-plane")
    p = bundle.presentation("half-planes")
    cls = current_obstruction(p, bundle.field("rotation"))
    assert cls.status == "trivial" and cls.glued is not None


def test_trivialization_with_trivial_cochain():
    bundle = load("punctured-plane")
    pname, mu, nus = bundle.trivial_cochain("angular")
    report = trivialization_check(bundle.presentation(pname), bundle.field("time-translation"), (mu, nus))
    assert report.verdict.is_zero, report.first_failure()


# -- equivalence moves -----------------------------------------------------------


def _shifted(p, gauges, potentials=None):
    """Presentation with lambda_i + d_H(gauge_i) and edge potentials shifted to match."""
    lams = [p.lagrangian(i) + horizontal_differential(Current((parse(g, p.sig),)))
            for i, g in enumerate(gauges)]
    pots = None
    if potentials is not None:
        pots = {s: nu + Current((parse(gauges[s[1]], p.sig),)) - Current((parse(gauges[s[0]], p.sig),))
                for s, nu in potentials.items()}
    return Presentation(p.cover, lams, pots, p.unit)


def test_equivalent_presentations():
    bundle = load("punctured-plane")
    p = bundle.presentation("half-planes")
    q = _shifted(p, ["t*x", "x*y", "x_t", "y*x_t"][:p.cover.size])
    assert equivalent(p, q).is_zero
    r = Presentation(p.cover, [p.lagrangian(0) + Lagrangian(parse("x", p.sig))]
                 + [p.lagrangian(i) for i in range(1, p.cover.size)])
    assert equivalent(p, r).is_nonzero


def test_obstruction_class_is_invariant_under_equivalence(monopole):
    _, p, cls = monopole
    gauges = [f"{i}*x*y + z" for i in range(p.cover.size)]
    q = _shifted(p, gauges, edge_potentials(p))
    assert validate_presentation(q).valid
    moved = obstruction_class(q)
    assert moved.coordinates == cls.coordinates and moved.unit == cls.unit


def test_trivialized_currents_glue_on_punctured_plane():
    # the currents conserved by the per-set construction agree on overlaps
    bundle = load("punctured-plane")
    p = bundle.presentation("half-planes")
    X = bundle.field("time-translation")
    entry = next(e for e in bundle.data["conservation"] if e["field"] == "time-translation")
    nus = [bundle.current([c]) for c in entry["potentials"]]
    J = Cochain(p.cover, 0, {(i,): conservation_law_prop2(p.lagrangian(i), X, nus[i]).current
                             for i in range(p.cover.size)})
    cls = classify(p.cover, 1, reduce_to_constants(coboundary(J)))
    assert cls.status == "trivial"


def test_trivialization_check_locates_corruption():
    bundle = load("corrupted")
    report = trivialization_check(bundle.presentation("pair"), bundle.field("time-translation"))
    step, where, verdict, _ = report.first_failure()
    assert verdict.is_nonzero and where == "right"
