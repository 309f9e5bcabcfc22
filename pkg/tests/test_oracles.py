import math

import numpy as np
import pytest

from varseq.forms import Lagrangian, SourceForm
from varseq.jetexpr import Signature, parse
from varseq.oracles import first_variation_check, icosphere, loop_period, sphere_flux
from varseq.varcalc import euler_lagrange

SPACE = Signature(("t",), ("x", "y", "z"), 2)
PLANE = Signature(("t",), ("x", "y"), 2)


@pytest.mark.parametrize("sig,density", [
    (Signature(("t",), ("u",), 6), "u_t^2/2 - u^2/2"),
    (Signature(("t",), ("u",), 6), "u_tt^2/2 + u*u_t^2 - t*u^3/3"),
    (Signature(("t",), ("x", "y"), 6), "(x_t^2 + y_t^2)/2 + x*y_t - y^2*x_t"),
    (Signature(("x", "y"), ("u",), 6), "(u_x^2 + u_y^2)/2 + x*u^3"),
])
def test_first_variation_matches_euler_lagrange(sig, density):
    res = first_variation_check(Lagrangian(parse(density, sig)), points=10, rtol=1e-5)
    assert res.passed, res.worst
    assert len(res.trials) == 10


def test_first_variation_detects_a_wrong_sign():
    sig = Signature(("t",), ("u",), 6)
    lam = Lagrangian(parse("u_t^2/2 - u^2/2", sig))
    wrong = SourceForm((parse("u_tt - u", sig),))
    assert not first_variation_check(lam, points=3, source=wrong).passed
    assert first_variation_check(lam, points=3, source=euler_lagrange(lam)).passed


def test_icosphere_is_a_closed_surface():
    V, faces = icosphere(2)
    edges = {tuple(sorted(e)) for a, b, c in faces for e in ((a, b), (b, c), (c, a))}
    assert len(V) - len(edges) + len(faces) == 2
    area = sum(np.linalg.norm(np.cross(V[b] - V[a], V[c] - V[a])) / 2 for a, b, c in faces)
    assert 0.95 * 4 * math.pi < area < 4 * math.pi


def test_monopole_flux_is_four_pi_g():
    R = "sqrt(x^2+y^2+z^2)"
    form = {"y,z": parse(f"x/{R}^3", SPACE), "z,x": parse(f"y/{R}^3", SPACE), "x,y": parse(f"z/{R}^3", SPACE)}
    assert abs(sphere_flux(SPACE, form, 3) - 4 * math.pi) < 1e-5 * 4 * math.pi


def test_exact_form_has_no_flux():
    # dx ^ dy = d(x dy)
    assert abs(sphere_flux(SPACE, {"x,y": parse("1", SPACE)}, 2)) < 1e-12


def test_constant_form_flux_scales_with_radius():
    # x dy ^ dz + ... / 3 has flux equal to the enclosed volume
    form = {"y,z": parse("x/3", SPACE), "z,x": parse("y/3", SPACE), "x,y": parse("z/3", SPACE)}
    assert abs(sphere_flux(SPACE, form, 3, radius=2.0) - 4 / 3 * math.pi * 8) < 1e-4


def test_loop_periods():
    circle = [parse("cos(2*pi*t)", PLANE), parse("sin(2*pi*t)", PLANE)]
    angle = [parse("-y/(x^2+y^2)", PLANE), parse("x/(x^2+y^2)", PLANE)]
    assert abs(loop_period(PLANE, angle, circle) - 2 * math.pi) < 1e-12
    exact = [parse("2*x", PLANE), parse("3*y^2", PLANE)]
    assert abs(loop_period(PLANE, exact, circle)) < 1e-12
    # x dy around the unit circle is the enclosed area
    assert abs(loop_period(PLANE, [parse("0", PLANE), parse("x", PLANE)], circle) - math.pi) < 1e-12
