import random

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from varseq import randgen
from varseq.errors import OrderCapError, PreconditionError
from varseq.forms import Current, Lagrangian, SourceForm, horizontal_differential
from varseq.jetexpr import JetExpr, Signature, parse
from varseq.varcalc import (ProjectableField, conservation_law_prop2, contract_source, dh_potential,
                            euler_lagrange, euler_lagrange_via_forms, helmholtz, is_symmetry,
                            lie_current, lie_lagrangian, noether_current, prolong,
                            prolongation_closed_form, second_variation, tonti, var_lie_lagrangian,
                            var_lie_source, vertical_part)

SEEDS = st.integers(0, 10**6)


def L(text, sig):
    return Lagrangian(parse(text, sig))


def S(sig, *texts):
    return SourceForm(tuple(parse(t, sig) for t in texts))


def field(sig, xi, Xi):
    return ProjectableField([parse(c, sig) for c in xi], [parse(c, sig) for c in Xi])


def _instance(seed, order=None):
    rng = random.Random(seed)
    sig = randgen.SIGNATURES[seed % 3]
    order = order if order is not None else rng.randint(1, 2)
    return rng, sig, randgen.lagrangian(rng, sig, order), randgen.projectable_field(rng, sig)


# -- Euler-Lagrange ------------------------------------------------------------


@pytest.mark.parametrize("density,expected", [
    ("u_t^2/2", ["-u_tt"]),                       # kinetic term
    ("u_t^2/2 - u^2/2", ["-u_tt - u"]),           # harmonic oscillator
    ("u_tt^2/2", ["u_tttt"]),                     # (+1) D_t^2 u_tt
    ("u*u_t", ["0"]),                             # D_t(u^2/2)
    ("t*u^3/3", ["t*u^2"]),
])
def test_euler_lagrange_by_hand(time_line, density, expected):
    assert euler_lagrange(L(density, time_line)) == S(time_line, *expected)


def test_euler_lagrange_two_variables(plane):
    assert euler_lagrange(L("(u_x^2 + u_y^2)/2", plane)) == S(plane, "-u_xx - u_yy")


def test_euler_lagrange_several_fields(particle):
    lam = L("(x_t^2 + y_t^2)/2 - x*y", particle)
    assert euler_lagrange(lam) == S(particle, "-x_tt - y", "-y_tt - x")


@settings(max_examples=25, deadline=None)
@given(SEEDS)
def test_two_routes_to_euler_lagrange_agree(seed):
    _, _, lam, _ = _instance(seed)
    assert (euler_lagrange(lam) - euler_lagrange_via_forms(lam)).is_zero().is_zero


@settings(max_examples=25, deadline=None)
@given(SEEDS)
def test_divergences_have_no_equations(seed):
    rng = random.Random(seed)
    sig = randgen.SIGNATURES[seed % 3]
    nu = randgen.current(rng, sig, order=rng.randint(0, 2))
    assert euler_lagrange(horizontal_differential(nu)).is_zero().is_zero


def test_euler_lagrange_order_cap():
    sig = Signature(("t",), ("u",), 3)
    with pytest.raises(OrderCapError):
        euler_lagrange(L("u_tt^2", sig))


# -- Helmholtz and Tonti -------------------------------------------------------


def test_helmholtz_rejects_first_derivative(line):
    # eps = u_x: dE/du_x = 1, and the I = (x) term contributes -(-1) * 1
    report = helmholtz(S(line, "u_x"))
    assert report.verdict.is_nonzero
    assert report.to_json(line)["residuals"] == {"H[u,u;x]": "2"}


def test_helmholtz_residual_is_located(line):
    # eps = u u_x: H^() = u_x - (u_x - D_x u) = u_x and H^(x) = u + u = 2u
    report = helmholtz(S(line, "u*u_x"))
    assert report.to_json(line)["residuals"] == {"H[u,u;]": "u_x", "H[u,u;x]": "2*u"}


@pytest.mark.parametrize("components", [["u_xx"], ["u_xxxx + u^3"], ["sin(u)*u_x^2 - 2*cos(u)*u_xx"]])
def test_helmholtz_accepts_euler_lagrange_forms(line, components):
    assert helmholtz(S(line, *components)).verdict.is_zero


def test_helmholtz_coupled_fields(particle):
    # symmetric coupling is variational, antisymmetric is not
    assert helmholtz(S(particle, "x_tt + y", "y_tt + x")).verdict.is_zero
    assert helmholtz(S(particle, "x_tt + y", "y_tt - x")).verdict.is_nonzero


@settings(max_examples=20, deadline=None)
@given(SEEDS)
def test_helmholtz_of_euler_lagrange_vanishes(seed):
    _, _, lam, _ = _instance(seed)
    assert helmholtz(euler_lagrange(lam)).verdict.is_zero


def test_tonti_by_hand(line):
    # u * int_0^1 t u_xx dt = u u_xx / 2
    assert tonti(S(line, "u_xx")) == L("u*u_xx/2", line)


def test_tonti_with_center(time_line):
    eta = S(time_line, "-u_tt - u")
    lam = tonti(eta, center={0: 1})
    assert euler_lagrange(lam) == eta


def test_tonti_requires_helmholtz(line):
    with pytest.raises(PreconditionError):
        tonti(S(line, "u_x"))


@settings(max_examples=20, deadline=None)
@given(SEEDS)
def test_tonti_round_trip(seed):
    _, _, lam, _ = _instance(seed)
    eta = euler_lagrange(lam)
    assert (euler_lagrange(tonti(eta)) - eta).is_zero().is_zero


# -- prolongation --------------------------------------------------------------


def test_projectability_is_checked(line):
    with pytest.raises(PreconditionError):
        field(line, ["u"], ["0"])


def test_prolongation_of_scaling_by_hand(line):
    # X = x d/dx: Q = -x u_x, coefficient on u_x is D_x Q + x u_xx = -u_x, on u_xx it is -2 u_xx
    pr = prolong(field(line, ["x"], ["0"]), 2)
    assert pr.coefficient(0, (0,)) == parse("-u_x", line)
    assert pr.coefficient(0, (0, 0)) == parse("-2*u_xx", line)


def test_prolongation_of_boost_by_hand(time_line):
    pr = prolong(field(time_line, ["0"], ["t"]), 2)
    assert pr.coefficient(0, (0,)) == parse("1", time_line)
    assert pr.coefficient(0, (0, 0)) == parse("0", time_line)


@settings(max_examples=25, deadline=None)
@given(SEEDS)
def test_prolongation_closed_form_matches_recursion(seed):
    _, sig, _, X = _instance(seed)
    pr = prolong(X, 2)
    for I in sig.all_multi_indices(2):
        for a in range(sig.m):
            assert (pr.coefficient(a, I) - prolongation_closed_form(X, a, I)).is_zero().is_zero


def test_vertical_part_uses_characteristic(line):
    X = field(line, ["1"], ["u"])
    assert vertical_part(X, 1).coefficient(0, ()) == parse("u - u_x", line)


# -- Noether ------------------------------------------------------------------


def test_energy_current_by_hand(time_line):
    # Q = -u_t: eps = Q dL/du_t + L = -u_t^2 + u_t^2/2 - u^2/2
    eps = noether_current(L("u_t^2/2 - u^2/2", time_line), field(time_line, ["1"], ["0"]))
    assert eps == Current((parse("-u_t^2/2 - u^2/2", time_line),))


def test_momentum_and_boost_currents(time_line):
    lam = L("u_t^2/2", time_line)
    assert noether_current(lam, field(time_line, ["0"], ["1"])) == Current((parse("u_t", time_line),))
    assert noether_current(lam, field(time_line, ["0"], ["t"])) == Current((parse("t*u_t", time_line),))


def test_noether_certificate_for_boost(time_line):
    # L_X(u_t^2/2) = u_t = -t u_tt + D_t(t u_t)
    lie, cert = var_lie_lagrangian(L("u_t^2/2", time_line), field(time_line, ["0"], ["t"]))
    assert lie == L("u_t", time_line)
    assert cert.contraction == L("-t*u_tt", time_line)
    assert cert.verdict.is_zero


def test_noether_certificate_second_order(plane):
    sig = Signature(("x", "y"), ("u", "v"), 6)
    lam = L("u_xx*v_y + u_xy^2/2 + x*u*v_x", sig)
    X = field(sig, ["y", "x^2"], ["u + y", "x*v"])
    assert var_lie_lagrangian(lam, X)[1].verdict.is_zero


@settings(max_examples=25, deadline=None)
@given(SEEDS)
def test_noether_certificate_random(seed):
    _, _, lam, X = _instance(seed)
    assert var_lie_lagrangian(lam, X)[1].verdict.is_zero


# -- Lie derivatives -----------------------------------------------------------


def test_lie_derivative_by_hand(time_line):
    # scaling u d/du doubles the kinetic term; translation d/dt of t*u gives u
    assert lie_lagrangian(L("u_t^2/2", time_line), field(time_line, ["0"], ["u"])) == L("u_t^2", time_line)
    assert lie_lagrangian(L("t*u", time_line), field(time_line, ["1"], ["0"])) == L("u", time_line)
    # density weight: X = t d/dt has pr X(u) = 0 and div xi = 1, so L_X(u dt) = u dt
    assert lie_lagrangian(L("u", time_line), field(time_line, ["t"], ["0"])) == L("u", time_line)


@settings(max_examples=25, deadline=None)
@given(SEEDS)
def test_lie_derivative_commutes_with_dh(seed):
    rng, sig, _, X = _instance(seed)
    nu = randgen.current(rng, sig, order=1)
    lhs = horizontal_differential(lie_current(nu, X))
    rhs = lie_lagrangian(horizontal_differential(nu), X)
    assert (lhs - rhs).is_zero().is_zero


@settings(max_examples=25, deadline=None)
@given(SEEDS)
def test_lie_derivative_commutes_with_euler_lagrange(seed):
    _, _, lam, X = _instance(seed)
    lhs = euler_lagrange(lie_lagrangian(lam, X))
    rhs = var_lie_source(euler_lagrange(lam), X, lagrangian=lam)
    assert (lhs - rhs).is_zero().is_zero


def test_lie_source_requires_variational_source(line):
    with pytest.raises(PreconditionError):
        var_lie_source(S(line, "u_x"), field(line, ["1"], ["0"]))


def test_symmetry_detection(time_line):
    eta = S(time_line, "-u_tt - u")
    assert is_symmetry(eta, field(time_line, ["1"], ["0"])).is_zero
    # scaling maps solutions to solutions but E(u eta) = -2 u_tt - 2 u does not vanish
    assert is_symmetry(eta, field(time_line, ["0"], ["u"])).is_nonzero
    assert is_symmetry(S(time_line, "-u_tt - u^3"), field(time_line, ["0"], ["u"])).is_nonzero


def test_non_symmetry_residual(time_line):
    # X_V -| eta = u (-u_tt - u); its Euler-Lagrange form is -2 u_tt - 2 u
    eta = S(time_line, "-u_tt - u^3")
    assert var_lie_source(eta, field(time_line, ["0"], ["u"])) == S(time_line, "-2*u_tt - 4*u^3")


# -- potentials and conservation ---------------------------------------------


@pytest.mark.parametrize("mu,nu", [("2*u*u_t", "u^2"), ("u_t*cos(u)", "sin(u)"), ("-u_tt", "-u_t"),
                                   ("t + u_t", "t^2/2 + u")])
def test_dh_potential_by_hand(time_line, mu, nu):
    got = dh_potential(L(mu, time_line))
    assert (horizontal_differential(got) - L(mu, time_line)).is_zero().is_zero
    assert (got.components[0] - parse(nu, time_line)).is_zero().is_zero


def test_dh_potential_requires_trivial_lagrangian(time_line):
    with pytest.raises(PreconditionError):
        dh_potential(L("u", time_line))


def test_dh_potential_candidate(plane):
    mu = L("u_x*u_y + u*u_xy", plane)
    nu = Current((parse("0", plane), parse("u*u_x", plane)))
    assert dh_potential(mu, candidate=nu) == nu
    with pytest.raises(PreconditionError):
        dh_potential(mu, candidate=Current((parse("u*u_x", plane), parse("0", plane))))


def test_second_variation(time_line):
    twice, verdict = second_variation(L("u_t^2/2 - u^2/2", time_line), field(time_line, ["1"], ["0"]))
    assert verdict.is_zero
    # the boost: L_X(u_t^2/2) = u_t and L_X(u_t) = 1
    twice, verdict = second_variation(L("u_t^2/2", time_line), field(time_line, ["0"], ["t"]))
    assert twice == L("1", time_line) and verdict.is_nonzero


def test_conservation_chain_for_oscillator(time_line):
    lam = L("u_t^2/2 - u^2/2", time_line)
    X = field(time_line, ["1"], ["0"])
    # X_V -| eta = -u_t (-u_tt - u) = D_t(u_t^2/2 + u^2/2)
    report = conservation_law_prop2(lam, X, Current((parse("u_t^2/2 + u^2/2", time_line),)))
    assert report.verdict.is_zero, report.failed
    assert horizontal_differential(report.current).is_zero().is_zero


def test_conservation_chain_names_the_broken_step(time_line):
    lam = L("u_t^2/2 - u^2/2", time_line)
    report = conservation_law_prop2(lam, field(time_line, ["1"], ["0"]), Current((parse("u^2", time_line),)))
    assert report.failed == "potential: d_H nu = X_V -| eta"
    assert report.verdict.is_nonzero
