"""Regenerate the JSON problem bundles under src/varseq/fixtures.

The bundles are plain data; this script only writes the expression strings.
Every claim about them (potentials, symmetries, classes) is checked by the
library when the bundles are loaded and run, never here.
"""
import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "varseq" / "fixtures"
R = "sqrt(x^2+y^2+z^2)"
AXES = [((1, 0, 0), "+x"), ((0, 1, 0), "+y"), ((0, 0, 1), "+z"),
        ((-1, 0, 0), "-x"), ((0, -1, 0), "-y"), ((0, 0, -1), "-z")]
Q = ("x", "y", "z")


def lin(coeffs, names=Q):
    parts = []
    for c, v in zip(coeffs, names):
        if c == 0:
            continue
        parts.append(("+" if c > 0 else "-") + ("" if abs(c) == 1 else f"{abs(c)}*") + v)
    if not parts:
        return "0"
    s = "".join(parts)
    return s[1:] if s[0] == "+" else s


def cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def cross_with_q(n):
    """Components of n x q as strings."""
    return [lin((0, -n[2], n[1])), lin((n[2], 0, -n[0])), lin((-n[1], n[0], 0))]


def potential(n):
    """A_n = g (n x q) / (r (r + n.q)), smooth away from the ray -n."""
    return [f"g*({c})/({R}*({R}+({lin(n)})))" for c in cross_with_q(n)]


def monopole_lagrangian(n):
    A = potential(n)
    return ("1/2*(x_t^2+y_t^2+z_t^2) + e*(" +
            " + ".join(f"{v}_t*{a}" for v, a in zip(Q, A)) + ")")


def monopole():
    kinetic_rotation = "x*y_t - y*x_t"
    sets = [{"name": name, "domain": [lin(n)], "center": [str(c) for c in n]} for n, name in AXES]
    edges = [[i, j] for i in range(6) for j in range(i + 1, 6) if j != i + 3]
    triangles = [[i, j, k] for i in range(6) for j in range(i + 1, 6) for k in range(j + 1, 6)
                 if j != i + 3 and k != i + 3 and k != j + 3]
    potentials = {}
    for i, j in edges:
        ni, nj = AXES[i][0], AXES[j][0]
        w = cross(nj, ni)
        potentials[f"{i},{j}"] = [f"2*e*g*arctan(({lin(w)})/({R}+({lin(ni)})+({lin(nj)})))"]
    # Xi.A_n + g z / r recovers L_X lambda_n = d_H beta_n for the rotation about z
    def beta_for(n):
        A = potential(n)
        return [f"e*(-y*{A[0]} + x*{A[1]}) + e*g*z/{R}"]

    beta = {str(idx): beta_for(n) for idx, (n, _) in enumerate(AXES)}
    hemi_sets = [{"name": "north", "domain": [f"{R}+z"], "center": ["0", "0", "1"]},
                 {"name": "south", "domain": [f"{R}-z"], "center": ["0", "0", "-1"]}]
    return {
        "name": "monopole",
        "description": "Charged particle in the field of a magnetic monopole: local "
                       "Lagrangians with Dirac-string potentials on covers of R^3 minus the origin.",
        "signature": {"base": ["t"], "fiber": list(Q), "order_cap": 4},
        "constants": {"e": "1", "g": "3/2"},
        "fields": {"rotation": {"xi": ["0"], "Xi": ["-y", "x", "0"]},
                   "rotation-x": {"xi": ["0"], "Xi": ["0", "-z", "y"]}},
        "currents": {"rotation-potential": [f"-({kinetic_rotation}) + e*g*z/{R}"]},
        "covers": {
            "octahedral": {"sets": sets, "simplices": [[i] for i in range(6)] + edges + triangles},
            "hemispheres": {"sets": hemi_sets, "simplices": [[0], [1], [0, 1]]},
        },
        "presentations": {
            "octahedral": {"cover": "octahedral",
                           "lagrangians": [monopole_lagrangian(n) for n, _ in AXES],
                           "potentials": potentials, "unit": "2*pi*e*g",
                           "boundary_currents": {"rotation": beta}},
            "hemispheres": {"cover": "hemispheres",
                            "lagrangians": [monopole_lagrangian((0, 0, 1)),
                                            monopole_lagrangian((0, 0, -1))],
                            "unit": "2*pi*e*g",
                            "boundary_currents": {"rotation": {"0": beta_for((0, 0, 1)),
                                                               "1": beta_for((0, 0, -1))}}},
        },
        "conservation": [{"presentation": "hemispheres", "field": "rotation",
                          "potential": "rotation-potential"}],
        "oracles": {"flux": {"presentation": "octahedral",
                             "form": {"y,z": f"e*g*x/{R}^3", "z,x": f"e*g*y/{R}^3",
                                      "x,y": f"e*g*z/{R}^3"},
                             "subdivisions": 3}},
        "defaults": {"presentation": "octahedral", "field": "rotation"},
    }


BRANCHES = ["arctan(y/x)", "pi/2 - arctan(x/y)", "pi + arctan(y/x)", "3*pi/2 - arctan(x/y)"]


def punctured_plane():
    kinetic = "1/2*(x_t^2+y_t^2)"
    sets = [{"name": "east", "domain": ["x"], "center": ["1", "0"]},
            {"name": "north", "domain": ["y"], "center": ["0", "1"]},
            {"name": "west", "domain": ["-x"], "center": ["-1", "0"]},
            {"name": "south", "domain": ["-y"], "center": ["0", "-1"]}]
    return {
        "name": "punctured-plane",
        "description": "Planar particle in a multivalued angular potential k*phi: the "
                       "source form is global, the Lagrangians live on four half-planes.",
        "signature": {"base": ["t"], "fiber": ["x", "y"], "order_cap": 4},
        "constants": {"k": "2/3"},
        "fields": {"time-translation": {"xi": ["1"], "Xi": ["0", "0"]},
                   "rotation": {"xi": ["0"], "Xi": ["-y", "x"]},
                   "x-translation": {"xi": ["0"], "Xi": ["1", "0"]}},
        "currents": {"rotation-potential": ["-(x*y_t - y*x_t) - k*t"]},
        "covers": {"half-planes": {"sets": sets,
                                   "simplices": [[0], [1], [2], [3], [0, 1], [1, 2], [2, 3], [0, 3]]}},
        "presentations": {
            "half-planes": {"cover": "half-planes",
                            "lagrangians": [f"{kinetic} - k*({b})" for b in BRANCHES],
                            "unit": "2*pi*k"},
        },
        "trivial_cochains": {
            "angular": {"presentation": "half-planes",
                        "density": "x_t*x_tt + y_t*y_tt + k*(x*y_t - y*x_t)/(x^2+y^2)",
                        "currents": [f"{kinetic} + k*({b})" for b in BRANCHES]},
        },
        "conservation": [
            {"presentation": "half-planes", "field": "time-translation",
             "potentials": [f"{kinetic} + k*({b})" for b in BRANCHES]},
            {"presentation": "half-planes", "field": "rotation", "potential": "rotation-potential"},
        ],
        "oracles": {"period": {"presentation": "half-planes", "field": "time-translation",
                               "form": ["-k*y/(x^2+y^2)", "k*x/(x^2+y^2)"],
                               "loop": ["cos(2*pi*t)", "sin(2*pi*t)"], "samples": 512}},
        "defaults": {"presentation": "half-planes", "field": "time-translation"},
    }


def single(name, description, lagrangian, fields, default_field, extra=None):
    bundle = {
        "name": name, "description": description,
        "signature": {"base": ["t"], "fiber": ["u"], "order_cap": 4},
        "lagrangians": {"L": lagrangian},
        "fields": fields,
        "covers": {"chart": {"sets": [{"name": "U"}], "simplices": [[0]]}},
        "presentations": {"chart": {"cover": "chart", "lagrangians": ["L"]}},
        "defaults": {"presentation": "chart", "field": default_field, "lagrangian": "L"},
    }
    bundle.update(extra or {})
    return bundle


def freeparticle():
    return single("freeparticle", "Free particle on the line.", "1/2*u_t^2",
                  {"time-translation": {"xi": ["1"], "Xi": ["0"]},
                   "shift": {"xi": ["0"], "Xi": ["1"]},
                   "boost": {"xi": ["0"], "Xi": ["t"]}},
                  "time-translation",
                  {"sources": {"eta": ["-u_tt"], "non-variational": ["u_t"]},
                   "currents": {"energy-potential": ["u_t^2/2"], "momentum-potential": ["-u_t"]},
                   "conservation": [{"presentation": "chart", "field": "time-translation",
                                     "potential": "energy-potential"},
                                    {"presentation": "chart", "field": "shift",
                                     "potential": "momentum-potential"}]})


def oscillator():
    return single("oscillator", "Harmonic oscillator.", "1/2*u_t^2 - 1/2*u^2",
                  {"time-translation": {"xi": ["1"], "Xi": ["0"]},
                   "scaling": {"xi": ["0"], "Xi": ["u"]}},
                  "time-translation",
                  {"sources": {"eta": ["-u_tt - u"]},
                   "currents": {"energy-potential": ["u_t^2/2 + u^2/2"]},
                   "conservation": [{"presentation": "chart", "field": "time-translation",
                                     "potential": "energy-potential"}]})


def line():
    return {
        "name": "line",
        "description": "Scalar field on the line: small Lagrangians and source forms.",
        "signature": {"base": ["x"], "fiber": ["u"], "order_cap": 4},
        "lagrangians": {"dirichlet": "1/2*u_x^2", "zero": "0", "exact": "2*u*u_x"},
        "sources": {"second-derivative": ["u_xx"], "first-derivative": ["u_x"], "mass": ["u"],
                    "zero": ["0"]},
        "fields": {"translation": {"xi": ["1"], "Xi": ["0"]},
                   "scaling": {"xi": ["0"], "Xi": ["u"]},
                   "linear": {"xi": ["0"], "Xi": ["x"]}},
        "covers": {"chart": {"sets": [{"name": "U"}], "simplices": [[0]]}},
        "presentations": {"chart": {"cover": "chart", "lagrangians": ["dirichlet"]}},
        "defaults": {"presentation": "chart", "field": "translation", "lagrangian": "dirichlet"},
    }


def corrupted():
    return {
        "name": "corrupted",
        "description": "Negative control: the second local Lagrangian carries a non-trivial "
                       "extra term, so the pieces do not define one source form.",
        "signature": {"base": ["t"], "fiber": ["u"], "order_cap": 4},
        "fields": {"time-translation": {"xi": ["1"], "Xi": ["0"]}},
        "covers": {"pair": {"sets": [{"name": "left", "domain": ["1-u"]},
                                     {"name": "right", "domain": ["u+1"]}],
                            "simplices": [[0], [1], [0, 1]]}},
        "presentations": {"pair": {"cover": "pair", "lagrangians": ["1/2*u_t^2", "1/2*u_t^2 + u"]}},
        "defaults": {"presentation": "pair", "field": "time-translation"},
    }


def nerves():
    def plain(k):
        return [{"name": f"U{i}"} for i in range(k)]
    octa = monopole()["covers"]["octahedral"]
    return {
        "name": "nerves",
        "description": "Bare covers for nerve-cohomology checks.",
        "signature": {"base": ["t"], "fiber": ["x", "y", "z"], "order_cap": 2},
        "covers": {
            "triangle": {"sets": plain(3), "simplices": [[0], [1], [2], [0, 1], [0, 2], [1, 2]]},
            "circle": {"sets": plain(4), "simplices": [[0], [1], [2], [3], [0, 1], [1, 2], [2, 3], [0, 3]]},
            "simplex": {"sets": plain(3), "simplices": [[0], [1], [2], [0, 1], [0, 2], [1, 2], [0, 1, 2]]},
            "disjoint": {"sets": plain(2), "simplices": [[0], [1]]},
            "octahedral": octa,
        },
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for build in (monopole, punctured_plane, freeparticle, oscillator, line, corrupted, nerves):
        data = build()
        path = OUT / f"{data['name']}.json"
        path.write_text(json.dumps(data, indent=2) + "\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
