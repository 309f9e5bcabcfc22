import json
import subprocess
import sys

import pytest

from varseq.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_el(capsys):
    code, out, _ = run(capsys, "el", "oscillator", "--verify")
    assert code == 0 and "-u - u_tt" in out and "verify: zero" in out


def test_el_inline_json(capsys):
    code, out, _ = run(capsys, "el", "line", "u_x^2/2", "--json")
    assert code == 0
    assert json.loads(out) == {"command": "el", "lagrangian": "u_x^2/2", "source": ["-u_xx"]}


def test_helmholtz_exit_codes(capsys):
    code, out, _ = run(capsys, "helmholtz", "line", "first-derivative")
    assert code == 1 and "H[u,u;x] = 2" in out
    code, out, _ = run(capsys, "helmholtz", "line", "u_xx", "--verify", "--json")
    payload = json.loads(out)
    assert code == 0 and payload["verdict"] == "zero" and payload["tonti_roundtrip"] == "zero"


def test_tonti(capsys):
    code, out, _ = run(capsys, "tonti", "line", "second-derivative", "--verify")
    assert code == 0 and "u*u_xx/2" in out
    code, _, err = run(capsys, "tonti", "line", "first-derivative")
    assert code == 3 and "Helmholtz" in err or "helmholtz" in err


def test_noether_and_lie(capsys):
    code, out, _ = run(capsys, "noether", "oscillator", "L", "time-translation", "--verify")
    assert code == 0 and "-u^2/2 - u_t^2/2" in out
    code, out, _ = run(capsys, "noether", "freeparticle", "L", "0:t", "--json")
    assert json.loads(out)["current"] == ["t*u_t"]
    code, out, _ = run(capsys, "lie", "oscillator", "L", "scaling", "--json")
    payload = json.loads(out)
    assert code == 0 and payload["certificate"]["verdict"] == "zero"
    code, out, _ = run(capsys, "lie", "oscillator", "energy-potential", "time-translation", "--verify")
    assert code == 0


def test_cohomology(capsys):
    code, out, _ = run(capsys, "cohomology", "nerves", "--json")
    covers = json.loads(out)["covers"]
    assert covers["octahedral"]["betti"] == [1, 0, 1] and covers["circle"]["betti"] == [1, 1]


def test_check_exit_codes(capsys):
    code, out, _ = run(capsys, "check", "oscillator")
    assert code == 0 and out.startswith("PASS")
    code, out, _ = run(capsys, "check", "corrupted", "--json")
    payload = json.loads(out)
    assert code == 1 and payload["status"] == "FAIL" and payload["first_failure"]["where"] == "(left,right)"


def test_order_cap_override(capsys):
    code, _, err = run(capsys, "el", "line", "u_xxx^2", "--order-cap", "3")
    assert code == 3 and "order" in err


def test_bad_input_exit_code(capsys):
    code, _, err = run(capsys, "el", "no-such-bundle")
    assert code == 3 and "no bundle" in err
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 3


def test_output_is_deterministic(capsys):
    first = run(capsys, "check", "punctured-plane", "--json")[1]
    second = run(capsys, "check", "punctured-plane", "--json")[1]
    assert first == second


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "varseq", "el", "freeparticle"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "[-u_tt]"
