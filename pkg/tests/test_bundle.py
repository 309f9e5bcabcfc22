import json

import pytest

from varseq.bundle import Bundle, fixture_names, load, resolve, save
from varseq.errors import BundleError
from varseq.pipeline import run_check

FIXTURES = ["corrupted", "freeparticle", "line", "monopole", "nerves", "oscillator", "punctured-plane"]


def test_fixtures_are_shipped():
    assert fixture_names() == FIXTURES


@pytest.mark.parametrize("name", FIXTURES)
def test_save_load_roundtrip(tmp_path, name):
    b = load(name)
    path = tmp_path / f"{name}.json"
    save(b, path)
    again = load(path)
    assert again.to_json() == b.to_json()
    # normalized output is a fixed point
    save(again, path)
    assert path.read_text() == b.to_json()


def test_resolve_accepts_suffix_and_path(tmp_path):
    assert resolve("line.json") == resolve("line")
    path = tmp_path / "x.json"
    path.write_text(json.dumps(load("line").data))
    assert resolve(str(path)) == path
    with pytest.raises(BundleError):
        resolve("no-such-bundle")


def test_bad_bundles_are_reported():
    data = json.loads(load("line").to_json())
    with pytest.raises(BundleError):
        Bundle({**data, "signature": {"base": [], "fiber": ["u"]}})
    bad = json.loads(load("line").to_json())
    bad["lagrangians"]["broken"] = "u_x +"
    with pytest.raises(BundleError, match="broken"):
        Bundle(bad)
    bad = json.loads(load("line").to_json())
    bad["presentations"]["chart"]["cover"] = "missing"
    with pytest.raises(BundleError):
        Bundle(bad)


def test_constants_are_substituted():
    b = load("monopole")
    assert str(b.number("2*e*g")) == "3"


def test_inline_lagrangian():
    b = load("line")
    assert str(b.lagrangian("u*u_x").density) == "u*u_x"


# -- the full check ---------------------------------------------------------------


@pytest.mark.parametrize("name,status", [("freeparticle", "PASS"), ("oscillator", "PASS"), ("line", "PASS"),
                                         ("punctured-plane", "PASS"), ("corrupted", "FAIL")])
def test_check_status(name, status):
    report = run_check(load(name))
    assert report.status == status, report.to_text()
    assert report.exit_code == {"PASS": 0, "FAIL": 1}[status]


def test_check_reports_first_failure():
    report = run_check(load("corrupted"))
    first = report.to_json()["first_failure"]
    assert first["where"] == "(left,right)" and first["residual"] == "[1]"


def test_check_punctured_plane_period_oracle():
    report = run_check(load("punctured-plane"))
    steps = {s.name: s for s in report.steps}
    oracle = next(s for n, s in steps.items() if n.startswith("period oracle"))
    assert oracle.status == "PASS" and oracle.detail["error"] < 1e-6


def test_check_monopole():
    report = run_check(load("monopole"))
    assert report.status == "PASS", report.to_text()
    flux = next(s for s in report.steps if s.name.startswith("flux oracle"))
    assert flux.detail["relative_error"] < 1e-4
