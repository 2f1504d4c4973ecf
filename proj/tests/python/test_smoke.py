import json
import math

import numpy as np
import pytest

import weylscope as ws


def test_catalog_lists_entries():
    names = ws.catalog_names()
    assert "fubini_study" in names and names == sorted(names)


def test_fubini_study_spectrum():
    c = ws.curvature(ws.catalog("fubini_study"), [0.1, 0.2, -0.3, 0.4])
    assert c["s"] == pytest.approx(12.0, abs=1e-9)
    assert np.allclose(c["eigenvalues"], [2.0, -1.0, -1.0], atol=1e-9)
    assert c["det"] == pytest.approx(2.0, abs=1e-9)
    assert np.allclose(c["wplus"], c["wplus"].T)


def test_potential_metric_matches_catalog():
    g = ws.from_potential("log(1 + x0^2 + x1^2 + x2^2 + x3^2)", -2, 2)
    a = ws.curvature(g, [0.3, 0.1, 0.0, -0.2])["metric"]
    b = ws.curvature(ws.catalog("fubini_study"), [0.3, 0.1, 0.0, -0.2])["metric"]
    assert np.allclose(a, b)


def test_derdzinski_round_trip():
    g = ws.catalog("fs_perturbed:0.03:2")
    h = ws.derdzinski(g)
    p = [0.2, -0.1, 0.3, 0.05]
    assert ws.divergence_weyl(h, p)["relative"] < 1e-6
    back = ws.curvature(ws.rescale_to_g(h), p)["metric"]
    assert np.allclose(back, 6 ** (-2 / 3) * ws.curvature(g, p)["metric"], rtol=1e-6, atol=1e-12)
    assert ws.kahler_residual(ws.rescale_to_g(h), p) < 1e-6


def test_errors_map_to_python_exceptions():
    with pytest.raises(ws.InputError):
        ws.catalog("nosuch")
    with pytest.raises(ws.ParseError):
        ws.from_potential("x0 +")
    with pytest.raises(ws.GapError):
        ws.kahler_residual(ws.catalog("round_s4"), [0.1, 0.2, 0.3, 0.4])
    assert issubclass(ws.GapError, ws.DomainError)


def test_oracle_and_threshold():
    r = ws.oracle(42, 20000)
    assert r["passed"] and r["samples"] == 20000
    assert ws.threshold() == pytest.approx(-(5 / 21) * math.sqrt(2 / 21), rel=1e-15)


def test_cli_in_process():
    code, out, err = ws.run_cli(["analyze", "--metric", "fubini_study", "--point", "0.1,0.2,0.3,0.4"])
    assert code == 0, err
    report = json.loads(out)
    assert report["schema"] == "weylscope.report/1"
    code, _, err = ws.run_cli(["analyze", "--metric", "round_s4", "--point", "0.1,0.2,0.3,0.4"])
    assert code == 3 and "W+ = 0" in err
