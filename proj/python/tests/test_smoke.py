import math

import numpy as np
import pytest

import selfosc


def mixed():
    return selfosc.System(1.0, selfosc.Bath("fermionic", 0.1, 10.0, 1.0),
                          selfosc.Bath("bosonic", 0.05, 15.0, 0.1))


def test_system_and_roots():
    s = mixed()
    assert s.mode == "mixed"
    assert s.omega == pytest.approx(4.5)
    r = selfosc.roots(s)
    assert len(r) == 4
    assert max(z.real for z in r) < 0
    assert r[0].real == pytest.approx(-14.59975, rel=1e-6)


def test_coefficients_and_evolution():
    c = selfosc.coefficients(mixed(), t_max=1.0, dt=0.05)
    assert len(c) == 21
    assert isinstance(c.lam, np.ndarray)
    assert abs(c.lam[0]) < 1e-8 and abs(c.D[0]) < 1e-8
    assert math.isnan(c.ratio[0])
    t, n = selfosc.evolve(c, 0.0, 1.0)
    assert t[-1] == pytest.approx(1.0)
    assert np.all(np.isfinite(n)) and n[0] == 0.0


def test_equilibrium_helpers():
    assert selfosc.equilibrium_occupation(1.0, 1.0, selfosc.Statistics.bosonic) == pytest.approx(
        1.0 / (math.e - 1.0))
    b = selfosc.Bath("bosonic", 1e-4, 10.0, 10.0)
    s = selfosc.System(1.0 - 4e-3, b, b)
    neq = selfosc.equilibrium_occupation(1.0, 10.0, selfosc.Statistics.bosonic)
    assert selfosc.asymptotic_occupation(s) == pytest.approx(neq, rel=3e-3)


def test_config_errors_are_typed():
    with pytest.raises(selfosc.ConfigError, match="line 2"):
        selfosc.parse_config("[bath.1]\nalpha = -1\n")
    with pytest.raises(selfosc.Error):
        selfosc.parse_config("[nope]\n")
    assert "scenario" in selfosc.parse_config("scenario = fig1\n")


def test_scenario_run(tmp_path):
    assert "fig4" in selfosc.scenario_names()
    r = selfosc.run_scenario("fig1", tmp_path / "fig1", t_max=2.0, dt=0.02)
    assert (tmp_path / "fig1" / "metadata.json").exists()
    assert "coefficients.csv" in r.files
    d = r.as_dict()
    assert d["passed"] == r.passed
    assert "ratio_nonstationary" in d["observables"]


def test_validate_detects_fault(tmp_path):
    cfg = """
[bath.1]
statistics = bosonic
alpha = 0.01
gamma_over_Omega = 10
kT_over_hOmega = 1
[bath.2]
statistics = bosonic
alpha = 0.01
gamma_over_Omega = 10
kT_over_hOmega = 1
[run]
t_max = {t}
dt = 0.01
[oracle]
modes = 200
t_max = {t}
"""
    ok = selfosc.run_validate(cfg.format(t=4), tmp_path / "ok")
    assert ok.passed, ok.observables
    # a flipped friction needs a few damping times to show
    bad = selfosc.run_validate(cfg.format(t=10), tmp_path / "bad", inject_lambda_sign=True)
    assert not bad.passed
