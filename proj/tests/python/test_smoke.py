import json
import math

import numpy as np
import pytest

import acfb


def test_phi_eval():
    phi = acfb.power_law(2.0)
    assert phi.eval(0.0, 0.0, 3.0) == pytest.approx(9.0)
    assert phi.deriv(0.0, 0.0, 3.0) == pytest.approx(6.0)
    assert phi.autonomous()

    env = acfb.GrowthEnvelope(2.0, 3.0, 1.5)
    dp = acfb.double_phase(2.0, 3.0, 0.5, env)
    assert dp.eval(0.0, 0.0, 2.0) == pytest.approx(4.0 + 0.5 * 8.0)
    assert dp.env.q == 3.0


def test_exact_1d():
    phi = acfb.power_law(2.0)
    ex = acfb.solve_1d_exact(phi, 1.0, 0.0, 0.5)
    assert ex.lambda_star == pytest.approx(1.0, abs=1e-12)
    assert ex.slope_residual <= 1e-12
    assert ex.kind == "cone_right"
    assert ex.breakpoints and 0.0 < ex.breakpoints[0] < 1.0
    assert ex(0.25 * ex.breakpoints[0]) == 0.0


def test_minimize_1d_matches_oracle():
    phi = acfb.power_law(2.0)
    ex = acfb.solve_1d_exact(phi, 1.0, 0.0, 0.5)
    g = acfb.Grid.line(0.0, 1.0, 65)
    bnd = acfb.Field.from_expr(g, "0.5*x1")
    res = acfb.minimize(phi, 1.0, bnd, seed=7)
    assert res.converged
    h = g.h[0]
    assert abs(res.final_energy - ex.energy) <= 3.0 * h
    vals = res.u.values()
    assert vals.shape == (65,)
    assert vals[0] == 0.0 and vals[-1] == pytest.approx(0.5)


def test_replacement_constant():
    g = acfb.Grid.box(0.0, 1.0, 0.0, 1.0, 33, 33)
    ball = acfb.Ball(0.5, 0.5, 0.3)
    u = acfb.Field.from_expr(g, "3.0 + 0.2*x1*x2")
    arr = u.values().copy()
    arr[:] = 3.0
    const = acfb.Field.from_array(g, arr)
    phi = acfb.power_law(2.0)
    reg = acfb.regularize(phi, g, ball)
    assert reg.power_law and reg.p == pytest.approx(2.0)
    v = acfb.harmonic_replacement(reg, const, ball)
    assert np.max(np.abs(v.values() - 3.0)) <= 1e-12


def test_condition_checks():
    g = acfb.Grid.box(0.0, 1.0, 0.0, 1.0, 9, 9)
    phi = acfb.power_law(2.0)
    assert acfb.check_inc(phi, g, 2.0)
    assert acfb.check_dec(phi, g, 2.0)
    assert acfb.check_A0(phi, g, 1.0)
    bad = acfb.check_inc(phi, g, 2.1)
    assert not bad.pass_ and bad.worst > 0.0


def test_run_config(tmp_path):
    cfg = {
        "name": "smoke_1d",
        "domain": {"dim": 1, "lo": [0.0], "hi": [1.0], "resolutions": [33]},
        "phi": {"family": "power_law", "params": {"p": 2.0}},
        "lambda": 1.0,
        "boundary": "0.5*x1",
        "kappa": 0.05,
        "beta": 1.0,
        "seed": 11,
        "estimates": {
            "suite": ["caccioppoli", "poincare"],
            "balls": [{"center": [0.75], "radius": 0.12}],
        },
        "out": "unused",
    }
    out = tmp_path / "run"
    res = acfb.run_config(json.dumps(cfg), str(out), strict=True)
    assert res["exit_code"] == 0
    assert res["solver_ok"] and res["suite_pass"]
    assert (out / "manifest.json").exists()
    assert (out / "estimates_33.csv").exists()
