import numpy as np
import pytest
import yaml

from rampdiss.config import parse_config
from rampdiss.errors import DimensionError, ResonantNuError
from rampdiss.lindblad import RampConfig
from rampdiss.presets import random_density, save_density_json
from rampdiss.rg import sector_indices
from rampdiss.workflows import (auto_route, exact_vs_numeric, initial_density, resonant_points,
                                saddle_comparison, simulate, sweep)

DOC = {
    "nu": 2.5,
    "n_spins": 2,
    "epsilons": [0.5, 1.0],
    "t_init": 1e-3,
    "t_final": 30.0,
    "initial_state": {"preset": "random", "seed": 2},
    "correlators": ["z0", "+1", "z0 z1", "+0 -1", "-0 z1"],
    "samples": {"count": 150},
    "integration": {"rel_tol": 1e-12, "abs_tol": 1e-300},
}


def run_from(**changes):
    doc = dict(DOC, **changes)
    return parse_config(doc, yaml.safe_dump(doc))


def test_three_routes_agree():
    run = run_from()
    trajs = {route: simulate(run, route) for route in ("lindblad", "rg", "exact")}
    for label in run.correlators:
        ref = trajs["lindblad"].values[label]
        assert np.max(np.abs(trajs["rg"].values[label] - ref)) < 1e-7
        assert np.max(np.abs(trajs["exact"].values[label] - ref)) < 1e-7
    assert trajs["rg"].route == "rg" and trajs["rg"].runtime > 0


def test_exact_route_limits():
    with pytest.raises(ResonantNuError):
        simulate(run_from(nu=2.0), "exact")
    three = run_from(n_spins=3, epsilons=[0.2, 0.4, 0.6], correlators=["z0 z1 z2"])
    with pytest.raises(DimensionError):
        simulate(three, "exact")
    with pytest.raises(ValueError):
        simulate(run_from(), "euler")


def test_asymptote_route_has_the_predicted_decay():
    run = run_from(nu=6.0, t_final=1e6, correlators=["z0 z1", "+0 -1"])
    traj = simulate(run, "asymptote", times=[1e4, 1e6])
    zz = traj.values["c[z0 z1]"]
    assert -np.log(abs(zz[1] / zz[0])) / np.log(100.0) == pytest.approx(4 / 6, abs=1e-10)


def test_density_from_file(tmp_path):
    state = random_density(2, 1e-3, seed=9)
    save_density_json(state, tmp_path / "rho.json")
    run = run_from(initial_state={"file": str(tmp_path / "rho.json")})
    assert np.array_equal(initial_density(run).matrix(), state.matrix())


def test_route_choice():
    assert auto_route(6.0, ["c[z0 z1]", "c[+0]"]) == "exact"
    assert auto_route(4.0, ["c[z0 z1]"]) == "rg"
    assert auto_route(6.0, ["c[z0 z1 z2]"]) == "rg"
    assert resonant_points([0.8, 1.0, 1.5, 2.0, 2.5, 4.0]) == [0.8, 1.5, 2.0, 4.0]


def test_sector_checks():
    ramp = RampConfig(2.0, [0.5, 1.0], t_init=1e-2)
    init = np.random.default_rng(3).standard_normal(9) + 0j
    checks = exact_vs_numeric(ramp, (0, 1), init, np.geomspace(1e-2, 50.0, 200))
    assert [c.jz for c in checks] == [-2, -1, 0, 1, 2]
    zero = checks[2]
    assert zero.max_rel_deviation is None and zero.resonant
    assert all(c.max_rel_deviation < 1e-7 for c in checks if c.jz != 0)
    with pytest.raises(DimensionError):
        exact_vs_numeric(ramp, (0, 1, 2), init, [1.0])


def test_saddle_comparison_reports_every_slot():
    ramp = RampConfig(6.0, [0.5, 1.0], t_init=1e-2)
    reports = saddle_comparison(ramp, 2, [1, 2], np.geomspace(1e-2, 1e4, 1500))
    assert [r.n_plus for r in reports] == [1, 2]
    for rep in reports:
        assert sorted(s.slot for s in rep.slots) == list(sector_indices(2, rep.n_plus - 2))
        assert rep.settled


def test_sweep_rows_in_grid_order():
    doc = dict(DOC, t_init=1e-5, t_final=1e7, samples={"count": 800},
               sweep={"nu": [10.0, 2.5], "labels": ["z0 z1", "+0 -1"], "fit_start": 100.0,
                      "window": {"tail_decades": 1.5}})
    rows = sweep(parse_config(doc))
    assert [(r.nu, r.label) for r in rows] == [(10.0, "c[z0 z1]"), (10.0, "c[+0 -1]"),
                                               (2.5, "c[z0 z1]"), (2.5, "c[+0 -1]")]
    for r in rows:
        assert r.route == "exact"
        assert r.relative_error < 0.05
    with pytest.raises(ValueError):
        sweep(run_from())
