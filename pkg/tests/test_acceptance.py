"""End-to-end acceptance criteria.

Each test checks one criterion at its stated tolerance and reports a line
through ``record_acceptance``; the lines are printed in the terminal summary.
Criteria that cannot hold as stated are kept at full strength and marked
``xfail(strict=True)``, so they print FAIL and an unexpected pass turns the
run red.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

import test_fitting
import test_lindblad
import test_rg
import test_specfun
import test_spin_algebra
from conftest import record_acceptance
from rampdiss import rg
from rampdiss.config import load_config
from rampdiss.exact import asymptotic_n2, predict_alpha, sector_generator, solve_n1, solve_n2_sector
from rampdiss.fitting import fit_exponent, slope_change
from rampdiss.lindblad import CorrelatorLabel, RampConfig, all_labels
from rampdiss.ode import IntegrationSpec, RampGenerator, solve
from rampdiss.presets import correlator_state, random_density
from rampdiss.spin_algebra import SpinKind
from rampdiss.workflows import saddle_comparison, simulate, sweep

pytestmark = pytest.mark.acceptance

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
NON_RESONANT = [0.5, 1.0, 1.6, 2.5, 6.0, 20.0]


# ---------------------------------------------------------------------- 1

def test_criterion_1_mapping_equivalence():
    run = load_config(CONFIGS / "fig5" / "mapping.yaml")
    start = time.perf_counter()
    dense = simulate(run, "lindblad")
    spin1 = simulate(run, "rg")
    runtime = time.perf_counter() - start
    worst = max(float(np.max(np.abs(dense.values[k] - spin1.values[k]))) for k in run.correlators)
    counts = sorted({CorrelatorLabel.from_string(k).n for k in run.correlators})
    ok = worst < 1e-7 and runtime < 60 and counts == [1, 2, 3]
    record_acceptance(1, ok, f"{len(run.correlators)} correlators, max abs err {worst:.2e}, {runtime:.1f}s")
    assert counts == [1, 2, 3]
    assert dense.times[0] == pytest.approx(1e-5) and dense.times[-1] == pytest.approx(1e2)
    assert worst < 1e-7
    assert runtime < 60


# ---------------------------------------------------------------------- 2

def test_criterion_2_exponent_law_above_two():
    run = load_config(CONFIGS / "fig2" / "three_point.yaml")
    labels = [str(lab) for lab in all_labels(range(3))]
    start = time.perf_counter()
    traj = simulate(run, "rg", labels=labels)
    by_n1: dict[int, list[float]] = {}
    worst = 0.0
    for text in labels:
        lab = CorrelatorLabel.from_string(text)
        alpha = fit_exponent((traj.times, traj.values[text])).alpha_hat
        expected = (3 + lab.n1) / 6
        by_n1.setdefault(lab.n1, []).append(alpha)
        worst = max(worst, abs(alpha - expected))
    runtime = time.perf_counter() - start
    means = ", ".join(f"N1={k}: {np.mean(v):.4f}" for k, v in sorted(by_n1.items()))
    ok = worst <= 0.02 and runtime < 120
    record_acceptance(2, ok, f"27 labels, {means}, max |dev| {worst:.4f}, {runtime:.1f}s")
    assert sorted(by_n1) == [0, 1, 2, 3]
    assert worst <= 0.02
    assert runtime < 120


# ---------------------------------------------------------------------- 3 and 4

@pytest.fixture(scope="module")
def czz_sweep():
    run = load_config(CONFIGS / "fig3" / "czz_sweep.yaml")
    return run, sweep(run)


def _column(rows, label):
    picked = [r for r in rows if r.label == label]
    return (np.array([r.nu for r in picked]), np.array([r.alpha_hat for r in picked]),
            np.array([r.alpha_pred for r in picked]))


def test_criterion_3_temporal_transition(czz_sweep):
    run, rows = czz_sweep
    nus, alphas, preds = _column(rows, "c[z0 z1]")
    assert list(nus) == list(run.sweep.nu)
    assert np.allclose(preds, np.minimum(4 / nus, (nus + 2) / nus), rtol=1e-14)
    rel = np.abs(alphas - preds) / preds
    tol = np.where(np.abs(nus - 2) < 0.3, 0.10, 0.03)
    left, right, _ = slope_change(nus, alphas)
    ok = bool(np.all(rel < tol)) and abs(left + 0.5) <= 0.15 and abs(right + 1.0) <= 0.15
    table = " ".join(f"{nu:g}:{100 * r:+.2f}%" for nu, r in zip(nus, (alphas - preds) / preds))
    record_acceptance(3, ok, f"c_zz dev {table}; slope {left:.3f} -> {right:.3f}")
    assert np.all(rel < tol), dict(zip(nus, rel))
    assert abs(left + 0.5) <= 0.15
    assert abs(right + 1.0) <= 0.15


def test_criterion_4_no_transition_in_pair_correlator(czz_sweep):
    _, rows = czz_sweep
    nus, alphas, preds = _column(rows, "c[+0 -1]")
    assert np.allclose(preds, 2 / nus, rtol=1e-14)
    rel = np.abs(alphas - preds) / preds
    _, _, change = slope_change(nus, alphas)
    ok = bool(np.all(rel < 0.03)) and abs(change) < 0.05
    record_acceptance(4, ok, f"c_+- max rel dev {100 * rel.max():.2f}%, slope change {change:+.4f}")
    assert np.all(rel < 0.03), dict(zip(nus, rel))
    assert abs(change) < 0.05


# ---------------------------------------------------------------------- 5

def _ode(A0, A1, nu, init, t0, times):
    spec = IntegrationSpec((t0, float(times[-1])), rel_tol=1e-11, abs_tol=1e-300, dense_samples=times)
    states = solve(RampGenerator(A0, A1, nu), init, spec).states
    return states.reshape(len(times), *init.shape)


def _traj_error(exact, numeric):
    # per boundary condition: max over time and slots, relative to the largest numeric amplitude
    return np.max(np.abs(exact - numeric), axis=(0, 1)) / np.max(np.abs(numeric), axis=(0, 1))


def test_criterion_5_exact_solution_oracle():
    rng = np.random.default_rng(5)
    n_bc = 50
    t0 = 1e-3
    times = np.geomspace(t0, 200.0, 40)
    start = time.perf_counter()
    worst = {}
    for nu in NON_RESONANT:
        cfg = RampConfig(nu, [0.2, 0.7], t_init=t0)
        errors = []
        # one site: diagonal generator on (c_-, c_z, c_+) at basis (+1, 0, -1)
        eps = cfg.epsilons[0]
        init = rng.normal(size=(3, n_bc)) + 1j * rng.normal(size=(3, n_bc))
        num = _ode(np.diag([-2j * eps, 0, 2j * eps]), np.diag([-1.0, -2.0, -1.0]), nu, init, t0, times)
        exact = np.empty_like(num)
        for b in range(n_bc):
            sol = solve_n1(cfg, 0, (init[1, b], init[2, b], init[0, b]), times)
            exact[:, :, b] = np.stack([sol["minus"], sol["z"], sol["plus"]], axis=1)
        errors.append(_traj_error(exact, num))
        # two sites: every magnetization sector
        for jz in range(-2, 3):
            A0, A1 = sector_generator(cfg, [0, 1], jz)
            size = A0.shape[0]
            init = rng.normal(size=(size, n_bc)) + 1j * rng.normal(size=(size, n_bc))
            num = _ode(A0, A1, nu, init, t0, times)
            exact = solve_n2_sector(cfg, [0, 1], jz, init.T, times).amplitudes.transpose(1, 2, 0)
            errors.append(_traj_error(exact, num))
        worst[nu] = float(np.max(errors))
    runtime = time.perf_counter() - start
    top = max(worst.values())
    ok = top < 1e-6 and runtime < 60
    record_acceptance(5, ok, f"{n_bc} boundary conditions x {len(NON_RESONANT)} nu x 6 sectors, "
                             f"max rel err {top:.1e}, {runtime:.1f}s")
    assert top < 1e-6, worst
    assert runtime < 60


# ---------------------------------------------------------------------- 6

def _asymptote_error(nu, rng, n_bc=20):
    cfg = RampConfig(nu, [1 / 3, 2 / 3], t_init=1e-2)
    delta = 1 / 3
    taus = np.linspace(1e3, 1e3 + 3, 13)
    init = rng.normal(size=(n_bc, 3)) + 1j * rng.normal(size=(n_bc, 3))
    worst = 0.0
    dominant = None
    for row in init:
        sol = solve_n2_sector(cfg, [0, 1], 0, row, taus / delta)
        form = asymptotic_n2(cfg, [0, 1], sol.boundary, "zz")
        exact = sol.correlators()[CorrelatorLabel.from_string("z0 z1")]
        envelope = sum(abs(t.coefficient) * taus ** (-t.exponent) for t in form.terms)
        approx = sum(t(taus) for t in form.terms)
        worst = max(worst, float(np.max(np.abs(approx - exact) / envelope)))
        dominant = form.dominant_exponent
    return worst, dominant


@pytest.mark.parametrize("nu", [
    6.0,
    pytest.param(1.0, marks=pytest.mark.xfail(
        strict=True, reason="two-term form has an O(1/tau) relative remainder at nu = 1 (about 2.5e-3 at 1e3)")),
])
def test_criterion_6_two_term_asymptote(nu):
    err, dominant = _asymptote_error(nu, np.random.default_rng(6))
    ok = err < 1e-3
    record_acceptance(6, ok, f"nu={nu:g}: rel err {err:.2e} at tau=1e3, dominant exponent {dominant:.4f}")
    assert err < 1e-3


def test_criterion_6_crossover_side_flips():
    rng = np.random.default_rng(61)
    sides = {}
    for nu in (1.0, 6.0):
        cfg = RampConfig(nu, [1 / 3, 2 / 3], t_init=1e-2)
        sol = solve_n2_sector(cfg, [0, 1], 0, rng.normal(size=3) + 0j, [1e-2])
        form = asymptotic_n2(cfg, [0, 1], sol.boundary, "zz")
        fast_alg = 4 / nu
        sides[nu] = "algebraic" if math.isclose(form.dominant_exponent, fast_alg) else "oscillating"
    ok = sides == {1.0: "oscillating", 6.0: "algebraic"}
    record_acceptance(6, ok, f"dominant term: {sides[1.0]} at nu=1, {sides[6.0]} at nu=6")
    assert ok


# ---------------------------------------------------------------------- 7

T_INIT_7 = 1e-2
# the n = 6 random state carries a slowly fading oscillating transient; its
# fit window starts half a decade later
T_FINAL_7 = {4: 1e4, 5: 1e4, 6: 10 ** 4.5}


@pytest.mark.parametrize("n", [4, 5, 6])
@pytest.mark.parametrize("nu", [1.0, 1.5, 4.0, 6.0])
@pytest.mark.parametrize("kind", ["pseudo-vacuum", "random"])
def test_criterion_7_higher_order_exponents(n, nu, kind):
    t_final = T_FINAL_7[n]
    cfg = RampConfig(nu, [(i + 1) / n for i in range(n)], t_init=T_INIT_7, t_final=t_final)
    sites = tuple(range(n))
    if kind == "pseudo-vacuum":
        start = rg.CorrelatorState(rg.pseudo_vacuum_raised(n, n), T_INIT_7, "lab", sites)
    else:
        start = correlator_state(random_density(n, T_INIT_7, seed=1), sites)
    times = np.logspace(-1, math.log10(t_final), 4000)
    out = rg.evolve_correlators(cfg, start, times, sectors=[0], rel_tol=1e-10, abs_tol=1e-300)
    slot = (3 ** n - 1) // 2  # all spins in the S^z = 0 state: the all-z correlator
    values = np.array([s.amplitudes[slot] for s in out])
    fit = fit_exponent((times, values), window=(t_final / 10 ** 1.5, t_final))
    pred = predict_alpha(n, n, nu).alpha
    rel = abs(fit.alpha_hat - pred) / pred
    record_acceptance(7, rel < 0.05, f"n={n} nu={nu:g} {kind}: {fit.alpha_hat:.3f}/{pred:.3f}")
    assert rel < 0.05


# ---------------------------------------------------------------------- 8

def _saddle_case(n, nu):
    # small exponent gaps (nu = 3) and the logarithmic correction at nu = 2 settle late
    t_final = 1e5 if nu <= 3.0 else 1e4
    cfg = RampConfig(nu, [(i + 1) / n for i in range(n)], t_init=1e-5, t_final=t_final)
    decades = math.log10(t_final) + 1
    times = np.logspace(-1, math.log10(t_final), int(600 * decades))
    return saddle_comparison(cfg, n, range(1, n + 1), times, tolerance=0.05, min_span=2.0)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("nu", [2.0, 3.0, 4.0, 6.0])
def test_criterion_8_saddle_ratios_flatten(n, nu):
    reports = _saddle_case(n, nu)
    slots = [s for rep in reports for s in rep.slots]
    settled = all(s.settled for s in slots)
    worst = max(s.max_drift_after for s in slots)
    onset = max((s.onset for s in slots if s.onset is not None), default=float("nan"))
    record_acceptance(8, settled, f"n={n} nu={nu:g}: {len(slots)} slots, latest onset {onset:.3g}, "
                                  f"max drift after {worst:.3f}/decade")
    assert settled


# ---------------------------------------------------------------------- 9

PROPERTY_SUITES = {
    "density trace/hermiticity (generator)": lambda: test_lindblad.test_generator_preserves_hermiticity_and_trace(),
    "density trace/hermiticity/positivity (evolution)": test_lindblad.test_evolution_keeps_density_invariants,
    "magnetization conservation": lambda: [test_rg.test_generator_conserves_magnetization_exactly(n, f)
                                           for n in (1, 2, 3, 4) for f in (True, False)],
    "spin-1 label round trip": lambda: test_rg.test_label_round_trip(),
    "spin-algebra commutators": lambda: [test_spin_algebra.test_su2_relations_exact(k)
                                         for k in (SpinKind.HALF, SpinKind.ONE)],
    "distinct sites commute": lambda: test_spin_algebra.test_distinct_sites_commute(),
    "Bessel Wronskian": lambda: test_specfun.test_bessel_wronskian(),
    "1F2 contiguity": lambda: test_specfun.test_hyp1f2_contiguity(),
    "half-integer Bessel": lambda: [test_specfun.test_half_integer_bessel(x) for x in (1.0, 10.0, 100.0)],
    "fitter scale invariance": lambda: test_fitting.test_scale_invariance(),
    "fitter time-unit covariance": lambda: test_fitting.test_time_unit_covariance(),
}


@pytest.mark.parametrize("name", list(PROPERTY_SUITES))
def test_criterion_9_property_suites(name):
    try:
        PROPERTY_SUITES[name]()
    except Exception:
        record_acceptance(9, False, f"{name} failed")
        raise
    record_acceptance(9, True, name)
