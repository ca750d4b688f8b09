"""Trajectory generation, exponent sweeps and cross-route checks.

These are the building blocks behind the command-line subcommands. Each
function takes a validated :class:`~rampdiss.config.RunConfig` (or plain
ramp parameters) and returns plain data: times, complex correlator
trajectories keyed by label text, exponent tables and comparison reports.
"""

from __future__ import annotations

import math
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import exact, fitting, rg, saddle
from .config import RunConfig
from .errors import DimensionError
from .lindblad import CorrelatorLabel, DensityState, RampConfig, correlator_tensor, evolve_density
from .presets import build_initial_state, correlator_state, load_density_json

__all__ = [
    "Trajectory",
    "SweepRow",
    "SectorCheck",
    "SaddleSlot",
    "SaddleReport",
    "initial_density",
    "simulate",
    "auto_route",
    "sweep",
    "exact_vs_numeric",
    "saddle_comparison",
    "analytic_check",
    "resonant_points",
]


@dataclass
class Trajectory:
    """Correlator values on a common time grid, keyed by label text such as ``c[z0 +1]``."""

    times: np.ndarray
    values: dict[str, np.ndarray]
    route: str
    runtime: float = 0.0


def initial_density(run: RunConfig) -> DensityState:
    spec = run.initial_state
    if spec.file is not None:
        return load_density_json(spec.file, run.ramp.t_init)
    return build_initial_state(spec.preset, run.n_spins, run.ramp.t_init, **spec.params)


def _group_by_sites(labels: Iterable[CorrelatorLabel]) -> dict[tuple[int, ...], list[CorrelatorLabel]]:
    groups: dict[tuple[int, ...], list[CorrelatorLabel]] = {}
    for lab in labels:
        groups.setdefault(lab.sites, []).append(lab)
    return groups


def _from_amplitudes(amps: np.ndarray, sites: tuple[int, ...], labels, out: dict) -> None:
    w = rg.weight_vector(len(sites))
    for lab in labels:
        slot = rg.slot_of_label(lab, sites)
        out[str(lab)] = amps[:, slot] / w[slot]


def _ramp_with_final(ramp: RampConfig, t_final: float) -> RampConfig:
    return replace(ramp, t_final=max(t_final, ramp.t_init * (1 + 1e-12)))


def simulate(run: RunConfig, route: str | None = None, times: Sequence[float] | None = None,
             labels: Sequence[str] | None = None, ramp: RampConfig | None = None,
             rho: DensityState | None = None) -> Trajectory:
    """Correlator trajectories for ``run`` along one route.

    Parameters
    ----------
    route : {"lindblad", "rg", "exact", "asymptote"}, optional
        Defaults to ``run.mode``.
    times : sequence of float, optional
        Output grid; defaults to ``run.sample_times()``.
    labels : sequence of str, optional
        Subset of correlators; defaults to ``run.correlators``.
    ramp : RampConfig, optional
        Replaces ``run.ramp`` (sweeps vary ``nu`` this way).
    rho : DensityState, optional
        Initial density matrix; built from ``run.initial_state`` otherwise.

    The ``exact`` route covers one- and two-site correlators and raises
    :class:`~rampdiss.errors.ResonantNuError` at resonant ``nu``. The
    ``asymptote`` route evaluates the saddle-point form of each label's
    sector with unit prefactors, so only its time dependence is meaningful.
    """
    route = route or run.mode
    ramp = ramp or run.ramp
    t = np.asarray(run.sample_times() if times is None else times, dtype=float)
    labs = [CorrelatorLabel.from_string(s) for s in (labels or run.correlators)]
    groups = _group_by_sites(labs)
    tol = run.integration
    start = _time.perf_counter()
    values: dict[str, np.ndarray] = {}

    if route == "asymptote":
        for sites, group in groups.items():
            for lab in group:
                slot = rg.slot_of_label(lab, sites)
                jz = int(rg.basis_magnetization(len(sites))[slot])
                traj = saddle.asymptote_trajectory(ramp, len(sites), len(sites) + jz, t, sites)
                values[str(lab)] = traj[:, slot] / rg.weight_vector(len(sites))[slot]
        return Trajectory(t, values, route, _time.perf_counter() - start)

    if rho is None:
        rho = initial_density(run)
    ramp = _ramp_with_final(ramp, float(t[-1]))
    if route == "lindblad":
        states = evolve_density(ramp, rho, t, rel_tol=tol.rel_tol, abs_tol=tol.abs_tol,
                                method=tol.method, max_steps=tol.max_steps)
        for sites, group in groups.items():
            amps = np.array([rg.tensor_to_amplitudes(correlator_tensor(s, sites)) for s in states])
            _from_amplitudes(amps, sites, group, values)
    elif route == "rg":
        for sites, group in groups.items():
            init = correlator_state(rho, sites)
            out = rg.evolve_correlators(ramp, init, t, rel_tol=tol.rel_tol, abs_tol=tol.abs_tol,
                                        method=tol.method, max_steps=tol.max_steps)
            _from_amplitudes(np.array([s.amplitudes for s in out]), sites, group, values)
    elif route == "exact":
        for sites, group in groups.items():
            init = correlator_state(rho, sites)
            if len(sites) == 1:
                w = rg.weight_vector(1)
                c0 = init.amplitudes / w
                sol = exact.solve_n1(ramp, sites[0], (c0[1], c0[2], c0[0]), t)
                for lab in group:
                    values[str(lab)] = sol[lab.indices[0]]
            elif len(sites) == 2:
                amps = exact.solve_n2(ramp, sites, init.amplitudes, t)
                _from_amplitudes(amps, sites, group, values)
            else:
                raise DimensionError(f"closed forms cover one or two sites, not {len(sites)}")
    else:
        raise ValueError(f"unknown route {route!r}")
    return Trajectory(t, values, route, _time.perf_counter() - start)


# ---------------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepRow:
    nu: float
    label: str
    alpha_hat: float
    alpha_pred: float
    r_squared: float
    route: str
    window: tuple[float, float]
    method: str

    @property
    def relative_error(self) -> float:
        return abs(self.alpha_hat - self.alpha_pred) / abs(self.alpha_pred)


def auto_route(nu: float, labels: Sequence[str]) -> str:
    """``exact`` when every label has at most two sites and ``nu`` is not resonant, else ``rg``."""
    sizes = {CorrelatorLabel.from_string(s).n for s in labels}
    if max(sizes) <= 2 and exact.resonance_reason(nu) is None:
        return "exact"
    return "rg"


def _sweep_point(run: RunConfig, nu: float) -> list[SweepRow]:
    spec = run.sweep
    route = auto_route(nu, spec.labels) if spec.route == "auto" else spec.route
    t_end = run.ramp.t_final
    if route != "exact" and spec.numeric_t_final is not None:
        t_end = min(t_end, spec.numeric_t_final)
    lo = spec.fit_start if spec.fit_start is not None else run.ramp.t_init
    times = np.logspace(math.log10(lo), math.log10(t_end), run.samples.count)
    ramp = replace(run.ramp, nu=float(nu), t_final=t_end)
    traj = simulate(run, route, times, spec.labels, ramp)
    window = spec.window.resolve(t_end)
    rows = []
    for text in spec.labels:
        lab = CorrelatorLabel.from_string(text)
        pred = exact.predict_alpha(lab.n, lab.n1, nu)
        fit = fitting.fit_exponent((traj.times, traj.values[str(lab)]), window=window, prediction=pred)
        rows.append(SweepRow(float(nu), str(lab), fit.alpha_hat, pred.alpha, fit.r_squared, route,
                             tuple(fit.window), fit.method))
    return rows


def _sweep_task(args):
    run, nu = args
    return _sweep_point(run, nu)


def sweep(run: RunConfig, jobs: int = 1) -> list[SweepRow]:
    """Fitted and predicted exponents for every ``nu`` in ``run.sweep``, in grid order.

    With ``jobs > 1`` grid points run in a process pool; results are merged
    by grid position, so the table does not depend on scheduling.
    """
    if run.sweep is None:
        raise ValueError("run config has no sweep section")
    grid = list(run.sweep.nu)
    if jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_sweep_task, [(run, nu) for nu in grid]))
    else:
        parts = [_sweep_point(run, nu) for nu in grid]
    return [row for part in parts for row in part]


# ---------------------------------------------------------------------- analytic checks

@dataclass(frozen=True)
class SectorCheck:
    """Closed form against numerics for one two-site sector."""

    sites: tuple[int, int]
    jz: int
    max_rel_deviation: float | None
    resonant: str | None = None


def exact_vs_numeric(ramp: RampConfig, sites: Sequence[int], initial: np.ndarray,
                     times: Sequence[float], rel_tol: float = 1e-12) -> list[SectorCheck]:
    """Compare closed-form and RG amplitudes sector by sector on two sites.

    The deviation of a sector is ``max_t |exact - numeric| / max_t |numeric|``
    over all its slots. Resonant sectors are reported with ``max_rel_deviation = None``.
    """
    sites = tuple(int(s) for s in sites)
    if len(sites) != 2:
        raise DimensionError("closed-form comparison needs exactly two sites")
    t = np.asarray(times, dtype=float)
    ramp = _ramp_with_final(ramp, float(t[-1]))
    init = rg.CorrelatorState(initial, ramp.t_init, "lab", sites)
    numeric = np.array([s.amplitudes for s in rg.evolve_correlators(ramp, init, t, rel_tol=rel_tol,
                                                                     abs_tol=1e-300)])
    out = []
    for jz in range(-2, 3):
        idx = rg.sector_indices(2, jz)
        reason = exact.resonance_reason(ramp.nu, jz)
        if reason is not None:
            out.append(SectorCheck(sites, jz, None, reason))
            continue
        sol = exact.solve_n2_sector(ramp, sites, jz, init.amplitudes[idx], t).amplitudes
        scale = np.max(np.abs(numeric[:, idx]))
        dev = float(np.max(np.abs(sol - numeric[:, idx])) / scale) if scale > 0 else 0.0
        out.append(SectorCheck(sites, jz, dev))
    return out


@dataclass(frozen=True)
class SaddleSlot:
    spins: tuple[int, ...]
    slot: int
    onset: float | None
    max_drift_after: float
    settled: bool


@dataclass
class SaddleReport:
    """Flatness of ``|numeric| / |asymptote|`` per slot of one sector."""

    sites: tuple[int, ...]
    n_plus: int
    nu: float
    tolerance: float
    slots: list[SaddleSlot] = field(default_factory=list)

    @property
    def settled(self) -> bool:
        return all(s.settled for s in self.slots)


def saddle_comparison(ramp: RampConfig, n: int, n_plus: int | Sequence[int], times: Sequence[float],
                      tolerance: float = 0.05, min_span: float = 2.0, rel_tol: float = 1e-10,
                      start: float = 1e-1) -> list[SaddleReport]:
    """Evolve pseudo-vacuum-raised states and compare each slot with the saddle form.

    All requested ``N+`` are integrated in one solve: the sectors never mix,
    so the sum of the raised states evolves each of them independently.
    Drift is measured as in :func:`rampdiss.fitting.fit_onset`, the change in
    the mean of ``ln(|numeric| / |asymptote|)`` between adjacent decades, and
    only samples at ``t >= start`` enter the comparison.
    """
    levels = [int(n_plus)] if np.ndim(n_plus) == 0 else [int(k) for k in n_plus]
    t = np.asarray(times, dtype=float)
    ramp = _ramp_with_final(ramp, float(t[-1]))
    sites = tuple(range(n))
    vec = sum(rg.pseudo_vacuum_raised(n, k) for k in levels)
    init = rg.CorrelatorState(vec, ramp.t_init, "lab", sites)
    numeric = np.array([s.amplitudes for s in rg.evolve_correlators(ramp, init, t, rel_tol=rel_tol,
                                                                     abs_tol=1e-300)])
    keep = t >= start
    reports = []
    for k in levels:
        asym = saddle.asymptote_trajectory(ramp, n, k, t[keep])
        report = SaddleReport(sites, k, ramp.nu, tolerance)
        for cfg in saddle.enumerate_configs(n, k):
            slot = cfg.basis_slot
            ratio = np.abs(numeric[keep, slot]) / np.abs(asym[:, slot])
            res = fitting.fit_onset(t[keep], ratio, tolerance=tolerance, min_span=min_span)
            report.slots.append(SaddleSlot(cfg.spins, slot, res.onset, res.max_drift_after, res.settled))
        reports.append(report)
    return reports


def resonant_points(nus: Iterable[float]) -> list[float]:
    """Grid points whose sector-0 closed form is singular."""
    return [nu for nu in nus if exact.resonance_reason(nu) is not None]


def analytic_check(run: RunConfig, pairs: Sequence[Sequence[int]] | None = None,
                   saddle_sites: int | None = None) -> dict:
    """Closed form against numerics on site pairs, plus the saddle comparison.

    Returns a JSON-ready report. ``report["resonant"]`` lists the sectors
    whose closed form is singular at ``run.ramp.nu``; those are covered by
    the numeric route only. The saddle section runs for ``n <= 3`` sites and
    every ``N+`` from 1 to ``n`` (the others follow by mirror symmetry).
    """
    ramp = run.ramp
    times = run.sample_times()
    rho = initial_density(run)
    if pairs is None:
        two = sorted({lab.sites for lab in run.labels() if lab.n == 2})
        pairs = two or ([(0, 1)] if run.n_spins >= 2 else [])
    report: dict = {"nu": ramp.nu, "sectors": [], "resonant": [], "saddle": []}
    for pair in pairs:
        init = correlator_state(rho, pair)
        for chk in exact_vs_numeric(ramp, pair, init.amplitudes, times, rel_tol=run.integration.rel_tol):
            report["sectors"].append(asdict(chk))
            if chk.resonant:
                report["resonant"].append({"sites": list(pair), "jz": chk.jz, "reason": chk.resonant})
    devs = [s["max_rel_deviation"] for s in report["sectors"] if s["max_rel_deviation"] is not None]
    report["max_rel_deviation"] = max(devs) if devs else None
    n_saddle = min(run.n_spins, 3) if saddle_sites is None else saddle_sites
    if n_saddle >= 2 and ramp.nu >= 2:
        reps = saddle_comparison(ramp, n_saddle, range(1, n_saddle + 1), times,
                                 rel_tol=run.integration.rel_tol)
        for rep in reps:
            report["saddle"].append({
                "n": n_saddle, "n_plus": rep.n_plus, "settled": rep.settled,
                "slots": [asdict(s) for s in rep.slots],
            })
    return report
