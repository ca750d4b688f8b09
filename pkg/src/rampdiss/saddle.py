"""Late-time saddle-point asymptote of the spin-1 correlator dynamics.

Each magnetization sector ``N+`` is a sum over configurations that raise
the sites in ``alpha1`` once and those in ``alpha2`` twice. The saddle
value of the Yang-Yang action for a configuration splits into

* ``gamma``: depends on ``N1 = |alpha1|`` and on ``ln t``;
* ``Lambda``: pairwise logarithms of Zeeman-field differences;
* ``zeta``: per-site Zeeman phases together with the ``theta_k`` logarithms,

plus the sector-wide factor ``exp((i/nu) N+ ln(nu t))``. The dissipative
dynamics corresponds to evaluating everything at ``nu -> -i nu``. In that
mode the ``ln t`` pieces turn into real power laws and the lab-frame
magnitude of each slot scales as ``t^{-(n + N1)/nu}``. Hermitian mode keeps ``nu``
real, and every time dependence apart from the sector factor is then a pure phase.

Logarithms of Zeeman differences always use ``ln|eps_j - eps_k|``. The
branch bookkeeping sits in the explicit ``2 pi j / nu`` site terms of
``zeta``, so no general complex logarithm is taken. Site numbers inside
those terms count from 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError
from .lindblad import RampConfig
from .rg import CorrelatorState

__all__ = [
    "SaddleConfiguration",
    "AsymptoticTerm",
    "enumerate_configs",
    "evaluate_term",
    "assemble_asymptote",
    "asymptote_trajectory",
    "MODES",
]

MODES = ("dissipative", "hermitian")


@dataclass(frozen=True)
class SaddleConfiguration:
    """Sites raised once (``alpha1``) and twice (``alpha2``) on an ``n``-site chain."""

    n: int
    alpha1: frozenset
    alpha2: frozenset

    def __post_init__(self):
        object.__setattr__(self, "alpha1", frozenset(int(i) for i in self.alpha1))
        object.__setattr__(self, "alpha2", frozenset(int(i) for i in self.alpha2))
        if self.alpha1 & self.alpha2:
            raise DimensionError("a site cannot be raised both once and twice")
        for i in self.alpha1 | self.alpha2:
            if not 0 <= i < self.n:
                raise DimensionError(f"site {i} outside 0..{self.n - 1}")

    @property
    def n1(self) -> int:
        return len(self.alpha1)

    @property
    def n2(self) -> int:
        return len(self.alpha2)

    @property
    def n_plus(self) -> int:
        return self.n1 + 2 * self.n2

    @property
    def spins(self) -> tuple[int, ...]:
        """``S^z`` per site: +1 for double, 0 for single raising, -1 otherwise."""
        return tuple(1 if i in self.alpha2 else 0 if i in self.alpha1 else -1 for i in range(self.n))

    @property
    def basis_slot(self) -> int:
        slot = 0
        for sz in self.spins:
            slot = 3 * slot + (1 - sz)
        return slot


@dataclass(frozen=True)
class AsymptoticTerm:
    """One configuration's contribution at a given time.

    ``amplitude`` is the lab-frame value placed at ``basis_slot``; it
    includes the sector factor, the vacuum Zeeman phase and the frame change.
    """

    config: SaddleConfiguration
    time: float
    gamma: complex
    lambda_phase: complex
    zeta: complex
    theta: tuple[complex, ...]
    basis_slot: int
    amplitude: complex


def enumerate_configs(n: int, n_plus: int) -> list[SaddleConfiguration]:
    """All disjoint ``(alpha1, alpha2)`` with ``|alpha1| + 2 |alpha2| = n_plus``."""
    if n < 1:
        raise DimensionError("n must be positive")
    if not 0 <= n_plus <= 2 * n:
        raise DimensionError(f"n_plus must lie in [0, {2 * n}]")
    out = []
    sites = range(n)
    for n2 in range(n_plus // 2 + 1):
        n1 = n_plus - 2 * n2
        if n1 + n2 > n:
            continue
        for a2 in itertools.combinations(sites, n2):
            rest = [s for s in sites if s not in a2]
            for a1 in itertools.combinations(rest, n1):
                out.append(SaddleConfiguration(n, frozenset(a1), frozenset(a2)))
    return out


def _effective_nu(nu: float, mode: str) -> tuple[complex, complex]:
    """``(nu_eff, ln nu_eff)`` with the branch of ``ln(-i nu)`` fixed to ``ln nu - i pi/2``."""
    if mode == "dissipative":
        return -1j * nu, complex(math.log(nu), -0.5 * math.pi)
    if mode == "hermitian":
        return complex(nu), complex(math.log(nu), 0.0)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _log_gaps(eps: np.ndarray) -> np.ndarray:
    diff = np.abs(eps[:, None] - eps[None, :])
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise DimensionError("coincident Zeeman fields make the saddle logarithms singular")
    out = np.log(diff)
    np.fill_diagonal(out, 0.0)
    return out


def evaluate_term(config: SaddleConfiguration, ramp: RampConfig, time: float,
                  sites: Sequence[int] | None = None, mode: str = "dissipative") -> AsymptoticTerm:
    """Evaluate ``gamma``, ``Lambda``, ``theta`` and ``zeta`` for one configuration.

    Parameters
    ----------
    sites : sequence of int, optional
        Physical sites whose Zeeman fields enter (default ``0..n-1``).
    mode : {"dissipative", "hermitian"}
        Whether to apply ``nu -> -i nu``.
    """
    if time <= 0:
        raise ValueError("time must be positive")
    sites = tuple(range(config.n)) if sites is None else tuple(int(s) for s in sites)
    if len(sites) != config.n:
        raise DimensionError("site list does not match the configuration size")
    eps = np.array([ramp.epsilons[s] for s in sites])
    logs = _log_gaps(eps)
    nu_eff, log_nu = _effective_nu(ramp.nu, mode)

    theta = tuple(complex(logs[k].sum() / nu_eff) for k in range(config.n))
    a1 = sorted(config.alpha1)
    a2 = sorted(config.alpha2)
    pair_sum = (2.0 * sum(logs[j, i] for i, j in itertools.combinations(a1, 2))
                + 4.0 * sum(logs[j, i] for i in a1 for j in a2)
                + 8.0 * sum(logs[j, i] for i, j in itertools.combinations(a2, 2)))
    lam = pair_sum / nu_eff
    log_zeta = 0j
    for j in a1:
        log_zeta += -2j * time * eps[j] - 2.0 * math.pi * (j + 1) / nu_eff - 2j * theta[j]
    for k in a2:
        log_zeta += -4j * time * eps[k] - 4.0 * math.pi * (k + 1) / nu_eff - 2j * theta[k]
    zeta = complex(np.exp(log_zeta))
    gamma = -config.n1 * ((math.pi + 2j * (1.0 + log_nu)) / (2.0 * nu_eff)
                          + 1j / nu_eff * math.log(time / 2.0))

    # sector factor exp((i/nu) N+ ln(nu t)) and the Zeeman phase of the all -1 state
    log_sector = 1j / nu_eff * config.n_plus * (log_nu + math.log(time))
    log_vacuum = 2j * time * eps.sum()
    log_comoving = log_sector + log_vacuum - gamma + 1j * lam + log_zeta
    jz = config.n_plus - config.n
    log_frame = jz / ramp.nu * math.log(time / ramp.t_init)
    amplitude = complex(np.exp(log_comoving + log_frame))
    return AsymptoticTerm(config, float(time), complex(gamma), complex(lam), zeta, theta,
                          config.basis_slot, amplitude)


def assemble_asymptote(ramp: RampConfig, n: int, n_plus: int, time: float,
                       sites: Sequence[int] | None = None, mode: str = "dissipative") -> CorrelatorState:
    """Lab-frame asymptotic state of sector ``n_plus`` at ``time``.

    Overall time-independent prefactors are not reconstructed; compare
    against numerics through normalized components or exponents only.
    """
    amps = np.zeros(3 ** n, dtype=np.complex128)
    for cfg in enumerate_configs(n, n_plus):
        term = evaluate_term(cfg, ramp, time, sites, mode)
        amps[term.basis_slot] += term.amplitude
    site_tuple = tuple(range(n)) if sites is None else tuple(sites)
    return CorrelatorState(amps, float(time), "lab", site_tuple)


def asymptote_trajectory(ramp: RampConfig, n: int, n_plus: int, times: Iterable[float],
                         sites: Sequence[int] | None = None, mode: str = "dissipative") -> np.ndarray:
    """Stack of :func:`assemble_asymptote` amplitudes, shape ``(len(times), 3^n)``."""
    return np.array([assemble_asymptote(ramp, n, n_plus, t, sites, mode).amplitudes for t in times])
