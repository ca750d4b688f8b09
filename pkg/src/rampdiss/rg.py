"""Spin-1 Richardson-Gaudin generator for n-point correlators.

The ``3^n`` correlators supported on ``n`` sites evolve linearly,
``dC/dt = L(t) C``, with

    L(t) = -i sum_j (i g(t) + 2 eps_j) S^z_j - g(t) sum_{j,k} S^+_j S^-_k,

written in the product basis of spin-1 states ordered ``(+1, 0, -1)`` per
site. Splitting ``L(t) = A0 + g(t) A1`` gives a diagonal Zeeman part
``A0 = -2i sum_j eps_j S^z_j`` and ``A1 = J^z - sum_{j,k} S^+_j S^-_k`` in the
lab frame. The co-moving frame drops the ``J^z`` piece.

Correlator translation
----------------------
With the correlator convention of :mod:`rampdiss.lindblad` (``c_pm`` built
from ``2 sigma^pm``), a basis amplitude is the product of per-site weights
times the correlator value:

========  =========  ===========
state     index      weight
========  =========  ===========
``+1``    ``minus``  ``-1/sqrt 2``
``0``     ``z``      ``1``
``-1``    ``plus``   ``+1/sqrt 2``
========  =========  ===========

This single table (:data:`SITE_WEIGHTS`) drives both translation directions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, FrameError
from .lindblad import CorrelatorLabel, RampConfig
from .ode import IntegrationSpec, RampGenerator, solve
from .spin_algebra import SparseComplexOperator, site_operator, spin1

__all__ = [
    "SITE_WEIGHTS",
    "BASIS_INDEX",
    "CorrelatorState",
    "SectorLabel",
    "RGGenerator",
    "build_rg_generator",
    "comoving_transform",
    "label_to_state",
    "state_to_label",
    "sector_project",
    "sector_indices",
    "basis_magnetization",
    "basis_states",
    "evolve_correlators",
    "pseudo_vacuum_raised",
    "tensor_to_amplitudes",
    "amplitudes_to_tensor",
    "weight_vector",
    "slot_of_label",
]

#: correlator index attached to each spin-1 basis slot (+1, 0, -1)
BASIS_INDEX = ("minus", "z", "plus")
#: amplitude weight per slot; amplitude = prod(weights) * correlator value
SITE_WEIGHTS = np.array([-1.0 / math.sqrt(2.0), 1.0, 1.0 / math.sqrt(2.0)])
_SZ = np.array([1, 0, -1])
_SLOT_OF_INDEX = {name: k for k, name in enumerate(BASIS_INDEX)}

FRAMES = ("lab", "comoving")


@dataclass
class CorrelatorState:
    """Amplitudes of the ``3^n`` correlators of ``n`` sites.

    Parameters
    ----------
    amplitudes : array of complex, length ``3^n``
        Product-basis amplitudes, site 0 slowest, per-site order ``(+1, 0, -1)``.
    time : float
    frame : {"lab", "comoving"}
    sites : tuple of int, optional
        Physical site indices carried by the amplitudes (defaults to ``0..n-1``).
    """

    amplitudes: np.ndarray
    time: float
    frame: str = "lab"
    sites: tuple[int, ...] | None = None

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        size = self.amplitudes.size
        n = 0
        while 3 ** n < size:
            n += 1
        if size < 3 or 3 ** n != size:
            raise DimensionError(f"amplitude vector of length {size} is not 3^n with n >= 1")
        if self.frame not in FRAMES:
            raise FrameError(f"unknown frame {self.frame!r}")
        if self.sites is None:
            self.sites = tuple(range(n))
        else:
            self.sites = tuple(int(s) for s in self.sites)
            if len(self.sites) != n:
                raise DimensionError("number of sites does not match amplitude length")

    @property
    def n(self) -> int:
        return len(self.sites)


@dataclass(frozen=True)
class SectorLabel:
    """Total magnetization sector ``J^z`` of an ``n``-site spin-1 chain."""

    n: int
    jz: int

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("n must be positive")
        if abs(self.jz) > self.n:
            raise DimensionError(f"|jz| = {abs(self.jz)} exceeds n = {self.n}")

    @property
    def n_plus(self) -> int:
        """Number of raising operations from the all ``-1`` state."""
        return self.n + self.jz

    @classmethod
    def from_n_plus(cls, n: int, n_plus: int) -> "SectorLabel":
        return cls(n, n_plus - n)


@lru_cache(maxsize=None)
def basis_states(n: int) -> np.ndarray:
    """``(3^n, n)`` integer array of per-site ``S^z`` values for every slot."""
    return np.array(list(itertools.product((1, 0, -1), repeat=n)), dtype=np.int64).reshape(-1, n)


@lru_cache(maxsize=None)
def basis_magnetization(n: int) -> np.ndarray:
    """``J^z`` of every product basis slot."""
    return basis_states(n).sum(axis=1)


def sector_indices(n: int, jz: int) -> np.ndarray:
    """Slots of the product basis with total magnetization ``jz`` (increasing order)."""
    SectorLabel(n, jz)
    return np.flatnonzero(basis_magnetization(n) == jz)


@lru_cache(maxsize=None)
def weight_vector(n: int) -> np.ndarray:
    """Read-only product weights: ``amplitude[slot] = weight_vector(n)[slot] * correlator``."""
    w = SITE_WEIGHTS
    out = np.ones(1)
    for _ in range(n):
        out = np.kron(out, w)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------- generator

@lru_cache(maxsize=32)
def _pair_hopping(n: int) -> SparseComplexOperator:
    """``sum_{j,k} S^+_j S^-_k`` on ``n`` spin-1 sites (including ``j = k``)."""
    plus = [site_operator(spin1("plus"), j, n) for j in range(n)]
    minus = [site_operator(spin1("minus"), j, n) for j in range(n)]
    Sp = plus[0]
    Sm = minus[0]
    for j in range(1, n):
        Sp = Sp + plus[j]
        Sm = Sm + minus[j]
    return Sp @ Sm


class RGGenerator:
    """Cached pieces ``A0`` (diagonal) and ``A1`` of ``L(t) = A0 + A1/(nu t)``."""

    def __init__(self, config: RampConfig, sites: Sequence[int], include_ig_term: bool = True):
        sites = tuple(int(s) for s in sites)
        if not sites:
            raise DimensionError("empty site list")
        if len(set(sites)) != len(sites):
            raise DimensionError(f"duplicate sites in {sites}")
        for s in sites:
            if not 0 <= s < config.n_spins:
                raise DimensionError(f"site {s} has no Zeeman field in the config")
        self.config = config
        self.sites = sites
        self.n = len(sites)
        self.include_ig_term = bool(include_ig_term)
        eps = np.array([config.epsilons[s] for s in sites])
        states = basis_states(self.n)
        self.a0_diag = (-2j * (states @ eps)).astype(np.complex128)
        hop = _pair_hopping(self.n)
        if self.include_ig_term:
            jz = SparseComplexOperator.diagonal(basis_magnetization(self.n).astype(float))
            self.A1 = jz - hop
        else:
            self.A1 = -1.0 * hop
        self.A0 = SparseComplexOperator.diagonal(self.a0_diag)

    def at(self, time: float) -> SparseComplexOperator:
        return self.A0 + self.config.g(time) * self.A1

    def ramp(self, index: np.ndarray | None = None) -> RampGenerator:
        """Right-hand side for the ODE engine, optionally restricted to a slot subset."""
        if index is None:
            return RampGenerator(self.a0_diag, self.A1, self.config.nu)
        index = np.asarray(index)
        block = self.A1.csr[index][:, index]
        return RampGenerator(self.a0_diag[index], block, self.config.nu)


def build_rg_generator(config: RampConfig, sites: Sequence[int], time: float,
                       include_ig_term: bool = True) -> SparseComplexOperator:
    """Return ``L(t)`` on ``sites``; ``include_ig_term=False`` gives the co-moving form."""
    if time < config.t_init:
        raise ValueError(f"time {time} precedes t_init {config.t_init}")
    return RGGenerator(config, sites, include_ig_term).at(time)


def sector_project(generator: SparseComplexOperator, n: int,
                   sector: SectorLabel | int) -> tuple[SparseComplexOperator, np.ndarray]:
    """Restrict a ``3^n`` generator to one magnetization sector.

    Returns the block and the slot indices of its rows in the full basis.
    """
    if generator.shape != (3 ** n, 3 ** n):
        raise DimensionError(f"generator shape {generator.shape} is not 3^{n} square")
    jz = sector.jz if isinstance(sector, SectorLabel) else int(sector)
    idx = sector_indices(n, jz)
    return generator.submatrix(idx), idx


# ---------------------------------------------------------------------- frames

def comoving_transform(state: CorrelatorState, config: RampConfig, direction: str) -> CorrelatorState:
    """Switch between the lab and co-moving frames.

    The co-moving amplitudes are ``C_co = (t/t_init)^(-J^z/nu) C_lab``, which
    removes the ``g(t) J^z`` term from the generator. ``direction`` is
    ``"to_comoving"`` or ``"to_lab"``.
    """
    if direction == "to_comoving":
        if state.frame != "lab":
            raise FrameError("to_comoving expects a lab-frame state")
        sign, frame = -1.0, "comoving"
    elif direction == "to_lab":
        if state.frame != "comoving":
            raise FrameError("to_lab expects a co-moving state")
        sign, frame = 1.0, "lab"
    else:
        raise ValueError(f"unknown direction {direction!r}")
    jz = basis_magnetization(state.n)
    log_ratio = math.log(state.time / config.t_init)
    factor = np.exp(sign * jz * log_ratio / config.nu)
    return replace(state, amplitudes=state.amplitudes * factor, frame=frame)


# ---------------------------------------------------------------------- translation

def tensor_to_amplitudes(tensor: np.ndarray) -> np.ndarray:
    """Weighted flattening of a ``(3,)*n`` correlator tensor in ``(minus, z, plus)`` order."""
    tensor = np.asarray(tensor, dtype=np.complex128)
    return tensor.reshape(-1) * weight_vector(tensor.ndim)


def amplitudes_to_tensor(amplitudes: np.ndarray) -> np.ndarray:
    amplitudes = np.asarray(amplitudes, dtype=np.complex128)
    n = round(math.log(amplitudes.size, 3))
    return (amplitudes / weight_vector(n)).reshape((3,) * n)


def slot_of_label(label: CorrelatorLabel, sites: Sequence[int]) -> int:
    """Position of ``label`` in the ``3^n`` amplitude vector of ``sites``."""
    assign = dict(label.assignments)
    slot = 0
    for s in sites:
        slot = 3 * slot + _SLOT_OF_INDEX[assign[s]]
    return slot


def label_to_state(correlator_values: Mapping[CorrelatorLabel, complex], time: float = 0.0,
                   frame: str = "lab") -> CorrelatorState:
    """Place correlator values into the spin-1 product basis.

    All labels must cover the same set of sites; missing patterns get amplitude 0.
    """
    labels = list(correlator_values)
    if not labels:
        raise ValueError("no correlator values given")
    sites = labels[0].sites
    for lab in labels[1:]:
        if lab.sites != sites:
            raise DimensionError(f"inconsistent site sets {sites} and {lab.sites}")
    n = len(sites)
    amps = np.zeros(3 ** n, dtype=np.complex128)
    weights = weight_vector(n)
    for lab, value in correlator_values.items():
        slot = slot_of_label(lab, sites)
        amps[slot] = weights[slot] * complex(value)
    return CorrelatorState(amps, time, frame, tuple(sites))


def state_to_label(state: CorrelatorState) -> dict[CorrelatorLabel, complex]:
    """Inverse of :func:`label_to_state` (every one of the ``3^n`` labels is returned)."""
    n = state.n
    weights = weight_vector(n)
    out = {}
    for slot, combo in enumerate(itertools.product(BASIS_INDEX, repeat=n)):
        out[CorrelatorLabel(dict(zip(state.sites, combo)))] = complex(state.amplitudes[slot] / weights[slot])
    return out


def pseudo_vacuum_raised(n: int, n_plus: int) -> np.ndarray:
    """Normalized ``(sum_j S^+_j)^{N+} |-1, ..., -1>`` as a ``3^n`` amplitude vector."""
    if not 0 <= n_plus <= 2 * n:
        raise DimensionError(f"n_plus must lie in [0, {2 * n}]")
    vec = np.zeros(3 ** n, dtype=np.complex128)
    vec[-1] = 1.0
    plus = None
    for j in range(n):
        term = site_operator(spin1("plus"), j, n)
        plus = term if plus is None else plus + term
    for _ in range(n_plus):
        vec = plus @ vec
    return vec / np.linalg.norm(vec)


# ---------------------------------------------------------------------- evolution

def evolve_correlators(config: RampConfig, initial: CorrelatorState, sample_times: Iterable[float],
                       sectors: Iterable[int] | None = None, rel_tol: float = 1e-10,
                       abs_tol: float = 1e-13, method: str = "dop853",
                       max_steps: int = 5_000_000, blockwise: bool | None = None) -> list[CorrelatorState]:
    """Evolve correlator amplitudes from ``t_init`` with the block-diagonal RG generator.

    The frame of ``initial`` selects the generator (lab form with the
    ``i g`` term, co-moving form without). Sectors outside ``sectors`` are
    left at zero; by default every sector with nonzero initial weight is evolved.

    ``blockwise=False`` integrates the selected sectors together in one
    solve. The step count is set by the fastest Zeeman frequency either way,
    so a joint solve is cheaper whenever the full space is small. The default
    joins them up to ``3^n = 243``.
    """
    times = np.asarray(list(sample_times), dtype=float)
    if not math.isclose(initial.time, config.t_init, rel_tol=1e-12):
        raise ValueError("initial state must be given at t_init")
    if times.size == 0:
        return []
    if np.any(np.diff(times) < 0) or times[0] < config.t_init * (1 - 1e-12):
        raise ValueError("sample times must be sorted and not precede t_init")
    gen = RGGenerator(config, initial.sites, include_ig_term=(initial.frame == "lab"))
    n = initial.n
    jz_all = basis_magnetization(n)
    if sectors is None:
        sectors = sorted(set(int(j) for j in jz_all[np.abs(initial.amplitudes) > 0]))
    out = np.zeros((times.size, 3 ** n), dtype=np.complex128)
    blocks = [sector_indices(n, jz) for jz in sectors]
    blocks = [idx for idx in blocks if np.any(initial.amplitudes[idx])]
    if blockwise is None:
        blockwise = 3 ** n > 243
    if not blockwise and blocks:
        blocks = [np.sort(np.concatenate(blocks))]
    for idx in blocks:
        y0 = initial.amplitudes[idx]
        spec = IntegrationSpec((config.t_init, max(float(times[-1]), config.t_init)), rel_tol=rel_tol,
                               abs_tol=abs_tol, dense_samples=np.maximum(times, config.t_init),
                               method=method, max_steps=max_steps)
        res = solve(gen.ramp(idx), y0, spec)
        out[:, idx] = res.states
    return [CorrelatorState(v, float(t), initial.frame, initial.sites) for t, v in zip(times, out)]
