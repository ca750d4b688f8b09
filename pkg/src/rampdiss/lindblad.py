"""Vectorized Lindblad dynamics of spin-1/2 ensembles with 1/t-ramped dissipation.

Model
-----
``N`` spins with Zeeman fields ``eps_j`` evolve under

    d rho/dt = -i [H, rho] + sum_{a=+,-} D[L_a] rho,
    H = sum_j 2 eps_j s^z_j,   L_pm = sqrt(g(t)) sum_j s^pm_j,   g(t) = 1/(nu t),

with ``D[L] rho = L rho L^dag - {L^dag L, rho}/2``. The dephasing channel is
present in the configuration (``g_z``) but fixed to zero.

Vectorization is row-major, ``vec(rho) = rho.reshape(-1)``, for which
``vec(A rho B) = (A kron B^T) vec(rho)``.

Correlators
-----------
A correlator label assigns ``z``, ``plus`` or ``minus`` to a set of sites. Its
value is ``tr(rho O_1 ... O_N)`` with ``O = sigma^z`` for ``z``, ``O = 2 sigma^pm``
for the ladder indices and the identity on unassigned sites. The factor two
makes ``c_pm = c_x pm i c_y``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DimensionError
from .ode import IntegrationSpec, RampGenerator, solve
from .spin_algebra import SparseComplexOperator, identity, pauli, site_operator

__all__ = [
    "RampConfig",
    "DensityState",
    "CorrelatorLabel",
    "LindbladGenerator",
    "build_superoperator",
    "evolve_density",
    "extract_correlator",
    "correlator_tensor",
    "density_from_correlators",
    "INDEX_NAMES",
]

INDEX_NAMES = ("z", "plus", "minus")
_INDEX_ALIASES = {"z": "z", "+": "plus", "plus": "plus", "p": "plus",
                  "-": "minus", "minus": "minus", "m": "minus"}
_SYMBOL = {"z": "z", "plus": "+", "minus": "-"}


@dataclass(frozen=True)
class RampConfig:
    """Physical parameters of a ramp.

    Parameters
    ----------
    nu : float
        Ramp rate, ``g(t) = 1/(nu t)``; must be positive.
    epsilons : sequence of float
        Zeeman fields, strictly increasing.
    t_init, t_final : float
        Time window, ``0 < t_init < t_final``.
    g_z : float
        Dephasing rate; kept for completeness and required to be zero.
    """

    nu: float
    epsilons: tuple[float, ...]
    t_init: float = 1e-5
    t_final: float = 1e2
    g_z: float = 0.0

    def __post_init__(self):
        try:
            nu = float(self.nu)
            eps = tuple(float(e) for e in self.epsilons)
            t0 = float(self.t_init)
            t1 = float(self.t_final)
            gz = float(self.g_z)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"non-numeric ramp parameter: {exc}") from exc
        if not (nu > 0 and math.isfinite(nu)):
            raise ConfigError(f"nu must be positive and finite, got {self.nu!r}")
        if not eps:
            raise ConfigError("at least one Zeeman field is required")
        if not all(math.isfinite(e) for e in eps):
            raise ConfigError("Zeeman fields must be finite")
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("Zeeman fields must be strictly increasing")
        if not (t0 > 0 and math.isfinite(t0)):
            raise ConfigError("t_init must be positive (g = 1/(nu t) is singular at t = 0)")
        if not (t1 > t0 and math.isfinite(t1)):
            raise ConfigError("t_final must exceed t_init")
        if gz != 0.0:
            raise ConfigError("g_z is fixed to 0 in this model")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "t_init", t0)
        object.__setattr__(self, "t_final", t1)
        object.__setattr__(self, "g_z", 0.0)

    @property
    def n_spins(self) -> int:
        return len(self.epsilons)

    def g(self, t: float) -> float:
        """Dissipation rate ``1/(nu t)``."""
        return 1.0 / (self.nu * t)

    def with_nu(self, nu: float) -> "RampConfig":
        return RampConfig(nu, self.epsilons, self.t_init, self.t_final, self.g_z)


@dataclass(frozen=True)
class CorrelatorLabel:
    """Assignment of correlator indices to sites.

    ``assignments`` maps a site index to one of ``z``, ``plus`` or ``minus``
    (the symbols ``+`` and ``-`` are accepted as well).
    """

    assignments: Mapping[int, str]

    def __post_init__(self):
        items = {}
        for site, idx in dict(self.assignments).items():
            s = int(site)
            key = _INDEX_ALIASES.get(str(idx).lower())
            if key is None:
                raise ConfigError(f"unknown correlator index {idx!r}")
            if s < 0:
                raise DimensionError(f"negative site index {s}")
            items[s] = key
        if not items:
            raise ConfigError("a correlator label needs at least one site")
        object.__setattr__(self, "assignments", tuple(sorted(items.items())))

    @classmethod
    def from_string(cls, text: str, sites: Sequence[int] | None = None) -> "CorrelatorLabel":
        """Parse compact forms.

        ``"z+-"`` assigns to sites ``0, 1, 2`` (or to ``sites`` if given);
        ``"z0 +3 -5"`` names the sites explicitly, and the printed form
        ``"c[z0 +3 -5]"`` parses back to the same label.
        """
        text = text.strip()
        if text.startswith("c[") and text.endswith("]"):
            text = text[2:-1]
        if " " in text or any(ch.isdigit() for ch in text):
            out = {}
            for token in text.replace(",", " ").split():
                sym, num = token[0], token[1:]
                if not num.isdigit():
                    raise ConfigError(f"bad label token {token!r}; expected an index symbol and a site, as in 'z0'")
                out[int(num)] = sym
            return cls(out)
        symbols = list(text)
        if sites is None:
            sites = range(len(symbols))
        if len(symbols) != len(sites):
            raise ConfigError(f"label {text!r} does not match {len(sites)} sites")
        return cls(dict(zip(sites, symbols)))

    @classmethod
    def from_indices(cls, sites: Sequence[int], indices: Sequence[str]) -> "CorrelatorLabel":
        return cls(dict(zip(sites, indices)))

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.assignments)

    @property
    def indices(self) -> tuple[str, ...]:
        return tuple(i for _, i in self.assignments)

    @property
    def n(self) -> int:
        return len(self.assignments)

    @property
    def n1(self) -> int:
        return sum(1 for _, i in self.assignments if i == "z")

    def conjugate(self) -> "CorrelatorLabel":
        """Label with every ``plus`` and ``minus`` exchanged."""
        swap = {"z": "z", "plus": "minus", "minus": "plus"}
        return CorrelatorLabel({s: swap[i] for s, i in self.assignments})

    def symbol(self) -> str:
        return "".join(_SYMBOL[i] for i in self.indices)

    def __str__(self) -> str:
        return "c[" + " ".join(f"{_SYMBOL[i]}{s}" for s, i in self.assignments) + "]"


@dataclass
class DensityState:
    """Density matrix in row-major vectorized form at a given time."""

    amplitudes: np.ndarray
    time: float

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        size = self.amplitudes.size
        n = int(round(math.log(size, 4))) if size > 0 else -1
        if n < 1 or 4 ** n != size:
            raise DimensionError(f"vectorized density matrix length {size} is not 4^N")

    @classmethod
    def from_matrix(cls, rho, time: float) -> "DensityState":
        rho = np.asarray(rho, dtype=np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionError("density matrix must be square")
        return cls(rho.reshape(-1), time)

    @classmethod
    def maximally_mixed(cls, n_spins: int, time: float) -> "DensityState":
        d = 2 ** n_spins
        return cls.from_matrix(np.eye(d) / d, time)

    @property
    def n_spins(self) -> int:
        return int(round(math.log(self.amplitudes.size, 4)))

    @property
    def dim(self) -> int:
        return 2 ** self.n_spins

    def matrix(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dim, self.dim)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix()))

    def hermiticity_error(self) -> float:
        m = self.matrix()
        return float(np.max(np.abs(m - m.conj().T)))

    def min_eigenvalue(self) -> float:
        m = self.matrix()
        return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())

    def check(self, hermitian_tol: float = 1e-10, trace_tol: float = 1e-10,
              positivity_tol: float = 1e-8) -> None:
        """Raise ``ValueError`` if the density-matrix invariants are violated."""
        if self.hermiticity_error() > hermitian_tol:
            raise ValueError(f"state is not Hermitian (error {self.hermiticity_error():.3g})")
        if abs(self.trace() - 1) > trace_tol:
            raise ValueError(f"trace {self.trace()} differs from 1")
        if self.min_eigenvalue() < -positivity_tol:
            raise ValueError(f"negative eigenvalue {self.min_eigenvalue():.3g}")


def _super_left(a: SparseComplexOperator) -> SparseComplexOperator:
    return a.kron(identity(a.dim_rows))


def _super_right(b: SparseComplexOperator) -> SparseComplexOperator:
    return identity(b.dim_rows).kron(b.transpose())


def _dissipator(L: SparseComplexOperator) -> SparseComplexOperator:
    LdL = L.adjoint() @ L
    return L.kron(L.conj()) - 0.5 * _super_left(LdL) - 0.5 * _super_right(LdL)


class LindbladGenerator:
    """Cached pieces of the vectorized generator ``G(t) = G_ham + G_diss/(nu t)``."""

    def __init__(self, config: RampConfig):
        self.config = config
        n = config.n_spins
        self.n_spins = n
        H = None
        for j, eps in enumerate(config.epsilons):
            term = (2.0 * eps) * site_operator(0.5 * pauli("z"), j, n)
            H = term if H is None else H + term
        self.hamiltonian = H
        self.G_ham = -1j * (_super_left(H) - _super_right(H))
        total = {}
        for key in ("plus", "minus"):
            acc = None
            for j in range(n):
                term = site_operator(pauli(key), j, n)
                acc = term if acc is None else acc + term
            total[key] = acc
        self.G_diss = _dissipator(total["plus"]) + _dissipator(total["minus"])

    def at(self, time: float) -> SparseComplexOperator:
        return self.G_ham + self.config.g(time) * self.G_diss

    @cached_property
    def ramp(self) -> RampGenerator:
        return RampGenerator(self.G_ham, self.G_diss, self.config.nu)


def build_superoperator(config: RampConfig, n_spins: int, time: float) -> SparseComplexOperator:
    """Return ``G(t)`` with ``d vec(rho)/dt = G(t) vec(rho)``."""
    if n_spins != config.n_spins:
        raise DimensionError(f"config has {config.n_spins} fields but n_spins = {n_spins}")
    if time < config.t_init:
        raise ValueError(f"time {time} precedes t_init {config.t_init}")
    return _generator(config).at(time)


_GEN_CACHE: dict[RampConfig, LindbladGenerator] = {}


def _generator(config: RampConfig) -> LindbladGenerator:
    gen = _GEN_CACHE.get(config)
    if gen is None:
        gen = LindbladGenerator(config)
        if len(_GEN_CACHE) > 64:
            _GEN_CACHE.clear()
        _GEN_CACHE[config] = gen
    return gen


def evolve_density(config: RampConfig, initial: DensityState, sample_times: Iterable[float],
                   rel_tol: float = 1e-10, abs_tol: float = 1e-13,
                   method: str = "dop853", max_steps: int = 2_000_000) -> list[DensityState]:
    """Integrate the master equation from ``initial.time = t_init``.

    Returns one :class:`DensityState` per sample time. Integrator failures
    raise :class:`rampdiss.errors.IntegrationError` carrying the failing time.
    """
    times = np.asarray(list(sample_times), dtype=float)
    if initial.n_spins != config.n_spins:
        raise DimensionError("initial state and config disagree on the number of spins")
    if not math.isclose(initial.time, config.t_init, rel_tol=1e-12):
        raise ValueError("initial state must be given at t_init")
    if times.size == 0:
        return []
    if np.any(np.diff(times) < 0):
        raise ValueError("sample_times must be sorted")
    if times[0] < config.t_init * (1 - 1e-12):
        raise ValueError("sample times must not precede t_init")
    gen = _generator(config)
    spec = IntegrationSpec((config.t_init, max(float(times[-1]), config.t_init)), rel_tol=rel_tol,
                           abs_tol=abs_tol, dense_samples=np.maximum(times, config.t_init),
                           method=method, max_steps=max_steps)
    res = solve(gen.ramp, initial.amplitudes, spec)
    return [DensityState(v, float(t)) for t, v in zip(times, res.states)]


# ---------------------------------------------------------------------- correlators

_SIGMA = {
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "plus": 2 * np.array([[0, 1], [0, 0]], dtype=np.complex128),
    "minus": 2 * np.array([[0, 0], [1, 0]], dtype=np.complex128),
}
# expansion operators: rho = 2^-N (I + sum_label c_label prod_j B_j)
_EXPANSION = {
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "plus": np.array([[0, 0], [1, 0]], dtype=np.complex128),
    "minus": np.array([[0, 1], [0, 0]], dtype=np.complex128),
}


def _contract(rho_tensor: np.ndarray, n: int, factors: list) -> np.ndarray:
    """Contract ``rho[a_1..a_N, b_1..b_N]`` with one factor per site.

    A factor is either a 2x2 matrix ``O`` (contributing ``O[b, a]``, i.e. a trace
    against ``O``) or a stack ``T[k, b, a]`` that leaves a free output axis ``k``.
    """
    letters = "abcdefghijklmnopqrstuvwxyz"
    upper = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row, col = letters[:n], letters[n:2 * n]
    subs = [row + col]
    operands = [rho_tensor]
    out = ""
    for j, fac in enumerate(factors):
        if fac.ndim == 2:
            subs.append(col[j] + row[j])
        else:
            k = upper[len(out)]
            out += k
            subs.append(k + col[j] + row[j])
        operands.append(fac)
    return np.einsum(",".join(subs) + "->" + out, *operands, optimize=True)


def extract_correlator(state: DensityState, label: CorrelatorLabel) -> complex:
    """Return ``tr(rho O_1 ... O_N)`` for the given label."""
    n = state.n_spins
    for s in label.sites:
        if s >= n:
            raise DimensionError(f"site {s} out of range for {n} spins")
    assign = dict(label.assignments)
    factors = [(_SIGMA[assign[j]] if j in assign else np.eye(2)) for j in range(n)]
    return complex(_contract(state.matrix().reshape((2,) * (2 * n)), n, factors))


_STACK = np.stack([_SIGMA["minus"], _SIGMA["z"], _SIGMA["plus"]])


def correlator_tensor(state: DensityState, sites: Sequence[int]) -> np.ndarray:
    """All ``3^n`` correlators on ``sites`` at once.

    The result has one axis per listed site (in increasing site order) with
    index order ``(minus, z, plus)``, which lines up with the spin-1 basis
    order ``(+1, 0, -1)`` used by :mod:`rampdiss.rg`. Unlisted sites carry
    the identity.
    """
    n = state.n_spins
    sites = sorted(int(s) for s in sites)
    if len(set(sites)) != len(sites):
        raise DimensionError("duplicate sites")
    for s in sites:
        if not 0 <= s < n:
            raise DimensionError(f"site {s} out of range for {n} spins")
    factors = [(_STACK if j in sites else np.eye(2)) for j in range(n)]
    return _contract(state.matrix().reshape((2,) * (2 * n)), n, factors)


def density_from_correlators(n_spins: int, correlators: Mapping[CorrelatorLabel, complex],
                             time: float, weight: float = 1.0) -> DensityState:
    """Assemble ``rho = 2^-N (I + weight * sum_label c_label prod_j B_j)``.

    ``B = sigma^z`` for ``z``, ``B = sigma^-`` for ``plus`` and ``B = sigma^+`` for
    ``minus``; this inverts :func:`extract_correlator`.
    """
    d = 2 ** n_spins
    rho = np.eye(d, dtype=np.complex128)
    for label, value in correlators.items():
        if value == 0:
            continue
        assign = dict(label.assignments)
        op = np.ones((1, 1), dtype=np.complex128)
        for j in range(n_spins):
            op = np.kron(op, _EXPANSION[assign[j]] if j in assign else np.eye(2))
        rho = rho + weight * value * op
    return DensityState.from_matrix(rho / d, time)


def all_labels(sites: Sequence[int]) -> list[CorrelatorLabel]:
    """Every label with an index on each of ``sites`` (``3^n`` of them)."""
    return [CorrelatorLabel(dict(zip(sites, combo)))
            for combo in itertools.product(("minus", "z", "plus"), repeat=len(sites))]
