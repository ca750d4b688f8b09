"""Named initial states for the spin ensemble, and loaders for user-supplied ones.

Every preset returns a :class:`~rampdiss.lindblad.DensityState` for ``N``
spin-1/2 particles at ``t_init``. :func:`correlator_state` turns any of them
into the spin-1 amplitude vector that drives the correlator route.

Built-in presets
----------------
``maximally-mixed``
    ``I / 2^N``; every correlator vanishes.
``spin-coherent``
    Product of ``exp(theta/2 (e^{i phi} s^- - e^{-i phi} s^+)) |down>`` on every spin.
``sector-sum``
    ``(1 - w) I / 2^N + w |psi><psi|`` with ``psi`` the normalized sum of
    the normalized collective raisings ``(sum_j s^+_j)^k |down ... down>``,
    ``k = 0..N`` (or a single ``k`` when ``n_plus`` is given). ``w = 1/2``.
``random``
    ``M M^dag / tr(M M^dag)`` for a complex Gaussian ``M`` drawn from ``seed``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import ConfigError, DimensionError
from .lindblad import DensityState, correlator_tensor
from .rg import CorrelatorState, tensor_to_amplitudes
from .spin_algebra import pauli, site_operator

__all__ = [
    "PRESETS",
    "spin_coherent",
    "sector_sum",
    "random_density",
    "maximally_mixed",
    "build_initial_state",
    "load_density_json",
    "save_density_json",
    "correlator_state",
]

PRESETS = {
    "maximally-mixed": "identity over 2^N; all correlators vanish",
    "spin-coherent": "product of spin-coherent states (parameters theta, phi; defaults 1.0, 0.5)",
    "sector-sum": "half identity, half the normalized sum of collective raisings of the all-down state",
    "random": "M M^dag / tr for complex Gaussian M (parameter seed)",
}

_DOWN = np.array([0.0, 1.0], dtype=np.complex128)


def maximally_mixed(n_spins: int, t_init: float) -> DensityState:
    return DensityState.maximally_mixed(n_spins, t_init)


def spin_coherent(n_spins: int, t_init: float, theta: float = 1.0, phi: float = 0.5) -> DensityState:
    """Tensor product of ``exp(theta/2 e^{i phi} s^- - theta/2 e^{-i phi} s^+) |-1/2>``."""
    sp = pauli("plus").to_dense()
    sm = pauli("minus").to_dense()
    rot = expm(0.5 * theta * np.exp(1j * phi) * sm - 0.5 * theta * np.exp(-1j * phi) * sp)
    single = rot @ _DOWN
    psi = np.ones(1, dtype=np.complex128)
    for _ in range(n_spins):
        psi = np.kron(psi, single)
    return DensityState.from_matrix(np.outer(psi, psi.conj()), t_init)


def sector_sum(n_spins: int, t_init: float, weight: float = 0.5,
               n_plus: int | None = None) -> DensityState:
    """Mixture of the identity with collective raisings of the all-down state.

    Parameters
    ----------
    weight : float
        Pure-state weight ``w`` in ``(0, 1]``.
    n_plus : int, optional
        Keep a single raising order instead of summing ``0..N``.
    """
    if not 0.0 < weight <= 1.0:
        raise ConfigError(f"sector-sum weight must lie in (0, 1], got {weight}")
    if n_plus is not None and not 0 <= n_plus <= n_spins:
        raise ConfigError(f"n_plus must lie in [0, {n_spins}] for spin-1/2 raisings, got {n_plus}")
    raise_op = None
    for j in range(n_spins):
        term = site_operator(pauli("plus"), j, n_spins)
        raise_op = term if raise_op is None else raise_op + term
    vec = np.zeros(2 ** n_spins, dtype=np.complex128)
    vec[-1] = 1.0
    psi = np.zeros_like(vec)
    for k in range(n_spins + 1):
        if n_plus is None or k == n_plus:
            psi += vec / np.linalg.norm(vec)
        vec = raise_op @ vec
    psi /= np.linalg.norm(psi)
    d = 2 ** n_spins
    rho = (1.0 - weight) * np.eye(d) / d + weight * np.outer(psi, psi.conj())
    return DensityState.from_matrix(rho, t_init)


def random_density(n_spins: int, t_init: float, seed: int = 0) -> DensityState:
    """``M M^dag / tr(M M^dag)`` with ``M`` complex Gaussian; positive and unit trace."""
    rng = np.random.default_rng(seed)
    d = 2 ** n_spins
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = m @ m.conj().T
    return DensityState.from_matrix(rho / np.trace(rho).real, t_init)


def build_initial_state(name: str, n_spins: int, t_init: float, **params) -> DensityState:
    """Instantiate a preset by name; unknown names or parameters raise :class:`ConfigError`."""
    builders = {
        "maximally-mixed": (maximally_mixed, set()),
        "spin-coherent": (spin_coherent, {"theta", "phi"}),
        "sector-sum": (sector_sum, {"weight", "n_plus"}),
        "random": (random_density, {"seed"}),
    }
    if name not in builders:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(builders))}")
    fn, allowed = builders[name]
    extra = set(params) - allowed
    if extra:
        raise ConfigError(f"preset {name!r} does not take parameter(s) {sorted(extra)}")
    if n_spins < 1:
        raise ConfigError("need at least one spin")
    return fn(n_spins, t_init, **params)


def load_density_json(path: str | Path, t_init: float) -> DensityState:
    """Read a dense density matrix stored as rows of ``[re, im]`` pairs.

    The document is either the nested list itself or an object with a
    ``"matrix"`` key. The matrix must be Hermitian with unit trace and no
    eigenvalue below ``-1e-8``.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read density matrix from {path}: {exc}") from exc
    rows = doc.get("matrix") if isinstance(doc, dict) else doc
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: matrix entries must be [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError(f"{path}: expected a square array of [re, im] pairs, got shape {arr.shape}")
    rho = arr[..., 0] + 1j * arr[..., 1]
    try:
        state = DensityState.from_matrix(rho, t_init)
    except DimensionError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        state.check()
    except ValueError as exc:
        raise ConfigError(f"{path}: not a valid density matrix ({exc})") from exc
    return state


def save_density_json(state: DensityState, path: str | Path) -> None:
    rho = state.matrix()
    rows = [[[float(z.real), float(z.imag)] for z in row] for row in rho]
    Path(path).write_text(json.dumps({"matrix": rows}) + "\n")


def correlator_state(state: DensityState, sites: Sequence[int]) -> CorrelatorState:
    """Lab-frame spin-1 amplitudes of all correlators on ``sites`` at the state's time."""
    sites = tuple(sorted(int(s) for s in sites))
    amps = tensor_to_amplitudes(correlator_tensor(state, sites))
    return CorrelatorState(amps, state.time, "lab", sites)
