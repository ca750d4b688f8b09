"""Closed-form correlator dynamics for one and two sites, and exponent predictions.

Two-site sectors are labelled by total magnetization ``jz`` and work in the
rescaled variables ``tau = (eps_q - eps_p) t`` and ``r = (eps_p + eps_q)/(eps_q - eps_p)``.

* ``jz = +-2``: a single amplitude, ``exp(-i jz (eps_p + eps_q)(t - t0)) (t/t0)^(-2/nu)``.
* ``jz = +-1``: symmetric and antisymmetric combinations of the two slots
  are Bessel combinations of orders ``-1/2 - 2/nu`` and ``1/2 - 2/nu``.
* ``jz = 0``: in the rotated basis ``e1 = -(1, 2, 1)/sqrt 6``,
  ``e2 = (-1, 0, 1)/sqrt 2``, ``e3 = (1, -1, 1)/sqrt 3`` of doubled slot
  amplitudes, the first component is a sum of three ``1F2`` families and the
  other two follow from the equations of motion.

All amplitudes are lab-frame product-basis amplitudes, as in :mod:`rampdiss.rg`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, NoTransitionError, NumericalFailure, ResonantNuError
from .lindblad import CorrelatorLabel, RampConfig
from .rg import SITE_WEIGHTS, SectorLabel, basis_states, sector_indices
from .specfun import bessel_jy, cospi, gamma_fn, hyp1f2, rgamma, sinpi

__all__ = [
    "ExponentPrediction",
    "predict_alpha",
    "alpha_derivative_jump",
    "SectorBoundary",
    "SectorSolution",
    "AsymptoticTerm",
    "AsymptoticForm",
    "solve_n1",
    "solve_n2_sector",
    "solve_n2",
    "sector_generator",
    "sector0_families",
    "resonance_reason",
    "check_resonance",
    "asymptotic_n2",
    "ROTATION_0",
]


# ---------------------------------------------------------------------- exponents

@dataclass(frozen=True)
class ExponentPrediction:
    """Late-time decay exponent ``alpha`` of an ``n``-point correlator with ``n1`` single raisings."""

    n: int
    n1: int
    nu: float
    k: int
    alpha: float


def _branch_alpha(n: int, n1: int, nu: float, k: int) -> float:
    if nu >= 2.0:
        return (n + n1) / nu
    return k * (1.0 - 2.0 / nu) + (n + n1) / nu


def predict_alpha(n: int, n1: int, nu: float) -> ExponentPrediction:
    """Piecewise exponent: ``(n + n1)/nu`` above ``nu = 2``, plus ``k (1 - 2/nu)`` below.

    ``k = floor(n1 / 2)`` counts the pairs of single raisings that can
    merge into a slower channel when dissipation switches off quickly.
    """
    if not 0 <= n1 <= n:
        raise ValueError(f"need 0 <= n1 <= n, got n = {n}, n1 = {n1}")
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    k = n1 // 2
    return ExponentPrediction(n, n1, float(nu), k, _branch_alpha(n, n1, nu, k))


def alpha_derivative_jump(n: int, n1: int) -> tuple[float, float]:
    """``(d alpha/d nu)`` just below and just above ``nu = 2``.

    Raises
    ------
    NoTransitionError
        When ``n1 < 2`` the exponent is ``(n + n1)/nu`` on both sides.
    """
    if not 0 <= n1 <= n:
        raise ValueError(f"need 0 <= n1 <= n, got n = {n}, n1 = {n1}")
    k = n1 // 2
    if k == 0:
        raise NoTransitionError(f"no transition for n1 = {n1}: alpha = {n + n1}/nu on both sides")
    left = (2.0 * k - n - n1) / 4.0
    right = -(n + n1) / 4.0
    return left, right


# ---------------------------------------------------------------------- sector data

#: rows are the rotated basis vectors of sector 0 (doubled slot amplitudes)
ROTATION_0 = np.array([
    [-1.0, -2.0, -1.0],
    [-math.sqrt(3.0), 0.0, math.sqrt(3.0)],
    [math.sqrt(2.0), -math.sqrt(2.0), math.sqrt(2.0)],
]) / math.sqrt(6.0)


@dataclass(frozen=True)
class _Family:
    """One ``1F2`` solution ``c1 = tau^p 1F2(a; b, c; -tau^2)`` of sector 0.

    ``q = p + 6/nu`` and ``r = p - 1 + 2/nu`` are stored exactly so that
    leading terms which cancel analytically are exactly zero.
    """

    p: float
    q: float
    r: float
    a: float
    b: float
    c: float


def sector0_families(nu: float) -> tuple[_Family, _Family, _Family]:
    """The three independent sector-0 solutions for ramp rate ``nu``."""
    return (
        _Family(2.0, 2.0 + 6.0 / nu, 1.0 + 2.0 / nu, (nu + 2) / nu, (3 * nu + 2) / (2 * nu), (2 * nu + 3) / nu),
        _Family(-6.0 / nu, 0.0, -1.0 - 4.0 / nu, -1.0 / nu, (nu - 4) / (2 * nu), -3.0 / nu),
        _Family(1.0 - 2.0 / nu, 1.0 + 4.0 / nu, 0.0, (nu + 2) / (2 * nu), (nu - 2) / (2 * nu), (3 * nu + 4) / (2 * nu)),
    )


def _near_nonpositive_integer(x: float, tol: float) -> bool:
    return x < tol and abs(x - round(x)) < tol


def resonance_reason(nu: float, jz: int = 0, tol: float = 1e-9) -> str | None:
    """Why the closed form of sector ``jz`` is unavailable at ``nu``, or None.

    Only sector 0 has resonances: a lower ``1F2`` parameter that is a
    non-positive integer, unless the series terminates first, signals that
    two families merge into a logarithmic solution.
    """
    if jz != 0:
        return None
    for name, fam in zip("ABC", sector0_families(nu)):
        terminating = _near_nonpositive_integer(fam.a, tol)
        for lower in (fam.b, fam.c):
            if _near_nonpositive_integer(lower, tol):
                if not terminating or round(-fam.a) >= round(-lower):
                    return f"family {name} has lower parameter {lower:.6g}"
    return None


def check_resonance(nu: float, jz: int = 0) -> None:
    reason = resonance_reason(nu, jz)
    if reason is not None:
        raise ResonantNuError(f"sector {jz} closed form is singular: {reason}", nu)


# ---------------------------------------------------------------------- basis functions

_SQ3 = math.sqrt(3.0)
_C2 = _SQ3 / 2j                  # c2 = _C2 * (c1' + 6 c1/(nu tau))
_C3 = -1j * math.sqrt(8.0 / 3.0)  # coupling between c2 and c3


def _family_large(fam: _Family, nu: float, tau: float) -> tuple[np.ndarray, float]:
    """``(c1, c2, c3)`` of one family from contiguous ``1F2`` values, with an error scale."""
    z = -tau * tau
    F0 = hyp1f2(fam.a, fam.b, fam.c, z)
    d1 = fam.a / (fam.b * fam.c)
    F1 = hyp1f2(fam.a + 1, fam.b + 1, fam.c + 1, z) if d1 != 0.0 else None
    d2 = (fam.a + 1) / ((fam.b + 1) * (fam.c + 1)) if F1 is not None else 0.0
    F2 = hyp1f2(fam.a + 2, fam.b + 2, fam.c + 2, z) if d2 != 0.0 else None
    f0 = F0.value
    f1 = F1.value if F1 is not None else 0.0
    f2 = F2.value if F2 is not None else 0.0
    # derivatives with respect to tau
    dF = -2.0 * tau * d1 * f1
    d2F = -2.0 * d1 * f1 + 4.0 * tau * tau * d1 * d2 * f2
    tp = tau ** fam.p
    c1 = tp * f0
    g = fam.q * tp / tau * f0 + tp * dF
    h = fam.q * fam.r * tp / (tau * tau) * f0 + (fam.q + fam.r + 1.0) * tp / tau * dF + tp * d2F
    c2 = _C2 * g
    c3 = (_C2 * h - (2j / _SQ3) * c1) / _C3
    err = tp * (F0.est_error * (1 + abs(fam.q * fam.r) / tau ** 2)
                + (F1.est_error if F1 else 0.0) * abs(d1) * 2 * tau * (1 + abs(fam.q + fam.r + 1))
                + (F2.est_error if F2 else 0.0) * abs(d1 * d2) * 4 * tau * tau)
    return np.array([c1, c2, c3]), err


def _family_small(fam: _Family, nu: float, tau: float, max_terms: int = 400) -> np.ndarray:
    """Termwise series for ``(c1, c2, c3)``; all cancellations are handled coefficientwise."""
    fk = 1.0
    f_prev = 0.0
    c1 = 0.0
    s2 = 0.0
    s3 = 0.0
    pw = 1.0
    for k in range(max_terms):
        if k > 0:
            f_prev = fk
            fk = fk * (fam.a + k - 1) / ((fam.b + k - 1) * (fam.c + k - 1) * k) * (-1.0)
            pw *= tau * tau
        c1 += fk * pw
        s2 += (fam.q + 2 * k) * fk * pw
        # coefficient of tau^(p + 2k - 2) in C2 (g' + 2g/(nu tau)) - (2i/sqrt3) c1
        s3 += (_C2 * (fam.q + 2 * k) * (fam.r + 2 * k) * fk - (2j / _SQ3) * f_prev) * pw
        if k > 3 and abs(fk) * pw < 1e-18 * (abs(c1) + abs(s2) + abs(s3)):
            break
        if fk == 0.0 and f_prev == 0.0:
            break
    base = tau ** fam.p
    return np.array([c1 * base, _C2 * s2 * base / tau, s3 * base / (tau * tau) / _C3])


def _sector0_basis(nu: float, tau: float) -> np.ndarray:
    """``3 x 3`` matrix whose columns are ``(c1, c2, c3)`` of families A, B, C."""
    out = np.empty((3, 3), dtype=np.complex128)
    for j, fam in enumerate(sector0_families(nu)):
        if tau <= 1.0:
            out[:, j] = _family_small(fam, nu, tau)
        else:
            out[:, j] = _family_large(fam, nu, tau)[0]
    return out


def _bessel_pair(xi: float, tau: float) -> tuple[float, float, float, float]:
    j0, y0 = bessel_jy(xi, tau)
    j1, y1 = bessel_jy(xi + 1.0, tau)
    return j0.value, y0.value, j1.value, y1.value


# ---------------------------------------------------------------------- results

@dataclass(frozen=True)
class SectorBoundary:
    """Coefficients of a sector's closed form, fixed by data at ``tau0``.

    ``k`` has one entry per independent solution (1, 2 or 3); it may carry
    a leading batch axis.
    """

    k: np.ndarray
    tau0: float
    jz: int
    nu: float

    @property
    def k1(self):
        return self.k[..., 0]

    @property
    def k2(self):
        return self.k[..., 1] if self.k.shape[-1] > 1 else None

    @property
    def k3(self):
        return self.k[..., 2] if self.k.shape[-1] > 2 else None


@dataclass
class SectorSolution:
    """Closed-form amplitudes of one sector.

    ``amplitudes`` has shape ``(..., len(times), sector size)``; slot order follows
    :func:`rampdiss.rg.sector_indices`.
    """

    times: np.ndarray
    amplitudes: np.ndarray
    slots: np.ndarray
    boundary: SectorBoundary
    sites: tuple[int, int] = (0, 1)

    def correlators(self) -> dict[CorrelatorLabel, np.ndarray]:
        """Trajectories keyed by correlator label."""
        states = basis_states(2)
        names = {1: "minus", 0: "z", -1: "plus"}
        out = {}
        for j, slot in enumerate(self.slots):
            sz = states[slot]
            weight = SITE_WEIGHTS[1 - sz[0]] * SITE_WEIGHTS[1 - sz[1]]
            label = CorrelatorLabel({self.sites[0]: names[int(sz[0])], self.sites[1]: names[int(sz[1])]})
            out[label] = self.amplitudes[..., j] / weight
        return out


# ---------------------------------------------------------------------- one site

def solve_n1(config: RampConfig, site: int, initial: Sequence[complex], times: Sequence[float]) -> dict[str, np.ndarray]:
    """Single-site correlators ``c_z, c_+, c_-`` from values at ``t_init``.

    ``c_z`` decays as ``(t/t0)^(-2/nu)``; ``c_+-`` pick up the phase
    ``exp(+-2 i eps (t - t0))`` and decay as ``(t/t0)^(-1/nu)``.
    """
    cz0, cp0, cm0 = (complex(v) for v in initial)
    t = np.asarray(times, dtype=float)
    t0 = config.t_init
    if np.any(t < t0 * (1 - 1e-12)):
        raise ValueError("times must not precede t_init")
    eps = config.epsilons[site]
    ratio = t / t0
    decay = ratio ** (-1.0 / config.nu)
    phase = np.exp(2j * eps * (t - t0))
    return {
        "z": cz0 * ratio ** (-2.0 / config.nu),
        "plus": cp0 * phase * decay,
        "minus": cm0 * np.conj(phase) * decay,
    }


# ---------------------------------------------------------------------- two sites

def _pair(config: RampConfig, sites: Sequence[int]) -> tuple[int, int, float, float]:
    if len(sites) != 2:
        raise DimensionError("two-site closed forms need exactly two sites")
    p, q = (int(s) for s in sites)
    ep, eq = config.epsilons[p], config.epsilons[q]
    if not ep < eq:
        raise DimensionError(f"closed forms need eps_p < eps_q, got {ep} and {eq}")
    return p, q, ep, eq


def sector_generator(config: RampConfig, sites: Sequence[int], jz: int) -> tuple[np.ndarray, np.ndarray]:
    """Lab-frame block ``(A0, A1)`` of sector ``jz`` with ``L(t) = A0 + A1/(nu t)``.

    Written out explicitly in the slot order of :func:`rampdiss.rg.sector_indices`.
    """
    p, q, ep, eq = _pair(config, sites)
    SectorLabel(2, jz)
    if abs(jz) == 2:
        return np.array([[-1j * jz * (ep + eq)]]), np.array([[-2.0]])
    if abs(jz) == 1:
        slots = sector_indices(2, jz)
        states = basis_states(2)
        diag = [-2j * (ep * states[s][0] + eq * states[s][1]) for s in slots]
        return np.diag(diag), np.array([[-3.0, -2.0], [-2.0, -3.0]])
    delta = eq - ep
    return (np.diag([2j * delta, 0.0, -2j * delta]),
            -np.array([[2.0, 2.0, 0.0], [2.0, 4.0, 2.0], [0.0, 2.0, 2.0]]))


def _as_batch(initial, size: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(initial, dtype=np.complex128)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != size:
        raise DimensionError(f"sector has {size} slots, got initial data of length {arr.shape[-1]}")
    return arr, single


def _sigma_slots(jz: int) -> tuple[int, int]:
    """Positions (within the sector) of the slots with the raised site at p and at q."""
    slots = sector_indices(2, jz)
    states = basis_states(2)
    pos_a = next(i for i, s in enumerate(slots) if states[s][0] == jz)
    pos_b = next(i for i, s in enumerate(slots) if states[s][1] == jz)
    return pos_a, pos_b


def solve_n2_sector(config: RampConfig, sites: Sequence[int], sector: SectorLabel | int,
                    initial, times: Sequence[float]) -> SectorSolution:
    """Closed-form evolution of one two-site magnetization sector.

    Parameters
    ----------
    initial : array, shape (size,) or (batch, size)
        Lab-frame slot amplitudes at ``t_init``.

    Raises
    ------
    ResonantNuError
        If the sector-0 families degenerate at this ``nu``.
    NumericalFailure
        If the boundary system at ``tau0`` is numerically singular.
    """
    p, q, ep, eq = _pair(config, sites)
    jz = sector.jz if isinstance(sector, SectorLabel) else int(sector)
    SectorLabel(2, jz)
    nu = config.nu
    t = np.asarray(times, dtype=float)
    t0 = config.t_init
    if np.any(t < t0 * (1 - 1e-12)):
        raise ValueError("times must not precede t_init")
    slots = sector_indices(2, jz)
    init, single = _as_batch(initial, slots.size)
    delta = eq - ep
    total = ep + eq
    tau0 = delta * t0
    taus = delta * t

    if abs(jz) == 2:
        factor = np.exp(-1j * jz * total * (t - t0)) * (t / t0) ** (-2.0 / nu)
        amps = init[:, None, :] * factor[None, :, None]
        boundary = SectorBoundary(init.copy(), tau0, jz, nu)
    elif abs(jz) == 1:
        sigma = 1 if jz > 0 else -1
        ia, ib = _sigma_slots(jz)
        beta = 0.5 - 3.0 / nu
        m = 0.5 + 2.0 / nu  # = -xi, positive for every nu
        s0 = (init[:, ia] + init[:, ib]) / math.sqrt(2.0)
        d0 = (init[:, ia] - init[:, ib]) / math.sqrt(2.0)
        strip = np.exp(1j * sigma * total * t0) * tau0 ** (-beta)
        u = s0 * strip
        v = d0 * strip / (sigma * 1j)
        # s ~ A J_m + B Y_m and d ~ -(A J_(m-1) + B Y_(m-1)); this regular/singular
        # pair keeps the boundary system well conditioned as tau0 -> 0
        Jl, Yl, Jm, Ym = _bessel_pair(m - 1.0, tau0)
        det = -2.0 / (math.pi * tau0)
        A = -(u * Yl + v * Ym) / det
        B = (u * Jl + v * Jm) / det
        # rotate to coefficients of J_xi, Y_xi with xi = -m
        cx, sx = cospi(-m), sinpi(-m)
        k1 = A * cx + B * sx
        k2 = -A * sx + B * cx
        boundary = SectorBoundary(np.stack([k1, k2], axis=-1), tau0, jz, nu)
        amps = np.zeros((init.shape[0], t.size, 2), dtype=np.complex128)
        for i, (tt, tau) in enumerate(zip(t, taus)):
            Jl, Yl, Jm, Ym = _bessel_pair(m - 1.0, tau)
            pref = np.exp(-1j * sigma * total * tt) * tau ** beta
            s_val = pref * (A * Jm + B * Ym)
            d_val = -sigma * 1j * pref * (A * Jl + B * Yl)
            amps[:, i, ia] = (s_val + d_val) / math.sqrt(2.0)
            amps[:, i, ib] = (s_val - d_val) / math.sqrt(2.0)
    else:
        check_resonance(nu, 0)
        phi0 = _sector0_basis(nu, tau0)
        c0 = (2.0 * init) @ ROTATION_0.T
        # equilibrate rows and columns before solving
        col = np.max(np.abs(phi0), axis=0)
        row = np.max(np.abs(phi0 / col), axis=1)
        scaled = phi0 / col / row[:, None]
        cond = np.linalg.cond(scaled)
        if not np.isfinite(cond) or cond > 1e13:
            raise NumericalFailure(f"sector-0 boundary system is singular at tau0 = {tau0} (cond {cond:.3g})")
        kk = np.linalg.solve(scaled, (c0 / row).T).T / col
        boundary = SectorBoundary(kk, tau0, 0, nu)
        amps = np.zeros((init.shape[0], t.size, 3), dtype=np.complex128)
        for i, tau in enumerate(taus):
            phi = _sector0_basis(nu, tau)
            c = kk @ phi.T
            amps[:, i, :] = 0.5 * (c @ ROTATION_0)
    if single:
        amps = amps[0]
        boundary = SectorBoundary(boundary.k[0], boundary.tau0, boundary.jz, boundary.nu)
    return SectorSolution(t, amps, slots, boundary, (p, q))


def solve_n2(config: RampConfig, sites: Sequence[int], initial_amplitudes, times: Sequence[float],
             skip_resonant: bool = False) -> np.ndarray:
    """All nine two-site amplitudes from a full ``3^2`` lab-frame vector at ``t_init``.

    Returns an array of shape ``(len(times), 9)``. With ``skip_resonant`` a
    resonant sector 0 is left as NaN instead of raising.
    """
    init = np.asarray(initial_amplitudes, dtype=np.complex128)
    if init.shape != (9,):
        raise DimensionError("two-site amplitude vector must have 9 entries")
    t = np.asarray(times, dtype=float)
    out = np.zeros((t.size, 9), dtype=np.complex128)
    for jz in range(-2, 3):
        idx = sector_indices(2, jz)
        try:
            sol = solve_n2_sector(config, sites, jz, init[idx], t)
        except ResonantNuError:
            if not skip_resonant:
                raise
            out[:, idx] = np.nan
            continue
        out[:, idx] = sol.amplitudes
    return out


# ---------------------------------------------------------------------- asymptotics

@dataclass(frozen=True)
class AsymptoticTerm:
    """``coefficient * tau^(-exponent) * exp(i frequency tau)``."""

    coefficient: complex
    exponent: float
    frequency: float

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.coefficient * tau ** (-self.exponent) * np.exp(1j * self.frequency * tau)


@dataclass(frozen=True)
class AsymptoticForm:
    """Late-time form of one two-site correlator, as a sum of power-law terms in ``tau``."""

    which: str
    terms: tuple[AsymptoticTerm, ...]
    delta: float

    def evaluate(self, t):
        """Value at lab time ``t`` (converted to ``tau = delta t``)."""
        tau = self.delta * np.asarray(t, dtype=float)
        return sum(term(tau) for term in self.terms)

    def exponents(self) -> list[float]:
        return sorted({term.exponent for term in self.terms})

    def group(self, exponent: float, tau) -> np.ndarray:
        """Sum of the terms sharing one exponent."""
        tau = np.asarray(tau, dtype=float)
        return sum(term(tau) for term in self.terms if math.isclose(term.exponent, exponent))

    @property
    def dominant_exponent(self) -> float:
        """Smallest exponent carrying a nonzero coefficient."""
        live = [t.exponent for t in self.terms if abs(t.coefficient) > 0]
        return min(live)


def _zz_terms(nu: float, k1: complex, k2: complex, k3: complex) -> list[AsymptoticTerm]:
    """Two-exponent late-time form of ``2 c_zz`` from the sector-0 coefficients."""
    G = lambda x: gamma_fn(x).value  # noqa: E731
    u = math.pi / nu
    s = math.sin(u)
    den = 3.0 - 4.0 * s * s  # sin(3u)/sin(u)
    # Gamma(-3/nu)/Gamma(-2/nu), sin(pi/nu) Gamma(-1/nu), sin(pi/nu) Gamma(-3/nu) without removable poles
    ratio_32 = 2.0 * math.cos(u) / den * G(1 + 2 / nu) / G(1 + 3 / nu)
    sin_g1 = -math.pi / G(1 + 1 / nu)
    sin_g3 = -math.pi / (den * G(1 + 3 / nu))

    alg = math.sqrt(1.5) * (
        k1 * G((3 * nu + 2) / (2 * nu)) * G((2 * nu + 3) / nu) * rgamma((nu - 2) / (2 * nu)) * rgamma((nu + 1) / nu)
        + k2 * math.cos(u) * G((nu - 4) / (2 * nu)) * G((nu + 2) / (2 * nu)) * ratio_32 / math.pi
        - k3 * 2.0 ** ((nu + 2) / nu) * s * G((3 * nu + 4) / (2 * nu)) / math.sqrt(math.pi)
    )
    pref = math.sqrt(3.0 / (2.0 * math.pi ** 3 * nu ** 4))
    a1 = k1 * math.sqrt(math.pi) * (nu + 2) * G((2 * nu + 3) / nu) * sin_g1 / 4.0 ** (1.0 / nu)
    a2 = 2.0 * k2 * G((nu - 4) / (2 * nu)) * sin_g3 * G(1.0 / nu)
    a3 = k3 * 2.0 * math.pi * nu * G((nu - 2) / (2 * nu)) * G((3 * nu + 4) / (2 * nu)) * rgamma((nu + 2) / (2 * nu))
    # a1 sin(u - 2 tau) + a2 sin(2u + 2 tau) + a3 cos(2 tau) = P e^{2i tau} + Q e^{-2i tau}
    P = pref * (-a1 * np.exp(-1j * u) / 2j + a2 * np.exp(2j * u) / 2j + a3 / 2)
    Q = pref * (a1 * np.exp(1j * u) / 2j - a2 * np.exp(-2j * u) / 2j + a3 / 2)
    slow = (nu + 2) / nu
    # the late-time limit of the exact solution is minus this display
    return [AsymptoticTerm(-alg, 4.0 / nu, 0.0), AsymptoticTerm(-P, slow, 2.0), AsymptoticTerm(-Q, slow, -2.0)]


def _pm_term(nu: float, k1: complex, k2: complex, k3: complex, sign: int) -> AsymptoticTerm:
    """Late-time form of the ``+-`` pair amplitude with frequency ``2 sign`` in ``tau``."""
    G = lambda x: gamma_fn(x).value  # noqa: E731
    u = math.pi / nu
    s = math.sin(u)
    ratio = G(1.0 / nu) / ((3.0 - 4.0 * s * s) * G(3.0 / nu))  # Gamma(1-3/nu)/Gamma(1-1/nu)
    coef = (
        math.sqrt(3.0 / (2 * math.pi)) * k1 * G((3 * nu + 2) / (2 * nu)) * G((2 * nu + 3) / nu)
        * rgamma((nu + 2) / nu) * np.exp(-1j * sign * u)
        - k2 * G((nu - 4) / (2 * nu)) * ratio * np.exp(2j * sign * u) / math.sqrt(6 * math.pi)
        + sign * 1j * math.sqrt(3.0 / (2 * math.pi)) * k3 * G((3 * nu + 4) / (2 * nu))
        * G((nu - 2) / (2 * nu)) * rgamma((nu + 2) / (2 * nu))
    )
    return AsymptoticTerm(coef, 2.0 / nu, 2.0 * sign)


_WHICH = ("zz", "plus_minus", "minus_plus", "z_plus", "plus_z", "z_minus", "minus_z")


def asymptotic_n2(config: RampConfig, sites: Sequence[int], boundary: SectorBoundary, which: str) -> AsymptoticForm:
    """Late-time correlator form built from sector coefficients.

    ``which`` names the correlator by its indices on ``(p, q)``: ``zz``,
    ``plus_minus`` (``c_{+p -q}``), ``minus_plus``, ``z_plus``, ``plus_z``,
    ``z_minus`` or ``minus_z``. The ``zz`` form keeps both competing
    exponents ``4/nu`` and ``(nu + 2)/nu``.
    """
    if which not in _WHICH:
        raise ValueError(f"unknown channel {which!r}; choose from {_WHICH}")
    p, q, ep, eq = _pair(config, sites)
    nu = config.nu
    delta = eq - ep
    r = (ep + eq) / delta
    if np.ndim(boundary.k) != 1:
        raise DimensionError("asymptotic forms take a single boundary, not a batch")
    if which in ("zz", "plus_minus", "minus_plus"):
        if boundary.jz != 0:
            raise ValueError(f"channel {which} lives in sector 0, boundary is for sector {boundary.jz}")
        check_resonance(nu, 0)
        k1, k2, k3 = (complex(v) for v in boundary.k)
        if which == "zz":
            terms = tuple(AsymptoticTerm(t.coefficient / 2.0, t.exponent, t.frequency)
                          for t in _zz_terms(nu, k1, k2, k3))
        else:
            # the e^{+2i tau} form is the doubled amplitude of slot (+1, -1), i.e. -c_{-+}
            sign = 1 if which == "minus_plus" else -1
            term = _pm_term(nu, k1, k2, k3, sign)
            terms = (AsymptoticTerm(-term.coefficient, term.exponent, term.frequency),)
        return AsymptoticForm(which, terms, delta)
    sigma = -1 if "plus" in which else 1
    if boundary.jz != sigma:
        raise ValueError(f"channel {which} lives in sector {sigma}, boundary is for sector {boundary.jz}")
    k1, k2 = (complex(v) for v in boundary.k)
    # slot a has the nonzero S^z on site p; its correlator index is "plus" for S^z = -1
    raised_on_p = which.startswith("plus") or which.startswith("minus")
    amp_scale = 1.0 / math.sqrt(math.pi)
    if raised_on_p:
        coef = amp_scale * (k1 - 1j * sigma * k2) * np.exp(1j * sigma * math.pi / nu)
        freq = sigma * (1.0 - r)
    else:
        coef = amp_scale * (k1 + 1j * sigma * k2) * np.exp(-1j * sigma * math.pi / nu)
        freq = -sigma * (1.0 + r)
    weight = SITE_WEIGHTS[1] * SITE_WEIGHTS[1 - sigma]
    return AsymptoticForm(which, (AsymptoticTerm(coef / weight, 3.0 / nu, freq),), delta)
