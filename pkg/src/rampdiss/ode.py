"""Adaptive Runge-Kutta integration of linear systems in logarithmic time.

The systems of interest have the form ``dC/dt = A(t) C`` with
``A(t) = A0 + A1/(nu t)``. Integrating directly in ``t`` from ``t ~ 1e-5`` is
wasteful because the dissipative rate blows up at early times. With the
substitution ``u = ln t`` the equation becomes

    dC/du = t A(t) C = (e^u A0 + A1/nu) C,

so the dissipative part is constant in ``u`` and the step size naturally
shrinks only when the Hamiltonian oscillations speed up.

Two embedded explicit pairs are available: Dormand-Prince 5(4) (``"dopri5"``)
and Dormand-Prince 8(5,3) (``"dop853"``, the default). Both provide dense
output of the matching order. The Butcher coefficients are read from the
public tableau attributes of :class:`scipy.integrate.RK45` and
:class:`scipy.integrate.DOP853`; stepping, error control and interpolation
are implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import DOP853 as _DOP853_TABLEAU
from scipy.integrate import RK45 as _RK45_TABLEAU

from .errors import IntegrationError

__all__ = ["IntegrationSpec", "IntegrationResult", "RampGenerator", "integrate", "solve", "METHODS"]

Generator = Callable[[float, np.ndarray], np.ndarray]

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@dataclass(frozen=True)
class _Tableau:
    name: str
    order: int
    error_order: int
    n_stages: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    E: np.ndarray | None = None
    E3: np.ndarray | None = None
    E5: np.ndarray | None = None
    P: np.ndarray | None = None
    D: np.ndarray | None = None
    A_EXTRA: np.ndarray | None = None
    C_EXTRA: np.ndarray | None = None


def _tableau(cls, name: str) -> _Tableau:
    kw = {}
    for attr in ("E", "E3", "E5", "P", "D", "A_EXTRA", "C_EXTRA"):
        value = getattr(cls, attr, None)
        if isinstance(value, np.ndarray):
            kw[attr] = np.array(value, dtype=float)
    return _Tableau(name=name, order=int(cls.order), error_order=int(cls.error_estimator_order),
                    n_stages=int(cls.n_stages), A=np.array(cls.A, dtype=float),
                    B=np.array(cls.B, dtype=float), C=np.array(cls.C, dtype=float), **kw)


METHODS = {
    "dopri5": _tableau(_RK45_TABLEAU, "dopri5"),
    "dop853": _tableau(_DOP853_TABLEAU, "dop853"),
}


@dataclass(frozen=True)
class IntegrationSpec:
    """Controls for :func:`integrate`.

    Parameters
    ----------
    t_span : (float, float)
        Initial and final physical time, ``0 < t_init <= t_final``.
    rel_tol, abs_tol : float
        Mixed error control: a step is accepted when every component satisfies
        ``|err_i| <= abs_tol + rel_tol * |C_i|``.
    max_steps : int
        Budget of attempted steps (accepted plus rejected).
    dense_samples : sequence of float
        Output times inside ``t_span``. If empty, only the final state is returned.
    method : {"dop853", "dopri5"}
        Embedded Runge-Kutta pair.
    fixed_step : float, optional
        If given, disables error control and uses this constant step in ``u = ln t``
        (the last step is shortened to land on ``t_final``).
    max_step_u : float
        Upper bound on the step in ``u``.
    """

    t_span: tuple[float, float]
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_steps: int = 2_000_000
    dense_samples: Sequence[float] = field(default_factory=tuple)
    method: str = "dop853"
    fixed_step: float | None = None
    max_step_u: float = math.inf

    def __post_init__(self):
        t0, t1 = (float(x) for x in self.t_span)
        if not (t0 > 0 and t1 >= t0 and math.isfinite(t1)):
            raise ValueError(f"t_span must satisfy 0 < t_init <= t_final, got {self.t_span}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {sorted(METHODS)}")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.fixed_step is not None and not self.fixed_step > 0:
            raise ValueError("fixed_step must be positive")
        object.__setattr__(self, "t_span", (t0, t1))
        samples = tuple(float(s) for s in self.dense_samples)
        if any(b < a for a, b in zip(samples, samples[1:])):
            raise ValueError("dense_samples must be sorted")
        if samples and (samples[0] < t0 * (1 - 1e-14) or samples[-1] > t1 * (1 + 1e-14)):
            raise ValueError("dense_samples must lie inside t_span")
        object.__setattr__(self, "dense_samples", samples)


@dataclass
class IntegrationResult:
    """Sampled trajectory plus step statistics."""

    times: np.ndarray
    states: np.ndarray
    n_accepted: int
    n_rejected: int
    n_evaluations: int

    def as_pairs(self) -> list[tuple[float, np.ndarray]]:
        return [(float(t), s) for t, s in zip(self.times, self.states)]


def integrate(apply_generator: Generator, initial, spec: IntegrationSpec) -> list[tuple[float, np.ndarray]]:
    """Integrate ``dC/dt = A(t) C`` and return ``(time, state)`` pairs.

    ``apply_generator(t, C)`` must return ``A(t) @ C``. ``initial`` may be a
    vector or a 2-D array whose columns are independent initial conditions.
    """
    return solve(apply_generator, initial, spec).as_pairs()


def _initial_step(f, u0, y0, f0, order, rtol, atol, direction_len):
    scale = atol + np.abs(y0) * rtol
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, direction_len)
    y1 = y0 + h0 * f0
    f1 = f(u0 + h0, y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1, direction_len)


def solve(apply_generator: Generator, initial, spec: IntegrationSpec) -> IntegrationResult:
    """Like :func:`integrate` but returns an :class:`IntegrationResult`."""
    tab = METHODS[spec.method]
    y = np.array(initial, dtype=np.complex128, copy=True)
    t0, t1 = spec.t_span
    u = math.log(t0)
    u_end = math.log(t1)
    rtol, atol = spec.rel_tol, spec.abs_tol

    n_evals = 0

    shape = y.shape
    y = y.ravel()

    def f(uu, yy):
        nonlocal n_evals
        n_evals += 1
        tt = math.exp(uu)
        return tt * np.asarray(apply_generator(tt, yy.reshape(shape))).ravel()

    samples = np.asarray(spec.dense_samples, dtype=float)
    if samples.size == 0:
        samples = np.array([t1])
    sample_u = np.log(samples)
    out = np.empty((samples.size, y.size), dtype=np.complex128)
    k_out = 0
    while k_out < samples.size and sample_u[k_out] <= u:
        out[k_out] = y
        k_out += 1

    n_acc = 0
    n_rej = 0
    if u_end <= u:
        out[k_out:] = y
        return IntegrationResult(samples, out.reshape((samples.size,) + shape), 0, 0, 0)

    ns = tab.n_stages
    K = np.empty((ns + 1, y.size), dtype=np.complex128)
    K[0] = f(u, y)
    fixed = spec.fixed_step
    if fixed is None:
        h = _initial_step(f, u, y, K[0], tab.error_order, rtol, atol, u_end - u)
        h = min(h, spec.max_step_u)
    else:
        h = fixed
    exponent = -1.0 / (tab.error_order + 1)
    step_rejected = False
    attempts = 0
    A, B, C = tab.A, tab.B, tab.C

    while u < u_end:
        attempts += 1
        if attempts > spec.max_steps:
            raise IntegrationError("maximum number of steps exceeded", math.exp(u))
        min_step = 10 * abs(np.nextafter(u, math.inf) - u)
        if h < min_step:
            raise IntegrationError("step size underflow", math.exp(u))
        last = False
        if u + h >= u_end or (fixed is not None and u + h > u_end - 1e-12 * abs(u_end)):
            h = u_end - u
            last = True

        # stages
        for s in range(1, ns):
            K[s] = f(u + C[s] * h, y + (A[s, :s] @ K[:s]) * h)
        y_new = y + h * (B @ K[:ns])
        u_new = u_end if last else u + h
        K[ns] = f(u_new, y_new)

        if fixed is None:
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            if tab.name == "dop853":
                e5 = np.max(np.abs(tab.E5 @ K) / scale)
                e3 = np.max(np.abs(tab.E3 @ K) / scale)
                denom = e5 * e5 + 0.01 * e3 * e3
                err = 0.0 if denom == 0 else abs(h) * e5 * e5 / math.sqrt(denom)
            else:
                err = abs(h) * np.max(np.abs(tab.E @ K) / scale)
            if not np.isfinite(err):
                raise IntegrationError("non-finite error estimate", math.exp(u))
            if err > 1.0:
                n_rej += 1
                h *= max(_MIN_FACTOR, _SAFETY * err ** exponent)
                step_rejected = True
                continue
            factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err ** exponent)
            if step_rejected:
                factor = min(1.0, factor)
            step_rejected = False
        else:
            factor = 1.0

        n_acc += 1
        # dense output for samples inside (u, u_new]
        if k_out < samples.size and sample_u[k_out] <= u_new:
            interp = _make_interpolant(tab, f, u, h, y, y_new, K)
            while k_out < samples.size and sample_u[k_out] <= u_new:
                su = sample_u[k_out]
                if last and su >= u_new:
                    out[k_out] = y_new
                else:
                    out[k_out] = interp((su - u) / h)
                k_out += 1

        u = u_new
        y = y_new
        K[0] = K[ns]
        if fixed is None:
            h = min(h * factor, spec.max_step_u)
        if last:
            break

    while k_out < samples.size:
        out[k_out] = y
        k_out += 1
    return IntegrationResult(samples, out.reshape((samples.size,) + shape), n_acc, n_rej, n_evals)


def _make_interpolant(tab: _Tableau, f, u_old, h, y_old, y_new, K):
    """Continuous extension on the step ``[u_old, u_old + h]`` in the unit variable ``x``."""
    if tab.name == "dopri5":
        Q = tab.P.T @ K  # shape (4, n)

        def interp(x):
            p = np.array([x, x * x, x ** 3, x ** 4])
            return y_old + h * (p @ Q)

        return interp

    ns = tab.n_stages
    K_ext = np.empty((ns + 1 + tab.A_EXTRA.shape[0], y_old.size), dtype=np.complex128)
    K_ext[: ns + 1] = K
    s = ns + 1
    for a, c in zip(tab.A_EXTRA, tab.C_EXTRA):
        K_ext[s] = f(u_old + c * h, y_old + (a[:s] @ K_ext[:s]) * h)
        s += 1
    F = np.empty((7, y_old.size), dtype=np.complex128)
    f_old = K_ext[0]
    f_new = K_ext[ns]
    delta_y = y_new - y_old
    F[0] = delta_y
    F[1] = h * f_old - delta_y
    F[2] = 2 * delta_y - h * (f_new + f_old)
    F[3:] = h * (tab.D @ K_ext)

    def interp(x):
        yy = np.zeros_like(y_old)
        for i, Fi in enumerate(F[::-1]):
            yy = yy + Fi
            if i % 2 == 0:
                yy = yy * x
            else:
                yy = yy * (1 - x)
        return yy + y_old

    return interp


class RampGenerator:
    """Callable ``A(t) = A0 + A1 / (nu t)`` for use with :func:`integrate`.

    ``A0`` and ``A1`` may be dense arrays, scipy sparse matrices, objects with a
    ``csr`` attribute, or 1-D arrays (interpreted as diagonal matrices, which
    is how the Zeeman part is usually supplied). Small operators are stored
    densely because dense products beat sparse ones below a few hundred rows.
    """

    dense_threshold = 256

    def __init__(self, A0, A1, nu: float):
        self.nu = float(nu)
        self._A0, self._A0_diag = self._prepare(A0)
        self._A1, self._A1_diag = self._prepare(A1)

    def _prepare(self, op):
        if op is None:
            return None, False
        if hasattr(op, "csr"):
            op = op.csr
        if isinstance(op, np.ndarray) and op.ndim == 1:
            return np.asarray(op, dtype=np.complex128), True
        import scipy.sparse as sp

        if sp.issparse(op):
            if op.shape[0] <= self.dense_threshold:
                op = op.toarray()
            else:
                op = sp.csr_matrix(op, dtype=np.complex128)
                diag = op.diagonal()
                if op.nnz == np.count_nonzero(diag) and sp.csr_matrix(sp.diags(diag) - op).nnz == 0:
                    return diag.astype(np.complex128), True
                return op, False
        op = np.asarray(op, dtype=np.complex128)
        if op.ndim == 2 and np.count_nonzero(op - np.diag(np.diag(op))) == 0:
            return np.diag(op).copy(), True
        return op, False

    @staticmethod
    def _apply(op, is_diag, y):
        if op is None:
            return 0.0
        if is_diag:
            return op * y if y.ndim == 1 else op[:, None] * y
        return op @ y

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        out = self._apply(self._A1, self._A1_diag, y) * (1.0 / (self.nu * t))
        if self._A0 is not None:
            out = out + self._apply(self._A0, self._A0_diag, y)
        return out
