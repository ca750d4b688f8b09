"""Power-law exponent extraction from sampled correlator trajectories.

A trajectory ``c(t)`` decaying as ``t^{-alpha}`` is fitted by least squares
on ``ln|c|`` against ``ln t``. Channels that oscillate (real part changing
sign, or the complex phase winding) are first reduced to an envelope: the
largest ``|c|`` inside each logarithmic time bin. The window can be given
explicitly or picked by :func:`auto_window`, which looks for the latest
stretch of at least ``min_decades`` over which the local log-log slope is
stable.

The module also carries the estimators used for exponent sweeps
(:func:`slope_at`, :func:`slope_change`) and for comparing trajectories
against an asymptotic form (:func:`ratio_drift`, :func:`fit_onset`).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FitError
from .exact import ExponentPrediction

__all__ = [
    "UNDERFLOW",
    "FitResult",
    "OnsetResult",
    "as_arrays",
    "is_oscillatory",
    "log_bins",
    "fit_exponent",
    "auto_window",
    "slope_at",
    "slope_change",
    "ratio_drift",
    "fit_onset",
    "read_trajectory_csv",
    "write_trajectory_csv",
]

UNDERFLOW = 1e-300
MIN_POINTS = 8


@dataclass(frozen=True)
class FitResult:
    """Outcome of a log-log fit; ``alpha_hat`` is minus the fitted slope."""

    alpha_hat: float
    window: tuple[float, float]
    r_squared: float
    n_points: int
    method: str
    intercept: float = 0.0
    predicted: ExponentPrediction | None = None

    @property
    def relative_error(self) -> float | None:
        """``|alpha_hat - alpha| / alpha`` against the attached prediction."""
        if self.predicted is None:
            return None
        return abs(self.alpha_hat - self.predicted.alpha) / abs(self.predicted.alpha)

    def to_dict(self) -> dict:
        out = {
            "alpha_hat": self.alpha_hat,
            "window": list(self.window),
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "method": self.method,
            "intercept": self.intercept,
        }
        if self.predicted is not None:
            out["alpha_pred"] = self.predicted.alpha
            out["relative_error"] = self.relative_error
        return out

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    """Normalize ``samples`` to sorted ``(times, values)`` arrays.

    Accepts a sequence of ``(t, value)`` pairs or a tuple of two numpy arrays.
    """
    if isinstance(samples, tuple) and len(samples) == 2 \
            and all(isinstance(a, np.ndarray) for a in samples):
        t, v = samples
    else:
        arr = list(samples)
        if not arr:
            raise FitError("no samples given")
        t = [p[0] for p in arr]
        v = [p[1] for p in arr]
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=np.complex128)
    if t.ndim != 1 or t.shape != v.shape:
        raise FitError("times and values must be one-dimensional and of equal length")
    if np.any(t <= 0) or not np.all(np.isfinite(t)):
        raise FitError("sample times must be positive and finite")
    order = np.argsort(t, kind="stable")
    return t[order], v[order]


def is_oscillatory(values: np.ndarray) -> bool:
    """True if the real part changes sign or the phase winds by more than ``pi``."""
    values = np.asarray(values, dtype=np.complex128)
    live = values[np.abs(values) > UNDERFLOW]
    if live.size < 2:
        return False
    re = live.real[live.real != 0.0]
    if re.size > 1 and np.count_nonzero(np.diff(np.sign(re))) > 0:
        return True
    if np.any(live.imag != 0.0):
        phase = np.unwrap(np.angle(live))
        return bool(np.ptp(phase) > math.pi)
    return False


def _bin_ranges(t: np.ndarray, bins_per_decade: int) -> list[tuple[int, int]]:
    key = np.floor(np.log10(t) * bins_per_decade + 1e-9).astype(np.int64)
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    ends = np.r_[starts[1:], key.size]
    return list(zip(starts.tolist(), ends.tolist()))


def log_bins(t: np.ndarray, v: np.ndarray, bins_per_decade: int = 12,
             reduce: str = "max") -> tuple[np.ndarray, np.ndarray]:
    """Collapse samples into logarithmic bins aligned to decade boundaries.

    ``reduce="max"`` keeps the sample of largest ``|v|`` in each bin (the
    envelope); ``reduce="mean"`` averages ``ln t`` and ``ln|v|``. Returns
    ``(ln t, ln|v|)`` per non-empty bin. Samples at or below the underflow floor are skipped.
    """
    x, y, _ = _binned(t, v, bins_per_decade, reduce)
    return x, y


def _binned(t, v, bins_per_decade, reduce):
    a = np.abs(v)
    keep = a > UNDERFLOW
    t, a = t[keep], a[keep]
    if t.size == 0:
        return np.empty(0), np.empty(0), []
    ranges = _bin_ranges(t, bins_per_decade)
    lx = np.empty(len(ranges))
    ly = np.empty(len(ranges))
    for i, (s, e) in enumerate(ranges):
        if reduce == "max":
            j = s + int(np.argmax(a[s:e]))
            lx[i], ly[i] = math.log(t[j]), math.log(a[j])
        elif reduce == "mean":
            lx[i] = float(np.mean(np.log(t[s:e])))
            ly[i] = float(np.mean(np.log(a[s:e])))
        else:
            raise ValueError(f"unknown reduction {reduce!r}")
    edges = [(float(t[s]), float(t[e - 1])) for s, e in ranges]
    return lx, ly, edges


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, intercept and ``r^2`` of an ordinary least-squares line."""
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise FitError("all sample times coincide")
    slope = float(dx @ dy) / sxx
    intercept = ym - slope * xm
    res = y - (intercept + slope * x)
    sst = float(dy @ dy)
    r2 = 1.0 if sst == 0.0 else 1.0 - float(res @ res) / sst
    return slope, float(intercept), min(max(r2, 0.0), 1.0)


def _select(t, v, window):
    if window is None:
        return t, v
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise FitError(f"window must satisfy t_lo < t_hi, got {window}")
    if hi < t[0] or lo > t[-1]:
        raise FitError(f"window {window} lies outside the sampled range [{t[0]:.3g}, {t[-1]:.3g}]")
    m = (t >= lo * (1 - 1e-12)) & (t <= hi * (1 + 1e-12))
    return t[m], v[m]


def _resolve_method(method: str, v: np.ndarray) -> str:
    if method == "auto":
        return "envelope" if is_oscillatory(v) else "raw"
    if method not in ("raw", "envelope"):
        raise ValueError(f"method must be 'auto', 'raw' or 'envelope', got {method!r}")
    return method


def fit_exponent(samples, window: tuple[float, float] | None = None, method: str = "auto",
                 bins_per_decade: int = 12, prediction: ExponentPrediction | None = None,
                 stability: float = 0.02, min_decades: float = 1.5) -> FitResult:
    """Fit ``|c(t)| ~ t^{-alpha}`` over ``window``.

    Parameters
    ----------
    samples
        ``(t, value)`` pairs or a ``(times, values)`` pair of arrays.
    window : (t_lo, t_hi), optional
        Fit range. When omitted, :func:`auto_window` chooses it.
    method : {"auto", "raw", "envelope"}
        ``auto`` switches to the envelope for oscillating channels.
    prediction : ExponentPrediction, optional
        Attached to the result for later comparison.

    Raises
    ------
    FitError
        All-zero data, fewer than eight usable points, or a window outside the data.
    """
    t, v = as_arrays(samples)
    if not np.any(np.abs(v) > UNDERFLOW):
        raise FitError("trajectory is identically zero (below the underflow floor)")
    if window is None:
        window = auto_window((t, v), stability=stability, min_decades=min_decades,
                             bins_per_decade=bins_per_decade, method=method)
    tw, vw = _select(t, v, window)
    kind = _resolve_method(method, vw)
    if kind == "envelope":
        x, y = log_bins(tw, vw, bins_per_decade, "max")
    else:
        keep = np.abs(vw) > UNDERFLOW
        x, y = np.log(tw[keep]), np.log(np.abs(vw[keep]))
    if x.size < MIN_POINTS:
        raise FitError(f"only {x.size} usable points in window {window}; need at least {MIN_POINTS}")
    slope, intercept, r2 = _linear_fit(x, y)
    span = (float(tw[0]), float(tw[-1]))
    return FitResult(-slope, span, r2, int(x.size), kind, float(intercept), prediction)


def _local_slopes(x: np.ndarray, y: np.ndarray, width: int) -> np.ndarray:
    return np.array([_linear_fit(x[i:i + width], y[i:i + width])[0] for i in range(x.size - width + 1)])


def auto_window(samples, stability: float = 0.02, min_decades: float = 1.5,
                bins_per_decade: int = 12, method: str = "auto") -> tuple[float, float]:
    """Latest span of at least ``min_decades`` with a stable local slope.

    Local slopes come from half-decade rolling fits on log-binned data. A
    span is stable when every local slope lies within ``stability`` (relative)
    of their mean. Starting from the last sample, the span is grown towards
    earlier times as far as it stays stable. If it falls short, the end is
    moved one bin earlier and the search repeats.

    Raises
    ------
    FitError
        Fewer than three decades of samples, or no stable span. In the latter
        case ``best_window`` and ``drift`` describe the longest candidate.
    """
    t, v = as_arrays(samples)
    keep = np.abs(v) > UNDERFLOW
    if not np.any(keep):
        raise FitError("trajectory is identically zero (below the underflow floor)")
    if math.log10(t[-1] / t[0]) < 3.0 - 1e-9:
        raise FitError("automatic window selection needs at least three decades of samples")
    kind = _resolve_method(method, v)
    x, y, edges = _binned(t, v, bins_per_decade, "max" if kind == "envelope" else "mean")
    width = max(3, bins_per_decade // 2)
    if x.size < width + 1:
        raise FitError("too few populated bins for window selection")
    s = _local_slopes(x, y, width)
    best = None
    for end in range(s.size - 1, -1, -1):
        start = end
        while start > 0:
            seg = s[start - 1:end + 1]
            mean = seg.mean()
            if np.max(np.abs(seg - mean)) > stability * abs(mean) + 1e-12:
                break
            start -= 1
        lo, hi = edges[start][0], edges[end + width - 1][1]
        decades = math.log10(hi / lo)
        seg = s[start:end + 1]
        drift = float(np.max(np.abs(seg - seg.mean())) / max(abs(seg.mean()), 1e-300))
        if best is None or decades > best[0]:
            best = (decades, (lo, hi), drift)
        if decades >= min_decades - 1e-9:
            return lo, hi
    raise FitError(f"no span of {min_decades} decades with slope stable to {stability:.1%}; "
                   f"longest candidate covers {best[0]:.2f} decades",
                   best_window=best[1], drift=best[2])


# ---------------------------------------------------------------------- sweeps

def slope_at(nus: Sequence[float], alphas: Sequence[float], nu0: float = 2.0) -> float:
    """``d alpha / d nu`` at ``nu0`` from a straight-line fit of ``alpha`` against ``1/nu``.

    Every branch of the exponent law is affine in ``1/nu``, so the fit
    extrapolates one branch to ``nu0`` without curvature bias.
    """
    inv = 1.0 / np.asarray(nus, dtype=float)
    a = np.asarray(alphas, dtype=float)
    if inv.size < 2:
        raise FitError("need at least two points to estimate a slope")
    d = _linear_fit(inv, a)[0]
    return -d / nu0 ** 2


def slope_change(nus: Sequence[float], alphas: Sequence[float], nu0: float = 2.0) -> tuple[float, float, float]:
    """Slopes just below and above ``nu0`` and their difference (right minus left)."""
    nus = np.asarray(nus, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    left = nus < nu0
    right = nus > nu0
    s_left = slope_at(nus[left], alphas[left], nu0)
    s_right = slope_at(nus[right], alphas[right], nu0)
    return s_left, s_right, s_right - s_left


# ---------------------------------------------------------------------- asymptote ratios

@dataclass(frozen=True)
class OnsetResult:
    """Drift of ``ln`` of a ratio between consecutive decades, and where it settles.

    ``drifts[i]`` compares the decade starting at ``starts[i]`` (in
    ``log10 t``) with the following decade. ``onset`` is ``None`` when no
    settled stretch of ``min_span`` decades exists.
    """

    starts: np.ndarray
    drifts: np.ndarray
    onset: float | None
    span_decades: float
    max_drift_after: float
    tolerance: float = field(default=0.05)

    @property
    def settled(self) -> bool:
        return self.onset is not None


def ratio_drift(times, ratio, step: float = 0.25) -> tuple[np.ndarray, np.ndarray]:
    """Change of the decade-averaged ``ln ratio`` per decade.

    For each start ``a`` on a grid of spacing ``step`` (in ``log10 t``), the
    mean of ``ln ratio`` over ``[a + 1, a + 2)`` minus its mean over
    ``[a, a + 1)``. Averaging over a decade washes out oscillating corrections
    and keeps the systematic trend.
    """
    t = np.asarray(times, dtype=float)
    r = np.asarray(ratio, dtype=float)
    if np.any(r <= 0):
        raise FitError("ratios must be positive")
    lt = np.log10(t)
    lr = np.log(r)
    starts = np.arange(math.floor(lt[0] / step) * step, lt[-1] - 2.0 + 1e-9, step)
    starts = starts[starts >= lt[0] - 1e-9]
    out_s, out_d = [], []
    for a in starts:
        m0 = (lt >= a) & (lt < a + 1.0)
        m1 = (lt >= a + 1.0) & (lt <= a + 2.0)
        if m0.sum() < 4 or m1.sum() < 4:
            continue
        out_s.append(a)
        out_d.append(lr[m1].mean() - lr[m0].mean())
    return np.array(out_s), np.array(out_d)


def fit_onset(times, ratio, tolerance: float = 0.05, min_span: float = 2.5,
              step: float = 0.25) -> OnsetResult:
    """Earliest time after which the ratio drifts by less than ``tolerance`` per decade.

    The onset is the first window start from which every later window
    satisfies ``|drift| <= tolerance``. It counts only if the settled
    stretch reaches ``min_span`` decades, from the onset to the last sample.
    """
    starts, drifts = ratio_drift(times, ratio, step)
    t_end = math.log10(float(np.max(times)))
    if starts.size == 0:
        return OnsetResult(starts, drifts, None, 0.0, float("nan"), tolerance)
    ok = np.abs(drifts) <= tolerance
    idx = starts.size
    while idx > 0 and ok[idx - 1]:
        idx -= 1
    if idx == starts.size:
        return OnsetResult(starts, drifts, None, 0.0, float(np.abs(drifts[-1])), tolerance)
    span = t_end - starts[idx]
    after = float(np.max(np.abs(drifts[idx:])))
    onset = float(10.0 ** starts[idx]) if span >= min_span - 1e-9 else None
    return OnsetResult(starts, drifts, onset, float(span), after, tolerance)


# ---------------------------------------------------------------------- trajectory files

def read_trajectory_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``t, re, im`` CSV (extra columns such as ``abs`` are ignored)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"t", "re", "im"} <= set(reader.fieldnames):
            raise FitError(f"{path}: expected columns t, re, im")
        rows = [(float(r["t"]), complex(float(r["re"]), float(r["im"]))) for r in reader]
    return as_arrays(rows)


def write_trajectory_csv(path: str | Path, times, values) -> None:
    """Write ``t, re, im, abs`` columns with full double precision."""
    values = np.asarray(values, dtype=np.complex128)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "re", "im", "abs"])
        for t, v in zip(times, values):
            w.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v)))])
