"""YAML run configurations for the command-line tool.

A run document is a single YAML mapping. Every key is validated before any
numerical work starts, and unknown keys are rejected with the line they
appear on. Times are in units of the inverse Zeeman scale (the same units
as ``epsilons``); ``nu`` is dimensionless.

Example::

    mode: rg                  # lindblad | rg | exact | asymptote
    nu: 6.0
    n_spins: 3
    epsilons: [0.3333333333333333, 0.6666666666666666, 1.0]
    t_init: 1.0e-5
    t_final: 100.0
    initial_state:
      preset: spin-coherent   # or  file: rho.json
      theta: 1.0
      phi: 0.5
    correlators: all          # every label on every site subset, or a list such as ["z0 z1", "+0 -1 z2"]
    samples: {count: 2000, start: 1.0e-5}
    integration: {rel_tol: 1.0e-10, abs_tol: 1.0e-300, method: dop853}
    sweep:
      nu: [0.8, 1.0, 1.5]
      labels: ["z0 z1"]
      route: auto
      window: {tail_decades: 1.5}
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .lindblad import CorrelatorLabel, RampConfig, all_labels
from .ode import METHODS
from .presets import PRESETS

__all__ = [
    "MODES",
    "ROUTES",
    "IntegrationOverrides",
    "SampleSpec",
    "WindowSpec",
    "SweepSpec",
    "InitialStateSpec",
    "RunConfig",
    "load_config",
    "parse_config",
]

MODES = ("lindblad", "rg", "exact", "asymptote")
ROUTES = ("auto", "lindblad", "rg", "exact")


class _LineTracker:
    """Maps key paths such as ``("sweep", "nu")`` to 1-based source lines."""

    def __init__(self, text: str):
        self.lines: dict[tuple, int] = {}
        try:
            node = yaml.compose(text, Loader=yaml.SafeLoader)
        except yaml.YAMLError:
            node = None
        if node is not None:
            self._walk(node, ())

    def _walk(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                self._walk(value, path + (key.value,))
                self.lines[path + (key.value,)] = key.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                self._walk(item, path + (i,))

    def where(self, path: tuple) -> str:
        dotted = ".".join(str(p) for p in path) or "<document>"
        while path and path not in self.lines:
            path = path[:-1]
        line = self.lines.get(path)
        return f"{dotted} (line {line})" if line else dotted


class _Reader:
    """Typed access to one mapping with path-aware errors."""

    def __init__(self, data: Any, path: tuple, lines: _LineTracker):
        if not isinstance(data, dict):
            raise ConfigError(f"{lines.where(path)}: expected a mapping")
        self.data = data
        self.path = path
        self.lines = lines
        self.used: set[str] = set()

    def fail(self, key, message: str):
        raise ConfigError(f"{self.lines.where(self.path + ((key,) if key is not None else ()))}: {message}")

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str, default=None):
        self.used.add(key)
        return self.data.get(key, default)

    def number(self, key: str, default=None, positive: bool = False, required: bool = False) -> float | None:
        if key not in self.data:
            if required:
                self.fail(key, "missing required key")
            return default
        value = self.raw(key)
        try:
            x = float(value)
        except (TypeError, ValueError):
            self.fail(key, f"expected a number, got {value!r}")
        if isinstance(value, bool) or not math.isfinite(x):
            self.fail(key, f"expected a finite number, got {value!r}")
        if positive and x <= 0:
            self.fail(key, f"must be positive, got {value!r}")
        return x

    def integer(self, key: str, default=None, minimum: int | None = None) -> int | None:
        if key not in self.data:
            return default
        value = self.raw(key)
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(key, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(key, f"must be at least {minimum}, got {value}")
        return value

    def choice(self, key: str, options, default=None) -> str:
        if key not in self.data:
            return default
        value = self.raw(key)
        if value not in options:
            self.fail(key, f"expected one of {', '.join(map(str, options))}; got {value!r}")
        return value

    def numbers(self, key: str, default=None, positive: bool = False) -> tuple[float, ...] | None:
        if key not in self.data:
            return default
        value = self.raw(key)
        if not isinstance(value, list) or not value:
            self.fail(key, "expected a non-empty list of numbers")
        out = []
        for i, item in enumerate(value):
            try:
                x = float(item)
            except (TypeError, ValueError):
                raise ConfigError(f"{self.lines.where(self.path + (key, i))}: expected a number, got {item!r}")
            if isinstance(item, bool) or not math.isfinite(x) or (positive and x <= 0):
                raise ConfigError(f"{self.lines.where(self.path + (key, i))}: invalid value {item!r}")
            out.append(x)
        return tuple(out)

    def sub(self, key: str) -> "_Reader | None":
        if key not in self.data:
            return None
        return _Reader(self.raw(key), self.path + (key,), self.lines)


def _closed(reader: _Reader, allowed: set[str]) -> None:
    extra = sorted(set(reader.data) - allowed, key=str)
    if extra:
        reader.fail(extra[0], f"unknown key; allowed here: {', '.join(sorted(allowed))}")


@dataclass(frozen=True)
class IntegrationOverrides:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-300
    method: str = "dop853"
    max_steps: int = 5_000_000


@dataclass(frozen=True)
class SampleSpec:
    """Log-spaced output times from ``start`` (default ``t_init``) to ``t_final``."""

    count: int = 2000
    start: float | None = None


@dataclass(frozen=True)
class WindowSpec:
    """Fit window: automatic, fixed ``(lo, hi)``, or the last ``tail_decades`` decades."""

    kind: str = "auto"
    bounds: tuple[float, float] | None = None
    tail_decades: float | None = None

    def resolve(self, t_final: float) -> tuple[float, float] | None:
        if self.kind == "fixed":
            return self.bounds
        if self.kind == "tail":
            return (t_final * 10.0 ** (-self.tail_decades), t_final)
        return None


@dataclass(frozen=True)
class SweepSpec:
    """Grid of ramp rates for exponent tables.

    ``route`` picks the solver per point. ``auto`` uses the closed forms for
    two-site correlators at non-resonant ``nu`` and the RG equations
    otherwise; the RG route stops at ``numeric_t_final`` when that is given.
    """

    nu: tuple[float, ...]
    labels: tuple[str, ...]
    route: str = "auto"
    window: WindowSpec = field(default_factory=WindowSpec)
    numeric_t_final: float | None = None
    fit_start: float | None = None


@dataclass(frozen=True)
class InitialStateSpec:
    preset: str | None = "spin-coherent"
    params: dict = field(default_factory=dict)
    file: str | None = None


@dataclass(frozen=True)
class RunConfig:
    """Validated run document; see the module docstring for the layout."""

    mode: str
    ramp: RampConfig
    n_spins: int
    initial_state: InitialStateSpec
    correlators: tuple[str, ...]
    samples: SampleSpec
    integration: IntegrationOverrides
    sweep: SweepSpec | None = None
    source: str | None = None

    def labels(self) -> list[CorrelatorLabel]:
        return [CorrelatorLabel.from_string(s) for s in self.correlators]

    def sample_times(self):
        import numpy as np

        start = self.samples.start if self.samples.start is not None else self.ramp.t_init
        return np.logspace(math.log10(start), math.log10(self.ramp.t_final), self.samples.count)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc.pop("source", None)
        doc["ramp"]["epsilons"] = list(self.ramp.epsilons)
        return doc

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form; stable across key order and formatting."""
        text = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()


_TOP = {"mode", "nu", "n_spins", "epsilons", "t_init", "t_final", "g_z", "initial_state",
        "correlators", "samples", "integration", "sweep"}


def _parse_initial(reader: _Reader | None) -> InitialStateSpec:
    if reader is None:
        return InitialStateSpec()
    if reader.has("file"):
        _closed(reader, {"file"})
        path = reader.raw("file")
        if not isinstance(path, str) or not path:
            reader.fail("file", "expected a path string")
        return InitialStateSpec(preset=None, file=path)
    preset = reader.choice("preset", tuple(PRESETS), default="spin-coherent")
    allowed = {"maximally-mixed": set(), "spin-coherent": {"theta", "phi"},
               "sector-sum": {"weight", "n_plus"}, "random": {"seed"}}[preset]
    _closed(reader, allowed | {"preset"})
    params = {}
    for key in sorted(allowed):
        if key in ("n_plus", "seed"):
            value = reader.integer(key, minimum=0)
        else:
            value = reader.number(key)
        if value is not None:
            params[key] = value
    return InitialStateSpec(preset=preset, params=params)


def _parse_window(raw, reader: _Reader) -> WindowSpec:
    if raw is None or raw == "auto":
        return WindowSpec()
    if isinstance(raw, list):
        try:
            lo, hi = (float(x) for x in raw)
        except (TypeError, ValueError):
            reader.fail("window", "fixed windows are [t_lo, t_hi]")
        if not 0 < lo < hi:
            reader.fail("window", "need 0 < t_lo < t_hi")
        return WindowSpec("fixed", (lo, hi))
    if isinstance(raw, dict):
        sub = _Reader(raw, reader.path + ("window",), reader.lines)
        _closed(sub, {"tail_decades"})
        dec = sub.number("tail_decades", positive=True, required=True)
        return WindowSpec("tail", tail_decades=dec)
    reader.fail("window", "expected 'auto', [t_lo, t_hi] or {tail_decades: x}")


def _parse_labels(raw, reader: _Reader, key: str, n_spins: int) -> tuple[str, ...]:
    if raw == "all":
        subsets = (c for k in range(1, n_spins + 1) for c in itertools.combinations(range(n_spins), k))
        return tuple(str(lab) for sites in subsets for lab in all_labels(sites))
    if not isinstance(raw, list) or not raw:
        reader.fail(key, "expected 'all' or a non-empty list of labels such as 'z0 +1'")
    out = []
    for i, item in enumerate(raw):
        where = reader.lines.where(reader.path + (key, i))
        if not isinstance(item, str):
            raise ConfigError(f"{where}: labels are strings such as 'z0 +1'")
        try:
            label = CorrelatorLabel.from_string(item)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        if max(label.sites) >= n_spins:
            raise ConfigError(f"{where}: site {max(label.sites)} outside 0..{n_spins - 1}")
        out.append(str(label))
    return tuple(out)


def parse_config(doc: Any, text: str = "", source: str | None = None) -> RunConfig:
    """Validate a parsed YAML document; ``text`` is used only for line numbers."""
    lines = _LineTracker(text)
    top = _Reader(doc, (), lines)
    _closed(top, _TOP)
    mode = top.choice("mode", MODES, default="rg")
    nu = top.number("nu", positive=True, required=True)
    if top.has("n_spins"):
        n_spins = top.integer("n_spins", minimum=1)
    elif top.has("epsilons"):
        n_spins = len(top.data["epsilons"]) if isinstance(top.data["epsilons"], list) else 0
    else:
        top.fail("n_spins", "give n_spins or epsilons")
    eps = top.numbers("epsilons", default=tuple((i + 1) / n_spins for i in range(n_spins)))
    if len(eps) != n_spins:
        top.fail("epsilons", f"{len(eps)} fields for {n_spins} spins")
    t_init = top.number("t_init", default=1e-5, positive=True)
    t_final = top.number("t_final", default=1e2, positive=True)
    g_z = top.number("g_z", default=0.0)
    try:
        ramp = RampConfig(nu=nu, epsilons=eps, t_init=t_init, t_final=t_final, g_z=g_z)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{lines.where(())}: {exc}") from exc

    initial = _parse_initial(top.sub("initial_state"))
    correlators = _parse_labels(top.raw("correlators", "all"), top, "correlators", n_spins)

    samples = SampleSpec()
    sr = top.sub("samples")
    if sr is not None:
        _closed(sr, {"count", "start"})
        samples = SampleSpec(count=sr.integer("count", default=2000, minimum=2),
                             start=sr.number("start", positive=True))
        if samples.start is not None and not t_init <= samples.start < t_final:
            sr.fail("start", "must lie in [t_init, t_final)")

    integration = IntegrationOverrides()
    ir = top.sub("integration")
    if ir is not None:
        _closed(ir, {"rel_tol", "abs_tol", "method", "max_steps"})
        integration = IntegrationOverrides(
            rel_tol=ir.number("rel_tol", default=integration.rel_tol, positive=True),
            abs_tol=ir.number("abs_tol", default=integration.abs_tol, positive=True),
            method=ir.choice("method", tuple(METHODS), default=integration.method),
            max_steps=ir.integer("max_steps", default=integration.max_steps, minimum=1),
        )

    sweep = None
    wr = top.sub("sweep")
    if wr is not None:
        _closed(wr, {"nu", "labels", "route", "window", "numeric_t_final", "fit_start"})
        grid = wr.numbers("nu", positive=True)
        if grid is None:
            wr.fail("nu", "missing required key")
        labels = _parse_labels(wr.raw("labels", list(correlators)), wr, "labels", n_spins)
        sweep = SweepSpec(
            nu=grid,
            labels=labels,
            route=wr.choice("route", ROUTES, default="auto"),
            window=_parse_window(wr.raw("window"), wr),
            numeric_t_final=wr.number("numeric_t_final", positive=True),
            fit_start=wr.number("fit_start", positive=True),
        )
    return RunConfig(mode, ramp, n_spins, initial, correlators, samples, integration, sweep, source)


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a YAML run document."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    cfg = parse_config(doc, text, str(path))
    if cfg.initial_state.file is not None and not Path(cfg.initial_state.file).is_absolute():
        resolved = str((path.parent / cfg.initial_state.file).resolve())
        cfg = RunConfig(cfg.mode, cfg.ramp, cfg.n_spins, InitialStateSpec(preset=None, file=resolved),
                        cfg.correlators, cfg.samples, cfg.integration, cfg.sweep, cfg.source)
    return cfg
