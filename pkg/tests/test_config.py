from pathlib import Path

import pytest
import yaml

from rampdiss.config import load_config, parse_config
from rampdiss.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = """\
mode: rg
nu: 6.0
n_spins: 2
t_init: 1.0e-3
t_final: 10.0
"""


def parse(text):
    return parse_config(yaml.safe_load(text), text)


def test_defaults_fill_in():
    run = parse(BASE)
    assert run.ramp.epsilons == (0.5, 1.0)
    assert run.initial_state.preset == "spin-coherent"
    assert len(run.correlators) == 2 * 3 + 9
    assert run.integration.method == "dop853"
    assert run.sweep is None
    times = run.sample_times()
    assert times[0] == pytest.approx(1e-3) and times[-1] == pytest.approx(10.0)
    assert len(times) == 2000


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match=r"line 6"):
        parse(BASE + "colour: blue\n")
    with pytest.raises(ConfigError, match=r"integration.rtol \(line 7\)"):
        parse(BASE + "integration:\n  rtol: 1.0e-8\n")


@pytest.mark.parametrize("extra,pattern", [
    ("epsilons: [1.0]\n", "1 fields for 2 spins"),
    ("correlators: ['z0 z5']\n", "site 5"),
    ("correlators: ['q0']\n", "correlators.0"),
    ("samples: {count: 1}\n", "at least 2"),
    ("samples: {start: 100.0}\n", "t_init, t_final"),
    ("integration: {method: euler}\n", "dop853"),
    ("initial_state: {preset: random, theta: 1.0}\n", "unknown key"),
    ("sweep: {labels: ['z0 z1']}\n", "sweep.nu"),
    ("sweep: {nu: [1.0, -2.0]}\n", "sweep.nu.1"),
    ("sweep: {nu: [1.0], window: [5.0, 1.0]}\n", "t_lo < t_hi"),
    ("sweep: {nu: [1.0], route: magic}\n", "auto"),
])
def test_validation_errors(extra, pattern):
    with pytest.raises(ConfigError, match=pattern):
        parse(BASE + extra)


def test_required_keys():
    with pytest.raises(ConfigError, match="nu"):
        parse("n_spins: 2\n")
    with pytest.raises(ConfigError, match="n_spins"):
        parse("nu: 2.0\n")
    with pytest.raises(ConfigError, match="positive"):
        parse("nu: -1.0\nn_spins: 1\n")
    with pytest.raises(ConfigError, match="mapping"):
        parse("- 1\n- 2\n")


def test_ramp_errors_become_config_errors():
    with pytest.raises(ConfigError):
        parse(BASE.replace("t_final: 10.0", "t_final: 1.0e-4"))


def test_window_forms():
    run = parse(BASE + "sweep:\n  nu: [1.0]\n  window: {tail_decades: 1.5}\n")
    lo, hi = run.sweep.window.resolve(1e4)
    assert lo == pytest.approx(10 ** 2.5) and hi == 1e4
    fixed = parse(BASE + "sweep:\n  nu: [1.0]\n  window: [10.0, 100.0]\n")
    assert fixed.sweep.window.resolve(1e4) == (10.0, 100.0)
    assert parse(BASE + "sweep: {nu: [1.0]}\n").sweep.window.resolve(1e4) is None


def test_sweep_labels_default_to_correlators():
    run = parse(BASE + "correlators: ['z0 z1']\nsweep: {nu: [1.0, 3.0]}\n")
    assert run.sweep.labels == ("c[z0 z1]",)


def test_digest_ignores_formatting():
    a = parse(BASE)
    b = parse("t_final: 10.0\nt_init: 0.001\nn_spins: 2\nnu: 6\nmode: rg\n")
    assert a.digest() == b.digest()
    assert a.digest() != parse(BASE.replace("nu: 6.0", "nu: 5.0")).digest()


def test_density_file_resolved_next_to_config(tmp_path):
    (tmp_path / "run.yaml").write_text(BASE + "initial_state: {file: rho.json}\n")
    run = load_config(tmp_path / "run.yaml")
    assert run.initial_state.file == str((tmp_path / "rho.json").resolve())


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.yaml")
    (tmp_path / "bad.yaml").write_text("nu: [1, 2\n")
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_config(tmp_path / "bad.yaml")


@pytest.mark.parametrize("path", sorted(CONFIGS.rglob("*.yaml")), ids=lambda p: f"{p.parent.name}/{p.name}")
def test_shipped_configs_validate(path):
    run = load_config(path)
    assert run.source == str(path)
