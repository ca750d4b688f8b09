import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rampdiss.errors import ConfigError
from rampdiss.lindblad import CorrelatorLabel, extract_correlator
from rampdiss.presets import (PRESETS, build_initial_state, correlator_state, load_density_json,
                              maximally_mixed, random_density, save_density_json, sector_sum, spin_coherent)
from rampdiss.rg import slot_of_label, weight_vector


def assert_density(state, n):
    rho = state.matrix()
    assert rho.shape == (2 ** n, 2 ** n)
    assert np.allclose(rho, rho.conj().T, atol=1e-14)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-13)
    assert np.linalg.eigvalsh(rho).min() > -1e-13


@pytest.mark.parametrize("name", sorted(PRESETS))
@pytest.mark.parametrize("n", [1, 2, 3])
def test_every_preset_is_a_density_matrix(name, n):
    state = build_initial_state(name, n, 1e-5)
    assert_density(state, n)
    assert state.time == 1e-5


def test_spin_coherent_single_site_bloch_vector():
    theta, phi = 0.9, 0.3
    state = spin_coherent(1, 1.0, theta=theta, phi=phi)
    # rotating the down state by theta tilts the Bloch vector away from -z
    cz = extract_correlator(state, CorrelatorLabel({0: "z"}))
    assert cz.real == pytest.approx(-np.cos(theta), abs=1e-14)
    cp = extract_correlator(state, CorrelatorLabel({0: "plus"}))
    assert abs(cp) == pytest.approx(np.sin(theta), abs=1e-14)


def test_spin_coherent_is_a_product_state():
    state = spin_coherent(2, 1.0)
    zz = extract_correlator(state, CorrelatorLabel({0: "z", 1: "z"}))
    z0 = extract_correlator(state, CorrelatorLabel({0: "z"}))
    z1 = extract_correlator(state, CorrelatorLabel({1: "z"}))
    assert zz == pytest.approx(z0 * z1, abs=1e-14)


def test_maximally_mixed_has_no_correlations():
    state = maximally_mixed(2, 1.0)
    for text in ("z0", "+1", "z0 z1", "+0 -1"):
        assert extract_correlator(state, CorrelatorLabel.from_string(text)) == 0


def test_sector_sum_single_order_is_symmetric():
    state = sector_sum(2, 1.0, weight=1.0, n_plus=1)
    rho = state.matrix()
    # the triplet |ud> + |du> over sqrt 2
    expected = np.zeros(4)
    expected[[1, 2]] = 1 / np.sqrt(2)
    assert np.allclose(rho, np.outer(expected, expected), atol=1e-14)


def test_sector_sum_validation():
    with pytest.raises(ConfigError):
        sector_sum(2, 1.0, weight=0.0)
    with pytest.raises(ConfigError):
        sector_sum(2, 1.0, n_plus=3)


def test_random_density_is_seeded():
    a = random_density(2, 1.0, seed=4).matrix()
    b = random_density(2, 1.0, seed=4).matrix()
    c = random_density(2, 1.0, seed=5).matrix()
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


def test_build_rejects_unknown_names_and_parameters():
    with pytest.raises(ConfigError):
        build_initial_state("ghz", 2, 1.0)
    with pytest.raises(ConfigError):
        build_initial_state("random", 2, 1.0, theta=1.0)
    with pytest.raises(ConfigError):
        build_initial_state("random", 0, 1.0)


def test_json_round_trip(tmp_path):
    state = random_density(2, 0.5, seed=3)
    path = tmp_path / "rho.json"
    save_density_json(state, path)
    back = load_density_json(path, 0.5)
    assert np.array_equal(back.matrix(), state.matrix())


@pytest.mark.parametrize("doc", [
    "not json",
    json.dumps([[1, 0], [0, 1]]),
    json.dumps({"matrix": [[[2, 0], [0, 0]], [[0, 0], [0, 0]]]}),
    json.dumps({"matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]], [[0, 0], [0, 0]]]}),
])
def test_json_rejects_bad_documents(tmp_path, doc):
    path = tmp_path / "rho.json"
    path.write_text(doc)
    with pytest.raises(ConfigError):
        load_density_json(path, 1.0)


@given(st.integers(0, 10_000), st.integers(1, 3))
def test_correlator_state_reproduces_direct_expectations(seed, n):
    state = random_density(n, 1.0, seed=seed)
    sites = tuple(range(n))
    amps = correlator_state(state, sites).amplitudes
    w = weight_vector(n)
    rng = np.random.default_rng(seed)
    for _ in range(4):
        label = CorrelatorLabel(dict(zip(sites, rng.choice(["z", "plus", "minus"], size=n))))
        slot = slot_of_label(label, sites)
        assert amps[slot] / w[slot] == pytest.approx(extract_correlator(state, label), abs=1e-12)
