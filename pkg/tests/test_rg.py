import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rampdiss.errors import DimensionError, FrameError
from rampdiss.lindblad import CorrelatorLabel, RampConfig, all_labels, correlator_tensor, evolve_density
from rampdiss.presets import correlator_state, random_density
from rampdiss.rg import (CorrelatorState, RGGenerator, SectorLabel, basis_magnetization, build_rg_generator,
                         comoving_transform, evolve_correlators, label_to_state, pseudo_vacuum_raised,
                         sector_indices, sector_project, slot_of_label, state_to_label, tensor_to_amplitudes,
                         weight_vector)
from rampdiss.spin_algebra import SparseComplexOperator


def jz_operator(n):
    return SparseComplexOperator.diagonal(basis_magnetization(n).astype(float))


def test_single_site_generator_is_diagonal():
    eps, t = 0.8, 0.5
    cfg = RampConfig(3.0, [eps])
    L = build_rg_generator(cfg, [0], t).to_dense()
    g = cfg.g(t)
    # slots (+1, 0, -1) carry (c_-, c_z, c_+)
    assert np.allclose(L, np.diag([-2j * eps - g, -2 * g, 2j * eps - g]), atol=1e-15)


def test_two_site_block_sizes():
    cfg = RampConfig(6.0, [0.5, 1.0])
    L = build_rg_generator(cfg, [0, 1], 2.0)
    sizes = [sector_project(L, 2, jz)[0].shape[0] for jz in (2, 1, 0, -1, -2)]
    assert sizes == [1, 2, 3, 2, 1]
    assert list(sector_indices(2, 0)) == [2, 4, 6]
    assert list(sector_indices(2, 2)) == [0]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("frame_term", [True, False])
def test_generator_conserves_magnetization_exactly(n, frame_term):
    cfg = RampConfig(1.7, [(i + 1) / n for i in range(n)])
    L = build_rg_generator(cfg, list(range(n)), 0.3, include_ig_term=frame_term)
    J = jz_operator(n)
    assert (L @ J - J @ L).max_abs() == 0.0
    mag = basis_magnetization(n)
    for r, c, _ in L.entries:
        assert mag[r] == mag[c]


def test_sector_label_bounds():
    assert SectorLabel.from_n_plus(3, 1).jz == -2
    with pytest.raises(DimensionError):
        SectorLabel(2, 3)


def test_comoving_transform_examples():
    nu, t0 = 4.0, 1e-3
    cfg = RampConfig(nu, [1.0], t_init=t0)
    t = math.exp(nu) * t0
    lab = CorrelatorState([1.0, 1.0, 1.0], t)
    co = comoving_transform(lab, cfg, "to_comoving")
    assert co.frame == "comoving"
    # |0> untouched; |+1> scaled by (t/t_init)^(-1/nu) = e^-1
    assert co.amplitudes[1] == 1.0
    assert co.amplitudes[0] == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert co.amplitudes[2] == pytest.approx(math.e, rel=1e-14)
    back = comoving_transform(co, cfg, "to_lab")
    assert np.max(np.abs(back.amplitudes - lab.amplitudes)) < 1e-14
    with pytest.raises(FrameError):
        comoving_transform(co, cfg, "to_comoving")


def test_label_to_state_examples():
    s = label_to_state({CorrelatorLabel.from_string("zzz"): 1.0})
    assert s.amplitudes[slot_of_label(CorrelatorLabel.from_string("zzz"), (0, 1, 2))] == 1.0
    assert np.count_nonzero(s.amplitudes) == 1
    plus = label_to_state({CorrelatorLabel({0: "plus"}): 1.0})
    assert np.allclose(plus.amplitudes, [0, 0, 1 / math.sqrt(2)])
    minus = label_to_state({CorrelatorLabel({0: "minus"}): 1.0})
    assert np.allclose(minus.amplitudes, [-1 / math.sqrt(2), 0, 0])
    back = state_to_label(CorrelatorState([-1 / math.sqrt(2), 0, 0], 0.0))
    assert back[CorrelatorLabel({0: "minus"})] == pytest.approx(1.0)


def test_weight_vector_is_product_of_site_weights():
    w1 = weight_vector(1)
    assert np.allclose(w1, [-1 / math.sqrt(2), 1.0, 1 / math.sqrt(2)])
    assert np.allclose(weight_vector(3), np.kron(np.kron(w1, w1), w1))
    with pytest.raises(ValueError):
        weight_vector(2)[0] = 0.0


@given(st.integers(1, 3), st.data())
def test_label_round_trip(n, data):
    sites = tuple(sorted(data.draw(st.sets(st.integers(0, 6), min_size=n, max_size=n))))
    values = {lab: complex(data.draw(st.floats(-2, 2)), data.draw(st.floats(-2, 2)))
              for lab in all_labels(sites)}
    back = state_to_label(label_to_state(values))
    for lab, v in values.items():
        assert back[lab] == pytest.approx(v, abs=1e-15)


def test_pseudo_vacuum_raised_sectors():
    for n, n_plus in [(2, 1), (3, 2), (3, 4)]:
        vec = pseudo_vacuum_raised(n, n_plus)
        assert np.linalg.norm(vec) == pytest.approx(1.0)
        support = np.flatnonzero(np.abs(vec) > 0)
        assert set(basis_magnetization(n)[support]) == {n_plus - n}
    with pytest.raises(DimensionError):
        pseudo_vacuum_raised(2, 5)


def test_bad_amplitude_length_rejected():
    with pytest.raises(DimensionError):
        CorrelatorState(np.zeros(4), 0.0)
    with pytest.raises(FrameError):
        CorrelatorState(np.zeros(3), 0.0, frame="rotating")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_frame_equivalence(n, rng):
    cfg = RampConfig(2.5, [(i + 1) / n for i in range(n)], t_init=1e-3, t_final=100.0)
    amps = rng.normal(size=3 ** n) + 1j * rng.normal(size=3 ** n)
    times = np.geomspace(1e-3, 100.0, 7)
    lab0 = CorrelatorState(amps, 1e-3)
    lab = evolve_correlators(cfg, lab0, times, rel_tol=1e-12, abs_tol=1e-14)
    co0 = comoving_transform(lab0, cfg, "to_comoving")
    co = evolve_correlators(cfg, co0, times, rel_tol=1e-12, abs_tol=1e-14)
    for a, b in zip(lab, co):
        again = comoving_transform(b, cfg, "to_lab")
        assert np.max(np.abs(again.amplitudes - a.amplitudes)) < 1e-9


def test_sector_restriction_leaves_others_zero(rng):
    cfg = RampConfig(6.0, [0.5, 1.0], t_init=1e-2, t_final=10.0)
    amps = rng.normal(size=9) + 0j
    out = evolve_correlators(cfg, CorrelatorState(amps, 1e-2), [1.0, 10.0], sectors=[0])
    outside = np.setdiff1d(np.arange(9), sector_indices(2, 0))
    assert np.all(out[-1].amplitudes[outside] == 0)
    joint = evolve_correlators(cfg, CorrelatorState(amps, 1e-2), [1.0, 10.0], blockwise=False)
    split = evolve_correlators(cfg, CorrelatorState(amps, 1e-2), [1.0, 10.0], blockwise=True)
    assert np.max(np.abs(joint[-1].amplitudes - split[-1].amplitudes)) < 1e-9


def test_generator_rejects_unknown_sites():
    cfg = RampConfig(6.0, [0.5, 1.0])
    with pytest.raises(DimensionError):
        RGGenerator(cfg, [0, 2])
    with pytest.raises(DimensionError):
        RGGenerator(cfg, [1, 1])


@settings(max_examples=6)
@given(st.integers(1, 4), st.integers(0, 2 ** 31), st.sampled_from([0.7, 2.0, 6.0]))
def test_mapping_equivalence_with_lindblad(n_spins, seed, nu):
    t0 = 1e-3
    cfg = RampConfig(nu, [(i + 1) / n_spins for i in range(n_spins)], t_init=t0, t_final=10.0)
    rho0 = random_density(n_spins, t0, seed=seed)
    times = np.geomspace(t0, 10.0, 5)
    states = evolve_density(cfg, rho0, times, rel_tol=1e-11, abs_tol=1e-13)
    sites = list(range(n_spins))
    rg = evolve_correlators(cfg, correlator_state(rho0, sites), times, rel_tol=1e-11, abs_tol=1e-13)
    for rho, amp in zip(states, rg):
        expected = tensor_to_amplitudes(correlator_tensor(rho, sites))
        assert np.max(np.abs(amp.amplitudes - expected)) < 1e-7
