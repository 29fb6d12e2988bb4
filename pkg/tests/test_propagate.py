import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from galerkin_gates import controls, models
from galerkin_gates.controls import PiecewiseConstantControl
from galerkin_gates.errors import DomainError
from galerkin_gates.models import QuantumModel
from galerkin_gates.propagate import (
    commutator_deviation,
    compress,
    gate_fidelities,
    propagate,
    two_sided_deviation,
)

OSC0 = QuantumModel.oscillator(eta=0.0)
OSC1 = QuantumModel.oscillator(eta=1.0)
WELL = QuantumModel.well()


def random_control(rng, n_steps, amp=0.3):
    return PiecewiseConstantControl(rng.uniform(0.05, 0.5, n_steps), rng.uniform(-amp, amp, n_steps))


def test_compress_oscillator_three_levels():
    sys = compress(OSC0, 3)
    np.testing.assert_array_equal(sys.a_diag, [-0.5j, -1.5j, -2.5j])
    s2 = math.sqrt(2)
    expected = np.array([[0, -1j, 0], [-1j, 0, -1j * s2], [0, -1j * s2, 0]])
    np.testing.assert_allclose(sys.b_mat, expected, atol=1e-15)


def test_compress_well_three_levels():
    b = compress(WELL, 3).b_mat
    assert b[0, 1] == pytest.approx(-4j / 9, abs=1e-16)
    assert b[1, 2] == pytest.approx(-12j / 25, abs=1e-16)
    assert b[0, 2] == 0


def test_compress_structure():
    so = compress(OSC1, 50)
    assert np.all(so.a_diag.real == 0)
    assert np.array_equal(np.triu(so.b_mat, 2), np.zeros((50, 50)))
    sw = compress(WELL, 50)
    assert np.max(np.abs(sw.b_mat + sw.b_mat.conj().T)) <= 1e-12
    with pytest.raises(DomainError):
        compress(WELL, 1)


def test_zero_control_is_pure_phase():
    sys = compress(OSC1, 10)
    u = PiecewiseConstantControl([0.7, 1.3, 2.0], [0.0, 0.0, 0.0])
    traj = propagate(sys, u, initial=[2])
    lam2 = models.eigenvalue(OSC1, 2)
    for t, psi in zip(traj.sample_times, traj.states[0]):
        expected = np.zeros(10, dtype=complex)
        expected[1] = np.exp(-1j * lam2 * t)
        np.testing.assert_allclose(psi, expected, atol=1e-13)
    assert traj.commutator_sup == 0
    assert commutator_deviation(traj) == 0


def test_rabi_two_level_oracle():
    # two-level well at large gap; rotating-frame population sin^2(a |b| t / 2)
    model = QuantumModel.well(eigenvalue_scale=10.0)
    sys = compress(model, 2)
    a = 0.1
    spec = controls.synthesize_resonant_transfer(model, 1, 2, a)
    traj = propagate(sys, spec.discretize(1e-3), initial=[1], sample_every=1.0)
    b = abs(models.coupling(model, 1, 2))
    pop = np.abs(traj.states[0, :, 1]) ** 2
    rabi = np.sin(a * b * traj.sample_times / 2) ** 2
    assert np.max(np.abs(pop - rabi)) <= 1e-3
    assert pop[-1] > 0.999


def test_norm_conservation_and_unitarity():
    rng = np.random.default_rng(0)
    sys = compress(WELL, 30)
    traj = propagate(sys, random_control(rng, 200, amp=2.0))
    np.testing.assert_allclose(traj.norms(), 1.0, atol=1e-8)
    X = traj.final_propagator
    assert np.linalg.norm(X @ X.conj().T - np.eye(30), 2) <= 1e-8


def test_composition_at_breakpoint():
    rng = np.random.default_rng(1)
    sys = compress(OSC1, 25)
    u = random_control(rng, 60)
    first = PiecewiseConstantControl(u.durations[:30], u.amplitudes[:30])
    second = PiecewiseConstantControl(u.durations[30:], u.amplitudes[30:])
    whole = propagate(sys, u).final_propagator
    split = propagate(sys, second).final_propagator @ propagate(sys, first).final_propagator
    assert np.max(np.abs(whole - split)) <= 1e-9


def test_matches_naive_product_of_exponentials():
    from scipy.linalg import expm

    rng = np.random.default_rng(2)
    sys = compress(WELL, 8)
    u = random_control(rng, 15, amp=1.0)
    X = np.eye(8, dtype=complex)
    A = np.diag(sys.a_diag)
    for d, a in u.steps:
        X = expm(d * (A + a * sys.b_mat)) @ X
    np.testing.assert_allclose(propagate(sys, u).final_propagator, X, atol=1e-11)


def test_initial_vectors_and_labels():
    sys = compress(WELL, 6)
    v = np.ones(6) / math.sqrt(6)
    traj = propagate(sys, random_control(np.random.default_rng(3), 5), initial=[1, v])
    assert traj.labels == ["phi1", "psi2"]
    np.testing.assert_allclose(traj.states[1, -1], traj.final_propagator @ v, atol=1e-13)
    with pytest.raises(DomainError):
        propagate(sys, PiecewiseConstantControl([1.0], [0.0]), initial=[7])
    with pytest.raises(DomainError):
        propagate(sys, PiecewiseConstantControl([1.0], [0.0]), initial=[np.ones(6)])
    with pytest.raises(DomainError):
        propagate(sys, PiecewiseConstantControl([1.0], [0.0]), initial=[np.ones(5) / math.sqrt(5)])


def test_sampling_grid_does_not_change_the_result():
    rng = np.random.default_rng(4)
    sys = compress(WELL, 12)
    u = random_control(rng, 40)
    plain = propagate(sys, u)
    gridded = propagate(sys, u, sample_every=0.13)
    np.testing.assert_allclose(gridded.final_propagator, plain.final_propagator, atol=1e-12)
    k = np.arange(1, int(u.total_duration / 0.13) + 1) * 0.13
    assert np.all(np.isin(np.round(k, 9), np.round(gridded.sample_times, 9)))
    assert gridded.sample_times[0] == 0
    assert gridded.sample_times[-1] == pytest.approx(u.total_duration)
    assert np.all(np.diff(gridded.sample_times) > 0)
    # breakpoints stay in the commutator record
    assert gridded.commutator_sup >= plain.commutator_sup - 1e-15


def test_breakpoint_sampling_by_default():
    u = controls.pulse_train(1.0, 0.25, 1.0, 4)
    traj = propagate(compress(OSC1, 6), u)
    np.testing.assert_allclose(traj.sample_times, u.breakpoints)


def test_exp_cache_reuse():
    sys = compress(OSC1, 20)
    propagate(sys, controls.pulse_train(4 * math.pi, 5e-3, 1.0, 50))
    info = sys.cache_info()
    assert info.misses == 2
    assert info.hits == 98


def test_block_and_full_commutator_routes_agree():
    rng = np.random.default_rng(5)
    sys = compress(WELL, 15)
    u = random_control(rng, 30, amp=1.0)
    traj = propagate(sys, u)
    prefixes = []
    X = np.eye(15, dtype=complex)
    for d, a in u.steps:
        X = sys.step_unitary(a, d) @ X
        prefixes.append(X.copy())
    assert commutator_deviation(prefixes, 3) == pytest.approx(traj.commutator_sup, rel=1e-7)
    assert commutator_deviation(traj, 3) == pytest.approx(traj.commutator[-1], rel=1e-7)


def test_commutator_block_size_check():
    with pytest.raises(DomainError):
        commutator_deviation(np.eye(2), 3)


def test_two_sided_doubling():
    assert two_sided_deviation(1.3e-3) == 2.6e-3


def test_gate_fidelities_identity():
    fid = gate_fidelities(np.eye(5), [1, 2, 3])
    assert fid.values == [1.0, 1.0, 1.0]
    np.testing.assert_array_equal(fid.moduli, np.eye(3))


def test_gate_fidelities_permutation_reading():
    X = np.zeros((4, 4))
    X[2, 0] = X[0, 1] = X[1, 2] = X[3, 3] = 1.0
    fid = gate_fidelities(X, [3, 1, 2])
    assert fid.transitions == [(1, 3, 1.0), (2, 1, 1.0), (3, 2, 1.0)]
    with pytest.raises(DomainError):
        gate_fidelities(X, [1, 1, 2])


def test_corner_of_unitary_is_substochastic():
    rng = np.random.default_rng(6)
    traj = propagate(compress(WELL, 10), random_control(rng, 50, amp=2.0))
    sq = gate_fidelities(traj, [1, 2, 3]).moduli ** 2
    assert np.all(sq.sum(axis=0) <= 1 + 1e-12)
    assert np.all(sq.sum(axis=1) <= 1 + 1e-12)


def test_concurrent_propagation_shares_cache_safely():
    rng = np.random.default_rng(7)
    sys = compress(WELL, 20)
    jobs = [controls.concat(random_control(rng, 20), controls.pulse_train(1.0, 0.1, 0.5, 20)) for _ in range(8)]
    serial = [propagate(compress(WELL, 20), u).final_propagator for u in jobs]
    with ThreadPoolExecutor(4) as pool:
        threaded = list(pool.map(lambda u: propagate(sys, u).final_propagator, jobs))
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a, b)


def test_well_gate_commutator_record(well_gate_run):
    report, traj, _ = well_gate_run
    # frozen from the reproduced well experiment
    assert traj.commutator_sup == pytest.approx(0.0370, abs=5e-4)
    assert report.commutator_two_sided == 2 * report.commutator_sup
