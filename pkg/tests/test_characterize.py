import numpy as np
import pytest
from hypothesis import given, strategies as st

from geomgate.characterize import (
    CLIFFORDS, ProcessMatrix, chi_of_unitary, depolarizing, fit_decay, interleaved_gate_fidelity,
    process_to_average_fidelity, qpt, rb_run, same_up_to_phase, unitary_channel,
)
from geomgate.core import SX, gate_fidelity, random_unitary, rotation
from geomgate.errors import FitFailure, UnphysicalChannel
from geomgate.evolution import ErrorModel, evolve
from geomgate.pulses import build_schedule, ideal_gate

PI = np.pi


def test_qpt_identity():
    chi = qpt(np.eye(2)).chi
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    assert np.allclose(chi, expected, atol=1e-12)


def test_qpt_x_gate_weight_on_x():
    chi = qpt(SX).chi
    assert chi[1, 1].real == pytest.approx(1.0, abs=1e-12)
    assert np.trace(chi).real == pytest.approx(1.0, abs=1e-12)


def test_qpt_depolarizing():
    q = 0.3
    chi = qpt(depolarizing(q)).chi
    assert chi[0, 0].real == pytest.approx(1 - 3 * q / 4, abs=1e-12)
    for k in (1, 2, 3):
        assert chi[k, k].real == pytest.approx(q / 4, abs=1e-12)


def test_qpt_kraus_input():
    q = 0.2
    kraus = np.array([np.sqrt(1 - q) * np.eye(2), np.sqrt(q) * SX])
    chi = qpt(kraus).chi
    assert chi[0, 0].real == pytest.approx(1 - q) and chi[1, 1].real == pytest.approx(q)


def test_qpt_round_trip_100_random_unitaries():
    rng = np.random.default_rng(7)
    for _ in range(100):
        u = random_unitary(2, rng)
        assert qpt(u).fidelity(u) > 1 - 1e-9
        assert np.allclose(qpt(u).chi, chi_of_unitary(u), atol=1e-12)


def test_qpt_rejects_unphysical():
    with pytest.raises(UnphysicalChannel):
        qpt(lambda rho: rho.T * 1.5 - 0.25 * np.trace(rho) * np.eye(2))


def test_qpt_with_shots_is_seeded():
    a = qpt(SX, shots=2000, seed=3, check_physical=False).chi
    b = qpt(SX, shots=2000, seed=3, check_physical=False).chi
    assert np.array_equal(a, b)
    assert ProcessMatrix(a).fidelity(SX) > 0.95


@pytest.mark.parametrize("gate", ["X", "X_half"])
def test_sr_process_fidelity_matches_unitary_fidelity(gate):
    u = evolve(build_schedule("SR_NGQG", gate), ErrorModel(0.1)).final_unitary
    fp = qpt(unitary_channel(u)).fidelity(ideal_gate(gate))
    # for unitaries F_p = |Tr(U^dag V)/d|^2
    assert fp == pytest.approx(gate_fidelity(u, ideal_gate(gate)) ** 2, abs=1e-12)


def test_sr_x_process_fidelity_frozen():
    u = evolve(build_schedule("SR_NGQG", "X"), ErrorModel(0.1)).final_unitary
    fp = qpt(unitary_channel(u)).fidelity(ideal_gate("X"))
    # fourth-order remainder only; frozen value 1 - 4.53e-4
    assert fp == pytest.approx(0.9995472, abs=1e-6)


def test_average_fidelity_conversion():
    assert process_to_average_fidelity(1.0) == 1.0
    assert process_to_average_fidelity(0.25) == pytest.approx(0.5)


def test_clifford_group_closure():
    assert len(CLIFFORDS) == 24
    for i in range(24):
        for j in range(i):
            assert not same_up_to_phase(CLIFFORDS[i], CLIFFORDS[j])
    for a in CLIFFORDS:
        for b in CLIFFORDS:
            assert sum(same_up_to_phase(a @ b, c) for c in CLIFFORDS) == 1


def test_rb_error_free():
    res = rb_run([1, 8, 32, 128], sequences_per_length=10)
    assert np.all(np.abs(res.sequence_fidelities - 1) < 1e-12)
    assert res.sequence_fidelities[0] - res.sequence_fidelities[-1] < 1e-4
    assert res.decay_p == 1.0


def test_rb_exact_depolarizing_recovers_p():
    q = 0.01
    res = rb_run([1, 4, 16, 64, 128], sequences_per_length=10, depolarizing_q=q)
    assert abs(res.decay_p - (1 - q)) < 1e-12


def test_rb_shots_within_two_sigma():
    q = 0.01
    res = rb_run([1, 4, 16, 64, 128], sequences_per_length=40, depolarizing_q=q, seed=0, shots=200)
    assert abs(res.decay_p - (1 - q)) < 2 * res.p_stderr


def test_rb_deterministic():
    kw = dict(sequences_per_length=10, depolarizing_q=0.02, seed=5, shots=100)
    a = rb_run([1, 10, 40], **kw)
    b = rb_run([1, 10, 40], **kw)
    assert np.array_equal(a.sequence_fidelities, b.sequence_fidelities)


def test_rb_argument_guards():
    with pytest.raises(ValueError):
        rb_run([4], sequences_per_length=10)
    with pytest.raises(ValueError):
        rb_run([1, 4], sequences_per_length=5)
    with pytest.raises(ValueError):
        depolarizing(1.5)


def test_interleaved_ideal_gate_gap():
    ref = rb_run([1, 8, 32, 64], sequences_per_length=10, depolarizing_q=0.005)
    x = ideal_gate("X")
    inter = rb_run([1, 8, 32, 64], sequences_per_length=10, depolarizing_q=0.005, interleaved=x)
    assert 1 - interleaved_gate_fidelity(ref, inter) < 1e-4


def test_interleaved_detects_overrotation():
    ref = rb_run([1, 8, 32, 64], sequences_per_length=10, depolarizing_q=0.001)
    bad = rotation(PI * 1.1, [1, 0, 0])
    inter = rb_run([1, 8, 32, 64], sequences_per_length=10, depolarizing_q=0.001,
                   interleaved=bad, interleaved_ideal=ideal_gate("X"))
    assert interleaved_gate_fidelity(ref, inter) < 0.999


@given(p=st.floats(0.8, 0.999), a=st.floats(0.3, 0.6))
def test_fit_decay_recovers_parameters(p, a):
    m = np.array([1, 2, 5, 10, 20, 50, 100])
    got_p, _, got_a, got_b = fit_decay(m, a * p**m + 0.5)
    assert got_p == pytest.approx(p, abs=1e-6)


def test_fit_decay_failure(monkeypatch):
    from geomgate import characterize

    def boom(*args, **kwargs):
        raise RuntimeError("no convergence")

    monkeypatch.setattr(characterize, "curve_fit", boom)
    with pytest.raises(FitFailure):
        fit_decay([1, 2, 3], [0.9, 0.8, 0.7])
