import numpy as np
import pytest

from geomgate.core import gate_fidelity
from geomgate.errors import AmplitudeUnreachable, BranchExceeded, CutoffTooLow, UnsupportedGate
from geomgate.pulses import build_schedule
from geomgate.twoqubit import (
    COMPUTATIONAL, DeviceParams, DriveSegment, calibrate_cz, compensate_schedule, delta_a_for_error,
    delta_a_sweep, effective_coupling, equivalent_rabi_error, frame_constants, gate_metrics, index,
    iswap_drive, lab_hamiltonian, modulation_phase, random_device, random_drive, resonance_select,
    rotating_frame_unitary, rotating_hamiltonian, sideband_expansion, simulate_two_qubit,
)

PI = np.pi
P = DeviceParams()
W = resonance_select(P, "iswap")


@pytest.fixture(scope="module")
def sr_iswap():
    drive = iswap_drive("SR_NGQG", P)
    return drive, simulate_two_qubit(P, drive, trace_samples=101)


def test_device_guards():
    with pytest.raises(ValueError):
        DeviceParams(anh1=1.0)
    with pytest.raises(ValueError):
        DeviceParams(levels_per_qubit=4)
    with pytest.warns(UserWarning):
        DeviceParams(g12=2 * PI * 200e6)
    with pytest.raises(ValueError):
        DriveSegment(1.0, 0.0, 0.0, 1.0)


def test_lab_hamiltonian_examples():
    h = lab_hamiltonian(P, DriveSegment(0.0, W, 0.0, 1e-8), 3e-9)
    assert h[index(1, 1), index(1, 1)].real == pytest.approx(P.omega1 + P.omega2, rel=1e-14)
    assert h[index(2, 0), index(1, 1)] == pytest.approx(np.sqrt(2) * P.g12)
    assert h[index(1, 0), index(0, 1)] == pytest.approx(P.g12)
    assert np.allclose(h, h.conj().T)


def test_lab_modulation_acts_on_first_qubit():
    d = DriveSegment(W, W, PI / 2, 1e-8)
    h = lab_hamiltonian(P, d, 0.0) - lab_hamiltonian(P, DriveSegment(0.0, W, 0.0, 1e-8), 0.0)
    assert np.allclose(np.diag(h).real, W * np.array([0, 0, 0, 1, 1, 1, 2, 2, 2]))


def test_modulation_phase_example():
    drive = [DriveSegment(W, W, 0.0, PI / W)]
    assert modulation_phase(drive, PI / W) == pytest.approx(2.0, abs=1e-12)
    assert modulation_phase(drive, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_modulation_phase_continuous_across_boundaries(rng):
    drive = random_drive(P, rng, segments=3)
    t = np.cumsum([d.duration for d in drive])[:-1]
    for tb in t:
        assert modulation_phase(drive, tb - 1e-15) == pytest.approx(modulation_phase(drive, tb + 1e-15), abs=1e-5)
    assert len(frame_constants(drive)) == 3


def test_frame_is_diagonal_unitary():
    u = rotating_frame_unitary(P, iswap_drive("SR_NGQG", P), 2e-9)
    assert np.allclose(u, np.diag(np.diag(u)))
    assert np.allclose(np.abs(np.diag(u)), 1.0)


@pytest.mark.parametrize("t", [0.7e-9, 5.1e-9, 11.9e-9, 18.3e-9])
def test_rotating_hamiltonian_methods_agree(t):
    drive = iswap_drive("SR_NGQG", P)
    exact = rotating_hamiltonian(P, drive, t, "Exact")
    analytic = rotating_hamiltonian(P, drive, t, "Analytic", cutoff=20)
    fd = rotating_hamiltonian(P, drive, t, "FrameTransform")
    assert np.abs(analytic - exact).max() < 1e-6 * P.g12
    assert np.abs(fd - exact).max() < 1e-6 * P.g12
    with pytest.raises(ValueError):
        rotating_hamiltonian(P, drive, t, "Euler")


def test_sideband_zero_amplitude_keeps_only_carrier():
    drive = [DriveSegment(0.0, W, 0.0, 1e-8)]
    terms = [t for t in sideband_expansion(P, drive, 0).terms if abs(t.coefficient) > 0]
    assert terms and all(t.order == 0 for t in terms)


def test_sideband_cutoff_guard():
    drive = [DriveSegment(1.5 * W, W, 0.0, 1e-8)]
    with pytest.raises(CutoffTooLow):
        sideband_expansion(P, drive, 0, cutoff=3)
    assert sideband_expansion(P, drive, 0, cutoff=20).tail < 1e-10


def test_minimal_families_subset():
    drive = iswap_drive("SR_NGQG", P)
    assert len(sideband_expansion(P, drive, 0, 12, "minimal").terms) == 3 * 25
    with pytest.raises(ValueError):
        sideband_expansion(P, drive, 0, 12, "some")


def test_resonance_select_values():
    assert resonance_select(P, "iswap") == pytest.approx(2 * PI * 0.6e9)
    assert resonance_select(P, "CZ") == pytest.approx(2 * PI * 0.37e9)
    with pytest.raises(UnsupportedGate):
        resonance_select(P, "cnot")


def test_effective_coupling_is_resonant_sideband():
    drive = iswap_drive("SR_NGQG", P)
    pair = (index(1, 0), index(0, 1))
    for m in range(len(drive)):
        res = [t.coefficient for t in sideband_expansion(P, drive, m).terms
               if t.transition == pair and abs(t.oscillation_freq) < 1e-3 * P.g12]
        assert len(res) == 1
        assert effective_coupling(P, drive, m, "iswap") == pytest.approx(res[0], abs=1e-9 * P.g12)


def test_compensation_back_substitution():
    ideal = build_schedule("SR_NGQG", "X")
    drive = compensate_schedule(ideal, P, "iswap")
    for m, (seg, d) in enumerate(zip(ideal.segments, drive)):
        c = effective_coupling(P, drive, m, "iswap")
        tau = d.duration
        # <10|H|01> plays <1|H0|0> = (Omega/2) e^{i phi}
        assert 2 * abs(c) == pytest.approx(seg.area / tau, rel=1e-9)
        assert np.angle(np.exp(1j * (np.angle(c) - seg.phase))) == pytest.approx(0, abs=1e-9)
        assert np.angle(np.exp(1j * (d.compensated_phase - seg.phase))) == pytest.approx(0, abs=1e-9)


def test_first_segment_has_no_compensation_offset():
    ideal = build_schedule("SR_NGQG", "X")
    unc = compensate_schedule(ideal, P, "iswap", compensate=False)
    assert unc[0].phase == pytest.approx(ideal.segments[0].phase + PI / 2)


def test_amplitude_unreachable():
    with pytest.raises(AmplitudeUnreachable):
        compensate_schedule(build_schedule("SR_NGQG", "X"), P, "iswap", omega0=2 * PI * 80e6)


def test_shaped_phase_schedule_rejected():
    with pytest.raises(UnsupportedGate):
        compensate_schedule(build_schedule("SSSP", "X"), P, "iswap")


def test_sr_iswap_fidelity(sr_iswap):
    _, res = sr_iswap
    f = gate_metrics(res, "iswap")["fidelity"]
    assert 0.99 <= f < 1 - 1e-5
    assert res.max_unitarity_defect < 1e-8 and res.halving_change < 1e-8
    pops = res.populations(index(0, 1))
    assert pops[0, index(0, 1)] == pytest.approx(1.0)
    assert pops[-1, index(1, 0)] > 0.98


def test_population_stays_in_computational_space(sr_iswap):
    _, res = sr_iswap
    pops = res.populations(index(0, 1))
    assert np.all(pops[:, list(COMPUTATIONAL)].sum(axis=1) > 0.98)


@pytest.mark.parametrize("scheme", ["NGQG_P2", "DYNAMICAL"])
def test_other_iswap_variants(scheme):
    res = simulate_two_qubit(P, iswap_drive(scheme, P))
    assert 0.99 <= gate_metrics(res, "iswap")["fidelity"] < 1 - 1e-5


def test_compensation_matters():
    res_c = simulate_two_qubit(P, iswap_drive("SR_NGQG", P))
    res_u = simulate_two_qubit(P, iswap_drive("SR_NGQG", P, compensate=False))
    inf_c = 1 - gate_metrics(res_c, "iswap")["fidelity"]
    inf_u = 1 - gate_metrics(res_u, "iswap")["fidelity"]
    assert inf_u >= 10 * inf_c


def test_cz_calibration():
    gamma, res = calibrate_cz(P)
    m = gate_metrics(res, "cz")
    assert abs(np.angle(np.exp(1j * (m["conditional_phase"] - PI)))) < 0.02
    assert m["z_corrected_fidelity"] > 0.99


def test_zero_drive_transfer_bound():
    res = simulate_two_qubit(P, [DriveSegment(0.0, W, 0.0, 200e-9)], trace_samples=200)
    transfer = res.populations(index(0, 1))[:, index(1, 0)]
    assert transfer.max() <= (2 * P.g12 / (P.omega2 - P.omega1)) ** 2


@pytest.mark.parametrize("seed", [0, 1])
def test_lab_and_rotating_frames_agree(seed):
    rng = np.random.default_rng(seed)
    params = random_device(rng)
    drive = random_drive(params, rng)
    rot = simulate_two_qubit(params, drive).final_unitary
    lab = simulate_two_qubit(params, drive, frame="lab").final_unitary
    assert np.abs(rot - lab).max() < 1e-5
    assert gate_fidelity(rot, lab) > 1 - 1e-8


def test_equivalent_error_round_trip():
    d = iswap_drive("SR_NGQG", P)[0]
    for err in (-0.1, -0.03, 0.05, 0.1):
        da = delta_a_for_error(d.amplitude, d.mod_freq, err)
        assert equivalent_rabi_error(d.amplitude, d.mod_freq, da)[0] == pytest.approx(err, abs=1e-10)
    with pytest.raises(BranchExceeded):
        delta_a_for_error(d.amplitude, d.mod_freq, 5.0)


def test_delta_a_sweep_branch_guard():
    drive = iswap_drive("SR_NGQG", P)
    with pytest.raises(BranchExceeded):
        delta_a_sweep(P, drive, [-10 * W])


def test_delta_a_sweep_shape():
    drive = iswap_drive("DYNAMICAL", P)
    sw = delta_a_sweep(P, drive, [0.0, 0.01 * W])
    assert sw.fidelities.shape == (2,) and sw.equivalent_error[0] == 0.0
    assert sw.variation >= 0.0


def test_simulation_deterministic():
    drive = iswap_drive("NGQG_P1", P)
    a = simulate_two_qubit(P, drive).final_unitary
    b = simulate_two_qubit(P, drive).final_unitary
    assert np.array_equal(a, b)
