import numpy as np
import pytest
from hypothesis import given, strategies as st

from geomgate.core import SX, bloch_vector, gate_fidelity
from geomgate.errors import BoundaryTime, SingularPath
from geomgate.evolution import evolve
from geomgate.geometry import (
    PathSegment, PathSpec, ak_matrices, auxiliary_states, bloch_trajectory, constraint_residual,
    drive_from_path, dynamical_phase_check, geometric_phase, jump_bookkeeping_gate,
    path_from_schedule, path_gate, path_to_pulse, robustness_integral, total_phase,
)
from geomgate.pulses import GATES, Envelope, PulseSchedule, PulseSegment, build_schedule

PI = np.pi


def _custom(duration, alpha_inc, dalpha, lam, dlam):
    return PathSegment(duration, alpha_inc, dalpha, lam, dlam)


@given(a=st.floats(-7, 7), lam=st.floats(-7, 7))
def test_auxiliary_frame_orthonormal(a, lam):
    x1, x2 = auxiliary_states(a, lam)
    assert abs(np.vdot(x1, x2)) < 1e-12
    assert np.linalg.norm(x1) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(x2) == pytest.approx(1.0, abs=1e-12)


def test_sr_x_path_to_pulse_reproduces_table():
    s = build_schedule("SR_NGQG", "X")
    out = path_to_pulse(path_from_schedule(s), gate="X")
    for a, b in zip(out.segments, s.segments):
        assert a.duration == pytest.approx(b.duration)
        assert np.angle(np.exp(1j * (a.phase - b.phase))) == pytest.approx(0, abs=1e-12)
        assert a.envelope == b.envelope
        assert a.phase - a.path_lambda == pytest.approx(PI / 2, abs=1e-12)


def test_idle_segment_gives_zero_drive():
    path = PathSpec((PathSegment.idle(1.0, 0.3),), 0.4)
    omega, _ = drive_from_path(path, 0.5)
    assert omega == 0.0


def test_sin_squared_family_drive_equals_alpha_dot():
    # d/dt(t/2 - sin(2t)/4) = sin^2 t
    path = PathSpec((PathSegment.sin_squared(PI, 1.0, 0.0),), 0.0)
    for t in np.linspace(0.1, 3.0, 7):
        omega, phi = drive_from_path(path, t)
        assert omega == pytest.approx(np.sin(t) ** 2, abs=1e-12)
        assert phi == pytest.approx(PI / 2, abs=1e-12)


def test_path_to_pulse_rejects_moving_azimuth_at_zero_rate():
    seg = PulseSegment(1.0, Envelope("Constant", {"amplitude": 1.0}), 0.3, path_lambda=0.3)
    sched = PulseSchedule("bad", (seg,), "SR_NGQG")
    with pytest.raises(SingularPath):
        path_from_schedule(sched)


@pytest.mark.parametrize("gate", GATES)
def test_constraint_residual_sr(gate):
    s = build_schedule("SR_NGQG", gate)
    amp, ph = constraint_residual(path_from_schedule(s), s)
    assert amp < 1e-8 and ph < 1e-8


def test_constraint_residual_sssp():
    s = build_schedule("SSSP", "X")
    amp, ph = constraint_residual(path_from_schedule(s), s)
    assert amp < 1e-8 and ph < 1e-8


@pytest.mark.parametrize("gate", GATES)
def test_offdiagonal_cancellation_on_grid(gate):
    s = build_schedule("SR_NGQG", gate)
    path = path_from_schedule(s)
    for t in np.linspace(0.01, s.total_duration - 0.01, 97):
        if np.min(np.abs(path.boundaries - t)) < 1e-6:
            continue
        k = ak_matrices(path, s, t)
        assert abs(k.offdiag_residual) < 1e-8
        assert k.A_diag == pytest.approx(0.0, abs=1e-12)
        assert k.K_diag == pytest.approx(0.0, abs=1e-12)


def test_offdiagonal_residual_appears_with_rabi_error():
    s = build_schedule("SR_NGQG", "X")
    k = ak_matrices(path_from_schedule(s), s, 1.3, epsilon=0.1)
    assert abs(k.offdiag_residual) > 1e-3


def test_ak_diagonals_follow_closed_form_on_sssp():
    s = build_schedule("SSSP", "X")
    path = path_from_schedule(s)
    for t in np.linspace(0.2, s.total_duration - 0.2, 9):
        a, _, _, dl = path.angles(t)
        k = ak_matrices(path, s, t)
        assert k.A_diag == pytest.approx(-dl * np.sin(a / 2) ** 2, abs=1e-9)
        assert k.K_diag == pytest.approx(0.5 * dl * np.sin(a) * np.tan(a), abs=1e-9)
        assert abs(k.offdiag_residual) < 1e-8


def test_ak_rejects_boundary_time():
    s = build_schedule("SR_NGQG", "X")
    with pytest.raises(BoundaryTime):
        ak_matrices(path_from_schedule(s), s, PI)


@pytest.mark.parametrize("gate", GATES)
def test_dynamical_phase_zero_for_sr(gate):
    s = build_schedule("SR_NGQG", gate)
    assert dynamical_phase_check(path_from_schedule(s), s) == pytest.approx(0.0, abs=1e-9)


def test_dynamical_phase_synthetic_linear_azimuth():
    seg = _custom(1.0, lambda t: 0 * np.asarray(t), lambda t: 0 * np.asarray(t),
                  lambda t: np.asarray(t, dtype=float), lambda t: 1 + 0 * np.asarray(t))
    path = PathSpec((seg,), PI / 4)
    # integral of lam_dot sin(a) tan(a) with the constant integrand sin(pi/4) tan(pi/4)
    assert dynamical_phase_check(path) == pytest.approx(np.sqrt(2) / 2, abs=1e-12)
    # the dynamical phase itself carries the factor 1/2
    assert total_phase(path) - geometric_phase(path) == pytest.approx(np.sqrt(2) / 4, abs=1e-12)


def test_geometric_phase_no_jumps_is_zero():
    path = PathSpec((PathSegment.sin_squared(PI, 1.0, 0.2), PathSegment.sin_squared(PI, 1.0, 0.2)))
    assert geometric_phase(path) == 0.0


def test_geometric_phase_single_jump():
    path = PathSpec((PathSegment.idle(1.0, 0.0), PathSegment.idle(1.0, PI)), alpha0=PI)
    assert geometric_phase(path) == pytest.approx(-PI, abs=1e-12)


def test_sr_x_path_gate_is_minus_i_sigma_x():
    path = path_from_schedule(build_schedule("SR_NGQG", "X"))
    assert np.allclose(path_gate(path), -1j * SX, atol=1e-9)
    assert np.allclose(jump_bookkeeping_gate(path), -1j * SX, atol=1e-9)


@pytest.mark.parametrize("gate", GATES)
def test_path_gate_matches_evolution(gate):
    s = build_schedule("SR_NGQG", gate)
    u = evolve(s).final_unitary
    assert gate_fidelity(path_gate(path_from_schedule(s)), u) == pytest.approx(1.0, abs=1e-10)


def test_path_gate_matches_evolution_sssp():
    s = build_schedule("SSSP", "X")
    u = evolve(s).final_unitary
    assert gate_fidelity(path_gate(path_from_schedule(s)), u) == pytest.approx(1.0, abs=1e-9)


# frozen D12/eps values (magnitude, sign of the real part)
D12_FROZEN = [
    ("SR_NGQG", "X", 0.0, 0),
    ("NGQG_P1", "X", 0.6506, -1),
    ("NGQG_P2", "X", PI / 2, 1),
    ("DYNAMICAL", "X", PI / 2, -1),
    ("SSSP", "X", 0.2392, 1),
    ("SR_NGQG", "X_half", 0.00056, None),
    ("NGQG_P1", "X_half", 0.4601, None),
    ("NGQG_P2", "X_half", 2.6815, 1),
    ("DYNAMICAL", "X_half", PI / 4, -1),
]


@pytest.mark.parametrize("scheme, gate, mag, sign", D12_FROZEN)
def test_robustness_integral_frozen(scheme, gate, mag, sign):
    r = robustness_integral(build_schedule(scheme, gate))
    assert abs(r.d12) == pytest.approx(mag, abs=2e-4)
    if sign is not None:
        assert r.sign == sign


@pytest.mark.parametrize("scheme", ["SR_NGQG", "NGQG_P1", "NGQG_P2", "SSSP", "DYNAMICAL"])
def test_robustness_integral_d21_is_conjugate(scheme):
    r = robustness_integral(build_schedule(scheme, "X"))
    assert r.d21 == pytest.approx(np.conj(r.d12), abs=1e-12)
    assert r.magnitude >= abs(r.d12) - 1e-12


def test_robustness_integral_independent_of_epsilon():
    s = build_schedule("NGQG_P2", "X")
    a = robustness_integral(s, epsilon=0.01).matrix
    b = robustness_integral(s, epsilon=0.1).matrix
    assert np.array_equal(a, b)


def test_robustness_integral_converged():
    s = build_schedule("NGQG_P1", "X_half")
    a = robustness_integral(s, steps_per_segment=4096).d12
    b = robustness_integral(s, steps_per_segment=8192).d12
    assert abs(a - b) < 1e-9 * max(1.0, abs(a))


def test_trajectory_starts_at_north_pole_and_stays_on_sphere():
    s = build_schedule("SR_NGQG", "X")
    traj = bloch_trajectory(path_from_schedule(s), s, 0.0, 101)
    assert traj[0, 1:] == pytest.approx([0, 0, 1], abs=1e-14)
    assert np.allclose(np.linalg.norm(traj[:, 1:], axis=1), 1.0, atol=1e-12)


def test_trajectory_follows_frame_until_first_jump():
    s = build_schedule("SR_NGQG", "X_half")
    path = path_from_schedule(s)
    traj = bloch_trajectory(path, s, 0.0, 301)
    first = path.boundaries[1]
    for t, *xyz in traj[(traj[:, 0] > 0) & (traj[:, 0] < first)]:
        a, _, lam, _ = path.angles(t)
        assert np.allclose(xyz, bloch_vector(auxiliary_states(a, lam)[0]), atol=1e-7)
    # an azimuth jump realigns the frame, not the state
    after = traj[traj[:, 0] > first][0]
    a, _, lam, _ = path.angles(after[0])
    assert not np.allclose(after[1:], bloch_vector(auxiliary_states(a, lam)[0]), atol=1e-3)
    # open path: start and end are distinct
    assert np.linalg.norm(traj[0, 1:] - traj[-1, 1:]) > 0.1


def test_sr_trajectory_shift_smaller_than_p2():
    sr = build_schedule("SR_NGQG", "X")
    p2 = build_schedule("NGQG_P2", "X")
    path = path_from_schedule(sr)
    d_sr = np.abs(bloch_trajectory(path, sr, 0.1, 201)[:, 1:] - bloch_trajectory(path, sr, 0.0, 201)[:, 1:])
    d_p2 = np.abs(bloch_trajectory(None, p2, 0.1, 201)[:, 1:] - bloch_trajectory(None, p2, 0.0, 201)[:, 1:])
    assert d_sr.max() < d_p2.max()
