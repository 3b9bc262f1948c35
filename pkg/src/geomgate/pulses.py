"""Segmented single-qubit drive schedules.

Time is dimensionless throughout (``Omega0 * t``) and drive amplitudes are in
units of ``Omega0``; ``PulseSchedule.omega0_hz`` only fixes the physical scale
for output. The drive Hamiltonian is

    H0(t) = Omega(t)/2 * (cos(phi) sigma_x + sin(phi) sigma_y)

so a segment with constant ``phi`` is a rotation about the equatorial axis at
azimuth ``phi`` by its pulse area.
"""

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Optional, Tuple

import numpy as np
from scipy.integrate import simpson

from .core import I2, SX, SY, SZ
from .errors import UnsupportedGate

PI = np.pi
DEFAULT_OMEGA0_HZ = 10e6

ENVELOPE_KINDS = ("SinSquared", "Gaussian", "Constant", "TableFormula")
SCHEMES = ("SR_NGQG", "NGQG_P1", "NGQG_P2", "SSSP", "DYNAMICAL")
GATES = ("X", "Y", "X_half", "Y_half")

# Single-shot shaped pulse coefficients for the X gate (polar-angle Fourier
# coefficients alpha_m and global-phase coefficients C_n).
SSSP_ALPHA = (-0.0990, -0.1176, -0.0394, -0.0119, 0.0)
SSSP_C = (2.3347, -1.9450, 0.3944, -0.1139, -0.3723)

# quadrature density for shapes without a closed-form area
_AREA_SAMPLES = 1 << 14


def _sssp_coefficients(params):
    alphas = np.array([params.get(f"alpha_{m}", 0.0) for m in range(1, 6)])
    cs = np.array([params.get(f"c_{n}", 0.0) for n in range(1, 6)])
    return alphas, cs


def sssp_shape(s, params):
    """Closed-form single-shot-shaped-pulse trajectory at reduced time ``s = t/T``.

    Returns ``(alpha, dalpha_ds, lam, dlam_ds, gamma_prime)`` where ``alpha`` is
    the Bloch polar angle, ``lam`` the azimuth and ``gamma_prime = dgamma/dalpha``
    with ``gamma = chi0 + 2 alpha + sum C_n sin(2 n alpha)``. The azimuth follows
    ``dlam/dt = dgamma/dt * cos(alpha)``, which integrates in closed form.
    """
    s = np.asarray(s, dtype=float)
    alphas, cs = _sssp_coefficients(params)
    m = np.arange(1, 6)
    arg = 2 * PI * np.multiply.outer(s, m)
    alpha = PI * s + np.sin(arg) @ alphas
    dalpha = PI + np.cos(arg) @ (2 * PI * m * alphas)
    two_n_alpha = 2 * np.multiply.outer(alpha, m)
    gamma_prime = 2 + np.cos(two_n_alpha) @ (2 * m * cs)
    lam = (
        params.get("lambda0", 0.0)
        + 2 * np.sin(alpha)
        + np.sin(np.multiply.outer(alpha, 2 * m + 1)) @ (m * cs / (2 * m + 1))
        + np.sin(np.multiply.outer(alpha, 2 * m - 1)) @ (m * cs / (2 * m - 1))
    )
    dlam = gamma_prime * np.cos(alpha) * dalpha
    return alpha, dalpha, lam, dlam, gamma_prime


def _sssp_drive(s, params):
    """Amplitude (times T) and drive phase of the shaped pulse at ``s = t/T``."""
    alpha, dalpha, lam, _, gp = sssp_shape(s, params)
    # Omega^2 = alpha_dot^2 + (lambda_dot tan alpha)^2 and
    # lambda_dot tan alpha = gamma_dot sin alpha stays finite at alpha = pi/2
    transverse = gp * np.sin(alpha)
    amp_t = np.abs(dalpha) * np.sqrt(1.0 + transverse**2)
    phase = lam + np.arctan2(1.0, -transverse)
    return amp_t, phase


@dataclass(frozen=True)
class Envelope:
    """Amplitude shape of one segment.

    ``params`` by kind:

    * ``SinSquared``: ``amplitude`` (peak); ``Omega = amplitude sin^2(pi t/T)``.
    * ``Gaussian``: ``area``, ``sigma_ratio`` (sigma as a fraction of ``T``);
      offset-subtracted so it vanishes at both edges, rescaled to ``area``.
    * ``Constant``: ``amplitude``.
    * ``TableFormula``: shaped-pulse coefficients ``alpha_1..5``, ``c_1..5``,
      ``chi0``, ``lambda0``; also supplies a time-dependent phase.
    """

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ENVELOPE_KINDS:
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        frozen = {k: float(v) for k, v in dict(self.params).items()}
        object.__setattr__(self, "params", MappingProxyType(frozen))

    def __eq__(self, other):
        if not isinstance(other, Envelope):
            return NotImplemented
        return self.kind == other.kind and dict(self.params) == dict(other.params)

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))

    def amplitude(self, t, duration):
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.kind == "SinSquared":
            return p["amplitude"] * np.sin(PI * t / duration) ** 2
        if self.kind == "Constant":
            return np.full_like(t, p["amplitude"])
        if self.kind == "Gaussian":
            return _gaussian(t, duration, p["sigma_ratio"], p["area"])
        amp_t, _ = _sssp_drive(t / duration, p)
        return amp_t / duration

    def phase_offset(self, t, duration):
        """Time-dependent part of the drive phase (zero for fixed-phase kinds)."""
        t = np.asarray(t, dtype=float)
        if self.kind != "TableFormula":
            return np.zeros_like(t)
        _, phase = _sssp_drive(t / duration, self.params)
        return phase

    def area(self, duration):
        p = self.params
        if self.kind == "SinSquared":
            return p["amplitude"] * duration / 2
        if self.kind == "Constant":
            return p["amplitude"] * duration
        if self.kind == "Gaussian":
            return p["area"]
        s = np.linspace(0.0, 1.0, _AREA_SAMPLES + 1)
        amp_t, _ = _sssp_drive(s, p)
        return float(simpson(amp_t, x=s))


def _gaussian(t, duration, sigma_ratio, area):
    sigma = sigma_ratio * duration
    raw = np.exp(-((t - duration / 2) ** 2) / (2 * sigma**2))
    edge = np.exp(-((duration / 2) ** 2) / (2 * sigma**2))
    # analytic integral of (raw - edge) over [0, T]
    from scipy.special import erf

    integral = sigma * np.sqrt(2 * PI) * erf(duration / (2 * np.sqrt(2) * sigma)) - edge * duration
    return area * (raw - edge) / integral


@dataclass(frozen=True)
class PulseSegment:
    duration: float
    envelope: Envelope
    phase: float = 0.0
    path_alpha: Optional[str] = None
    path_lambda: Optional[float] = None

    def __post_init__(self):
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"segment duration must be positive, got {self.duration}")
        if not np.isfinite(self.phase):
            raise ValueError("segment phase must be finite")

    def amplitude(self, t):
        return self.envelope.amplitude(t, self.duration)

    def drive_phase(self, t):
        return self.phase + self.envelope.phase_offset(t, self.duration)

    @property
    def area(self):
        return self.envelope.area(self.duration)


@dataclass(frozen=True)
class PulseSchedule:
    name: str
    segments: Tuple[PulseSegment, ...]
    scheme: str
    gate: Optional[str] = None
    omega0_hz: float = DEFAULT_OMEGA0_HZ

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not self.segments:
            raise ValueError("schedule needs at least one segment")

    @property
    def rotation_angles(self):
        return tuple(seg.area for seg in self.segments)

    @property
    def total_duration(self):
        return float(sum(seg.duration for seg in self.segments))

    @property
    def boundaries(self):
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    @property
    def omega0(self):
        """Physical Rabi scale in rad/s."""
        return 2 * PI * self.omega0_hz

    def with_phase_shift(self, delta, name=None, wrap=False):
        def shift(x):
            y = x + delta
            return float(np.angle(np.exp(1j * y))) if wrap else y

        segs = tuple(
            replace(
                s,
                phase=shift(s.phase),
                path_lambda=None if s.path_lambda is None else shift(s.path_lambda),
            )
            for s in self.segments
        )
        return replace(self, segments=segs, name=name or self.name)

    def scaled(self, factor):
        """Same shape with every amplitude multiplied by ``factor``."""
        segs = []
        for s in self.segments:
            p = dict(s.envelope.params)
            if s.envelope.kind == "Gaussian":
                p["area"] *= factor
            elif s.envelope.kind == "TableFormula":
                raise ValueError("shaped-formula envelopes cannot be rescaled")
            else:
                p["amplitude"] *= factor
            segs.append(replace(s, envelope=Envelope(s.envelope.kind, p)))
        return replace(self, segments=tuple(segs))


# ---------------------------------------------------------------------------
# ideal targets and exact segment propagators


def ideal_gate(gate):
    """Target unitary: X = exp(-i pi/2 sigma_x) = -i sigma_x, X_half = pi/2 about x."""
    angle, axis = {
        "X": (PI, SX),
        "Y": (PI, SY),
        "X_half": (PI / 2, SX),
        "Y_half": (PI / 2, SY),
    }[_check_gate(gate)]
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * axis


def _check_gate(gate):
    if gate not in GATES:
        raise UnsupportedGate(f"gate must be one of {GATES}, got {gate!r}")
    return gate


def constant_phase_propagator(schedule):
    """Exact ideal propagator of a schedule whose segments have fixed phase.

    Within such a segment the Hamiltonian always points along one axis, so the
    segment is the rotation by its pulse area irrespective of the envelope.
    """
    u = I2.copy()
    for seg in schedule.segments:
        if seg.envelope.kind == "TableFormula":
            raise ValueError("segment phase is time dependent")
        th = seg.area
        gen = np.cos(seg.phase) * SX + np.sin(seg.phase) * SY
        u = (np.cos(th / 2) * I2 - 1j * np.sin(th / 2) * gen) @ u
    return u


def rotation_axis_azimuth(u):
    """Azimuth of the rotation axis of an SU(2)-like ``u`` (angle taken in [0, pi])."""
    coeffs = np.array([np.trace(p @ u) / 2 for p in (SX, SY, SZ)])
    c0 = np.trace(u) / 2
    # remove global phase so that u = cos(th/2) - i sin(th/2) n.sigma
    ref = c0 if abs(c0) > 1e-12 else 1j * coeffs[np.argmax(np.abs(coeffs))]
    ph = ref / abs(ref)
    n = np.real(1j * coeffs / ph)
    if np.real(c0 / ph) < -1e-9:
        n = -n
    az = float(np.arctan2(n[1], n[0]))
    if abs(c0) < 1e-9 and abs(az) > PI / 2:
        # angle pi: axes n and -n give the same gate, keep the one nearer +x
        az = float(np.angle(-np.exp(1j * az)))
    return az


def _align(schedule, target_azimuth=0.0):
    """Shift every phase so the composite rotation axis sits at ``target_azimuth``."""
    az = rotation_axis_azimuth(constant_phase_propagator(schedule))
    delta = float(np.angle(np.exp(1j * (target_azimuth - az))))
    if abs(delta) < 1e-12:
        return schedule
    return schedule.with_phase_shift(delta, wrap=True)


# ---------------------------------------------------------------------------
# builders

_SR_TABLE = {
    # (duration * Omega0, phi, lambda)
    "X": [(PI, PI / 3, -PI / 6), (2 * PI, 5 * PI / 3, 7 * PI / 6),
          (2 * PI, PI / 3, -PI / 6), (PI, 5 * PI / 3, 7 * PI / 6)],
    "X_half": [(1.28 * PI, 1.232, -0.339), (2 * PI, -1.236, -2.806),
               (1.28 * PI, 1.232, -0.339)],
}

_NGQG_TABLE = {
    # (pulse area, phi)
    ("NGQG_P1", "X"): [(PI / 2, -PI / 2), (PI, 3 * PI / 4), (PI, -PI / 2),
                       (PI, 3 * PI / 4), (PI / 2, -PI / 2)],
    ("NGQG_P2", "X"): [(PI / 2, -PI / 2), (PI, 0.0), (PI / 2, -PI / 2)],
    ("NGQG_P1", "X_half"): [(PI / 2, -PI / 2), (PI, 3 * PI / 4), (PI / 2, -PI / 2)],
    ("NGQG_P2", "X_half"): [(PI / 2, -PI / 2), (PI, -PI / 4), (PI / 2, -PI / 2)],
}

_PHASE_REFERENCES = ("aligned", "table")


def _family(gate):
    base = gate.replace("Y", "X")
    return base, (PI / 2 if gate.startswith("Y") else 0.0)


def _omega0_hz(omega0):
    if omega0 is None:
        return DEFAULT_OMEGA0_HZ
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    return omega0 / (2 * PI)


def build_sr_ngqg(gate, omega0=None, phase_reference="aligned"):
    """Super-robust open-path schedule from the noncyclic pulse table.

    Every segment is ``Omega0 sin^2`` with ``phi - lambda = pi/2``; the Y
    variants add ``pi/2`` to every phase. With ``phase_reference="table"`` the
    tabulated phases are returned verbatim; ``"aligned"`` applies one common
    phase offset so the composite axis lies exactly on +x (the tabulated X/2
    phases are referenced to an axis about 0.15 rad off x; for X the offset is
    zero).
    """
    _check_gate(gate)
    base, shift = _family(gate)
    segs = tuple(
        PulseSegment(
            duration=dur,
            envelope=Envelope("SinSquared", {"amplitude": 1.0}),
            phase=phi,
            path_alpha="area",
            path_lambda=lam,
        )
        for dur, phi, lam in _SR_TABLE[base]
    )
    sched = PulseSchedule(f"SR-NGQG {gate}", segs, "SR_NGQG", gate, _omega0_hz(omega0))
    if phase_reference == "aligned":
        # tabulated lambdas are rounded; the constraint fixes phi - lambda = pi/2
        segs = tuple(replace(s, path_lambda=s.phase - PI / 2) for s in sched.segments)
        sched = replace(sched, segments=segs)
    return _finish(sched, shift, phase_reference)


def _finish(sched, shift, phase_reference):
    if phase_reference not in _PHASE_REFERENCES:
        raise ValueError(f"phase_reference must be one of {_PHASE_REFERENCES}")
    if phase_reference == "aligned":
        sched = _align(sched)
    if shift:
        sched = sched.with_phase_shift(shift)
    return sched


def build_ngqg_reference(scheme, gate, omega0=None, phase_reference="aligned"):
    """Cyclic segmented reference NGQG schedules (X and X/2 only).

    Segment ``i`` has area ``theta_i`` and envelope ``Omega0 sin^2(pi t/T_i)``,
    hence duration ``2 theta_i``. The tabulated phases use the opposite
    rotation sense (they realise rotations about -x); ``"aligned"`` rotates
    every phase by the common offset that puts the axis on +x.
    """
    key = (scheme, gate)
    if key not in _NGQG_TABLE:
        raise UnsupportedGate(f"no reference sequence for {scheme} {gate}")
    segs = tuple(
        PulseSegment(
            duration=2 * theta,
            envelope=Envelope("SinSquared", {"amplitude": 1.0}),
            phase=phi,
        )
        for theta, phi in _NGQG_TABLE[key]
    )
    sched = PulseSchedule(f"{scheme} {gate}", segs, scheme, gate, _omega0_hz(omega0))
    return _finish(sched, 0.0, phase_reference)


def build_sssp(omega0=None, chi0=0.0):
    """Single-shot shaped X pulse as one ``TableFormula`` segment.

    The duration is chosen so the peak amplitude equals ``Omega0``. The
    starting azimuth ``lambda0 = pi/2`` puts the rotation axis on +x: the
    trajectory returns to its initial azimuth and the state picks up a phase of
    pi, so ``|0> -> -e^{i lambda0}|1>``.
    """
    params = {f"alpha_{m}": a for m, a in enumerate(SSSP_ALPHA, start=1)}
    params.update({f"c_{n}": c for n, c in enumerate(SSSP_C, start=1)})
    params["chi0"] = chi0
    params["lambda0"] = PI / 2
    s = np.linspace(0.0, 1.0, _AREA_SAMPLES + 1)
    amp_t, _ = _sssp_drive(s, params)
    duration = float(np.max(amp_t))
    seg = PulseSegment(duration, Envelope("TableFormula", params), 0.0, path_alpha="sssp")
    return PulseSchedule("SSSP X", (seg,), "SSSP", "X", _omega0_hz(omega0))


def build_dynamical_gaussian(gate, sigma_ratio=1 / 6, omega0=None):
    """Single truncated-Gaussian segment with area pi (X, Y) or pi/2 (halves).

    The duration makes the peak amplitude ``Omega0``. Phase 0 drives +x and
    ``pi/2`` drives +y.
    """
    _check_gate(gate)
    if sigma_ratio <= 0:
        raise ValueError("sigma_ratio must be positive")
    base, shift = _family(gate)
    area = PI if base == "X" else PI / 2
    probe = Envelope("Gaussian", {"area": 1.0, "sigma_ratio": sigma_ratio})
    peak = float(probe.amplitude(0.5, 1.0))
    duration = area * peak  # peak amplitude of area-a shape on [0, T] is a*peak/T
    seg = PulseSegment(
        duration, Envelope("Gaussian", {"area": area, "sigma_ratio": sigma_ratio}), shift
    )
    return PulseSchedule(f"Dynamical {gate}", (seg,), "DYNAMICAL", gate, _omega0_hz(omega0))


def build_schedule(scheme, gate, omega0=None, **kwargs):
    """Dispatch on scheme name; used by the CLI and the reproduction tables."""
    scheme = scheme.upper().replace("-", "_")
    if scheme == "SR_NGQG":
        return build_sr_ngqg(gate, omega0, **kwargs)
    if scheme in ("NGQG_P1", "NGQG_P2"):
        base, shift = _family(gate)
        sched = build_ngqg_reference(scheme, base, omega0, **kwargs)
        if shift:
            sched = sched.with_phase_shift(shift, name=f"{scheme} {gate}")
            sched = replace(sched, gate=gate)
        return sched
    if scheme == "SSSP":
        if gate not in ("X", "Y"):
            raise UnsupportedGate("the shaped pulse is tabulated for X only")
        sched = build_sssp(omega0)
        if gate == "Y":
            p = dict(sched.segments[0].envelope.params)
            p["lambda0"] += PI / 2
            seg = replace(sched.segments[0], envelope=Envelope("TableFormula", p))
            sched = replace(sched, segments=(seg,), name="SSSP Y", gate="Y")
        return sched
    if scheme in ("DYNAMICAL", "DYNAMICAL_GAUSSIAN"):
        return build_dynamical_gaussian(gate, omega0=omega0, **kwargs)
    raise UnsupportedGate(f"unknown scheme {scheme!r}")
